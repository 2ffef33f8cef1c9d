#pragma once

/**
 * Oriented convex polytopes and polyhedral chains with coefficients in a
 * normed abelian group.
 */

#include <optional>
#include <vector>

#include "flatchain/foundation.hpp"
#include "flatchain/geometry.hpp"

namespace flatchain {

/// Relative coplanarity / degeneracy tolerance.
inline constexpr double kRelativeTolerance = 1e-9;
/// Real coefficients below this are dropped by canonicalize.
inline constexpr double kCoefficientTolerance = 1e-12;

/**
 * Convex k-polytope in R^d with an ordered orientation basis.
 *
 * Only extreme points are kept.  frame() is an affine frame of the hull with
 * the canonical basis of the direction space; sign() is +1 when the
 * orientation basis agrees with that canonical basis.
 */
class OrientedPolytope {
public:
    /// nullopt for degenerate (zero-volume) hulls.  Throws DegenerateError for
    /// a dependent basis or vertices off the basis' flat.
    static std::optional<OrientedPolytope> make(const Matrix& vertices, const Matrix& orientation_basis,
                                                double tol = -1.0);
    /// Simplex oriented by (v1-v0, ..., vk-v0); k = cols-1.
    static std::optional<OrientedPolytope> simplex(const Matrix& vertices, double tol = -1.0);
    /// Single point (k = 0).
    static OrientedPolytope point(const Vector& x);
    /// Polytope with local cell `cell` in `frame`, oriented by the frame basis
    /// (sign +1) or its reverse (sign -1).
    static OrientedPolytope fromCell(const PlaneFrame& frame, const ConvexCell& cell, int sign);

    int ambientDim() const { return static_cast<int>(vertices_.rows()); }
    int k() const { return frame_.key.dim(); }
    const Matrix& vertices() const { return vertices_; }
    const Matrix& orientationBasis() const { return basis_; }
    const PlaneFrame& frame() const { return frame_; }
    const ConvexCell& cell() const { return *cell_; }
    int sign() const { return sign_; }
    double volume() const { return cell_->volume(); }
    Vector centroid() const { return vertices_.rowwise().mean(); }
    double diameter() const;

    /// Same point set, opposite orientation (k >= 1).
    OrientedPolytope reversed() const;
    bool contains(const Vector& x, double tol) const;

private:
    OrientedPolytope() = default;

    Matrix vertices_;
    Matrix basis_;
    PlaneFrame frame_;
    std::optional<ConvexCell> cell_;
    int sign_ = 1;
};

struct SimpleChain {
    GroupElement coeff;
    OrientedPolytope poly;
};

class PolyChain {
public:
    PolyChain(NormedSpace space, CoefficientGroup group, int k);

    const NormedSpace& space() const { return space_; }
    const CoefficientGroup& group() const { return group_; }
    int k() const { return k_; }
    int ambientDim() const { return space_.dim(); }
    const std::vector<SimpleChain>& summands() const { return summands_; }
    std::size_t size() const { return summands_.size(); }
    bool isZero() const { return summands_.empty(); }

    /// Appends g[P]; zero coefficients are kept until canonicalize.
    void add(const GroupElement& g, const OrientedPolytope& p);
    void add(const SimpleChain& s) { add(s.coeff, s.poly); }
    /// Shorthand for add(group.element(c), p).
    void add(double c, const OrientedPolytope& p) { add(group_.element(c), p); }
    /// Adds a simplex if it is nondegenerate.
    void addSimplex(double c, const Matrix& vertices);

    /// Same space, group, dimension and no summands.
    PolyChain emptyLike() const { return PolyChain(space_, group_, k_); }
    PolyChain emptyLike(int k) const { return PolyChain(space_, group_, k); }

    PolyChain operator+(const PolyChain& other) const;
    PolyChain operator-(const PolyChain& other) const;
    PolyChain operator-() const;

    /// Diagonal of the bounding box of all vertices (0 for the zero chain).
    double diameter() const;
    /// Geometric tolerance kRelativeTolerance * diameter.
    double tolerance() const;
    /// Absolute tolerance used for coefficients.
    double coefficientTolerance() const { return kCoefficientTolerance; }

    void checkCompatible(const PolyChain& other) const;

private:
    NormedSpace space_;
    CoefficientGroup group_;
    int k_;
    std::vector<SimpleChain> summands_;
};

/// Common refinement with summed coefficients; zero and degenerate cells dropped.
PolyChain canonicalize(const PolyChain& chain);
/// Canonicalized boundary.  Throws ArgumentError for k = 0.
PolyChain boundary(const PolyChain& chain);
/// Boundary without the final canonicalization.
PolyChain rawBoundary(const PolyChain& chain);

/// Closed summand polytopes (vertex matrices) of the canonical form.
std::vector<Matrix> support(const PolyChain& chain);
bool supportContains(const PolyChain& chain, const Vector& x, double tol);

/// Image under x -> A x + b.  A must have full column rank.  When A is not
/// square the target space has to be given.
PolyChain affinePushforward(const PolyChain& chain, const Matrix& a, const Vector& b);
PolyChain affinePushforward(const PolyChain& chain, const Matrix& a, const Vector& b, const NormedSpace& target);

/// canonicalize(a - b) is zero.
bool chainsEqual(const PolyChain& a, const PolyChain& b);

} // namespace flatchain
