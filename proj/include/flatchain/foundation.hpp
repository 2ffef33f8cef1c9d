#pragma once

/**
 * Finite-dimensional normed spaces, linear functionals and normed abelian
 * coefficient groups.
 *
 * Every chain carries a NormedSpace and a CoefficientGroup.  Spaces are
 * immutable values; copies share one per-plane volume density cache (see
 * mass.hpp).
 */

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "flatchain/errors.hpp"

namespace flatchain {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class MassDensityCache;

enum class NormKind { P, WeightedP, Polytope };

class NormedSpace {
public:
    static constexpr int kMaxDim = 6;

    /// Unweighted p-norm, p in [1, inf]; use infinity() for the max norm.
    static NormedSpace pNorm(int dim, double p);
    /// ||x|| = (sum_i (w_i |x_i|)^p)^(1/p); weights strictly positive.
    static NormedSpace weightedPNorm(const Vector& weights, double p);
    /// Unit ball {x : h_j(x) <= 1 for all j}; each row of `facets` is one h_j.
    /// The facet set must be centrally symmetric and span the dual space.
    static NormedSpace polytopeNorm(const Matrix& facets);

    int dim() const { return dim_; }
    NormKind kind() const { return kind_; }
    double p() const { return p_; }
    const Vector& weights() const { return weights_; }
    const Matrix& facets() const { return facets_; }

    double norm(const Vector& v) const;
    double dualNorm(const Vector& covector) const;

    /// Plain Euclidean norm (unweighted p = 2).
    bool isEuclidean() const;
    /// Unit ball is a polytope (p = 1, p = inf, or an explicit facet list).
    bool isPolyhedral() const;
    /// Facet covectors of the unit ball; only valid when isPolyhedral().
    const Matrix& ballFacets() const { return ballFacets_; }

    /// Short human-readable description, e.g. "l2(d=3)".
    std::string describe() const;

    MassDensityCache& densityCache() const;

    bool sameNorm(const NormedSpace& other) const;

private:
    NormedSpace() = default;
    void finishSetup();

    int dim_ = 0;
    NormKind kind_ = NormKind::P;
    double p_ = 2.0;
    Vector weights_;
    Matrix facets_;
    Matrix ballFacets_;

    struct CacheSlot;
    std::shared_ptr<CacheSlot> cache_;
};

/// A linear functional together with its dual norm in a given space.
struct Functional {
    Vector covector;
    double dual_norm = 0.0;

    static Functional make(const NormedSpace& space, const Vector& covector);
    double operator()(const Vector& x) const { return covector.dot(x); }
};

double norm(const NormedSpace& space, const Vector& v);
double dualNorm(const NormedSpace& space, const Functional& f);
double dualNorm(const NormedSpace& space, const Vector& covector);

/**
 * Dual norm of a covector defined on a subspace.
 *
 * `basis` holds the spanning vectors as columns (d x k, independent) and
 * `values` the functional's value on each of them.  Returns
 * sup { phi(w) / ||w|| : w in span(basis), w != 0 }, which is the norm of the
 * smallest Hahn-Banach extension.  Polyhedral norms are handled by a linear
 * program, the Euclidean norm in closed form and the remaining p-norms by a
 * deterministic multi-start search over the subspace unit sphere.
 */
double subspaceDualNorm(const NormedSpace& space, const Matrix& basis, const Vector& values);

// ---------------------------------------------------------------------------
// Coefficient groups

enum class GroupKind { Integers, IntegersModM, Reals };

class GroupElement {
public:
    GroupElement() = default;

    static GroupElement integer(std::int64_t n);
    static GroupElement modular(std::int64_t residue, std::int64_t modulus);
    static GroupElement real(double x);

    GroupKind kind() const { return kind_; }
    std::int64_t modulus() const { return modulus_; }
    std::int64_t integerValue() const { return n_; }
    double realValue() const { return x_; }
    /// Value as a double (residue for Z/m).
    double asDouble() const;

    double norm() const;
    bool isZero() const;
    /// Zero, or a real whose magnitude is below `tol`.
    bool isNegligible(double tol) const;

    GroupElement operator-() const;
    GroupElement operator+(const GroupElement& other) const;
    GroupElement operator-(const GroupElement& other) const;
    bool operator==(const GroupElement& other) const;

    std::string toString() const;

private:
    void checkCompatible(const GroupElement& other) const;

    GroupKind kind_ = GroupKind::Integers;
    std::int64_t modulus_ = 0;
    std::int64_t n_ = 0;
    double x_ = 0.0;
};

inline GroupElement add(const GroupElement& g, const GroupElement& h) { return g + h; }
inline GroupElement neg(const GroupElement& g) { return -g; }
inline double gnorm(const GroupElement& g) { return g.norm(); }

class CoefficientGroup {
public:
    static CoefficientGroup integers() { return CoefficientGroup(GroupKind::Integers, 0); }
    static CoefficientGroup integersMod(std::int64_t m);
    static CoefficientGroup reals() { return CoefficientGroup(GroupKind::Reals, 0); }

    GroupKind kind() const { return kind_; }
    std::int64_t modulus() const { return modulus_; }

    GroupElement zero() const;
    /// Element from a numeric value; integer kinds require an integral value.
    GroupElement element(double value) const;
    bool contains(const GroupElement& g) const;
    bool operator==(const CoefficientGroup& other) const
    {
        return kind_ == other.kind_ && modulus_ == other.modulus_;
    }
    std::string describe() const;

private:
    CoefficientGroup(GroupKind kind, std::int64_t m) : kind_(kind), modulus_(m) {}

    GroupKind kind_;
    std::int64_t modulus_;
};

} // namespace flatchain
