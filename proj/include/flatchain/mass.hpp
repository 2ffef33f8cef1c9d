#pragma once

/**
 * Mass of polyhedral chains.
 *
 * On a fixed k-plane W the mass of g[P] is |g| * sigma(W) * vol_E(P), where
 * the density sigma is obtained from the recursion
 *
 *     sigma_1(span u) = ||u||                      (u Euclidean-unit)
 *     sigma_k(W)      = sup_a sigma_{k-1}(a^perp in W) / ||a||_{W*}
 *
 * over Euclidean-unit a in W.  Densities are cached per plane in the space's
 * MassDensityCache.  massDirect() evaluates the defining supremum of
 * integrated slice masses without going through sigma and is used as an
 * independent check.
 */

#include <mutex>
#include <optional>
#include <vector>

#include "flatchain/chains.hpp"

namespace flatchain {

struct DensityReport {
    double sigma = 0.0;
    int starts = 0;
    int evaluations = 0;
    /// Best functional found (ambient covector with subspace dual norm 1).
    Vector best_functional;
    double tolerance = 0.0;
};

class MassDensityCache {
public:
    std::optional<DensityReport> find(const PlaneKey& key) const;
    /// Stores `report` unless an entry for the plane exists; returns the stored entry.
    DensityReport insert(const PlaneKey& key, const DensityReport& report);
    std::size_t size() const;
    void clear();

private:
    mutable std::mutex mutex_;
    std::vector<std::pair<PlaneKey, DensityReport>> entries_;
};

DensityReport densityReport(const NormedSpace& space, const PlaneKey& plane);
double density(const NormedSpace& space, const PlaneKey& plane);

/// Norm of the space restricted to span(basis) and the corresponding dual norm.
/// `basis` must have orthonormal columns.
class RestrictedNorm {
public:
    RestrictedNorm(const NormedSpace& space, const Matrix& basis);
    double norm(const Vector& t) const;
    double dual(const Vector& c) const;
    /// A point of the restricted unit ball where c attains its maximum.
    Vector normingVector(const Vector& c) const;
    int dim() const { return static_cast<int>(basis_.cols()); }
    bool polyhedral() const { return polyhedral_; }
    /// Vertices (local coordinates) of the restricted unit ball; polyhedral norms only.
    const Matrix& ballVertices() const { return ballVertices_; }

private:
    const NormedSpace* space_;
    Matrix basis_;
    Matrix ballVertices_;  // polyhedral norms only
    Matrix gramInv_;       // Euclidean-type norms only
    bool polyhedral_ = false;
    bool quadratic_ = false;
};

struct SummandMass {
    double coeff_norm = 0.0;
    double density = 0.0;
    double volume = 0.0;
    double mass = 0.0;
};

struct MassBreakdown {
    double total = 0.0;
    std::vector<SummandMass> summands;
};

/// Mass of the summands as given; pass a canonical chain.
double mass(const PolyChain& chain);
MassBreakdown massBreakdown(const PolyChain& chain);
double mass(const NormedSpace& space, const SimpleChain& s);
/// mass(canonicalize(chain)).
double canonicalMass(const PolyChain& chain);

struct GaussRule {
    std::vector<double> nodes;  ///< on [0, 1]
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [0, 1].
GaussRule gaussLegendre(int n);

struct DirectGrid {
    /// Number of grid functionals on the dual sphere; 0 picks a default by dimension.
    int functional_resolution = 0;
    /// Gauss-Legendre nodes per interval between vertex levels.
    int integral_steps = 8;
};

/// Direct evaluation of sup_f int M(P cap f^-1(x)) dx.  Throws for k = 0.
double massDirect(const NormedSpace& space, const SimpleChain& s, const DirectGrid& grid = {});

/// Sum of M(g_i[P_i]) / |g_i| over the canonical summands.
double size(const PolyChain& chain);
double size(const NormedSpace& space, const OrientedPolytope& p);
/// Largest pairwise distance of the vertices in the space norm.
double normDiameter(const NormedSpace& space, const Matrix& vertices);
/// Sz(P) / diam(P)^k.  Throws DegenerateError for the zero chain.
double fullness(const NormedSpace& space, const OrientedPolytope& p);
double fullness(const PolyChain& chain);

struct FullSimplex {
    OrientedPolytope simplex;
    double fullness = 0.0;
};

/// Simplex in the plane built by the full-simplex induction: a unit segment,
/// then repeatedly an apex at value 1 of a unit-dual functional vanishing on
/// the current face.
FullSimplex fullSimplex(const NormedSpace& space, const PlaneKey& plane);

struct ChainNorms {
    double mass = 0.0;
    double boundary_mass = 0.0;
    double n_value = 0.0;
};

ChainNorms chainNorms(const PolyChain& chain);

} // namespace flatchain
