#pragma once

/**
 * Restriction of chains to halfspaces and to sublevel sets of Lipschitz
 * functions, slices, and the edgewise standard subdivision of simplices.
 */

#include <vector>

#include "flatchain/chains.hpp"
#include "flatchain/lipschitz.hpp"
#include "flatchain/mass.hpp"

namespace flatchain {

enum class Side { Below, Above };

/// Portion of the chain in {f < r} (Below) or {f > r} (Above).
PolyChain restrictHalfspace(const PolyChain& chain, const Vector& covector, double r, Side side = Side::Below);

/// Level r contains a whole facet (or summand) of the canonical chain.
bool isExceptionalLevel(const PolyChain& chain, const Vector& covector, double r);

/// d(P_r) - (dP)_r, canonicalized.  Throws ExceptionalLevelError at exceptional levels.
PolyChain slice(const PolyChain& chain, const Vector& covector, double r);

/// Edgewise subdivision of order 2 applied `stage` times.  Each cell keeps the
/// vertex order inherited from the parent.  Throws DegenerateError for a
/// degenerate simplex.
std::vector<Matrix> standardSubdivision(const Matrix& simplex, int stage);

/// Minimum fullness of the cells of the first two subdivision stages.
double subdivisionFullnessFloor(const NormedSpace& space, const Matrix& simplex);

/// Barycentric interpolation of f on the stage-`stage` subdivision of a simplex.
struct PiecewiseLinearFunction {
    Matrix base;
    int stage = 0;
    std::vector<Matrix> cells;
    std::vector<Vector> values;  ///< f at the vertices of each cell
    /// Largest cellwise Lipschitz constant (space norm restricted to the plane).
    double lipschitz = 0.0;
    /// Largest cell diameter in the space norm.
    double max_cell_diameter = 0.0;

    /// Value at x; x must lie in the base simplex.
    double operator()(const Vector& x) const;
};

PiecewiseLinearFunction plApprox(const LipschitzFunction& f, const Matrix& simplex, int stage,
                                 const NormedSpace& space);

/// Full simplex in the plane of `p`, scaled and translated to contain it.
Matrix enclosingFullSimplex(const NormedSpace& space, const OrientedPolytope& p);

struct RestrictionOptions {
    int stages = 6;
    /// Convergence when the last stage-difference mass is below this.
    double tolerance = 1e-3;
    bool keep_stage_chains = true;
};

struct RestrictionReport {
    std::vector<PolyChain> stage_chains;
    std::vector<double> stage_mass;
    /// diff_mass[i] = M(P_i - P_{i-1}); diff_mass[0] = 0.
    std::vector<double> diff_mass;
    /// Sz of the stage-i cells below, above and straddling the level.
    std::vector<double> size_n, size_p, size_u;
    /// Fullness floor of each enclosing simplex.
    std::vector<double> eta;
    bool converged = true;
};

struct Restriction {
    PolyChain inside;
    PolyChain outside;
    RestrictionReport report;
};

/// P restricted to {f < r} through piecewise-linear approximations of f on
/// subdivisions of enclosing full simplices.  Linear f is clipped exactly.
Restriction restrictLipschitz(const PolyChain& chain, const LipschitzFunction& f, double r,
                              const RestrictionOptions& options = {});

struct ExceptionalScan {
    std::vector<double> levels;
    /// size_u[j][i]: Sz(U_i) at levels[j], stage i.
    std::vector<std::vector<double>> size_u;
    /// Per stage: sum over cells of |f(cell)| * Sz(cell), and the bound
    /// Lip(f) * largest cell diameter * Sz(enclosing simplices).
    std::vector<double> level_integral;
    std::vector<double> level_integral_bound;
    bool monotone = true;
    bool integral_bound_ok = true;
};

ExceptionalScan exceptionalScan(const PolyChain& chain, const LipschitzFunction& f, int stages,
                                const std::vector<double>& levels);

struct RegionSplit {
    PolyChain inside;
    PolyChain outside;
};

/// Splits the chain by the polyhedral region {x : A x <= b}.
RegionSplit restrictRegion(const PolyChain& chain, const Matrix& a, const Vector& b);

/// Halfspaces A x <= b of the norm ball B(center, radius) for polyhedral
/// norms, or of a circumscribed polytope (tangent halfspaces in `directions`
/// fixed directions) otherwise.
void ballHalfspaces(const NormedSpace& space, const Vector& center, double radius, Matrix& a, Vector& b,
                    int directions = 64);

/// Restriction to a closed norm ball: exact for polyhedral norms, otherwise
/// through restrictLipschitz at a fixed stage.
struct BallRestriction {
    PolyChain inside;
    PolyChain outside;
    /// d(inside) - (dP) restricted to the ball; a (k-1)-chain on the sphere.
    PolyChain slice;
    bool exact = true;
};

BallRestriction restrictBall(const PolyChain& chain, const Vector& center, double radius, int stages = 6);

struct EilenbergResult {
    double integral = 0.0;
    double ratio = 0.0;
};

/// int M(P cap f^-1(x)) dx and its ratio to Lip(f) M(P).  Linear f uses
/// Gauss quadrature between vertex levels; other f use `steps` midpoint levels
/// on the stage-`stages` piecewise-linear approximation.
EilenbergResult eilenbergRatio(const PolyChain& chain, const LipschitzFunction& f, int steps = 2000, int stages = 5);

} // namespace flatchain
