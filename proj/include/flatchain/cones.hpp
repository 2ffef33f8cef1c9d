#pragma once

/**
 * Cones over polyhedral chains and the quantizers built from them.
 *
 * Quantizers return a certificate: for input P and output Q they produce a
 * filling F and a residual S with P - Q = dF + S, so that the flat distance
 * is at most M(F) + M(S).  The ErrorBudget itemizes these masses.
 */

#include <string>
#include <utility>
#include <vector>

#include "flatchain/chains.hpp"

namespace flatchain {

/// C_z P; summands whose affine hull contains z are dropped.  Canonical output.
PolyChain cone(const Vector& z, const PolyChain& chain);

/// M(dC_z R - R + C_z dR).  Requires k >= 1.
double coneBoundaryCheck(const Vector& z, const PolyChain& chain);

/// M(C_z P) / (max_{x in spt P} ||x - z|| * M(P)).  Throws for the zero chain.
double coneMassRatio(const Vector& z, const PolyChain& chain);

struct ErrorBudget {
    std::vector<std::pair<std::string, double>> items;
    double total = 0.0;

    void add(const std::string& description, double bound);
    void append(const ErrorBudget& other, const std::string& prefix);
};

struct CoefficientNet {
    enum class Kind { Exact, Grid };
    Kind kind = Kind::Exact;
    double step = 0.0;

    static CoefficientNet exact() { return CoefficientNet{}; }
    static CoefficientNet grid(double step) { return CoefficientNet{Kind::Grid, step}; }
    /// Truncation toward zero onto the grid for real coefficients; identity otherwise.
    GroupElement project(const GroupElement& g) const;
};

struct QuantizeResult {
    PolyChain output;
    /// P - output = d(filling) + residual.
    PolyChain filling;
    PolyChain residual;
    ErrorBudget budget;
    /// 0-chains: M(P) * delta + epsilon / 4.
    double nominal_bound = 0.0;
    /// 0-chains: grid step <= epsilon / (4 N).
    bool grid_fine_enough = true;
};

/// Snaps each point to its nearest center (ties to the lowest index), sums
/// coefficients per center and projects them through the net.  epsilon <= 0
/// means epsilon = 4 N step.  Throws ArgumentError for a point farther than
/// delta from every center.
QuantizeResult quantizeZeroChain(const PolyChain& chain, const Matrix& centers, double delta,
                                 const CoefficientNet& net, double epsilon = 0.0);

struct ConeQuantizeOptions {
    int radius_candidates = 32;
    /// Tangent directions of the circumscribed ball polytope for smooth norms.
    int ball_directions = 64;
};

/// Cell-by-cell cone quantizer: each ball cell P^l is replaced by
/// C_{z_l}(Q^l) with Q^l the quantized boundary of P^l.  Budget items are the
/// per-cell filling masses and the mass of the summed residual, in which the
/// transport segments shared by neighbouring cells cancel.
QuantizeResult coneQuantize(const PolyChain& chain, const Matrix& centers, double delta, const CoefficientNet& net,
                            const ConeQuantizeOptions& options = {});

} // namespace flatchain
