#pragma once

/**
 * Deterministic multi-start maximization over Euclidean unit spheres.
 *
 * Used for dual norms on subspaces of smooth p-norms, for per-plane volume
 * densities and for the direct mass oracle.  Starts are a fixed lattice
 * (k = 2, 3) or a seeded pseudo-random set (k >= 4); the best few starts are
 * refined by compass search in the tangent space with step halving.
 */

#include <cstdint>
#include <functional>
#include <vector>

#include "flatchain/foundation.hpp"

namespace flatchain {

struct SphereSearchOptions {
    int starts = 64;
    int refine_top = 4;
    double step_tolerance = 1e-8;
    /// f(u) == f(-u); only half the sphere is sampled.
    bool antipodal = true;
    std::uint64_t seed = 20240901;
    int max_evaluations = 200000;
    /// Scored and refined alongside the generated starts.
    std::vector<Vector> extra_starts;
};

struct SphereSearchResult {
    Vector argmax;
    double value = 0.0;
    int evaluations = 0;
    int starts = 0;
};

SphereSearchResult maximizeOnSphere(int dim, const std::function<double(const Vector&)>& f,
                                    const SphereSearchOptions& options = {});

/// Deterministic start directions used by maximizeOnSphere.
std::vector<Vector> sphereStarts(int dim, int count, bool antipodal, std::uint64_t seed);

} // namespace flatchain
