#pragma once

// Lipschitz functions used for restrictions and slicing: linear functionals
// and distances to a point or to a convex polytope, measured in the space norm.

#include <string>

#include "flatchain/foundation.hpp"

namespace flatchain {

enum class LipschitzKind { Linear, DistanceToPoint, DistanceToPolytope };

class LipschitzFunction {
public:
    /// x -> c.x + offset.
    static LipschitzFunction linear(const NormedSpace& space, const Vector& covector, double offset = 0.0);
    static LipschitzFunction distanceToPoint(const NormedSpace& space, const Vector& z);
    /// Distance to the convex hull of the columns of `vertices`.
    static LipschitzFunction distanceToPolytope(const NormedSpace& space, const Matrix& vertices);

    LipschitzKind kind() const { return kind_; }
    const NormedSpace& space() const { return space_; }
    const Vector& covector() const { return covector_; }
    double offset() const { return offset_; }
    /// Point (DistanceToPoint) or polytope vertices (DistanceToPolytope).
    const Matrix& target() const { return target_; }

    double operator()(const Vector& x) const;
    /// Lipschitz constant with respect to the space norm.
    double lipschitz() const;
    /// Exact minimum and maximum over the convex hull of the columns of `pts`.
    double minOver(const Matrix& pts) const;
    double maxOver(const Matrix& pts) const;
    std::string describe() const;

private:
    explicit LipschitzFunction(NormedSpace space) : space_(std::move(space)) {}

    NormedSpace space_;
    LipschitzKind kind_ = LipschitzKind::Linear;
    Vector covector_;
    double offset_ = 0.0;
    Matrix target_;
};

/// min ||x|| over the convex hull of the columns of `pts`.
double minNormOverHull(const NormedSpace& space, const Matrix& pts);

} // namespace flatchain
