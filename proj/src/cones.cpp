#include "flatchain/cones.hpp"

#include <cmath>
#include <limits>

#include "flatchain/errors.hpp"
#include "flatchain/mass.hpp"
#include "flatchain/slicing.hpp"

namespace flatchain {

namespace {

double massOf(const PolyChain& c) { return mass(canonicalize(c)); }

void checkCenters(const PolyChain& chain, const Matrix& centers, double delta)
{
    if (centers.rows() != chain.ambientDim())
        throw DimensionError("centers must have the ambient dimension as rows");
    if (centers.cols() == 0)
        throw ArgumentError("no centers given");
    if (!(delta > 0.0))
        throw ArgumentError("delta must be positive");
}

} // namespace

PolyChain cone(const Vector& z, const PolyChain& chain)
{
    if (z.size() != chain.ambientDim())
        throw DimensionError("cone apex has the wrong dimension");
    PolyChain out = chain.emptyLike(chain.k() + 1);
    const double tol = std::max(chain.tolerance(), kRelativeTolerance * (1.0 + z.norm()));
    for (const SimpleChain& s : chain.summands()) {
        const OrientedPolytope& p = s.poly;
        if (p.frame().offFlatDistance(z) <= tol)
            continue;
        Matrix verts(p.ambientDim(), p.vertices().cols() + 1);
        verts.col(0) = z;
        verts.rightCols(p.vertices().cols()) = p.vertices();
        Matrix basis(p.ambientDim(), p.k() + 1);
        basis.col(0) = p.vertices().col(0) - z;
        if (p.k() > 0)
            basis.rightCols(p.k()) = p.orientationBasis();
        std::optional<OrientedPolytope> c = OrientedPolytope::make(verts, basis, tol);
        if (c)
            out.add(s.coeff, *c);
    }
    return canonicalize(out);
}

double coneBoundaryCheck(const Vector& z, const PolyChain& chain)
{
    if (chain.k() < 1)
        throw ArgumentError("cone boundary identity needs k >= 1");
    const PolyChain lhs = boundary(cone(z, chain));
    const PolyChain rhs = chain - cone(z, boundary(chain));
    return massOf(lhs - rhs);
}

double coneMassRatio(const Vector& z, const PolyChain& chain)
{
    const PolyChain c = canonicalize(chain);
    const double m = mass(c);
    if (m <= 0.0)
        throw ArgumentError("cone mass ratio of a zero chain");
    double reach = 0.0;
    for (const SimpleChain& s : c.summands())
        for (Eigen::Index j = 0; j < s.poly.vertices().cols(); ++j)
            reach = std::max(reach, c.space().norm(s.poly.vertices().col(j) - z));
    if (reach <= 0.0)
        throw ArgumentError("cone mass ratio with the apex as the whole support");
    return mass(cone(z, c)) / (reach * m);
}

void ErrorBudget::add(const std::string& description, double bound)
{
    items.emplace_back(description, bound);
    total += bound;
}

void ErrorBudget::append(const ErrorBudget& other, const std::string& prefix)
{
    for (const auto& [d, v] : other.items)
        add(prefix + d, v);
}

GroupElement CoefficientNet::project(const GroupElement& g) const
{
    if (kind == Kind::Exact || g.kind() != GroupKind::Reals)
        return g;
    if (!(step > 0.0))
        throw ArgumentError("coefficient grid step must be positive");
    const double x = g.realValue();
    const double q = std::trunc(std::abs(x) / step) * step;
    return GroupElement::real(x < 0.0 ? -q : q);
}

QuantizeResult quantizeZeroChain(const PolyChain& chain, const Matrix& centers, double delta,
                                 const CoefficientNet& net, double epsilon)
{
    if (chain.k() != 0)
        throw ArgumentError("quantizeZeroChain needs a 0-chain");
    checkCenters(chain, centers, delta);
    const NormedSpace& space = chain.space();
    const PolyChain p = canonicalize(chain);
    const Eigen::Index n = centers.cols();

    std::vector<GroupElement> sums(static_cast<std::size_t>(n), chain.group().zero());
    PolyChain certificate = chain.emptyLike(1);
    for (const SimpleChain& s : p.summands()) {
        const Vector y = s.poly.vertices().col(0);
        Eigen::Index best = -1;
        double bestDist = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < n; ++j) {
            const double dist = space.norm(y - centers.col(j));
            if (dist < bestDist) {
                bestDist = dist;
                best = j;
            }
        }
        if (bestDist > delta * (1.0 + 1e-12))
            throw ArgumentError("support point farther than delta from every center");
        sums[static_cast<std::size_t>(best)] = sums[static_cast<std::size_t>(best)] + s.coeff;
        Matrix seg(y.size(), 2);
        seg.col(0) = centers.col(best);
        seg.col(1) = y;
        if (auto segment = OrientedPolytope::simplex(seg, p.tolerance()))
            certificate.add(s.coeff, *segment);
    }

    QuantizeResult r{chain.emptyLike(), chain.emptyLike(1), chain.emptyLike(), ErrorBudget{}, 0.0, true};
    PolyChain snapped = chain.emptyLike();
    for (Eigen::Index j = 0; j < n; ++j) {
        const GroupElement& g = sums[static_cast<std::size_t>(j)];
        if (g.isZero())
            continue;
        const OrientedPolytope pt = OrientedPolytope::point(centers.col(j));
        snapped.add(g, pt);
        const GroupElement q = net.project(g);
        if (!q.isZero())
            r.output.add(q, pt);
    }
    r.output = canonicalize(r.output);
    r.filling = canonicalize(certificate);
    r.residual = canonicalize(snapped - r.output);
    r.budget.add("transport to centers", mass(r.filling));
    r.budget.add("coefficient rounding", mass(r.residual));

    const bool grid = net.kind == CoefficientNet::Kind::Grid && chain.group().kind() == GroupKind::Reals;
    const double nCenters = static_cast<double>(n);
    if (epsilon <= 0.0)
        epsilon = grid ? 4.0 * nCenters * net.step : 0.0;
    r.nominal_bound = mass(p) * delta + epsilon / 4.0;
    r.grid_fine_enough = !grid || net.step <= epsilon / (4.0 * nCenters) * (1.0 + 1e-12);
    return r;
}

QuantizeResult coneQuantize(const PolyChain& chain, const Matrix& centers, double delta, const CoefficientNet& net,
                            const ConeQuantizeOptions& options)
{
    checkCenters(chain, centers, delta);
    if (chain.k() == 0)
        return quantizeZeroChain(chain, centers, delta, net);
    const NormedSpace& space = chain.space();
    const int k = chain.k();

    QuantizeResult r{chain.emptyLike(), chain.emptyLike(k + 1), chain.emptyLike(), ErrorBudget{}, 0.0, true};
    PolyChain remaining = canonicalize(chain);
    const int candidates = std::max(1, options.radius_candidates);

    Vector reach(space.dim());
    for (int i = 0; i < space.dim(); ++i) reach(i) = 2.0 * delta * space.dualNorm(Vector::Unit(space.dim(), i)) * 1.05;
    Vector lo, hi;
    auto updateBounds = [&]() {
        lo = Vector::Constant(space.dim(), std::numeric_limits<double>::infinity());
        hi = -lo;
        for (const SimpleChain& s : remaining.summands()) {
            lo = lo.cwiseMin(s.poly.vertices().rowwise().minCoeff());
            hi = hi.cwiseMax(s.poly.vertices().rowwise().maxCoeff());
        }
    };
    updateBounds();

    for (Eigen::Index l = 0; l < centers.cols() && !remaining.isZero(); ++l) {
        const Vector z = centers.col(l);
        if (((z - reach - hi).array() > 0.0).any() || ((lo - z - reach).array() > 0.0).any())
            continue;
        PolyChain near = chain.emptyLike(), far = chain.emptyLike();
        for (const SimpleChain& s : remaining.summands()) {
            const bool away = ((z - reach - s.poly.vertices().rowwise().maxCoeff()).array() > 0.0).any() ||
                              ((s.poly.vertices().rowwise().minCoeff() - z - reach).array() > 0.0).any();
            (away ? far : near).add(s);
        }
        if (near.isZero())
            continue;
        const PolyChain nearBoundary = boundary(near);
        Matrix a;
        Vector b;
        RegionSplit bestSplit{chain.emptyLike(), chain.emptyLike()};
        double bestSlice = std::numeric_limits<double>::infinity();
        for (int c = 0; c < candidates; ++c) {
            const double radius = candidates == 1 ? delta : delta * (1.0 + static_cast<double>(c) / (candidates - 1));
            ballHalfspaces(space, z, radius, a, b, options.ball_directions);
            RegionSplit split = restrictRegion(near, a, b);
            if (split.inside.isZero())
                continue;
            const double sliceMass = massOf(boundary(split.inside) - restrictRegion(nearBoundary, a, b).inside);
            if (sliceMass < bestSlice - 1e-12) {
                bestSlice = sliceMass;
                bestSplit = std::move(split);
            }
        }
        if (bestSplit.inside.isZero())
            continue;
        const PolyChain cell = canonicalize(bestSplit.inside);
        remaining = canonicalize(bestSplit.outside + far);
        updateBounds();

        const QuantizeResult sub = coneQuantize(boundary(cell), centers, delta, net, options);
        // dP - Q = dR + S  gives  P - C_z Q = d(C_z P - C_z R) + (R + C_z S).
        const PolyChain filling = canonicalize(cone(z, cell) - cone(z, sub.filling));
        const PolyChain residual = canonicalize(sub.filling + cone(z, sub.residual));
        r.output = r.output + cone(z, sub.output);
        r.filling = r.filling + filling;
        r.residual = r.residual + residual;
        const std::string tag = "cell " + std::to_string(l) + ": ";
        r.budget.add(tag + "cone filling", mass(filling));
    }
    if (!remaining.isZero())
        throw ArgumentError("support not covered by the delta balls about the centers");
    r.output = canonicalize(r.output);
    r.filling = canonicalize(r.filling);
    r.residual = canonicalize(r.residual);
    r.budget.add("residual", mass(r.residual));
    return r;
}

} // namespace flatchain
