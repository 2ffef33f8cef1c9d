#include <doctest.h>

#include <cmath>

#include "flatchain/cones.hpp"
#include "flatchain/errors.hpp"
#include "flatchain/mass.hpp"
#include "oracles.hpp"

using namespace flatchain;

namespace {

Vector vec(std::initializer_list<double> xs)
{
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

PolyChain segment(const NormedSpace& s, const Vector& a, const Vector& b, double c = 1.0,
                  CoefficientGroup g = CoefficientGroup::integers())
{
    PolyChain p(s, g, 1);
    Matrix v(a.size(), 2);
    v.col(0) = a;
    v.col(1) = b;
    p.addSimplex(c, v);
    return p;
}

PolyChain point(const NormedSpace& s, const Vector& x, double c, CoefficientGroup g)
{
    PolyChain p(s, g, 0);
    p.add(c, OrientedPolytope::point(x));
    return p;
}

double certificateResidual(const PolyChain& p, const QuantizeResult& q)
{
    PolyChain rest = p - q.output - q.residual;
    if (!q.filling.isZero()) rest = rest - boundary(q.filling);
    return mass(canonicalize(rest));
}

} // namespace

TEST_SUITE("cones") {

TEST_CASE("cone over a segment is the oriented triangle")
{
    const NormedSpace s = NormedSpace::pNorm(2, 2.0);
    const PolyChain c = cone(vec({0, 0}), segment(s, vec({1, 0}), vec({1, 1})));
    PolyChain tri(s, CoefficientGroup::integers(), 2);
    Matrix v(2, 3);
    v << 0, 1, 1, 0, 0, 1;
    tri.addSimplex(1.0, v);
    CHECK(chainsEqual(c, tri));
}

TEST_CASE("degenerate cones vanish")
{
    const NormedSpace s = NormedSpace::pNorm(2, 2.0);
    CHECK(cone(vec({2, 0}), segment(s, vec({0, 0}), vec({1, 0}))).isZero());
    CHECK(cone(vec({2, 0}), PolyChain(s, CoefficientGroup::integers(), 1)).isZero());
}

TEST_CASE("cone boundary identity")
{
    const NormedSpace s = NormedSpace::pNorm(2, 1.0);
    PolyChain sq(s, CoefficientGroup::integers(), 2);
    Matrix v(2, 4);
    v << 0, 1, 1, 0, 0, 0, 1, 1;
    sq.add(1.0, *OrientedPolytope::make(v, Matrix::Identity(2, 2)));
    CHECK(coneBoundaryCheck(vec({3, 3}), boundary(sq)) == doctest::Approx(0.0));

    oracle::Gen gen(17);
    for (int d = 2; d <= 3; ++d)
        for (int t = 0; t < 8; ++t) {
            PolyChain c(NormedSpace::pNorm(d, 2.0), CoefficientGroup::integers(), 1);
            for (int i = 0; i < 5; ++i) c.addSimplex(gen.integer(-2, 2), gen.simplex(d, 1));
            CHECK(coneBoundaryCheck(gen.point(d, -1, 2), c) <= 1e-9);
        }
}

TEST_CASE("cone mass ratio of a segment seen from above its midpoint")
{
    const NormedSpace s = NormedSpace::pNorm(2, 2.0);
    const double ratio = coneMassRatio(vec({0.5, 1}), segment(s, vec({0, 0}), vec({1, 0})));
    CHECK(ratio == doctest::Approx(0.5 / std::sqrt(1.25)));
    CHECK(coneMassRatio(vec({3, 0}), segment(s, vec({0, 0}), vec({1, 0}))) == 0.0);
    CHECK_THROWS(coneMassRatio(vec({0, 1}), PolyChain(s, CoefficientGroup::integers(), 1)));
}

TEST_CASE("zero-chain quantization examples")
{
    const NormedSpace line = NormedSpace::pNorm(1, 2.0);
    Matrix centers(1, 2);
    centers << 0, 1;

    const QuantizeResult a = quantizeZeroChain(point(line, vec({0.3}), 1, CoefficientGroup::integers()), centers, 0.5,
                                               CoefficientNet::exact());
    CHECK(chainsEqual(a.output, point(line, vec({0}), 1, CoefficientGroup::integers())));
    CHECK(a.budget.total == doctest::Approx(0.3));

    const PolyChain p = point(line, vec({0.3}), 1.1, CoefficientGroup::reals());
    const QuantizeResult b = quantizeZeroChain(p, centers, 0.5, CoefficientNet::grid(0.25));
    CHECK(chainsEqual(b.output, point(line, vec({0}), 1.0, CoefficientGroup::reals())));
    CHECK(b.budget.total == doctest::Approx(0.3 * 1.1 + 0.1));
    CHECK(b.budget.total <= b.nominal_bound);
    CHECK(certificateResidual(p, b) <= 1e-12);

    const PolyChain on = point(line, vec({1}), 2, CoefficientGroup::integers());
    const QuantizeResult c = quantizeZeroChain(on, centers, 0.5, CoefficientNet::exact());
    CHECK(chainsEqual(c.output, on));
    CHECK(c.budget.total == 0.0);

    CHECK_THROWS_AS(quantizeZeroChain(point(line, vec({3}), 1, CoefficientGroup::integers()), centers, 0.5,
                                      CoefficientNet::exact()),
                    ArgumentError);
}

TEST_CASE("grid projection never increases a coefficient")
{
    oracle::Gen gen(8);
    const CoefficientNet net = CoefficientNet::grid(0.3);
    for (int t = 0; t < 100; ++t) {
        const GroupElement g = GroupElement::real(gen.uniform(-5, 5));
        const GroupElement h = net.project(g);
        CHECK(h.norm() <= g.norm());
        CHECK(std::abs(h.asDouble() - g.asDouble()) < 0.3);
    }
}

TEST_CASE("cone quantization of a segment onto its endpoints is exact")
{
    const NormedSpace s = NormedSpace::pNorm(2, 2.0);
    const PolyChain p = segment(s, vec({0.2, 0.2}), vec({0.5, 0.6}));
    Matrix centers(2, 2);
    centers << 0.2, 0.5, 0.2, 0.6;
    const QuantizeResult q = coneQuantize(p, centers, 0.5, CoefficientNet::exact());
    CHECK(chainsEqual(q.output, p));
    CHECK(q.budget.total == doctest::Approx(0.0));
    CHECK(coneQuantize(p.emptyLike(), centers, 0.5, CoefficientNet::exact()).output.isZero());
}

TEST_CASE("cone quantization certificates are exact")
{
    oracle::Gen gen(23);
    Matrix centers(2, 25);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) centers.col(5 * i + j) = vec({i * 0.25, j * 0.25});
    for (double p : {2.0, std::numeric_limits<double>::infinity()}) {
        const NormedSpace s = NormedSpace::pNorm(2, p);
        for (int t = 0; t < 3; ++t) {
            PolyChain c(s, CoefficientGroup::integers(), 1);
            for (int i = 0; i < 3; ++i) c.addSimplex(gen.integer(1, 2), gen.simplex(2, 1));
            const QuantizeResult q = coneQuantize(c, centers, 0.25, CoefficientNet::exact());
            CHECK(certificateResidual(c, q) <= 1e-9);
            CHECK(q.budget.total >= mass(q.filling) + mass(q.residual) - 1e-9);
        }
    }
}

}
