#include <doctest.h>

#include <limits>

#include "flatchain/errors.hpp"
#include "flatchain/foundation.hpp"
#include "oracles.hpp"

using namespace flatchain;

TEST_SUITE("foundation") {

TEST_CASE("p-norms and their duals match the reference formulas")
{
    oracle::Gen gen(11);
    const double inf = std::numeric_limits<double>::infinity();
    for (double p : {1.0, 1.5, 2.0, 3.0, inf}) {
        const double q = p == 1.0 ? inf : (std::isinf(p) ? 1.0 : p / (p - 1.0));
        for (int d = 1; d <= 4; ++d) {
            const NormedSpace s = NormedSpace::pNorm(d, p);
            for (int t = 0; t < 20; ++t) {
                const Vector x = gen.gaussian(d);
                CHECK(s.norm(x) == doctest::Approx(oracle::pnorm(x, p)).epsilon(1e-12));
                CHECK(s.dualNorm(x) == doctest::Approx(oracle::pnorm(x, q)).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("weighted p-norm scales coordinates before the p-sum")
{
    Vector w(3);
    w << 1.0, 2.0, 0.5;
    const NormedSpace s = NormedSpace::weightedPNorm(w, 3.0);
    Vector x(3);
    x << 1.0, -1.0, 4.0;
    CHECK(s.norm(x) == doctest::Approx(oracle::pnorm(w.cwiseProduct(x), 3.0)));
}

TEST_CASE("polytope norm is the gauge of its facets")
{
    oracle::Gen gen(5);
    const Matrix f = gen.polytopeFacets(3, 2);
    const NormedSpace s = NormedSpace::polytopeNorm(f);
    CHECK(s.isPolyhedral());
    for (int t = 0; t < 20; ++t) {
        const Vector x = gen.gaussian(3);
        CHECK(s.norm(x) == doctest::Approx(oracle::facetNorm(f, x)).epsilon(1e-12));
        CHECK(s.norm(x) >= 0.0);
    }
    // every facet functional has dual norm at most one, and the facet rows touch the ball
    for (Eigen::Index i = 0; i < f.rows(); ++i) CHECK(s.dualNorm(f.row(i).transpose()) <= 1.0 + 1e-9);
}

TEST_CASE("dual pairing inequality |c.x| <= ||c||_* ||x||")
{
    oracle::Gen gen(8);
    const NormedSpace spaces[] = {NormedSpace::pNorm(3, 1.0), NormedSpace::pNorm(3, 2.5),
                                  NormedSpace::pNorm(3, std::numeric_limits<double>::infinity()),
                                  NormedSpace::polytopeNorm(gen.polytopeFacets(3, 3))};
    for (const NormedSpace& s : spaces)
        for (int t = 0; t < 50; ++t) {
            const Vector c = gen.gaussian(3), x = gen.gaussian(3);
            CHECK(std::abs(c.dot(x)) <= s.dualNorm(c) * s.norm(x) * (1.0 + 1e-9));
        }
}

TEST_CASE("invalid norms are rejected")
{
    CHECK_THROWS(NormedSpace::pNorm(2, 0.5));
    CHECK_THROWS(NormedSpace::pNorm(0, 2.0));
    Vector w(2);
    w << 1.0, -1.0;
    CHECK_THROWS(NormedSpace::weightedPNorm(w, 2.0));
    Matrix half(2, 2);
    half << 1, 0, 0, 1;
    CHECK_THROWS(NormedSpace::polytopeNorm(half));
}

TEST_CASE("coefficient groups")
{
    const CoefficientGroup z5 = CoefficientGroup::integersMod(5);
    const GroupElement a = z5.element(3), b = z5.element(4);
    CHECK((a + b).integerValue() == 2);
    CHECK((-a).integerValue() == 2);
    CHECK(a.norm() == 2.0);
    CHECK(b.norm() == 1.0);
    CHECK((a + (-a)).isZero());
    const CoefficientGroup z = CoefficientGroup::integers();
    CHECK(z.element(-3).norm() == 3.0);
    CHECK_THROWS(z.element(0.5));
    CHECK_THROWS_AS(a + GroupElement::integer(1), GroupMismatchError);
    CHECK(CoefficientGroup::reals().element(-1.25).norm() == 1.25);
}

}
