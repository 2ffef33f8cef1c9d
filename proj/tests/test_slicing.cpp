#include <doctest.h>

#include <cmath>
#include <limits>

#include "flatchain/errors.hpp"
#include "flatchain/lipschitz.hpp"
#include "flatchain/mass.hpp"
#include "flatchain/slicing.hpp"
#include "oracles.hpp"

using namespace flatchain;

namespace {

PolyChain square(const NormedSpace& s, double lo = 0.0, double hi = 1.0)
{
    PolyChain sq(s, CoefficientGroup::reals(), 2);
    Matrix v(2, 4);
    v << lo, hi, hi, lo, lo, lo, hi, hi;
    sq.add(1.0, *OrientedPolytope::make(v, Matrix::Identity(2, 2)));
    return sq;
}

Vector vec2(double a, double b)
{
    Vector v(2);
    v << a, b;
    return v;
}

} // namespace

TEST_SUITE("slicing") {

TEST_CASE("slice of the unit square by x = 1/2 is the upward unit segment")
{
    const NormedSpace s = NormedSpace::pNorm(2, 2.0);
    const PolyChain sl = slice(square(s), vec2(1, 0), 0.5);
    REQUIRE(sl.size() == 1);
    CHECK(mass(sl) == doctest::Approx(1.0));
    PolyChain expected(s, CoefficientGroup::reals(), 1);
    Matrix v(2, 2);
    v << 0.5, 0.5, 0, 1;
    expected.addSimplex(1.0, v);
    CHECK(chainsEqual(sl, expected));
}

TEST_CASE("slices agree with the boundary of the restriction")
{
    oracle::Gen gen(31);
    const NormedSpace s = NormedSpace::pNorm(2, 1.0);
    for (int t = 0; t < 10; ++t) {
        PolyChain c(s, CoefficientGroup::reals(), 2);
        c.addSimplex(gen.uniform(-2, 2), gen.simplex(2, 2));
        c.addSimplex(gen.uniform(-2, 2), gen.simplex(2, 2));
        const Vector u = gen.gaussian(2);
        const double r = gen.uniform(0.3, 0.7) * u.cwiseAbs().sum() * 0.5;
        if (isExceptionalLevel(c, u, r)) continue;
        const PolyChain below = restrictHalfspace(c, u, r, Side::Below);
        const PolyChain above = restrictHalfspace(c, u, r, Side::Above);
        CHECK(mass(canonicalize(below + above - c)) <= 1e-9);
        const PolyChain expected = boundary(below) - restrictHalfspace(boundary(c), u, r, Side::Below);
        CHECK(mass(canonicalize(slice(c, u, r) - expected)) <= 1e-9);
    }
}

TEST_CASE("levels containing a facet are exceptional")
{
    const NormedSpace s = NormedSpace::pNorm(2, 2.0);
    CHECK(isExceptionalLevel(square(s), vec2(1, 0), 0.0));
    CHECK(isExceptionalLevel(square(s), vec2(0, 1), 1.0));
    CHECK_FALSE(isExceptionalLevel(square(s), vec2(1, 1), 1.0));
    CHECK_FALSE(isExceptionalLevel(square(s), vec2(1, 0), 0.3));
    CHECK_THROWS_AS(slice(square(s), vec2(1, 0), 1.0), ExceptionalLevelError);
}

TEST_CASE("standard subdivision tiles the simplex")
{
    oracle::Gen gen(2);
    for (int k = 1; k <= 3; ++k) {
        const Matrix v = gen.simplex(3, k);
        for (int stage = 1; stage <= 2; ++stage) {
            const std::vector<Matrix> cells = standardSubdivision(v, stage);
            CHECK(cells.size() == static_cast<std::size_t>(std::pow(std::pow(2, k), stage)));
            double total = 0.0;
            for (const Matrix& c : cells) total += oracle::euclideanVolume(c);
            CHECK(total == doctest::Approx(oracle::euclideanVolume(v)).epsilon(1e-9));
        }
    }
}

TEST_CASE("piecewise-linear approximation reproduces affine functions")
{
    const NormedSpace s = NormedSpace::pNorm(2, 2.0);
    Matrix tri(2, 3);
    tri << 0, 1, 0, 0, 0, 1;
    const LipschitzFunction f = LipschitzFunction::linear(s, vec2(0.6, -0.8), 0.1);
    const PiecewiseLinearFunction pl = plApprox(f, tri, 3, s);
    oracle::Gen gen(6);
    for (int t = 0; t < 20; ++t) {
        const double a = gen.uniform(0, 1), b = gen.uniform(0, 1 - a);
        CHECK(pl(vec2(a, b)) == doctest::Approx(f(vec2(a, b))).epsilon(1e-12));
    }
}

TEST_CASE("polyhedral ball restriction is exact")
{
    const NormedSpace s = NormedSpace::pNorm(2, std::numeric_limits<double>::infinity());
    const BallRestriction r = restrictBall(square(s), vec2(0, 0), 0.5);
    CHECK(r.exact);
    CHECK(mass(canonicalize(r.inside)) == doctest::Approx(0.25));
    CHECK(mass(canonicalize(r.inside + r.outside - square(s))) <= 1e-9);
    CHECK(mass(r.slice) == doctest::Approx(1.0));
}

TEST_CASE("Lipschitz restriction to a Euclidean disc converges in mass")
{
    const NormedSpace s = NormedSpace::pNorm(2, 2.0);
    const LipschitzFunction f = LipschitzFunction::distanceToPoint(s, vec2(0.5, 0.5));
    RestrictionOptions opts;
    opts.stages = 6;
    const Restriction r = restrictLipschitz(square(s), f, 0.3, opts);
    REQUIRE(!r.report.stage_mass.empty());
    CHECK(r.report.stage_mass.back() == doctest::Approx(M_PI * 0.09).epsilon(5e-3));
    CHECK(r.report.diff_mass.back() < 1e-2);
    CHECK(mass(canonicalize(r.inside)) == doctest::Approx(r.report.stage_mass.back()));
}

TEST_CASE("exceptional scan: straddling size shrinks with the stage")
{
    const NormedSpace s = NormedSpace::pNorm(2, 2.0);
    const LipschitzFunction f = LipschitzFunction::distanceToPoint(s, vec2(0.2, 0.3));
    const ExceptionalScan scan = exceptionalScan(square(s), f, 4, {0.2, 0.45, 0.7});
    CHECK(scan.monotone);
    CHECK(scan.integral_bound_ok);
    for (const auto& row : scan.size_u)
        for (std::size_t i = 1; i < row.size(); ++i) CHECK(row[i] <= row[i - 1] + 1e-12);
}

TEST_CASE("Eilenberg ratio of a unit-dual linear functional is at most one")
{
    const NormedSpace s = NormedSpace::pNorm(2, 1.0);
    Vector c = vec2(1, 1);
    const LipschitzFunction f = LipschitzFunction::linear(s, c / s.dualNorm(c));
    const EilenbergResult e = eilenbergRatio(square(s), f);
    CHECK(e.ratio <= 1.0 + 1e-6);
    CHECK(e.ratio > 0.5);
}

}
