#include <doctest.h>

#include <limits>

#include "flatchain/errors.hpp"
#include "flatchain/mass.hpp"
#include "oracles.hpp"

using namespace flatchain;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

PolyChain square(const NormedSpace& s)
{
    PolyChain sq(s, CoefficientGroup::integers(), 2);
    Matrix v(2, 4);
    v << 0, 1, 1, 0, 0, 0, 1, 1;
    sq.add(1.0, *OrientedPolytope::make(v, Matrix::Identity(2, 2)));
    return sq;
}

SimpleChain simple(const Matrix& v, double c = 1.0)
{
    return SimpleChain{GroupElement::real(c), *OrientedPolytope::simplex(v)};
}

} // namespace

TEST_SUITE("mass") {

TEST_CASE("unit square masses in l1, l2 and l-infinity")
{
    CHECK(mass(square(NormedSpace::pNorm(2, 1.0))) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(mass(square(NormedSpace::pNorm(2, 2.0))) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mass(square(NormedSpace::pNorm(2, kInf))) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("segment mass is |g| times the norm of the edge")
{
    oracle::Gen gen(3);
    for (double p : {1.0, 2.0, 3.0, kInf})
        for (int d = 1; d <= 4; ++d) {
            const NormedSpace s = NormedSpace::pNorm(d, p);
            for (int t = 0; t < 5; ++t) {
                const Matrix v = gen.simplex(d, 1);
                const double g = gen.uniform(-3, 3);
                CHECK(mass(s, simple(v, g)) == doctest::Approx(std::abs(g) * oracle::pnorm(v.col(1) - v.col(0), p)).epsilon(1e-9));
            }
        }
}

TEST_CASE("planar densities")
{
    const PlaneKey plane = PlaneKey::fromSpan(Matrix::Identity(2, 2));
    CHECK(density(NormedSpace::pNorm(2, 1.0), plane) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(density(NormedSpace::pNorm(2, kInf), plane) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(density(NormedSpace::pNorm(2, 2.0), plane) == doctest::Approx(1.0));
    const DensityReport r = densityReport(NormedSpace::pNorm(2, 1.0), plane);
    CHECK(r.starts > 0);
    CHECK(r.evaluations >= r.starts);
}

TEST_CASE("Euclidean mass equals Euclidean volume")
{
    oracle::Gen gen(9);
    for (int d = 2; d <= 4; ++d)
        for (int k = 1; k <= std::min(d, 3); ++k) {
            const Matrix v = gen.simplex(d, k);
            CHECK(mass(NormedSpace::pNorm(d, 2.0), simple(v, 2.0)) == doctest::Approx(2.0 * oracle::euclideanVolume(v)).epsilon(1e-9));
        }
}

TEST_CASE("mass scales like the k-th power of a dilation")
{
    oracle::Gen gen(12);
    const NormedSpace s = NormedSpace::pNorm(3, 1.0);
    for (int k = 1; k <= 3; ++k) {
        const Matrix v = gen.simplex(3, k);
        const double m = mass(s, simple(v));
        CHECK(mass(s, simple(2.5 * v)) == doctest::Approx(std::pow(2.5, k) * m).epsilon(1e-12));
    }
}

TEST_CASE("direct evaluation agrees with the density path")
{
    oracle::Gen gen(14);
    const NormedSpace spaces[] = {NormedSpace::pNorm(2, 1.0), NormedSpace::pNorm(2, kInf),
                                  NormedSpace::polytopeNorm(gen.polytopeFacets(2, 2))};
    for (const NormedSpace& s : spaces) {
        const SimpleChain c = simple(gen.simplex(2, 2));
        CHECK(massDirect(s, c) == doctest::Approx(mass(s, c)).epsilon(0.02));
    }
}

TEST_CASE("size and fullness")
{
    const NormedSpace s = NormedSpace::pNorm(2, 2.0);
    const PolyChain sq = square(s);
    CHECK(fullness(sq) == doctest::Approx(0.5));
    Matrix tri(2, 3);
    tri << 0, 1, 0, 0, 0, 1;
    PolyChain t(s, CoefficientGroup::integers(), 2);
    t.addSimplex(3.0, tri);
    CHECK(size(t) == doctest::Approx(0.5));
    CHECK(fullness(t) == doctest::Approx(0.25));
    CHECK_THROWS(fullness(t.emptyLike()));
}

TEST_CASE("full simplex in l-infinity R^3")
{
    Matrix span(3, 2);
    span << 1, 0, 0, 1, 0, 0;
    const FullSimplex f = fullSimplex(NormedSpace::pNorm(3, kInf), PlaneKey::fromSpan(span));
    CHECK(f.simplex.k() == 2);
    CHECK(f.fullness > 0.0);
    CHECK(f.fullness == doctest::Approx(fullness(NormedSpace::pNorm(3, kInf), f.simplex)));
}

TEST_CASE("N is mass plus boundary mass")
{
    const ChainNorms n = chainNorms(square(NormedSpace::pNorm(2, 1.0)));
    CHECK(n.mass == doctest::Approx(2.0));
    CHECK(n.boundary_mass == doctest::Approx(4.0));
    CHECK(n.n_value == doctest::Approx(6.0));
}

}
