#include <doctest.h>

#include <cstdio>

#include "flatchain/chain_io.hpp"
#include "flatchain/chains.hpp"
#include "flatchain/errors.hpp"
#include "flatchain/mass.hpp"
#include "oracles.hpp"

using namespace flatchain;

namespace {

PolyChain unitSquare(const NormedSpace& s, double c = 1.0)
{
    PolyChain sq(s, CoefficientGroup::reals(), 2);
    Matrix v(2, 4);
    v << 0, 1, 1, 0, 0, 0, 1, 1;
    sq.add(c, *OrientedPolytope::make(v, Matrix::Identity(2, 2)));
    return sq;
}

PolyChain randomChain(oracle::Gen& gen, const NormedSpace& s, int k, int n)
{
    PolyChain c(s, CoefficientGroup::integers(), k);
    for (int i = 0; i < n; ++i) c.addSimplex(gen.integer(-2, 2), gen.simplex(s.dim(), k));
    return c;
}

} // namespace

TEST_SUITE("chains") {

TEST_CASE("boundary of the unit square is its four edges")
{
    const NormedSpace s = NormedSpace::pNorm(2, 2.0);
    const PolyChain b = canonicalize(boundary(unitSquare(s)));
    CHECK(b.size() == 4);
    CHECK(mass(b) == doctest::Approx(4.0));
    CHECK(canonicalize(boundary(b)).isZero());
}

TEST_CASE("boundary of a boundary vanishes on random chains")
{
    oracle::Gen gen(21);
    for (int d = 2; d <= 3; ++d)
        for (int k = 1; k <= d; ++k)
            for (int t = 0; t < 6; ++t) {
                const PolyChain c = randomChain(gen, NormedSpace::pNorm(d, 2.0), k, 3);
                if (k >= 2) {
                    CHECK(mass(canonicalize(boundary(boundary(c)))) <= 1e-9);
                } else {
                    PolyChain bb = boundary(c);
                    double total = 0.0;
                    for (const auto& s : bb.summands()) total += s.coeff.asDouble();
                    CHECK(total == doctest::Approx(0.0));
                }
            }
}

TEST_CASE("canonicalize merges overlaps and cancels opposite orientations")
{
    const NormedSpace s = NormedSpace::pNorm(2, 2.0);
    const PolyChain sq = unitSquare(s);
    CHECK(canonicalize(sq - sq).isZero());
    CHECK(chainsEqual(sq + sq, unitSquare(s, 2.0)));

    PolyChain split(s, CoefficientGroup::reals(), 2);
    Matrix t1(2, 3), t2(2, 3);
    t1 << 0, 1, 1, 0, 0, 1;
    t2 << 0, 1, 0, 0, 1, 1;
    split.addSimplex(1.0, t1);
    split.addSimplex(1.0, t2);
    CHECK(chainsEqual(split, sq));
    split.addSimplex(-1.0, t2);
    split.addSimplex(-1.0, Matrix(t2.rowwise().reverse()));
    CHECK(chainsEqual(split, sq));

    // half-overlapping squares: masses add where they overlap
    PolyChain shifted = affinePushforward(sq, Matrix::Identity(2, 2), Vector::Constant(2, 0.5));
    CHECK(mass(canonicalize(sq + shifted)) == doctest::Approx(2.0));
    CHECK(mass(canonicalize(sq - shifted)) == doctest::Approx(1.5));
}

TEST_CASE("canonical form is idempotent on overlapping triangles")
{
    oracle::Gen gen(77);
    const NormedSpace s = NormedSpace::pNorm(2, 2.0);
    for (int t = 0; t < 20; ++t) {
        PolyChain c(s, CoefficientGroup::integers(), 2);
        for (int i = 0; i < 5; ++i) c.addSimplex(gen.integer(0, 1) ? 1.0 : -1.0, gen.simplex(2, 2));
        const PolyChain once = canonicalize(c);
        const PolyChain twice = canonicalize(once);
        CHECK(twice.size() == once.size());
        CHECK(canonicalize(c - once).isZero());
        double weighted = 0.0;
        for (const auto& sc : once.summands()) weighted += sc.coeff.norm() * sc.poly.volume();
        CHECK(weighted == doctest::Approx(mass(once)).epsilon(1e-9));
    }
}

TEST_CASE("reversed orientation is the negative")
{
    const NormedSpace s = NormedSpace::pNorm(2, 1.0);
    Matrix v(2, 2);
    v << 0, 1, 0, 2;
    PolyChain a(s, CoefficientGroup::integers(), 1);
    a.addSimplex(1.0, v);
    PolyChain b(s, CoefficientGroup::integers(), 1);
    b.add(1.0, a.summands()[0].poly.reversed());
    CHECK(chainsEqual(a, -b));
}

TEST_CASE("degenerate input is dropped or rejected")
{
    Matrix v(2, 3);
    v << 0, 1, 2, 0, 1, 2;
    CHECK_FALSE(OrientedPolytope::simplex(v).has_value());
    Matrix dep(2, 2);
    dep << 1, 2, 0, 0;
    Matrix pts(2, 2);
    pts << 0, 1, 0, 0;
    CHECK_THROWS_AS(OrientedPolytope::make(pts, dep), DegenerateError);
    PolyChain c(NormedSpace::pNorm(2, 2.0), CoefficientGroup::integers(), 1);
    PolyChain d(NormedSpace::pNorm(2, 2.0), CoefficientGroup::reals(), 1);
    CHECK_THROWS_AS(c + d, GroupMismatchError);
}

TEST_CASE("chain files round-trip exactly")
{
    oracle::Gen gen(4);
    PolyChain c(NormedSpace::pNorm(3, 1.5), CoefficientGroup::reals(), 2);
    for (int i = 0; i < 3; ++i) c.addSimplex(gen.uniform(-2, 2), gen.simplex(3, 2));
    const std::string path = "roundtrip_test.chain";
    writeChain(c, path);
    const PolyChain back = readChain(path);
    std::remove(path.c_str());
    REQUIRE(back.size() == c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        CHECK(back.summands()[i].coeff == c.summands()[i].coeff);
        CHECK((back.summands()[i].poly.vertices() - c.summands()[i].poly.vertices()).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK(chainToJson(back).dump() == chainToJson(c).dump());
}

TEST_CASE("malformed chain files name the offending summand")
{
    nlohmann::json j = chainToJson(unitSquare(NormedSpace::pNorm(2, 2.0)));
    j["summands"][0]["vertices"][0] = {"0"};
    try {
        chainFromJson(j);
        FAIL("expected a format error");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("summand 0") != std::string::npos);
    }
}

}
