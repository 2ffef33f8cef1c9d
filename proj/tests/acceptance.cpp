#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "flatchain/cones.hpp"
#include "flatchain/errors.hpp"
#include "flatchain/flatnorm.hpp"
#include "flatchain/harness.hpp"
#include "flatchain/lipschitz.hpp"
#include "flatchain/mass.hpp"
#include "flatchain/slicing.hpp"
#include "oracles.hpp"

using namespace flatchain;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok && pass) detail << "first failure: " << what << "; ";
        pass = pass && ok;
    }
};

double rel(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

SimpleChain simple(const Matrix& v, double c = 1.0)
{
    return SimpleChain{GroupElement::real(c), *OrientedPolytope::simplex(v)};
}

ChainBudget unitBudget(int d, int summands, double maxN)
{
    ChainBudget b;
    b.box = Box::unit(d);
    b.max_summands = summands;
    b.max_n = maxN;
    return b;
}

Vector unitDualCovector(const NormedSpace& s, oracle::Gen& gen)
{
    Vector c = gen.gaussian(s.dim());
    return c / s.dualNorm(c);
}

// Norm oracle for the spaces used below.
struct OracleSpace {
    NormedSpace space;
    std::function<double(const Vector&)> norm;
};

std::vector<OracleSpace> oracleSpaces(int d, oracle::Gen& gen)
{
    std::vector<OracleSpace> out;
    for (double p : {1.0, 2.0, kInf}) out.push_back({NormedSpace::pNorm(d, p), [p](const Vector& x) { return oracle::pnorm(x, p); }});
    for (int i = 0; i < 2; ++i) {
        const Matrix f = gen.polytopeFacets(d, 2);
        out.push_back({NormedSpace::polytopeNorm(f), [f](const Vector& x) { return oracle::facetNorm(f, x); }});
    }
    return out;
}

Outcome segmentLemma()
{
    Outcome o;
    oracle::Gen gen(101);
    int count = 0;
    double worstDensity = 0.0, worstDirect = 0.0;
    for (int d = 1; d <= 4; ++d)
        for (const OracleSpace& s : oracleSpaces(d, gen))
            for (int t = 0; t < 10; ++t, ++count) {
                const Matrix v = gen.simplex(d, 1);
                const double g = gen.uniform(0.1, 3.0) * (gen.integer(0, 1) ? 1 : -1);
                const double expect = std::abs(g) * s.norm(v.col(1) - v.col(0));
                const double m = mass(s.space, simple(v, g));
                const double md = massDirect(s.space, simple(v, g));
                worstDensity = std::max(worstDensity, rel(m, expect));
                worstDirect = std::max(worstDirect, rel(md, expect));
                o.require(rel(m, expect) <= 1e-9, "density path off on segment " + std::to_string(count));
                o.require(rel(md, expect) <= 1e-3, "direct path off on segment " + std::to_string(count));
            }
    o.detail << count << " segments, worst relative error " << worstDensity << " (density), " << worstDirect << " (direct)";
    return o;
}

Outcome euclideanOracle()
{
    Outcome o;
    oracle::Gen gen(202);
    double worst = 0.0;
    int count = 0;
    for (int d = 1; d <= 4; ++d)
        for (int k = 1; k <= std::min(d, 3); ++k)
            for (int t = 0; t < 6 && count < 50; ++t, ++count) {
                const Matrix v = gen.simplex(d, k);
                const double g = gen.uniform(0.2, 3.0);
                const double err = rel(mass(NormedSpace::pNorm(d, 2.0), simple(v, g)), g * oracle::euclideanVolume(v));
                worst = std::max(worst, err);
                o.require(err <= 1e-6, "simplex " + std::to_string(count));
            }
    o.require(count == 50, "instance count");
    o.detail << count << " simplices, worst relative error " << worst;
    return o;
}

// Affine images x -> x0 + T (x - x0).
Matrix applyAt(const Matrix& v, const Matrix& t)
{
    Matrix out = v;
    for (Eigen::Index j = 0; j < v.cols(); ++j) out.col(j) = v.col(0) + t * (v.col(j) - v.col(0));
    return out;
}

Outcome scalingLemmas()
{
    Outcome o;
    oracle::Gen gen(303);
    double worstExact = 0.0, worstDirect = 0.0;
    int directCount = 0;
    for (int inst = 0; inst < 30; ++inst) {
        const int d = 2 + inst % 2;
        const int k = 1 + (inst / 2) % 2;
        NormedSpace s = inst % 3 == 0   ? NormedSpace::pNorm(d, 1.0)
                        : inst % 3 == 1 ? NormedSpace::pNorm(d, kInf)
                                        : NormedSpace::polytopeNorm(gen.polytopeFacets(d, 2));
        const Matrix v = gen.simplex(d, k);
        const double m = mass(s, simple(v));

        const Matrix edges = v.rightCols(k).colwise() - v.col(0);
        const Eigen::HouseholderQR<Matrix> qr(edges);
        const Matrix q = qr.householderQ() * Matrix::Identity(d, k);
        const Vector u = q.col(0);

        const double lambda = gen.uniform(0.3, 3.0);
        const double mScaled = mass(s, simple(lambda * v));
        worstExact = std::max(worstExact, rel(mScaled, std::pow(lambda, k) * m));
        o.require(rel(mScaled, std::pow(lambda, k) * m) <= 1e-12, "scaling " + std::to_string(inst));

        const Matrix oneDir = Matrix::Identity(d, d) + (lambda - 1.0) * u * u.transpose();
        const double mOne = mass(s, simple(applyAt(v, oneDir)));
        worstExact = std::max(worstExact, rel(mOne, lambda * m));
        o.require(rel(mOne, lambda * m) <= 1e-12, "one-direction scaling " + std::to_string(inst));

        double predicted = lambda * m;
        Matrix image = applyAt(v, oneDir);
        if (k >= 2) {
            const Matrix shear = Matrix::Identity(d, d) + gen.uniform(-2.0, 2.0) * u * q.col(1).transpose();
            const double mShear = mass(s, simple(applyAt(v, shear)));
            worstExact = std::max(worstExact, rel(mShear, m));
            o.require(rel(mShear, m) <= 1e-12, "shear " + std::to_string(inst));
            image = applyAt(v, shear);
            predicted = m;
        }
        const double direct = massDirect(s, simple(image));
        ++directCount;
        worstDirect = std::max(worstDirect, rel(direct, predicted));
        o.require(rel(direct, predicted) <= 0.02, "direct evaluation " + std::to_string(inst));
    }
    o.detail << "worst exact-path error " << worstExact << ", worst direct error " << worstDirect << " over "
             << directCount << " instances";
    return o;
}

// sup over unit a of ||a^perp|| / ||a||_*, by a fine angle grid.
double planarDensityOracle(double p)
{
    const double q = std::isinf(p) ? 1.0 : (p == 1.0 ? kInf : p / (p - 1.0));
    double best = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double th = M_PI * i / n;
        Vector a(2), perp(2);
        a << std::cos(th), std::sin(th);
        perp << -std::sin(th), std::cos(th);
        best = std::max(best, oracle::pnorm(perp, p) / oracle::pnorm(a, q));
    }
    return best;
}

Outcome densityCrossOracle()
{
    Outcome o;
    const PlaneKey plane = PlaneKey::fromSpan(Matrix::Identity(2, 2));
    const double o1 = planarDensityOracle(1.0), oi = planarDensityOracle(kInf);
    const double s1 = density(NormedSpace::pNorm(2, 1.0), plane), si = density(NormedSpace::pNorm(2, kInf), plane);
    o.require(std::abs(o1 - 2.0) <= 1e-3 && std::abs(s1 - o1) <= 1e-3, "l1 density");
    o.require(std::abs(oi - 1.0) <= 1e-3 && std::abs(si - oi) <= 1e-3, "l-infinity density");
    oracle::Gen gen(404);
    double worst = 0.0;
    for (int inst = 0; inst < 30; ++inst) {
        const int d = 2 + inst % 2;
        NormedSpace s = inst % 3 == 0   ? NormedSpace::pNorm(d, 1.0)
                        : inst % 3 == 1 ? NormedSpace::pNorm(d, 3.0)
                                        : NormedSpace::polytopeNorm(gen.polytopeFacets(d, 3));
        const Matrix v = gen.simplex(d, 2);
        const double sigma = density(s, PlaneKey::fromSpan(v.rightCols(2).colwise() - v.col(0)));
        const double predicted = sigma * oracle::euclideanVolume(v);
        const double direct = massDirect(s, simple(v));
        worst = std::max(worst, rel(direct, predicted));
        o.require(rel(direct, predicted) <= 0.02, "cell " + std::to_string(inst));
    }
    o.detail << "sigma(l1) " << s1 << " vs oracle " << o1 << ", sigma(linf) " << si << " vs oracle " << oi
             << ", worst direct error " << worst;
    return o;
}

Outcome boundaryAndCone()
{
    Outcome o;
    double worstBB = 0.0, worstCone = 0.0;
    oracle::Gen gen(505);
    for (int i = 0; i < 100; ++i) {
        const int d = 3 + i % 2;
        const int k = 2 + i % 2;
        PolyChain p(NormedSpace::pNorm(d, 2.0), CoefficientGroup::integers(), k);
        for (int j = 0; j < 4; ++j) p.addSimplex(gen.integer(1, 3) * (gen.integer(0, 1) ? 1 : -1), gen.simplex(d, k));
        const double r = mass(boundary(boundary(p)));
        worstBB = std::max(worstBB, r);
        o.require(r <= 1e-9, "boundary of boundary " + std::to_string(i));
    }
    for (int i = 0; i < 100; ++i) {
        const int d = 2 + i % 2;
        const int k = d == 2 ? 1 : 1 + (i / 2) % 2;
        const NormedSpace s = NormedSpace::pNorm(d, i % 3 == 0 ? kInf : 2.0);
        const PolyChain p = generateRandomChain(s, CoefficientGroup::integers(), k, 2000 + i, unitBudget(d, 3, 1e6));
        const double r = coneBoundaryCheck(gen.point(d, -0.5, 1.5), p);
        worstCone = std::max(worstCone, r);
        o.require(r <= 1e-9, "cone identity " + std::to_string(i));
    }
    o.detail << "worst dd residual " << worstBB << ", worst cone residual " << worstCone;
    return o;
}

double midpointSliceIntegral(const PolyChain& p, const Vector& c, int levels)
{
    double lo = kInf, hi = -kInf;
    for (const Matrix& v : support(p)) {
        const Eigen::RowVectorXd f = c.transpose() * v;
        lo = std::min(lo, f.minCoeff());
        hi = std::max(hi, f.maxCoeff());
    }
    const double h = (hi - lo) / levels;
    double sum = 0.0;
    for (int i = 0; i < levels; ++i) {
        double r = lo + (i + 0.5) * h;
        for (int shift = 1; isExceptionalLevel(p, c, r); ++shift) r += 1e-7 * h * shift;
        sum += mass(slice(p, c, r)) * h;
    }
    return sum;
}

Outcome slicingConsistency()
{
    Outcome o;
    oracle::Gen gen(606);
    double worstExcess = -kInf, worstQuad = 0.0, worstAdd = 0.0;
    for (int i = 0; i < 50; ++i) {
        const int d = 2 + i % 2;
        const int k = 1 + (i / 2) % 2;
        const double p = i % 3 == 0 ? 1.0 : (i % 3 == 1 ? 2.0 : kInf);
        const NormedSpace s = NormedSpace::pNorm(d, p);
        const PolyChain chain = generateRandomChain(s, CoefficientGroup::integers(), k, 3000 + i, unitBudget(d, 3, 1e6));
        const Vector c = unitDualCovector(s, gen);
        const double m = mass(chain);
        const EilenbergResult e = eilenbergRatio(chain, LipschitzFunction::linear(s, c));
        worstExcess = std::max(worstExcess, e.integral - m);
        o.require(e.integral <= m + 1e-6, "slice integral exceeds mass on instance " + std::to_string(i));
        const double mid = midpointSliceIntegral(chain, c, 200);
        worstQuad = std::max(worstQuad, std::abs(mid - e.integral) / std::max(m, 1e-12));
        o.require(std::abs(mid - e.integral) <= 0.01 * m + 1e-9, "quadratures disagree on instance " + std::to_string(i));

        double lo = kInf, hi = -kInf;
        for (const Matrix& v : support(chain)) {
            const Eigen::RowVectorXd f = c.transpose() * v;
            lo = std::min(lo, f.minCoeff());
            hi = std::max(hi, f.maxCoeff());
        }
        const double r = gen.uniform(lo, hi);
        const PolyChain below = restrictHalfspace(chain, c, r, Side::Below);
        const PolyChain above = restrictHalfspace(chain, c, r, Side::Above);
        const double add = std::abs(canonicalMass(below) + canonicalMass(above) - canonicalMass(chain));
        worstAdd = std::max(worstAdd, add);
        o.require(add <= 1e-9, "restriction additivity on instance " + std::to_string(i));
        o.require(chainsEqual(below + above, chain), "restrictions do not sum to the chain on instance " + std::to_string(i));
    }
    o.detail << "max (integral - mass) " << worstExcess << ", worst quadrature gap " << worstQuad
             << ", worst additivity error " << worstAdd;
    return o;
}

Outcome lipschitzRestriction()
{
    Outcome o;
    oracle::Gen gen(707);
    const NormedSpace s = NormedSpace::pNorm(2, 2.0);
    int samples = 0, converged = 0;
    double worstLast = 0.0;
    for (int i = 0; i < 20; ++i) {
        const PolyChain chain = generateRandomChain(s, CoefficientGroup::integers(), 2, 4000 + i, unitBudget(2, 3, 1e6));
        for (int j = 0; j < 3; ++j, ++samples) {
            const Vector z = gen.point(2, 0.0, 1.0);
            const double r = gen.uniform(0.1, 0.5);
            RestrictionOptions opts;
            opts.stages = 6;
            opts.keep_stage_chains = false;
            const Restriction res = restrictLipschitz(chain, LipschitzFunction::distanceToPoint(s, z), r, opts);
            const double last = res.report.diff_mass.back();
            worstLast = std::max(worstLast, last);
            if (last < 1e-3) ++converged;
            const auto& su = res.report.size_u;
            for (std::size_t t = 1; t < su.size(); ++t)
                o.require(su[t] <= su[t - 1] + 1e-12 * std::max(1.0, su[0]),
                          "Sz(U) increases at chain " + std::to_string(i) + " radius " + std::to_string(j));
        }
    }
    o.require(converged >= 0.95 * samples, "only " + std::to_string(converged) + " of " + std::to_string(samples) + " radii converged");
    o.detail << converged << "/" << samples << " radii below 1e-3 at stage 6, worst final difference " << worstLast;
    return o;
}

// Minimum of M(q) + M(p - dq) over integer q in [-2, 2]^n, masses from vertex coordinates.
double enumeratedFlatNorm(const SimplicialComplex& c, const ComplexChain& p)
{
    const int k = p.k;
    const int nq = c.count(k + 1);
    auto volume = [&](int j, int idx) {
        const std::vector<int>& vs = c.simplex(j, idx);
        Matrix v(c.dim(), static_cast<Eigen::Index>(vs.size()));
        for (std::size_t a = 0; a < vs.size(); ++a) v.col(static_cast<Eigen::Index>(a)) = c.vertices().col(vs[a]);
        return j == 0 ? 1.0 : oracle::euclideanVolume(v);
    };
    double best = kInf;
    std::vector<int> q(static_cast<std::size_t>(nq), -2);
    for (;;) {
        Vector r = p.coeffs;
        double m = 0.0;
        for (int i = 0; i < nq; ++i) {
            m += std::abs(q[static_cast<std::size_t>(i)]) * volume(k + 1, i);
            for (const auto& [row, sign] : c.boundaryMatrix(k + 1)[static_cast<std::size_t>(i)])
                r(row) -= sign * q[static_cast<std::size_t>(i)];
        }
        for (int i = 0; i < r.size(); ++i) m += std::abs(r(i)) * volume(k, i);
        best = std::min(best, m);
        int pos = 0;
        while (pos < nq && q[static_cast<std::size_t>(pos)] == 2) q[static_cast<std::size_t>(pos++)] = -2;
        if (pos == nq) break;
        ++q[static_cast<std::size_t>(pos)];
    }
    return best;
}

Outcome flatNormCertificates()
{
    Outcome o;
    const NormedSpace s = NormedSpace::pNorm(2, 2.0);
    const SimplicialComplex c1 = SimplicialComplex::build(s, Box::unit(2), 1);
    PolyChain sq(s, CoefficientGroup::integers(), 2);
    Matrix t(2, 3);
    t << 0, 1, 1, 0, 0, 1;
    sq.addSimplex(1.0, t);
    t << 0, 1, 0, 0, 1, 1;
    sq.addSimplex(1.0, t);
    const ComplexChain bd = embedChain(boundary(sq), c1).chain;
    const double enumSquare = enumeratedFlatNorm(c1, bd);
    const double lpSquare = flatNormUpper(c1, bd).value;
    const double ipSquare = flatNormUpper(c1, bd, FlatNormOptions{FlatMode::Integer}).value;
    o.require(std::abs(enumSquare - 1.0) <= 1e-9 && std::abs(lpSquare - 1.0) <= 1e-9 && std::abs(ipSquare - 1.0) <= 1e-9,
              "square example");

    const NormedSpace line = NormedSpace::pNorm(1, 2.0);
    const SimplicialComplex l1 = SimplicialComplex::build(line, Box::unit(1), 1);
    PolyChain pair(line, CoefficientGroup::integers(), 0);
    pair.add(1.0, OrientedPolytope::point(Vector::Ones(1)));
    pair.add(-1.0, OrientedPolytope::point(Vector::Zero(1)));
    const ComplexChain pe = embedChain(pair, l1).chain;
    const double enumPair = enumeratedFlatNorm(l1, pe);
    const double lpPair = flatNormUpper(l1, pe).value;
    o.require(std::abs(enumPair - 1.0) <= 1e-9 && std::abs(lpPair - 1.0) <= 1e-9, "point pair example");

    const SimplicialComplex c4 = SimplicialComplex::build(s, Box::unit(2), 4);
    const SimplicialComplex c8 = SimplicialComplex::build(s, Box::unit(2), 8);
    double worstTri = -kInf, worstMass = -kInf, worstRefine = -kInf;
    for (int i = 0; i < 50; ++i) {
        const ChainBudget b = unitBudget(2, 3, 1e6);
        const PolyChain a = generateRandomChain(s, CoefficientGroup::integers(), 1, 5000 + 3 * i, b);
        const PolyChain bb = generateRandomChain(s, CoefficientGroup::integers(), 1, 5001 + 3 * i, b);
        const PolyChain cc = generateRandomChain(s, CoefficientGroup::integers(), 1, 5002 + 3 * i, b);
        const ComplexChain pa = embedChain(a, c8).chain, pb = embedChain(bb, c8).chain;
        const ComplexChain pc = embedChain(cc, c8).chain;
        const ComplexChain amb = complexDifference(pa, pb), amc = complexDifference(pa, pc), cmb = complexDifference(pc, pb);
        const double vab = flatNormUpper(c8, amb).value;
        const double tri = vab - flatNormUpper(c8, amc).value - flatNormUpper(c8, cmb).value;
        worstTri = std::max(worstTri, tri);
        o.require(tri <= 1e-6, "triangle inequality on pair " + std::to_string(i));
        const double overMass = vab - complexMass(c8, amb);
        worstMass = std::max(worstMass, overMass);
        o.require(overMass <= 1e-9, "F > M on pair " + std::to_string(i));
        const FlatDistance ab = flatDistance(a, bb, c8);
        const FlatDistance coarse = flatDistance(a, bb, c4);
        const double refine = ab.certificate.value - coarse.certificate.value - ab.discrepancy - coarse.discrepancy;
        worstRefine = std::max(worstRefine, refine);
        o.require(refine <= 1e-6, "refinement increased the value on pair " + std::to_string(i));
    }
    o.detail << "square " << lpSquare << " (enumerated " << enumSquare << "), pair " << lpPair
             << ", worst slack: triangle " << worstTri << ", mass " << worstMass << ", refinement " << worstRefine;
    return o;
}

ExperimentConfig baseConfig(const std::string& kind, int k, int instances, std::uint64_t seed)
{
    nlohmann::json j{{"kind", kind}, {"space", {{"dim", 2}, {"norm", {{"kind", "p"}, {"p", 2}}}}},
                     {"group", {{"kind", "Z"}}}, {"k", k}, {"instances", instances}, {"seed", seed}};
    return ExperimentConfig::fromJson(j);
}

void absorb(Outcome& o, const ExperimentReport& r, const std::string& label)
{
    int failed = 0;
    for (const ReportRow& row : r.rows)
        if (!row.pass) {
            if (failed == 0) o.require(false, label + " row '" + row.id + "': " + row.failure);
            ++failed;
        }
    o.detail << label << ": " << r.rows.size() - failed << "/" << r.rows.size() << " rows pass";
    for (const auto& [name, v] : r.aggregates) o.detail << ", " << name << " " << v;
    o.detail << "; ";
}

Outcome quantizationSoundness()
{
    Outcome o;
    ExperimentConfig zero = baseConfig("quantize", 0, 30, 9);
    zero.group = CoefficientGroup::reals();
    zero.coeff_grid = 0.05;
    absorb(o, runExperiment(zero), "0-chains");
    absorb(o, runExperiment(baseConfig("quantize", 1, 20, 9)), "1-chains");
    return o;
}

Outcome compactnessShadow()
{
    Outcome o;
    for (int k : {0, 1}) {
        ExperimentConfig c = baseConfig("compactness", k, 0, 11);
        c.max_n = 5.0;
        c.epsilons = {0.5, 0.25};
        c.net_sizes = {200, 400};
        const ExperimentReport r = runExperiment(c);
        absorb(o, r, "k=" + std::to_string(k));
        for (const ReportRow& row : r.rows)
            if (row.id.find("net ") != std::string::npos)
                o.detail << row.id << " size " << row.value("net_size") << " new cells " << row.value("new_classes")
                         << " log10 grid " << row.value("log10_grid_size") << "; ";
    }
    return o;
}

Outcome constantStability()
{
    Outcome o;
    struct Item {
        std::string kind, aggregate;
    };
    for (const Item& it : {Item{"eilenberg", "eilenberg_constant"}, Item{"cone_bounds", "cone_mass_constant"},
                           Item{"diffusion", "diffusion_constant"}}) {
        std::vector<double> vals;
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const ExperimentReport r = runExperiment(baseConfig(it.kind, 1, 20, seed));
            o.require(r.allPass(), it.kind + " seed " + std::to_string(seed) + " has failing rows");
            vals.push_back(r.aggregate(it.aggregate));
        }
        double lo = kInf, hi = -kInf, mean = 0.0;
        for (double v : vals) {
            o.require(std::isfinite(v), it.aggregate + " not finite");
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            mean += v / 3.0;
        }
        const double spread = hi == lo ? 0.0 : (hi - lo) / std::abs(mean);
        o.require(spread < 0.2, it.aggregate + " varies by " + std::to_string(spread));
        o.detail << it.aggregate << " " << vals[0] << "/" << vals[1] << "/" << vals[2] << " (spread " << spread << "); ";
    }
    return o;
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria()
{
    static const std::vector<std::pair<std::string, std::function<Outcome()>>> list{
        {"segment mass", segmentLemma},
        {"Euclidean mass oracle", euclideanOracle},
        {"scaling, shearing and one-direction scaling", scalingLemmas},
        {"density cross-oracle", densityCrossOracle},
        {"boundary of boundary and cone identity", boundaryAndCone},
        {"slicing consistency", slicingConsistency},
        {"Lipschitz restriction convergence", lipschitzRestriction},
        {"flat norm certificates", flatNormCertificates},
        {"quantization soundness", quantizationSoundness},
        {"compactness shadow", compactnessShadow},
        {"empirical constant stability", constantStability},
    };
    return list;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"acceptance checks"};
    int only = 0;
    app.add_option("--criterion", only, "run a single criterion (1-11)")->check(CLI::Range(1, 11));
    CLI11_PARSE(app, argc, argv);

    bool all = true;
    for (std::size_t i = 0; i < criteria().size(); ++i) {
        const int n = static_cast<int>(i) + 1;
        if (only != 0 && only != n) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria()[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::cout << "criterion " << n << " " << (o.pass ? "PASS" : "FAIL") << " [" << criteria()[i].first << "] "
                  << o.detail.str() << " (" << secs << " s)" << std::endl;
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
