#include "flatchain/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "flatchain/chain_io.hpp"
#include "flatchain/cones.hpp"
#include "flatchain/errors.hpp"
#include "flatchain/lipschitz.hpp"
#include "flatchain/mass.hpp"
#include "flatchain/slicing.hpp"

namespace flatchain {

// ---------------------------------------------------------------- generation

namespace {

GroupElement randomCoefficient(const CoefficientGroup& group, std::mt19937_64& rng)
{
    switch (group.kind()) {
    case GroupKind::Integers: {
        std::uniform_int_distribution<int> pick(1, 2);
        std::bernoulli_distribution negative(0.5);
        const int v = pick(rng);
        return GroupElement::integer(negative(rng) ? -v : v);
    }
    case GroupKind::IntegersModM: {
        std::uniform_int_distribution<std::int64_t> pick(1, group.modulus() - 1);
        return GroupElement::modular(pick(rng), group.modulus());
    }
    case GroupKind::Reals: break;
    }
    std::uniform_real_distribution<double> pick(0.25, 2.0);
    std::bernoulli_distribution negative(0.5);
    const double v = pick(rng);
    return GroupElement::real(negative(rng) ? -v : v);
}

Matrix randomSimplex(int dim, int k, const ChainBudget& budget, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const Vector width = budget.box.hi - budget.box.lo;
    const double s = budget.min_scale + (budget.max_scale - budget.min_scale) * unit(rng);
    Vector base(dim);
    for (int i = 0; i < dim; ++i) base(i) = budget.box.lo(i) + width(i) * (s + (1.0 - 2.0 * s) * unit(rng));
    Matrix v(dim, k + 1);
    v.col(0) = base;
    if (k == 0) return v;
    std::bernoulli_distribution axisAligned(0.5);
    if (axisAligned(rng)) {
        std::vector<int> axes(static_cast<std::size_t>(dim));
        for (int i = 0; i < dim; ++i) axes[static_cast<std::size_t>(i)] = i;
        std::shuffle(axes.begin(), axes.end(), rng);
        for (int j = 1; j <= k; ++j) {
            const int a = axes[static_cast<std::size_t>(j - 1)];
            v.col(j) = base;
            v(a, j) += (unit(rng) < 0.5 ? -1.0 : 1.0) * s * width(a);
        }
    } else {
        std::normal_distribution<double> gauss;
        for (int j = 1; j <= k; ++j) {
            Vector u(dim);
            for (int i = 0; i < dim; ++i) u(i) = gauss(rng);
            u /= std::max(u.norm(), 1e-12);
            v.col(j) = base + s * u.cwiseProduct(width);
        }
    }
    return v;
}

} // namespace

PolyChain generateRandomChain(const NormedSpace& space, const CoefficientGroup& group, int k, std::uint64_t seed,
                              const ChainBudget& budget)
{
    const int d = space.dim();
    if (k < 0 || k > d) throw DimensionError("chain dimension out of range");
    if (budget.box.lo.size() != d || budget.box.hi.size() != d) throw DimensionError("budget box dimension");
    if (budget.max_summands < 0 || !(budget.max_n > 0.0)) throw ArgumentError("infeasible chain budget");
    if (budget.max_summands == 0) return PolyChain(space, group, k);
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(attempt) * 0xBF58476D1CE4E5B9ULL + 1);
        std::uniform_int_distribution<int> count(1, budget.max_summands);
        PolyChain chain(space, group, k);
        const int n = count(rng);
        for (int i = 0; i < n; ++i) {
            const GroupElement g = randomCoefficient(group, rng);
            const Matrix v = randomSimplex(d, k, budget, rng);
            if (auto p = OrientedPolytope::simplex(v)) chain.add(g, *p);
        }
        chain = canonicalize(chain);
        if (chain.isZero()) continue;
        if (chainNorms(chain).n_value <= budget.max_n) return chain;
    }
    throw ArgumentError("chain budget infeasible after 100 attempts");
}

std::string chainDigest(const PolyChain& chain)
{
    const std::string text = chainToJson(chain).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

// ---------------------------------------------------------------- configuration

std::string toString(ExperimentKind kind)
{
    switch (kind) {
    case ExperimentKind::Lsc: return "lsc";
    case ExperimentKind::Eilenberg: return "eilenberg";
    case ExperimentKind::ConeBounds: return "cone_bounds";
    case ExperimentKind::Diffusion: return "diffusion";
    case ExperimentKind::Quantize: return "quantize";
    case ExperimentKind::Compactness: return "compactness";
    }
    return "unknown";
}

ExperimentKind experimentKindFromString(const std::string& name)
{
    for (ExperimentKind k : {ExperimentKind::Lsc, ExperimentKind::Eilenberg, ExperimentKind::ConeBounds,
                             ExperimentKind::Diffusion, ExperimentKind::Quantize, ExperimentKind::Compactness})
        if (toString(k) == name) return k;
    throw FormatError("unknown experiment kind '" + name + "'");
}

ExperimentConfig ExperimentConfig::fromJson(const nlohmann::json& j)
{
    static const std::set<std::string> known{
        "kind", "space", "group", "k", "instances", "seed", "output_dir", "max_summands", "max_n", "resolution",
        "delta", "coeff_grid", "epsilons", "net_sizes", "radius_candidates", "stages", "steps", "separation",
        "tolerances"};
    if (!j.is_object()) throw FormatError("experiment config must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) throw FormatError("unknown config key '" + key + "'");
    if (!j.contains("kind")) throw FormatError("config needs 'kind'");
    ExperimentConfig c;
    try {
        c.kind = experimentKindFromString(j.at("kind").get<std::string>());
        if (j.contains("space")) c.space = spaceFromJson(j.at("space"));
        if (j.contains("group")) c.group = groupFromJson(j.at("group"));
        if (j.contains("k")) c.k = j.at("k").get<int>();
        if (j.contains("instances")) c.instances = j.at("instances").get<int>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
        if (j.contains("max_summands")) c.max_summands = j.at("max_summands").get<int>();
        if (j.contains("max_n")) c.max_n = parseNumber(j.at("max_n"));
        if (j.contains("resolution")) c.resolution = j.at("resolution").get<int>();
        if (j.contains("delta")) c.delta = parseNumber(j.at("delta"));
        if (j.contains("coeff_grid")) c.coeff_grid = parseNumber(j.at("coeff_grid"));
        if (j.contains("epsilons")) {
            c.epsilons.clear();
            for (const auto& e : j.at("epsilons")) c.epsilons.push_back(parseNumber(e));
        }
        if (j.contains("net_sizes")) c.net_sizes = j.at("net_sizes").get<std::vector<int>>();
        if (j.contains("radius_candidates")) c.radius_candidates = j.at("radius_candidates").get<int>();
        if (j.contains("stages")) c.stages = j.at("stages").get<int>();
        if (j.contains("steps")) c.steps = j.at("steps").get<int>();
        if (j.contains("separation")) c.separation = parseNumber(j.at("separation"));
        if (j.contains("tolerances")) {
            for (const auto& [key, value] : j.at("tolerances").items()) {
                if (key == "comparison") c.tolerance = parseNumber(value);
                else if (key == "stability") c.stability = parseNumber(value);
                else throw FormatError("unknown tolerance '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad experiment config: ") + e.what());
    }
    if (c.instances < 0 || c.k < 0 || c.k > c.space.dim()) throw FormatError("config k or instances out of range");
    return c;
}

nlohmann::json ExperimentConfig::toJson() const
{
    nlohmann::json j;
    j["kind"] = toString(kind);
    j["space"] = spaceToJson(space);
    j["group"] = groupToJson(group);
    j["k"] = k;
    j["instances"] = instances;
    j["seed"] = seed;
    j["output_dir"] = output_dir;
    j["max_summands"] = max_summands;
    j["max_n"] = max_n;
    j["resolution"] = resolution;
    j["delta"] = delta;
    j["coeff_grid"] = coeff_grid;
    j["epsilons"] = epsilons;
    j["net_sizes"] = net_sizes;
    j["radius_candidates"] = radius_candidates;
    j["stages"] = stages;
    j["steps"] = steps;
    j["separation"] = separation;
    j["tolerances"] = {{"comparison", tolerance}, {"stability", stability}};
    return j;
}

// ---------------------------------------------------------------- reports

double ReportRow::value(const std::string& name) const
{
    for (const auto& [n, v] : values)
        if (n == name) return v;
    return std::numeric_limits<double>::quiet_NaN();
}

bool ExperimentReport::allPass() const
{
    return std::all_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.pass; });
}

double ExperimentReport::aggregate(const std::string& name) const
{
    for (const auto& [n, v] : aggregates)
        if (n == name) return v;
    return std::numeric_limits<double>::quiet_NaN();
}

namespace {

std::string csvField(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace

std::string reportCsv(const ExperimentReport& report)
{
    std::ostringstream os;
    os << "id,digest";
    for (const std::string& c : report.columns) os << ',' << csvField(c);
    os << ",pass,failure\n";
    for (const ReportRow& r : report.rows) {
        os << csvField(r.id) << ',' << r.digest;
        for (const std::string& c : report.columns) {
            const double v = r.value(c);
            os << ',' << (std::isnan(v) ? std::string() : formatDouble(v));
        }
        os << ',' << (r.pass ? "1" : "0") << ',' << csvField(r.failure) << '\n';
    }
    return os.str();
}

nlohmann::json reportJson(const ExperimentReport& report)
{
    nlohmann::json j;
    j["kind"] = report.kind;
    j["environment"] = report.environment;
    j["columns"] = report.columns;
    j["notes"] = report.notes;
    j["all_pass"] = report.allPass();
    nlohmann::json rows = nlohmann::json::array();
    for (const ReportRow& r : report.rows) {
        nlohmann::json row;
        row["id"] = r.id;
        row["digest"] = r.digest;
        row["pass"] = r.pass;
        row["failure"] = r.failure;
        nlohmann::json values = nlohmann::json::object();
        for (const auto& [n, v] : r.values) values[n] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(formatDouble(v));
        row["values"] = values;
        rows.push_back(row);
    }
    j["rows"] = rows;
    nlohmann::json agg = nlohmann::json::object();
    for (const auto& [n, v] : report.aggregates) agg[n] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(formatDouble(v));
    j["aggregates"] = agg;
    return j;
}

void emitReport(const ExperimentReport& report, const std::string& dir, bool csv, bool json)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    auto write = [&](const std::string& name, const std::string& text) {
        const std::string path = (std::filesystem::path(dir) / name).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write report file " + path);
        out << text;
        if (!out) throw Error("cannot write report file " + path);
    };
    if (csv) write("report.csv", reportCsv(report));
    if (json) write("report.json", reportJson(report).dump(2) + "\n");
}

double log10GridCount(long long cells, long long b)
{
    // sum_j 2^j C(cells, j) C(b, j), summed in log space
    const long long top = std::min(cells, b);
    double best = 0.0;
    std::vector<double> terms;
    for (long long j = 0; j <= top; ++j) {
        const double t = j * std::log(2.0) + std::lgamma(cells + 1.0) - std::lgamma(j + 1.0) - std::lgamma(cells - j + 1.0) +
                         std::lgamma(b + 1.0) - std::lgamma(j + 1.0) - std::lgamma(b - j + 1.0);
        terms.push_back(t);
        best = std::max(best, t);
    }
    double s = 0.0;
    for (double t : terms) s += std::exp(t - best);
    return (best + std::log(s)) / std::log(10.0);
}

// ---------------------------------------------------------------- experiments

namespace {

std::string environmentStamp()
{
    return std::string("gcc ") + __VERSION__ + ", C++" + std::to_string(__cplusplus);
}

std::string fmt(double x) { return formatDouble(x); }

struct RowBuilder {
    ReportRow row;

    RowBuilder(std::string id, std::string digest) { row.id = std::move(id), row.digest = std::move(digest); }
    void set(const std::string& name, double v) { row.values.emplace_back(name, v); }
    void require(bool ok, const std::string& inequality)
    {
        if (ok) return;
        row.pass = false;
        if (!row.failure.empty()) row.failure += "; ";
        row.failure += inequality;
    }
};

template <typename Body>
ReportRow runRow(const std::string& id, Body body)
{
    RowBuilder b(id, "");
    try {
        body(b);
    } catch (const std::exception& e) {
        b.row.pass = false;
        b.row.failure = std::string("error: ") + e.what();
    }
    return b.row;
}

ChainBudget budgetFor(const ExperimentConfig& c, const Box& box)
{
    ChainBudget b;
    b.max_summands = c.max_summands;
    b.box = box;
    b.max_n = c.max_n;
    return b;
}

std::uint64_t rowSeed(const ExperimentConfig& c, int i) { return c.seed * 1000003ULL + static_cast<std::uint64_t>(i); }

Vector randomPoint(const Box& box, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector x(box.lo.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = box.lo(i) + (box.hi(i) - box.lo(i)) * unit(rng);
    return x;
}

Matrix centerGrid(const NormedSpace& space, const Box& box, double delta)
{
    const int d = space.dim();
    double axes = 0.0;
    for (int i = 0; i < d; ++i) axes += space.norm(Vector::Unit(d, i));
    const double h = 2.0 * delta / axes;
    std::vector<int> counts(static_cast<std::size_t>(d));
    long long total = 1;
    for (int i = 0; i < d; ++i) {
        counts[static_cast<std::size_t>(i)] = std::max(1, static_cast<int>(std::ceil((box.hi(i) - box.lo(i)) / h - 1e-9)));
        total *= counts[static_cast<std::size_t>(i)] + 1;
    }
    if (total > 200000) throw ArgumentError("center grid too fine");
    Matrix centers(d, total);
    for (long long c = 0; c < total; ++c) {
        long long rest = c;
        for (int i = 0; i < d; ++i) {
            const int n = counts[static_cast<std::size_t>(i)];
            centers(i, c) = box.lo(i) + (box.hi(i) - box.lo(i)) * static_cast<double>(rest % (n + 1)) / n;
            rest /= n + 1;
        }
    }
    return centers;
}

PolyChain staircase(const NormedSpace& space, const CoefficientGroup& group, int n)
{
    PolyChain st(space, group, 1);
    for (int i = 0; i < n; ++i) {
        Matrix h(2, 2), v(2, 2);
        h << double(i) / n, double(i + 1) / n, double(i) / n, double(i) / n;
        v << double(i + 1) / n, double(i + 1) / n, double(i) / n, double(i + 1) / n;
        st.addSimplex(1.0, h);
        st.addSimplex(1.0, v);
    }
    return canonicalize(st);
}

void runLsc(const ExperimentConfig& c, ExperimentReport& r)
{
    if (c.space.dim() != 2) throw ArgumentError("lsc experiment needs a planar space");
    r.columns = {"n", "resolution", "staircase_mass", "diagonal_mass", "flat_distance", "discrepancy", "enclosed_area"};
    PolyChain diag(c.space, c.group, 1);
    Matrix dv(2, 2);
    dv << 0, 1, 0, 1;
    diag.addSimplex(1.0, dv);
    const double diagMass = mass(diag);
    double minStair = std::numeric_limits<double>::infinity();
    std::vector<double> flats;
    for (int j = 0; j < c.instances; ++j) {
        const int n = 1 << j;
        if (n > 64) throw ArgumentError("lsc staircases are limited to 64 steps");
        r.rows.push_back(runRow("n=" + std::to_string(n), [&](RowBuilder& b) {
            const PolyChain st = staircase(c.space, c.group, n);
            b.row.digest = chainDigest(st);
            const int res = std::max(n, c.resolution);
            const SimplicialComplex complex = SimplicialComplex::build(c.space, Box::unit(2), res);
            const FlatDistance fd = flatDistance(st, diag, complex, FlatNormOptions{FlatMode::Integer});
            const double m = mass(st);
            minStair = std::min(minStair, m);
            const double area = 1.0 / (2.0 * n);
            flats.push_back(fd.certificate.value);
            b.set("n", n);
            b.set("resolution", res);
            b.set("staircase_mass", m);
            b.set("diagonal_mass", diagMass);
            b.set("flat_distance", fd.certificate.value);
            b.set("discrepancy", fd.discrepancy);
            b.set("enclosed_area", area);
            b.require(fd.certificate.value <= area + fd.discrepancy + c.tolerance,
                      "flat_distance " + fmt(fd.certificate.value) + " > enclosed_area " + fmt(area));
            b.require(diagMass <= minStair + c.tolerance,
                      "M(diagonal) " + fmt(diagMass) + " > min staircase mass " + fmt(minStair));
        }));
    }
    r.rows.push_back(runRow("trend", [&](RowBuilder& b) {
        const bool shrinking = flats.size() < 2 || flats.back() < flats.front();
        b.require(shrinking, "flat distances do not decrease along the sequence");
    }));
    r.aggregates.emplace_back("lsc_gap", minStair - diagMass);
    r.aggregates.emplace_back("final_flat_distance", flats.empty() ? 0.0 : flats.back());
}

void runEilenberg(const ExperimentConfig& c, ExperimentReport& r)
{
    if (c.k < 1) throw ArgumentError("eilenberg experiment needs k >= 1");
    r.columns = {"function", "mass", "integral", "ratio"};
    const Box box = Box::unit(c.space.dim());
    double maxLinear = 0.0, maxDistance = 0.0;
    for (int i = 0; i < c.instances; ++i) {
        r.rows.push_back(runRow("instance " + std::to_string(i), [&](RowBuilder& b) {
            const PolyChain chain = generateRandomChain(c.space, c.group, c.k, rowSeed(c, i), budgetFor(c, box));
            b.row.digest = chainDigest(chain);
            std::mt19937_64 rng(rowSeed(c, i) ^ 0x5851F42D4C957F2DULL);
            const bool linear = i % 2 == 0;
            LipschitzFunction f = [&]() {
                if (linear) {
                    std::normal_distribution<double> gauss;
                    Vector cv(c.space.dim());
                    for (Eigen::Index a = 0; a < cv.size(); ++a) cv(a) = gauss(rng);
                    cv /= c.space.dualNorm(cv);
                    return LipschitzFunction::linear(c.space, cv, -cv.dot(Vector::Constant(cv.size(), 0.5)));
                }
                return LipschitzFunction::distanceToPoint(c.space, randomPoint(box, rng));
            }();
            const EilenbergResult e = eilenbergRatio(chain, f, c.steps, c.stages);
            b.set("function", linear ? 0.0 : 1.0);
            b.set("mass", mass(chain));
            b.set("integral", e.integral);
            b.set("ratio", e.ratio);
            b.require(std::isfinite(e.ratio), "ratio is not finite");
            if (linear) {
                maxLinear = std::max(maxLinear, e.ratio);
                b.require(e.ratio <= 1.0 + c.tolerance, "linear ratio " + fmt(e.ratio) + " > 1");
            } else {
                maxDistance = std::max(maxDistance, e.ratio);
            }
        }));
    }
    r.aggregates.emplace_back("max_linear_ratio", maxLinear);
    r.aggregates.emplace_back("eilenberg_constant", maxDistance);
}

void runConeBounds(const ExperimentConfig& c, ExperimentReport& r)
{
    r.columns = {"mass", "ratio", "identity_residual"};
    const Box box = Box::unit(c.space.dim());
    double worst = 0.0;
    for (int i = 0; i < c.instances; ++i) {
        r.rows.push_back(runRow("instance " + std::to_string(i), [&](RowBuilder& b) {
            const PolyChain chain = generateRandomChain(c.space, c.group, c.k, rowSeed(c, i), budgetFor(c, box));
            b.row.digest = chainDigest(chain);
            std::mt19937_64 rng(rowSeed(c, i) ^ 0x2545F4914F6CDD1DULL);
            const Vector z = randomPoint(box, rng);
            const double ratio = coneMassRatio(z, chain);
            const double residual = c.k >= 1 ? coneBoundaryCheck(z, chain) : 0.0;
            worst = std::max(worst, ratio);
            b.set("mass", mass(chain));
            b.set("ratio", ratio);
            b.set("identity_residual", residual);
            b.require(std::isfinite(ratio), "cone mass ratio is not finite");
            b.require(residual <= 1e-9, "cone identity residual " + fmt(residual) + " > 1e-9");
        }));
    }
    r.aggregates.emplace_back("cone_mass_constant", worst);
}

void runDiffusion(const ExperimentConfig& c, ExperimentReport& r)
{
    r.columns = {"r", "flat_p1", "flat_difference", "c_hat"};
    const int d = c.space.dim();
    const Box box = Box::unit(d);
    const double gap = c.separation;
    if (!(gap > 0.0 && gap < 0.8)) throw ArgumentError("separation must lie in (0, 0.8)");
    Box left = box, right = box;
    left.hi(0) = 0.5 - gap / 2.0;
    right.lo(0) = 0.5 + gap / 2.0;
    const double dist = gap / c.space.dualNorm(Vector::Unit(d, 0));
    const SimplicialComplex complex = SimplicialComplex::build(c.space, box, c.resolution);
    double worst = 0.0;
    for (int i = 0; i < c.instances; ++i) {
        r.rows.push_back(runRow("instance " + std::to_string(i), [&](RowBuilder& b) {
            ChainBudget bl = budgetFor(c, left), br = budgetFor(c, right);
            const PolyChain p1 = generateRandomChain(c.space, c.group, c.k, rowSeed(c, i), bl);
            const PolyChain p2 = generateRandomChain(c.space, c.group, c.k, rowSeed(c, i) ^ 0xD1B54A32D192ED03ULL, br);
            b.row.digest = chainDigest(p1);
            const FlatNormOptions opts{c.group.kind() == GroupKind::Reals ? FlatMode::Real : FlatMode::Integer};
            const double f1 = flatDistance(p1, p1.emptyLike(), complex, opts).certificate.value;
            const double f12 = flatDistance(p1, p2, complex, opts).certificate.value;
            const double chat = f12 > 0.0 ? std::max(0.0, dist * (f1 / f12 - 1.0)) : std::numeric_limits<double>::infinity();
            worst = std::max(worst, chat);
            b.set("r", dist);
            b.set("flat_p1", f1);
            b.set("flat_difference", f12);
            b.set("c_hat", chat);
            b.require(std::isfinite(chat), "diffusion constant is not finite");
        }));
    }
    r.aggregates.emplace_back("diffusion_constant", worst);
}

void runQuantize(const ExperimentConfig& c, ExperimentReport& r)
{
    r.columns = {"mass", "output_mass", "budget", "nominal_bound", "flat_value", "complex_value", "discrepancy", "centers"};
    const Box box = Box::unit(c.space.dim());
    const Matrix centers = centerGrid(c.space, box, c.delta);
    const SimplicialComplex complex = SimplicialComplex::build(c.space, box, c.resolution);
    const CoefficientNet net = c.coeff_grid > 0.0 ? CoefficientNet::grid(c.coeff_grid) : CoefficientNet::exact();
    ConeQuantizeOptions qopts;
    qopts.radius_candidates = c.radius_candidates;
    double worst = 0.0;
    for (int i = 0; i < c.instances; ++i) {
        r.rows.push_back(runRow("instance " + std::to_string(i), [&](RowBuilder& b) {
            const PolyChain chain = generateRandomChain(c.space, c.group, c.k, rowSeed(c, i), budgetFor(c, box));
            b.row.digest = chainDigest(chain);
            const QuantizeResult q = c.k == 0 ? quantizeZeroChain(chain, centers, c.delta, net)
                                              : coneQuantize(chain, centers, c.delta, net, qopts);
            const FlatNormOptions opts{c.group.kind() == GroupKind::Reals ? FlatMode::Real : FlatMode::Integer};
            const FlatDistance fd = flatDistance(chain, q.output, complex, opts);
            const double m = mass(chain), mq = mass(q.output);
            b.set("mass", m);
            b.set("output_mass", mq);
            b.set("budget", q.budget.total);
            b.set("nominal_bound", q.nominal_bound);
            const double flat = fd.measured();
            b.set("flat_value", flat);
            b.set("complex_value", fd.certificate.value);
            b.set("discrepancy", fd.discrepancy);
            b.set("centers", static_cast<double>(centers.cols()));
            if (q.budget.total > 0.0) worst = std::max(worst, flat / q.budget.total);
            b.require(flat <= q.budget.total + c.tolerance,
                      "flat_value " + fmt(flat) + " > budget " + fmt(q.budget.total));
            if (c.k == 0) {
                b.require(q.budget.total <= q.nominal_bound + c.tolerance,
                          "budget " + fmt(q.budget.total) + " > M(P) delta + eps/4 = " + fmt(q.nominal_bound));
                b.require(mq <= m + c.tolerance, "M(Q) " + fmt(mq) + " > M(P) " + fmt(m));
            }
        }));
    }
    r.aggregates.emplace_back("max_flat_over_budget", worst);
}

void runCompactness(const ExperimentConfig& c, ExperimentReport& r)
{
    if (c.k > 1) throw ArgumentError("compactness experiment supports k = 0 and k = 1");
    if (c.group.kind() != GroupKind::Integers) throw ArgumentError("compactness experiment uses integer coefficients");
    r.columns = {"epsilon", "delta", "budget", "class", "certificate_residual", "net_size", "classes", "new_classes",
                 "log10_grid_size", "chains"};
    const int d = c.space.dim();
    const Box box = Box::unit(d);
    std::vector<int> sizes = c.net_sizes;
    std::sort(sizes.begin(), sizes.end());
    if (sizes.empty()) throw ArgumentError("compactness needs net_sizes");
    const int total = sizes.back();
    const double q = c.max_n;

    std::vector<PolyChain> chains;
    for (int i = 0; i < total; ++i) chains.push_back(generateRandomChain(c.space, c.group, c.k, rowSeed(c, i), budgetFor(c, box)));
    const SimplicialComplex complex = SimplicialComplex::build(c.space, box, c.resolution);
    std::vector<Embedding> embedded;
    for (const PolyChain& ch : chains) embedded.push_back(embedChain(ch, complex));

    std::vector<double> eps = c.epsilons;
    std::sort(eps.begin(), eps.end());
    std::vector<int> finalNet;
    std::map<std::pair<int, int>, double> pairBound;
    auto measuredBound = [&](int a, int b) {
        const auto key = std::minmax(a, b);
        const auto it = pairBound.find(key);
        if (it != pairBound.end()) return it->second;
        double v;
        if (c.k == 0) {
            v = zeroChainFlatNorm(chains[static_cast<std::size_t>(a)] - chains[static_cast<std::size_t>(b)]);
        } else {
            const ComplexChain diff = complexDifference(embedded[static_cast<std::size_t>(a)].chain, embedded[static_cast<std::size_t>(b)].chain);
            v = flatNormUpper(complex, diff, FlatNormOptions{FlatMode::Integer}).value +
                embedded[static_cast<std::size_t>(a)].discrepancy + embedded[static_cast<std::size_t>(b)].discrepancy;
        }
        pairBound.emplace(key, v);
        return v;
    };
    // F(dT) <= F(T) gives a lower bound for 1-chains.
    std::vector<PolyChain> boundaries;
    if (c.k == 1)
        for (const PolyChain& ch : chains) boundaries.push_back(boundary(ch));
    auto boundaryGap = [&](int a, int b) {
        return zeroChainFlatNorm(boundaries[static_cast<std::size_t>(a)] - boundaries[static_cast<std::size_t>(b)]);
    };
    ConeQuantizeOptions qopts;
    qopts.radius_candidates = c.radius_candidates;

    for (double epsilon : eps) {
        const double delta = c.k == 0 ? epsilon / (2.0 * q) : epsilon / 8.0;
        const Matrix centers = centerGrid(c.space, box, delta);
        std::vector<int> classOf(static_cast<std::size_t>(total), -1);
        std::vector<double> budget(static_cast<std::size_t>(total), 0.0);
        std::vector<PolyChain> reps;
        double maxCoefficientMass = 0.0;
        const std::string tag = "eps=" + fmt(epsilon) + " ";

        for (int i = 0; i < total; ++i) {
            r.rows.push_back(runRow(tag + "chain " + std::to_string(i), [&](RowBuilder& b) {
                const PolyChain& p = chains[static_cast<std::size_t>(i)];
                b.row.digest = chainDigest(p);
                const QuantizeResult qr = c.k == 0 ? quantizeZeroChain(p, centers, delta, CoefficientNet::exact())
                                                   : coneQuantize(p, centers, delta, CoefficientNet::exact(), qopts);
                PolyChain check = p - qr.output - qr.residual;
                if (!qr.filling.isZero()) check = check - boundary(qr.filling);
                const double residual = mass(canonicalize(check));
                int cls = -1;
                for (std::size_t j = 0; j < reps.size() && cls < 0; ++j)
                    if (chainsEqual(reps[j], qr.output)) cls = static_cast<int>(j);
                if (cls < 0) {
                    cls = static_cast<int>(reps.size());
                    reps.push_back(qr.output);
                }
                double cm = 0.0;
                for (const SimpleChain& s : qr.output.summands()) cm += s.coeff.norm();
                maxCoefficientMass = std::max(maxCoefficientMass, cm);
                classOf[static_cast<std::size_t>(i)] = cls;
                budget[static_cast<std::size_t>(i)] = qr.budget.total;
                b.set("epsilon", epsilon);
                b.set("delta", delta);
                b.set("budget", qr.budget.total);
                b.set("class", cls);
                b.set("certificate_residual", residual);
                b.require(residual <= c.tolerance, "P - Q - dF - S has mass " + fmt(residual));
            }));
        }

        // Greedy epsilon-net under certified upper bounds for the flat distance.
        auto distanceBound = [&](int a, int b) {
            double best = std::numeric_limits<double>::infinity();
            if (classOf[static_cast<std::size_t>(a)] >= 0 && classOf[static_cast<std::size_t>(a)] == classOf[static_cast<std::size_t>(b)])
                best = budget[static_cast<std::size_t>(a)] + budget[static_cast<std::size_t>(b)];
            if (best <= epsilon) return best;
            if (c.k == 1 && boundaryGap(a, b) > epsilon) return best;
            return std::min(best, measuredBound(a, b));
        };
        std::vector<int> net;
        std::vector<int> netAt, classesAt;
        std::set<int> seen;
        std::size_t next = 0;
        for (int i = 0; i < total; ++i) {
            bool covered = false;
            for (int center : net)
                if (distanceBound(i, center) <= epsilon) {
                    covered = true;
                    break;
                }
            if (!covered) net.push_back(i);
            seen.insert(classOf[static_cast<std::size_t>(i)]);
            while (next < sizes.size() && i + 1 == sizes[next]) {
                netAt.push_back(static_cast<int>(net.size()));
                classesAt.push_back(static_cast<int>(seen.size()));
                ++next;
            }
        }

        const long long cells = c.k == 0 ? centers.cols() : centers.cols() * (centers.cols() - 1) / 2;
        const long long bound = c.k == 0 ? static_cast<long long>(std::floor(q)) : static_cast<long long>(std::ceil(maxCoefficientMass));
        const double logGrid = log10GridCount(cells, bound);
        for (std::size_t s = 0; s < sizes.size(); ++s) {
            r.rows.push_back(runRow(tag + "net " + std::to_string(sizes[s]), [&](RowBuilder& b) {
                const int newClasses = s == 0 ? classesAt[s] : classesAt[s] - classesAt[s - 1];
                b.set("epsilon", epsilon);
                b.set("delta", delta);
                b.set("chains", sizes[s]);
                b.set("net_size", netAt[s]);
                b.set("classes", classesAt[s]);
                b.set("new_classes", newClasses);
                b.set("log10_grid_size", logGrid);
                b.require(std::log10(static_cast<double>(std::max(1, netAt[s]))) <= logGrid + 1e-12,
                          "net size " + std::to_string(netAt[s]) + " exceeds the quantization grid size");
                if (s > 0)
                    b.require(netAt[s] - netAt[s - 1] <= newClasses,
                              "net growth " + std::to_string(netAt[s] - netAt[s - 1]) + " > new grid chains " +
                                  std::to_string(newClasses));
            }));
        }
        finalNet.push_back(netAt.back());
    }
    r.rows.push_back(runRow("net monotone in epsilon", [&](RowBuilder& b) {
        for (std::size_t i = 1; i < finalNet.size(); ++i)
            b.require(finalNet[i] <= finalNet[i - 1], "net size grows with epsilon at eps=" + fmt(eps[i]));
    }));
    for (std::size_t i = 0; i < eps.size(); ++i)
        r.aggregates.emplace_back("net_size_eps_" + fmt(eps[i]), finalNet[i]);
}

} // namespace

ExperimentReport runExperiment(const ExperimentConfig& config)
{
    ExperimentReport r;
    r.kind = toString(config.kind);
    r.environment = environmentStamp();
    switch (config.kind) {
    case ExperimentKind::Lsc: runLsc(config, r); break;
    case ExperimentKind::Eilenberg: runEilenberg(config, r); break;
    case ExperimentKind::ConeBounds: runConeBounds(config, r); break;
    case ExperimentKind::Diffusion: runDiffusion(config, r); break;
    case ExperimentKind::Quantize: runQuantize(config, r); break;
    case ExperimentKind::Compactness: runCompactness(config, r); break;
    }
    return r;
}

} // namespace flatchain
