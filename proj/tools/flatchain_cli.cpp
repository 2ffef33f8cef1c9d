#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "flatchain/chain_io.hpp"
#include "flatchain/cones.hpp"
#include "flatchain/errors.hpp"
#include "flatchain/flatnorm.hpp"
#include "flatchain/harness.hpp"
#include "flatchain/lipschitz.hpp"
#include "flatchain/mass.hpp"
#include "flatchain/slicing.hpp"

using namespace flatchain;
using nlohmann::json;

namespace {

std::vector<double> parseList(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) throw ArgumentError("empty entry in list '" + text + "'");
        out.push_back(parseNumber(json(item)));
    }
    return out;
}

Vector toVector(const std::vector<double>& v)
{
    Vector x(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<Eigen::Index>(i)) = v[i];
    return x;
}

json vectorJson(const Vector& v)
{
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json budgetJson(const ErrorBudget& b)
{
    json items = json::array();
    for (const auto& [d, v] : b.items) items.push_back({{"description", d}, {"bound", v}});
    return {{"items", items}, {"total", b.total}};
}

void emitChain(const PolyChain& chain, const std::string& path, json& out, const std::string& key)
{
    if (path.empty()) {
        out[key] = chainToJson(chain);
    } else {
        writeChain(chain, path);
        out[key + "_file"] = path;
    }
}

json restrictionJson(const RestrictionReport& r)
{
    return {{"stage_mass", r.stage_mass}, {"diff_mass", r.diff_mass}, {"size_n", r.size_n}, {"size_p", r.size_p},
            {"size_u", r.size_u},         {"eta", r.eta},             {"converged", r.converged}};
}

Matrix readCenters(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open centers file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError(std::string("centers file: ") + e.what());
    }
    if (j.is_object() && j.contains("centers")) j = j.at("centers");
    if (!j.is_array() || j.empty()) throw FormatError("centers file must hold a nonempty array of points");
    const std::size_t d = j.at(0).size();
    Matrix c(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (j[i].size() != d) throw FormatError("centers have mixed dimensions");
        for (std::size_t a = 0; a < d; ++a) c(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(i)) = parseNumber(j[i][a]);
    }
    return c;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Polyhedral flat chains in normed spaces"};
    app.require_subcommand(1);

    std::string chainFile, outFile;

    auto* massCmd = app.add_subcommand("mass", "Mass with per-summand breakdown");
    bool direct = false;
    int directResolution = 0;
    massCmd->add_option("chain", chainFile, "chain file")->required();
    massCmd->add_flag("--direct", direct, "also evaluate the supremum definition directly");
    massCmd->add_option("--resolution", directResolution, "functional grid resolution for --direct");

    auto* sliceCmd = app.add_subcommand("slice", "Slice by a linear functional");
    std::string functional;
    double level = 0.0;
    sliceCmd->add_option("chain", chainFile)->required();
    sliceCmd->add_option("--functional", functional, "covector a,b,...")->required();
    sliceCmd->add_option("--level", level)->required();
    sliceCmd->add_option("--out", outFile, "write the slice here");

    auto* restrictCmd = app.add_subcommand("restrict", "Restrict to a norm ball");
    std::string ball;
    int stages = 6;
    restrictCmd->add_option("chain", chainFile)->required();
    restrictCmd->add_option("--ball", ball, "cx,cy,...,r")->required();
    restrictCmd->add_option("--stages", stages);
    restrictCmd->add_option("--out", outFile, "write the restricted chain here");

    auto* coneCmd = app.add_subcommand("cone", "Cone over a chain");
    std::string apex;
    coneCmd->add_option("chain", chainFile)->required();
    coneCmd->add_option("--apex", apex, "x,y,...")->required();
    coneCmd->add_option("--out", outFile);

    auto* quantCmd = app.add_subcommand("quantize", "Quantize onto centers");
    double delta = 0.0, coeffGrid = 0.0, epsilon = 0.0;
    std::string centersFile;
    quantCmd->add_option("chain", chainFile)->required();
    quantCmd->add_option("--delta", delta)->required();
    quantCmd->add_option("--centers-file", centersFile)->required();
    quantCmd->add_option("--coeff-grid", coeffGrid, "real coefficient grid step (0 = exact)");
    quantCmd->add_option("--epsilon", epsilon, "target for 0-chains (default 4 N step)");
    quantCmd->add_option("--out", outFile);

    auto* flatCmd = app.add_subcommand("flatnorm", "Flat norm upper bound on a grid complex");
    std::string boxText, mode = "real", fillingOut;
    int resolution = 4;
    flatCmd->add_option("chain", chainFile)->required();
    flatCmd->add_option("--box", boxText, "lo,hi or lo1,..,lod,hi1,..,hid")->required();
    flatCmd->add_option("--resolution", resolution);
    flatCmd->add_option("--mode", mode)->check(CLI::IsMember({"real", "int"}));
    flatCmd->add_option("--emit-filling", fillingOut);

    auto* expCmd = app.add_subcommand("experiment", "Experiment runner");
    auto* runCmd = expCmd->add_subcommand("run", "Run one experiment config");
    expCmd->require_subcommand(1);
    std::string configFile, outDir;
    runCmd->add_option("--config", configFile)->required();
    runCmd->add_option("--out", outDir);

    CLI11_PARSE(app, argc, argv);

    try {
        json out;
        if (*massCmd) {
            const PolyChain chain = canonicalize(readChain(chainFile));
            const MassBreakdown b = massBreakdown(chain);
            out["mass"] = b.total;
            json rows = json::array();
            for (std::size_t i = 0; i < b.summands.size(); ++i) {
                const SummandMass& s = b.summands[i];
                json row{{"coeff_norm", s.coeff_norm}, {"density", s.density}, {"volume", s.volume}, {"mass", s.mass}};
                const OrientedPolytope& p = chain.summands()[i].poly;
                if (p.k() > 0) {
                    const DensityReport rep = densityReport(chain.space(), p.frame().key);
                    row["optimizer"] = {{"starts", rep.starts}, {"evaluations", rep.evaluations},
                                        {"best_functional", vectorJson(rep.best_functional)}, {"tolerance", rep.tolerance}};
                }
                if (direct) row["mass_direct"] = massDirect(chain.space(), chain.summands()[i], DirectGrid{directResolution});
                rows.push_back(row);
            }
            out["summands"] = rows;
        } else if (*sliceCmd) {
            const PolyChain chain = readChain(chainFile);
            const PolyChain s = slice(chain, toVector(parseList(functional)), level);
            out["mass"] = mass(s);
            emitChain(s, outFile, out, "slice");
        } else if (*restrictCmd) {
            const PolyChain chain = readChain(chainFile);
            std::vector<double> v = parseList(ball);
            if (v.size() != static_cast<std::size_t>(chain.ambientDim() + 1)) throw ArgumentError("--ball needs d coordinates and a radius");
            const double radius = v.back();
            v.pop_back();
            const BallRestriction r = restrictBall(chain, toVector(v), radius, stages);
            out["exact"] = r.exact;
            out["mass"] = mass(canonicalize(r.inside));
            out["slice_mass"] = mass(r.slice);
            emitChain(canonicalize(r.inside), outFile, out, "inside");
            if (!r.exact) {
                const LipschitzFunction f = LipschitzFunction::distanceToPoint(chain.space(), toVector(v));
                RestrictionOptions opts;
                opts.stages = stages;
                opts.keep_stage_chains = false;
                out["report"] = restrictionJson(restrictLipschitz(chain, f, radius, opts).report);
            }
        } else if (*coneCmd) {
            const PolyChain chain = readChain(chainFile);
            const Vector z = toVector(parseList(apex));
            const PolyChain c = cone(z, chain);
            out["mass"] = mass(c);
            if (chain.k() >= 1) out["identity_residual"] = coneBoundaryCheck(z, chain);
            emitChain(c, outFile, out, "cone");
        } else if (*quantCmd) {
            const PolyChain chain = readChain(chainFile);
            const Matrix centers = readCenters(centersFile);
            const CoefficientNet net = coeffGrid > 0.0 ? CoefficientNet::grid(coeffGrid) : CoefficientNet::exact();
            const QuantizeResult q = chain.k() == 0 ? quantizeZeroChain(chain, centers, delta, net, epsilon)
                                                    : coneQuantize(chain, centers, delta, net);
            out["budget"] = budgetJson(q.budget);
            if (chain.k() == 0) {
                out["nominal_bound"] = q.nominal_bound;
                out["grid_fine_enough"] = q.grid_fine_enough;
            }
            emitChain(q.output, outFile, out, "output");
        } else if (*flatCmd) {
            const PolyChain chain = readChain(chainFile);
            const int d = chain.ambientDim();
            const std::vector<double> b = parseList(boxText);
            Box box{Vector(d), Vector(d)};
            if (b.size() == 2) {
                box.lo.setConstant(b[0]);
                box.hi.setConstant(b[1]);
            } else if (b.size() == static_cast<std::size_t>(2 * d)) {
                for (int i = 0; i < d; ++i) {
                    box.lo(i) = b[static_cast<std::size_t>(i)];
                    box.hi(i) = b[static_cast<std::size_t>(d + i)];
                }
            } else {
                throw ArgumentError("--box needs 2 or 2d numbers");
            }
            const SimplicialComplex complex = SimplicialComplex::build(chain.space(), box, resolution);
            const Embedding e = embedChain(chain, complex);
            FlatNormOptions opts;
            opts.mode = mode == "int" ? FlatMode::Integer : FlatMode::Real;
            const FlatNormCertificate cert = flatNormUpper(complex, e.chain, opts);
            out["value"] = cert.value;
            out["filling_mass"] = cert.filling_mass;
            out["residual_mass"] = cert.residual_mass;
            out["embedding"] = {{"exact", e.exact}, {"discrepancy", e.discrepancy}};
            if (chain.k() == 0 && chain.group().kind() != GroupKind::IntegersModM)
                out["exact_value"] = zeroChainFlatNorm(chain);
            out["solver"] = {{"name", cert.solver},         {"mode", mode},         {"optimal", cert.optimal},
                             {"relaxation_integral", cert.relaxation_integral}, {"iterations", cert.iterations},
                             {"nodes", cert.nodes}};
            if (!fillingOut.empty()) {
                writeChain(toPolyChain(complex, cert.filling), fillingOut);
                out["filling_file"] = fillingOut;
            }
        } else if (*runCmd) {
            std::ifstream in(configFile);
            if (!in) throw ArgumentError("cannot open config " + configFile);
            json cfg;
            try {
                in >> cfg;
            } catch (const json::exception& e) {
                throw FormatError(std::string("config: ") + e.what());
            }
            ExperimentConfig config = ExperimentConfig::fromJson(cfg);
            if (!outDir.empty()) config.output_dir = outDir;
            const ExperimentReport report = runExperiment(config);
            emitReport(report, config.output_dir);
            out["kind"] = report.kind;
            out["rows"] = report.rows.size();
            out["all_pass"] = report.allPass();
            json agg = json::object();
            for (const auto& [n, v] : report.aggregates) agg[n] = v;
            out["aggregates"] = agg;
            out["output_dir"] = config.output_dir;
            std::cout << out.dump(2) << "\n";
            return report.allPass() ? 0 : 1;
        }
        std::cout << out.dump(2) << "\n";
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
