#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "flatchain/errors.hpp"
#include "flatchain/harness.hpp"
#include "flatchain/mass.hpp"

using namespace flatchain;

namespace {

ChainBudget budget2d(int summands = 4, double maxN = 10.0)
{
    ChainBudget b;
    b.box = Box::unit(2);
    b.max_summands = summands;
    b.max_n = maxN;
    return b;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

ExperimentConfig coneConfig(int instances)
{
    nlohmann::json j = nlohmann::json::parse(R"({
        "kind": "cone_bounds",
        "space": {"dim": 2, "norm": {"kind": "p", "p": "inf"}},
        "group": {"kind": "Z"}, "k": 1, "seed": 3})");
    j["instances"] = instances;
    return ExperimentConfig::fromJson(j);
}

} // namespace

TEST_SUITE("harness") {

TEST_CASE("random chains are deterministic in the seed")
{
    const NormedSpace s = NormedSpace::pNorm(2, 2.0);
    const PolyChain a = generateRandomChain(s, CoefficientGroup::integers(), 1, 42, budget2d());
    const PolyChain b = generateRandomChain(s, CoefficientGroup::integers(), 1, 42, budget2d());
    CHECK(chainDigest(a) == chainDigest(b));
    CHECK(chainsEqual(a, b));
    const PolyChain c = generateRandomChain(s, CoefficientGroup::integers(), 1, 43, budget2d());
    CHECK(chainDigest(a) != chainDigest(c));
}

TEST_CASE("empty budget gives the zero chain")
{
    const NormedSpace s = NormedSpace::pNorm(2, 2.0);
    CHECK(generateRandomChain(s, CoefficientGroup::reals(), 1, 7, budget2d(0)).isZero());
}

TEST_CASE("generated chains respect the N budget and the box")
{
    for (double p : {1.0, 2.0}) {
        const NormedSpace s = NormedSpace::pNorm(2, p);
        for (int k = 0; k <= 2; ++k)
            for (std::uint64_t seed = 0; seed < 100; seed += 3) {
                const PolyChain c = generateRandomChain(s, CoefficientGroup::integers(), k, seed, budget2d(4, 3.0));
                CHECK(chainNorms(c).n_value <= 3.0 + 1e-9);
                for (const Matrix& v : support(c)) {
                    CHECK(v.minCoeff() >= -1e-12);
                    CHECK(v.maxCoeff() <= 1.0 + 1e-12);
                }
            }
    }
}

TEST_CASE("config parsing")
{
    CHECK_THROWS_AS(ExperimentConfig::fromJson(nlohmann::json::parse(R"({"kind": "lsc", "colour": 1})")), FormatError);
    CHECK_THROWS_AS(ExperimentConfig::fromJson(nlohmann::json::parse(R"({"kind": "nope"})")), FormatError);
    CHECK_THROWS_AS(ExperimentConfig::fromJson(nlohmann::json::parse(R"({"instances": 2})")), FormatError);
    const ExperimentConfig c = coneConfig(5);
    const ExperimentConfig d = ExperimentConfig::fromJson(c.toJson());
    CHECK(d.toJson() == c.toJson());
    CHECK(d.instances == 5);
    CHECK(toString(d.kind) == std::string("cone_bounds"));
}

TEST_CASE("reports are byte-stable")
{
    const ExperimentConfig c = coneConfig(4);
    const ExperimentReport a = runExperiment(c);
    const ExperimentReport b = runExperiment(c);
    CHECK(a.rows.size() == 4);
    CHECK(a.allPass());
    CHECK(reportCsv(a) == reportCsv(b));
    CHECK(reportJson(a).dump() == reportJson(b).dump());

    const auto dir = std::filesystem::temp_directory_path() / "flatchain_report_test";
    std::filesystem::remove_all(dir);
    emitReport(a, (dir / "one").string());
    emitReport(b, (dir / "two").string());
    CHECK(slurp(dir / "one" / "report.csv") == slurp(dir / "two" / "report.csv"));
    CHECK(slurp(dir / "one" / "report.json") == slurp(dir / "two" / "report.json"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("an empty suite writes only the header")
{
    const ExperimentReport r = runExperiment(coneConfig(0));
    CHECK(r.rows.empty());
    CHECK(r.allPass());
    CHECK(reportCsv(r) == "id,digest,mass,ratio,identity_residual,pass,failure\n");
}

TEST_CASE("a failing row fails the report")
{
    ExperimentReport r = runExperiment(coneConfig(2));
    CHECK(r.allPass());
    ReportRow bad;
    bad.id = "forced";
    bad.pass = false;
    bad.failure = "forced failure";
    r.rows.push_back(bad);
    CHECK_FALSE(r.allPass());
    CHECK(reportCsv(r).find("forced failure") != std::string::npos);
    CHECK(reportJson(r).at("all_pass") == false);
}

TEST_CASE("grid counts")
{
    CHECK(log10GridCount(1, 0) == doctest::Approx(0.0));
    CHECK(log10GridCount(1, 2) == doctest::Approx(std::log10(5.0)));
    CHECK(log10GridCount(2, 1) == doctest::Approx(std::log10(5.0)));
    CHECK(log10GridCount(2, 2) == doctest::Approx(std::log10(13.0)));
}

}
