#pragma once

/**
 * Seeded experiment runner: random chain generation, the experiment kinds and
 * their CSV / JSON reports.
 */

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "flatchain/chains.hpp"
#include "flatchain/flatnorm.hpp"

namespace flatchain {

struct ChainBudget {
    int max_summands = 4;
    Box box;
    double max_n = 10.0;
    /// Summand diameters are drawn from [min_scale, max_scale] times the box width.
    double min_scale = 0.1;
    double max_scale = 0.5;
};

/// Deterministic in (space, group, k, seed, budget).  Canonical output with
/// N(chain) <= max_n and support in the box; ArgumentError after 100 failed
/// attempts.
PolyChain generateRandomChain(const NormedSpace& space, const CoefficientGroup& group, int k, std::uint64_t seed,
                              const ChainBudget& budget);

/// Hex FNV-1a digest of the canonical chain file text.
std::string chainDigest(const PolyChain& chain);

enum class ExperimentKind { Lsc, Eilenberg, ConeBounds, Diffusion, Quantize, Compactness };

std::string toString(ExperimentKind kind);
ExperimentKind experimentKindFromString(const std::string& name);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::ConeBounds;
    NormedSpace space = NormedSpace::pNorm(2, 2.0);
    CoefficientGroup group = CoefficientGroup::integers();
    int k = 1;
    int instances = 10;
    std::uint64_t seed = 1;
    std::string output_dir = "out";

    int max_summands = 4;
    double max_n = 10.0;
    int resolution = 8;
    double delta = 0.25;
    double coeff_grid = 0.0;
    std::vector<double> epsilons{0.5, 0.25};
    std::vector<int> net_sizes{200, 400};
    int radius_candidates = 32;
    int stages = 5;
    int steps = 400;
    double separation = 0.3;

    /// Comparison slack for inequality rows.
    double tolerance = 1e-6;
    double stability = 0.2;

    /// Rejects unknown keys with FormatError.
    static ExperimentConfig fromJson(const nlohmann::json& j);
    nlohmann::json toJson() const;
};

struct ReportRow {
    std::string id;
    std::string digest;
    std::vector<std::pair<std::string, double>> values;
    bool pass = true;
    std::string failure;

    double value(const std::string& name) const;
};

struct ExperimentReport {
    std::string kind;
    std::vector<std::string> columns;
    std::vector<ReportRow> rows;
    std::vector<std::pair<std::string, double>> aggregates;
    std::vector<std::string> notes;
    std::string environment;

    bool allPass() const;
    double aggregate(const std::string& name) const;
};

ExperimentReport runExperiment(const ExperimentConfig& config);

/// Writes <dir>/report.csv and/or <dir>/report.json; Error if unwritable.
void emitReport(const ExperimentReport& report, const std::string& dir, bool csv = true, bool json = true);
std::string reportCsv(const ExperimentReport& report);
nlohmann::json reportJson(const ExperimentReport& report);

/// Number of integer coefficient vectors on n cells with l1 norm at most b, as log10.
double log10GridCount(long long cells, long long b);

} // namespace flatchain
