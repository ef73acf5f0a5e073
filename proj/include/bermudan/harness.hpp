#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bermudan/analytic.hpp"
#include "bermudan/dual_tm.hpp"
#include "bermudan/estimate.hpp"
#include "bermudan/model.hpp"

namespace bermudan {

struct SampleSizes {
    std::size_t fit_policy = 50000;
    std::size_t fit_integrands = 50000;
    std::size_t lb = 100000;
    std::size_t ab_outer = 1000;
    std::size_t ab_inner = 500;
    std::size_t tm = 2500;
};

/// Seeds of the individual stages. Each stage draws only from its own seed.
struct StageSeeds {
    std::uint64_t policy = 0;
    std::uint64_t integrands = 0;
    std::uint64_t tm = 0;
    std::uint64_t lb = 0;
    std::uint64_t ab = 0;
};

StageSeeds derive_seeds(std::uint64_t root);

struct BoundSelection {
    bool lb = true;
    bool tm = true;
    bool ab = true;
};

/// One martingale upper bound: integrand basis variant and Ito sums kept.
struct TmVariant {
    int basis = 4;
    MartingaleTerms terms = MartingaleTerms::both;

    /// "TM" for the full basis-4 bound, else e.g. "TM_B2", "TM_W", "TM_P".
    std::string label() const;
    bool operator==(const TmVariant&) const = default;
};

struct ExperimentConfig {
    ModelParams model;
    double euler_step = 0.01;
    std::size_t cells = 10;
    /// Simulate policy-fit and lower-bound paths on the exercise dates only.
    /// Prices are sampled exactly, so this changes cost, not the law.
    bool policy_on_exercise_grid = true;
    SampleSizes samples;
    int policy_basis = 4;
    bool itm_only = true;
    IntegrandOptions integrands{RegressionSchedule::pooled, IntegrandTarget::stopped_payoff};
    std::vector<TmVariant> tm_variants{TmVariant{}};
    BoundSelection bounds;
    std::uint64_t seed = 20240611;
    /// Explicit stage seeds; when absent they are derived from `seed`.
    std::optional<StageSeeds> seeds;
    EuroPricerConfig euro;
    std::string report_path;

    /// Every violated constraint, in one pass.
    std::vector<std::string> errors() const;
    /// Throws std::invalid_argument joining errors().
    void validate() const;
    StageSeeds stage_seeds() const { return seeds ? *seeds : derive_seeds(seed); }
};

/// Parses a config document. Missing keys keep their defaults; unknown keys
/// and malformed values are reported together.
ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

struct StageTimings {
    double policy_fit = 0.0;
    double lb = 0.0;
    double integrand_fit = 0.0;
    double tm_simulation = 0.0;   // fresh paths shared by all variants
    double ab = 0.0;
};

struct ExperimentReport {
    ExperimentConfig config;
    StageSeeds seeds;
    std::vector<BoundEstimate> estimates;
    std::vector<std::string> diagnostics;
    StageTimings timings;

    const BoundEstimate* find(const std::string& kind) const;
    /// Wall time of the TM evaluation stage (fresh paths plus the bound).
    double tm_evaluation_time() const;
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Serialized report. Wall times are included only on request so that the
/// default output depends on the inputs alone.
std::string report_to_json(const ExperimentReport& report, bool timings = false);

struct PaperValue {
    double value = 0.0;
    std::optional<double> ci95;
};

/// Published estimate for (table, n, lambda, x0, column), if any.
std::optional<PaperValue> paper_value(const std::string& table, int n, double lambda, double x0,
                                      const std::string& column);

struct TableOptions {
    double scale = 1.0;
    bool with_n2 = false;
    std::uint64_t seed = 20240611;
};

struct TableCell {
    BoundEstimate estimate;
    std::optional<PaperValue> paper;
    /// |estimate - paper| <= 3 joint SE, the published SE taken as ci95 / 1.96.
    std::optional<bool> overlap;
};

struct TableRow {
    int n = 1;
    double lambda = 1.0;
    double x0 = 40.0;
    std::vector<TableCell> cells;   // one per table column
    double tm_evaluation_s = 0.0;
    double ab_s = 0.0;
};

struct TableResult {
    std::string id;
    std::vector<std::string> columns;
    std::vector<TableRow> rows;

    const TableRow* row(int n, double lambda, double x0) const;
    const TableCell* cell(int n, double lambda, double x0, const std::string& column) const;
    std::string csv() const;
};

/// Config used for one row of a table at the given sample-size scale.
ExperimentConfig table_row_config(const std::string& id, int n, double lambda, double x0, const TableOptions& opts);

/// Runs the rows of table "5.1", "5.2" or "5.4". Throws on an unknown id or
/// a scale outside (0, 1].
TableResult reproduce_table(const std::string& id, const TableOptions& opts = {});

}  // namespace bermudan
