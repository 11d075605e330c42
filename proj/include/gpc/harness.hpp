#pragma once

#include "gpc/controller.hpp"
#include "gpc/spec.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace gpc {

struct RunOptions {
    std::filesystem::path out_dir = "out";
    std::ostream* log = nullptr;  ///< progress lines; null for quiet
};

struct HorizonResult {
    TimeIndex T = 0;
    int H = 0;
    double eta = 0.0;
    double gpc_cost = 0.0;
    double best_M_cost = 0.0;                 ///< rollout cost of the hindsight policy
    std::optional<double> best_K_cost;
    std::optional<double> regret_vs_best_M;
    std::optional<double> regret_vs_best_K;
    std::optional<double> mean_gap;           ///< mean |c_t − f_t| over t ∈ [H, T)
    double max_state_norm = 0.0;
    std::size_t bound_violations = 0;
    double hindsight_spread = 0.0;
};

struct RunSummary {
    std::string name;
    std::vector<HorizonResult> horizons;
    std::optional<double> slope_loglog;
    std::filesystem::path directory;
};

/// Least-squares slope of log(regret) against log(T); empty unless there are
/// at least two horizons and every regret is positive.
std::optional<double> loglog_slope(const std::vector<double>& T, const std::vector<double>& regret);

/// Runs every horizon of the spec and writes, under out_dir/<name>:
/// summary.json and, per horizon, T<T>/trace.csv (GPC), trace_best_M.csv,
/// trace_best_K.csv and regret.svg. Throws whatever the controller throws.
RunSummary run_experiment(const ExperimentSpec& spec, const RunOptions& opts);

/// {"name", "T", "regret_vs_best_M", "regret_vs_best_K", "mean_gap",
///  "max_state_norm", "slope_loglog"}; missing values are null.
std::string summary_to_json(const RunSummary& summary);

/// Fixed columns: t, x*, u*, w*, cost, ideal_cost, policy_movement.
std::string trace_to_csv(const ExperimentTrace& trace);

enum class SweepParam { H, eta, gamma };
SweepParam sweep_param_from_string(const std::string& name);
const char* to_string(SweepParam p);

struct SweepRow {
    double value = 0.0;
    RunSummary summary;
};

/// One run per value with the spec's seed, each in its own directory
/// out_dir/<name>/sweep_<param>/<index>. Rows come back in input order.
/// The table lists the largest horizon's regret and mean gap.
std::vector<SweepRow> sweep(const ExperimentSpec& spec, SweepParam param, const std::vector<double>& values,
                            const RunOptions& opts, int threads = 1);

std::string sweep_table_csv(SweepParam param, const std::vector<SweepRow>& rows);

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for the rest.
std::string format_number(double v);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace gpc
