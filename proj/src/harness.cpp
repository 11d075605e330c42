#include "gpc/harness.hpp"

#include "gpc/error.hpp"
#include "gpc/svg.hpp"

#include <json.hpp>

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <thread>

namespace gpc {

namespace {

using ojson = nlohmann::ordered_json;

ojson optional_number(const std::optional<double>& v) {
    if (!v || !std::isfinite(*v)) return nullptr;
    return *v;
}

ojson matrix_json(const Mat& m) {
    ojson rows = ojson::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        ojson row = ojson::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<double> prefix_difference(const std::vector<double>& a, const ExperimentTrace& b) {
    std::vector<double> out(a.size());
    double sa = 0.0, sb = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        sa += a[t];
        sb += b.steps[t].cost;
        out[t] = sa - sb;
    }
    return out;
}

void log_line(const RunOptions& opts, const std::string& line) {
    if (opts.log) *opts.log << line << '\n';
}

HorizonResult run_control_horizon(const ExperimentSpec& spec, TimeIndex T, const std::filesystem::path& dir,
                                  const RunOptions& opts) {
    const LdsSystem sys = build_system(spec);
    const StabilizingController ctrl = build_controller(spec);
    const CostPtr cost = build_cost(spec, T);
    const DisturbanceGenerator gen = build_generator(spec);

    GpcConfig cfg(sys, ctrl, cost, gen, T);
    cfg.eta = spec.eta;
    cfg.H = spec.H;
    cfg.optimizer = spec.optimizer;
    cfg.eta_rule = spec.eta_rule;
    cfg.eta_scale = spec.eta_scale;
    cfg.ons_delta = spec.ons_delta;
    const ExperimentTrace trace = run_gpc(cfg);
    const std::vector<Vec> w = trace.disturbances();
    const auto radii = trace.final_policy->radii();

    HindsightOptions hopts;
    hopts.iterations = spec.hindsight_iterations;
    hopts.restarts = spec.hindsight_restarts;
    hopts.seed = spec.seed;
    const HindsightPolicy best_M = best_policy_in_hindsight(w, cost, ctrl, sys, trace.H, radii, hopts);
    const ExperimentTrace fixed = run_fixed_policy(sys, ctrl, best_M.policy, gen, *cost, T);

    const std::vector<Mat> candidates = spec.linear_candidates.empty() ? std::vector<Mat>{ctrl.K}
                                                                      : spec.linear_candidates;
    const HindsightLinear best_K = best_linear_in_hindsight(w, *cost, sys, candidates);
    const ExperimentTrace linear = run_linear_baseline(sys, best_K.K, gen, *cost, T);

    HorizonResult r;
    r.T = T;
    r.H = trace.H;
    r.eta = trace.eta;
    r.gpc_cost = trace.total_cost;
    r.best_M_cost = fixed.total_cost;
    r.best_K_cost = linear.total_cost;
    r.regret_vs_best_M = trace.total_cost - fixed.total_cost;
    r.regret_vs_best_K = trace.total_cost - linear.total_cost;
    r.max_state_norm = trace.max_state_norm;
    r.bound_violations = trace.violations.total();
    r.hindsight_spread = best_M.restart_spread;
    double gap = 0.0;
    std::size_t count = 0;
    for (const auto& s : trace.steps) {
        if (s.t < trace.H) continue;
        gap += std::abs(s.cost - s.ideal_cost);
        ++count;
    }
    if (count > 0) r.mean_gap = gap / static_cast<double>(count);

    std::vector<double> costs(trace.steps.size()), xs(trace.steps.size());
    for (std::size_t t = 0; t < costs.size(); ++t) {
        costs[t] = trace.steps[t].cost;
        xs[t] = static_cast<double>(t + 1);
    }
    const auto regret_M = prefix_difference(costs, fixed);
    const auto regret_K = prefix_difference(costs, linear);

    std::filesystem::create_directories(dir);
    write_text_file(dir / "trace.csv", trace_to_csv(trace));
    write_text_file(dir / "trace_best_M.csv", trace_to_csv(fixed));
    write_text_file(dir / "trace_best_K.csv", trace_to_csv(linear));
    write_text_file(dir / "regret.svg",
                    line_chart_svg(spec.name + " (T = " + std::to_string(T) + ")", "t", "cumulative regret", xs,
                                   {{"vs best disturbance-action policy", regret_M},
                                    {"vs best linear controller", regret_K}}));

    ojson h;
    h["T"] = T;
    h["H"] = trace.H;
    h["eta"] = trace.eta;
    h["policy"] = ojson::parse(policy_to_json(best_M.policy));
    h["objective"] = best_M.total;
    h["residual"] = best_M.residual;
    h["restart_objectives"] = best_M.restart_objectives;
    h["restart_spread"] = best_M.restart_spread;
    h["best_K"] = matrix_json(best_K.K);
    h["best_K_cost"] = best_K.total;
    h["bound_violations"] = {{"state", trace.violations.state},
                             {"state_gap", trace.violations.state_gap},
                             {"action_gap", trace.violations.action_gap}};

    if (spec.K_star) {
        const StabilizingController star(*spec.K_star, ctrl.kappa, ctrl.gamma);
        const StabilityReport rep = verify_strong_stability(sys, star, std::max(50, 2 * trace.H + 2));
        const DisturbancePolicy M_star = sufficiency_policy(ctrl, star, sys, trace.H);
        const ExperimentTrace mimic = run_fixed_policy(sys, ctrl, M_star, gen, *cost, T);
        const ExperimentTrace direct = run_linear_baseline(sys, *spec.K_star, gen, *cost, T);
        double worst = 0.0;
        for (std::size_t t = 0; t < mimic.steps.size(); ++t)
            worst = std::max(worst, std::abs(mimic.steps[t].cost - direct.steps[t].cost));
        const double k = ctrl.kappa, g = ctrl.gamma;
        const double bound = 2.0 * cost->gradient_bound() * trace.constants.D * sys.W() * trace.H * sys.kappa_B() *
                             sys.kappa_B() * std::pow(k, 5) * std::pow(1.0 - g, trace.H + 1) / g;
        h["sufficiency"] = {{"K_star_stable", rep.passed},
                            {"policy_within_radii", M_star.feasible()},
                            {"max_step_cost_difference", worst},
                            {"per_step_bound", bound},
                            {"within_bound", worst <= bound}};
        if (!M_star.feasible()) log_line(opts, "note: comparator policy lies outside the policy radii");
    }
    write_text_file(dir / "hindsight.json", h.dump(2) + "\n");
    return r;
}

HorizonResult run_ons_horizon(const ExperimentSpec& spec, TimeIndex T, const std::filesystem::path& dir) {
    const SquareLossScenario a = run_ons_square_scenario(T, spec.ons_delta, true);
    const SquareLossScenario b = run_ons_square_scenario(T, std::log(static_cast<double>(T)), true);
    HorizonResult r;
    r.T = T;
    r.gpc_cost = a.learner_loss;
    r.best_M_cost = a.best_loss;
    r.regret_vs_best_M = a.regret;
    double mx = 0.0;
    for (double x : a.points) mx = std::max(mx, std::abs(x));
    r.max_state_norm = mx;

    std::filesystem::create_directories(dir);
    std::string csv = "t,x,cumulative_regret,x_log_delta,cumulative_regret_log_delta\n";
    std::vector<double> xs(a.points.size());
    for (std::size_t t = 0; t < a.points.size(); ++t) {
        xs[t] = static_cast<double>(t + 1);
        csv += std::to_string(t) + "," + format_number(a.points[t]) + "," + format_number(a.cumulative_regret[t]) +
               "," + format_number(b.points[t]) + "," + format_number(b.cumulative_regret[t]) + "\n";
    }
    write_text_file(dir / "ons_trace.csv", csv);
    write_text_file(dir / "regret.svg",
                    line_chart_svg(spec.name + " (T = " + std::to_string(T) + ")", "t", "cumulative regret", xs,
                                   {{"delta = " + format_number(spec.ons_delta), a.cumulative_regret},
                                    {"delta = ln T", b.cumulative_regret}}));
    ojson j;
    j["T"] = T;
    j["loss_scale"] = a.loss_scale;
    j["runs"] = ojson::array();
    for (const auto* s : {&a, &b})
        j["runs"].push_back({{"delta_init", s->delta_init},
                             {"regret", s->regret},
                             {"total_movement", s->total_movement},
                             {"final_point", s->final_point}});
    write_text_file(dir / "ons_scenario.json", j.dump(2) + "\n");
    return r;
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string trace_to_csv(const ExperimentTrace& trace) {
    std::string out = "t";
    if (!trace.steps.empty()) {
        const auto& s0 = trace.steps.front();
        for (Eigen::Index i = 0; i < s0.x.size(); ++i) out += ",x" + std::to_string(i);
        for (Eigen::Index i = 0; i < s0.u.size(); ++i) out += ",u" + std::to_string(i);
        for (Eigen::Index i = 0; i < s0.w.size(); ++i) out += ",w" + std::to_string(i);
    }
    out += ",cost,ideal_cost,policy_movement\n";
    for (const auto& s : trace.steps) {
        out += std::to_string(s.t);
        for (const Vec* v : {&s.x, &s.u, &s.w})
            for (Eigen::Index i = 0; i < v->size(); ++i) out += "," + format_number((*v)(i));
        out += "," + format_number(s.cost) + "," + format_number(s.ideal_cost) + "," + format_number(s.movement) +
               "\n";
    }
    return out;
}

std::optional<double> loglog_slope(const std::vector<double>& T, const std::vector<double>& regret) {
    if (T.size() != regret.size() || T.size() < 2) return std::nullopt;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(T.size());
    for (std::size_t i = 0; i < T.size(); ++i) {
        if (!(regret[i] > 0.0) || !(T[i] > 0.0)) return std::nullopt;
        const double x = std::log(T[i]), y = std::log(regret[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double den = n * sxx - sx * sx;
    if (den <= 0.0) return std::nullopt;
    return (n * sxy - sx * sy) / den;
}

RunSummary run_experiment(const ExperimentSpec& spec, const RunOptions& opts) {
    RunSummary summary;
    summary.name = spec.name;
    summary.directory = opts.out_dir / spec.name;
    std::filesystem::create_directories(summary.directory);
    for (TimeIndex T : spec.T) {
        const auto dir = summary.directory / ("T" + std::to_string(T));
        HorizonResult r = spec.scenario == Scenario::control ? run_control_horizon(spec, T, dir, opts)
                                                             : run_ons_horizon(spec, T, dir);
        log_line(opts, spec.name + " T=" + std::to_string(T) + " regret_vs_best_M=" +
                           (r.regret_vs_best_M ? format_number(*r.regret_vs_best_M) : "null"));
        summary.horizons.push_back(std::move(r));
    }
    std::vector<double> Ts, regrets;
    bool all = true;
    for (const auto& h : summary.horizons) {
        Ts.push_back(static_cast<double>(h.T));
        if (!h.regret_vs_best_M) all = false;
        regrets.push_back(h.regret_vs_best_M.value_or(0.0));
    }
    if (all) summary.slope_loglog = loglog_slope(Ts, regrets);
    write_text_file(summary.directory / "summary.json", summary_to_json(summary));
    return summary;
}

std::string summary_to_json(const RunSummary& s) {
    ojson j;
    j["name"] = s.name;
    j["T"] = ojson::array();
    j["regret_vs_best_M"] = ojson::array();
    j["regret_vs_best_K"] = ojson::array();
    j["mean_gap"] = ojson::array();
    j["max_state_norm"] = ojson::array();
    for (const auto& h : s.horizons) {
        j["T"].push_back(h.T);
        j["regret_vs_best_M"].push_back(optional_number(h.regret_vs_best_M));
        j["regret_vs_best_K"].push_back(optional_number(h.regret_vs_best_K));
        j["mean_gap"].push_back(optional_number(h.mean_gap));
        j["max_state_norm"].push_back(h.max_state_norm);
    }
    j["slope_loglog"] = optional_number(s.slope_loglog);
    return j.dump(2) + "\n";
}

SweepParam sweep_param_from_string(const std::string& name) {
    if (name == "H") return SweepParam::H;
    if (name == "eta") return SweepParam::eta;
    if (name == "gamma") return SweepParam::gamma;
    throw std::invalid_argument("sweep parameter must be H, eta or gamma");
}

const char* to_string(SweepParam p) {
    switch (p) {
        case SweepParam::H: return "H";
        case SweepParam::eta: return "eta";
        case SweepParam::gamma: return "gamma";
    }
    return "?";
}

std::vector<SweepRow> sweep(const ExperimentSpec& spec, SweepParam param, const std::vector<double>& values,
                            const RunOptions& opts, int threads) {
    if (values.empty()) throw SpecError(std::vector<SpecIssue>{{"/sweep/values", "no sweep values given"}});
    if (spec.scenario != Scenario::control) throw SpecError(std::vector<SpecIssue>{{"/scenario", "sweeps need a control scenario"}});
    std::vector<SpecIssue> issues;
    std::vector<ExperimentSpec> specs;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        const std::string ptr = "/sweep/values/" + std::to_string(i);
        if (!(v > 0.0) || !std::isfinite(v)) {
            issues.push_back({ptr, "sweep values must be positive"});
            continue;
        }
        ExperimentSpec s = spec;
        switch (param) {
            case SweepParam::H:
                if (v != std::floor(v)) issues.push_back({ptr, "H must be an integer"});
                s.H = static_cast<int>(v);
                break;
            case SweepParam::eta: s.eta = v; break;
            case SweepParam::gamma:
                if (v > 1.0) issues.push_back({ptr, "gamma must lie in (0, 1]"});
                s.controller->gamma = v;
                break;
        }
        specs.push_back(std::move(s));
    }
    if (!issues.empty()) throw SpecError(issues);

    std::vector<SweepRow> rows(specs.size());
    std::vector<std::exception_ptr> errors(specs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < specs.size(); i = next++) {
            try {
                RunOptions o;
                o.out_dir = opts.out_dir / spec.name / (std::string("sweep_") + to_string(param)) / std::to_string(i);
                rows[i] = SweepRow{values[i], run_experiment(specs[i], o)};
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int n = std::max(1, std::min<int>(threads, static_cast<int>(specs.size())));
    std::vector<std::thread> pool;
    for (int k = 1; k < n; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    for (const auto& r : rows)
        log_line(opts, std::string(to_string(param)) + "=" + format_number(r.value) + " regret=" +
                           format_number(r.summary.horizons.back().regret_vs_best_M.value_or(NAN)));
    return rows;
}

std::string sweep_table_csv(SweepParam param, const std::vector<SweepRow>& rows) {
    std::string out = std::string(to_string(param)) + ",final_regret,mean_gap\n";
    for (const auto& r : rows) {
        const auto& h = r.summary.horizons.back();
        out += format_number(r.value) + "," + format_number(h.regret_vs_best_M.value_or(NAN)) + "," +
               format_number(h.mean_gap.value_or(NAN)) + "\n";
    }
    return out;
}

}  // namespace gpc
