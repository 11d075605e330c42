// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include "gpc/checks.hpp"
#include "gpc/controller.hpp"
#include "gpc/harness.hpp"
#include "gpc/oracle.hpp"
#include "gpc/spec.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace gpc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

int failures = 0;
std::size_t violations_5_to_7 = 0;
std::size_t runs_5_to_7 = 0;

void criterion(int id, const std::string& title, double budget_s, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = budget_s <= 0 || secs <= budget_s;
    const bool ok = o.passed && in_time;
    if (!ok) ++failures;
    std::printf("%s criterion %d (%s): %s; %.2fs%s\n", ok ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(), secs,
                in_time ? "" : " (over time budget)");
    std::fflush(stdout);
}

std::string num(double v) { return format_number(v); }

int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

Mat scalar(double v) { return Mat::Constant(1, 1, v); }

Mat random_psd(Rng& rng, int n) {
    std::normal_distribution<double> g(0, 1);
    Mat F(n, n);
    for (int i = 0; i < n * n; ++i) F(i) = g(rng);
    return F * F.transpose() / n + 0.1 * Mat::Identity(n, n);
}

double fitted_factor(const std::vector<double>& H, const std::vector<double>& gap) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(H.size());
    for (std::size_t i = 0; i < H.size(); ++i) {
        const double y = std::log(gap[i]);
        sx += H[i];
        sy += y;
        sxx += H[i] * H[i];
        sxy += H[i] * y;
    }
    return std::exp((n * sxy - sx * sy) / (n * sxx - sx * sx));
}

const std::string kScalar = R"("system": {"A": [[0.9]], "B": [[1.0]], "W": 1.0},
  "controller": {"K": [[0.5]], "kappa": 1.0, "gamma": 0.6},
  "cost": {"type": "quadratic", "Q": [[1.0]], "R": [[1.0]]}, "seed": 1)";
const std::string kTwoDim = R"("system": {"A": [[1.0, 0.3], [0.2, 0.9]], "B": [[1.0, 0.0], [0.0, 1.0]], "W": 1.0},
  "controller": {"K": [[0.6, 0.2], [0.2, 0.6]], "kappa": 1.0, "gamma": 0.55,
                 "certificate": {"H": [[1.0, 0.0], [0.0, 1.0]], "L": [[0.4, 0.1], [0.0, 0.3]]}},
  "cost": {"type": "quadratic", "Q": [[1.0, 0.0], [0.0, 1.0]], "R": [[1.0, 0.0], [0.0, 1.0]]}, "seed": 7)";

Outcome c1() {
    Rng rng = make_rng(101, 0);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const auto inst = checks::random_instance(rng, uniform_int(rng, 1, 6), uniform_int(rng, 1, 6));
        worst = std::max(worst, checks::round_trip_error(rng, inst.system, 1));
    }
    return {worst <= 1e-12, "max error " + num(worst) + " over 1000 instances"};
}

Outcome c2() {
    Rng rng = make_rng(102, 0);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
        const auto inst = checks::random_instance(rng, uniform_int(rng, 1, 4), uniform_int(rng, 1, 4));
        const auto cmp = checks::random_comparator(rng, inst);
        worst = std::max(worst, checks::sufficiency_identity_error(inst.system, inst.controller, cmp, uniform_int(rng, 1, 12)));
    }
    return {worst <= 1e-10, "max entrywise error " + num(worst) + " over 100 instances"};
}

Outcome c3() {
    Rng rng = make_rng(103, 0);
    checks::EvolutionErrors worst;
    for (int k = 0; k < 50; ++k) {
        const int dx = uniform_int(rng, 1, 4), du = uniform_int(rng, 1, 4), H = uniform_int(rng, 1, 10);
        const auto inst = checks::random_instance(rng, dx, du);
        const auto radii = policy_radii(inst.system.kappa_B(), 1.0, inst.controller.gamma, H);
        std::vector<DisturbancePolicy> P;
        for (int s = 0; s <= 3 * H + 1; ++s) P.push_back(checks::random_feasible_policy(rng, du, dx, radii));
        const auto w = checks::random_disturbances(rng, dx, 3 * H + 2, inst.system.W());
        const auto e = checks::evolution_errors(inst.system, inst.controller, P, w, 3 * H);
        worst.full = std::max(worst.full, e.full);
        worst.truncated = std::max(worst.truncated, e.truncated);
        worst.ideal = std::max(worst.ideal, e.ideal);
    }
    return {worst.full <= 1e-10 && worst.truncated <= 1e-10 && worst.ideal <= 1e-10,
            "full " + num(worst.full) + ", truncated " + num(worst.truncated) + ", ideal " + num(worst.ideal)};
}

Outcome c4() {
    Rng rng = make_rng(104, 0);
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        const int dx = uniform_int(rng, 1, 4), du = uniform_int(rng, 1, 3), H = uniform_int(rng, 1, 6);
        const auto inst = checks::random_instance(rng, dx, du);
        const auto radii = policy_radii(inst.system.kappa_B(), 1.0, inst.controller.gamma, H);
        const auto M = checks::random_feasible_policy(rng, du, dx, radii);
        const TimeIndex t = uniform_int(rng, 0, 3 * H);
        const auto w = checks::random_disturbances(rng, dx, t + 1, inst.system.W());
        const CostPtr cost = k % 2 ? checks::make_log_cosh_cost(dx, du)
                                   : make_quadratic_cost(random_psd(rng, dx), random_psd(rng, du));
        worst = std::max(worst, checks::gradient_relative_error(inst.system, inst.controller, *cost, M, w, t, 1e-6));
    }
    return {worst <= 1e-6, "max relative error " + num(worst) + " over 200 instances"};
}

Outcome c5() {
    const auto sys = LdsSystem(scalar(0.9), scalar(1.0), -1, -1, 1.0);
    const StabilizingController ctrl(scalar(0.5), 1.0, 0.5);
    DisturbanceParams p;
    p.kind = DisturbanceKind::sinusoidal;
    std::vector<double> Hs, gaps;
    std::string detail = "mean gaps";
    for (int H = 4; H <= 16; ++H) {
        GpcConfig cfg(sys, ctrl, make_quadratic_cost(scalar(1), scalar(1)), DisturbanceGenerator(p, 1, 1.0, 1), 10000);
        cfg.H = H;
        cfg.eta_rule = EtaRule::sqrt_horizon;
        const auto tr = run_gpc(cfg);
        violations_5_to_7 += tr.violations.total();
        ++runs_5_to_7;
        double gap = 0.0;
        for (std::size_t t = static_cast<std::size_t>(H); t < tr.steps.size(); ++t)
            gap += std::abs(tr.steps[t].cost - tr.steps[t].ideal_cost);
        gap /= static_cast<double>(tr.steps.size() - static_cast<std::size_t>(H));
        Hs.push_back(H);
        gaps.push_back(gap);
        detail += " " + num(gap);
    }
    const double factor = fitted_factor(Hs, gaps);
    return {factor >= 0.15 && factor <= 0.45, "fitted factor per unit H " + num(factor) + " (" + detail + ")"};
}

Outcome c6(const fs::path& out) {
    bool ok = true;
    std::string detail;
    for (const auto& [tag, body] : {std::pair{"scalar", kScalar}, std::pair{"twodim", kTwoDim}}) {
        for (const char* kind : {"sinusoidal", "sign_alternating"}) {
            const std::string name = std::string(tag) + "_" + kind;
            const std::string text = "{\"name\": \"" + name + "\", " + body + ", \"disturbance\": {\"kind\": \"" + kind +
                                     "\"}, \"T\": [1000, 10000, 100000], \"eta_rule\": \"sqrt_horizon\", "
                                     "\"hindsight\": {\"iterations\": 20000}}";
            const auto s = run_experiment(parse_spec_text(text), RunOptions{out, nullptr});
            bool per_step_down = true;
            for (std::size_t i = 1; i < s.horizons.size(); ++i)
                per_step_down = per_step_down && *s.horizons[i].regret_vs_best_M / static_cast<double>(s.horizons[i].T) <
                                                     *s.horizons[i - 1].regret_vs_best_M / static_cast<double>(s.horizons[i - 1].T);
            for (const auto& h : s.horizons) {
                violations_5_to_7 += h.bound_violations;
                ++runs_5_to_7;
            }
            const bool this_ok = s.slope_loglog && *s.slope_loglog <= 0.65 && per_step_down;
            ok = ok && this_ok;
            detail += (detail.empty() ? "" : "; ") + name + " slope " + (s.slope_loglog ? num(*s.slope_loglog) : "n/a") +
                      " regrets";
            for (const auto& h : s.horizons) detail += " " + num(*h.regret_vs_best_M);
        }
    }
    return {ok, detail};
}

Outcome c7() {
    bool ok = true;
    double worst_ratio = 0.0;
    for (int run = 0; run < 20; ++run) {
        const bool twodim = run % 2 == 1;
        const std::string text = std::string("{\"name\": \"c7\", ") + (twodim ? kTwoDim : kScalar) +
                                 ", \"disturbance\": {\"kind\": \"gaussian_clipped\", \"sigma\": 0.5}, \"T\": [2000]}";
        auto spec = parse_spec_text(text);
        spec.seed = 1000 + static_cast<std::uint64_t>(run);
        spec.eta_rule = run % 4 < 2 ? EtaRule::oco_memory : EtaRule::sqrt_horizon;
        const TimeIndex T = spec.T.front();
        const auto sys = build_system(spec);
        const auto ctrl = build_controller(spec);
        const auto cost = build_cost(spec, T);
        GpcConfig cfg(sys, ctrl, cost, build_generator(spec), T);
        cfg.eta_rule = spec.eta_rule;
        cfg.keep_policies = true;
        const auto tr = run_gpc(cfg);
        violations_5_to_7 += tr.violations.total();
        ++runs_5_to_7;
        const int H = tr.H;
        const auto resolved = resolve_gpc(cfg);

        HindsightOptions opts;
        opts.t_begin = H;
        const auto best = best_policy_in_hindsight(tr.disturbances(), cost, ctrl, sys, H, resolved.radii, opts);
        double learner = 0.0, G_f = 0.0, D = 0.0;
        for (std::size_t t = static_cast<std::size_t>(H); t < tr.steps.size(); ++t) {
            learner += tr.steps[t].ideal_cost;
            G_f = std::max(G_f, tr.steps[t].grad_norm);
        }
        for (const auto& s : tr.steps) D = std::max({D, s.x.norm(), s.u.norm()});
        const double a = sys.kappa_B() * std::pow(ctrl.kappa, 3);
        const double L = 2.0 * cost->gradient_bound() * D * sys.W() * a;
        double sq = 0.0;
        for (double r : resolved.radii) sq += r * r;
        const double diameter = 2.0 * std::sqrt(std::min(sys.state_dim(), sys.action_dim()) * sq);
        const double horizon = static_cast<double>(T - H);
        const double bound = ogd_memory_regret_bound(diameter, tr.eta, G_f, L, H + 1, horizon);
        const double regret = learner - best.total;
        ok = ok && regret <= bound;
        worst_ratio = std::max(worst_ratio, regret / bound);
    }
    return {ok, "max regret/bound " + num(worst_ratio) + " over 20 runs"};
}

Outcome c8() {
    bool ok = true;
    std::string detail;
    for (const bool log_delta : {false, true}) {
        std::vector<double> regrets;
        for (TimeIndex T : {1000, 10000, 100000}) {
            const double delta = log_delta ? std::log(static_cast<double>(T)) : 1e-4;
            regrets.push_back(run_ons_square_scenario(T, delta).regret);
        }
        const double r1 = regrets[1] / regrets[0], r2 = regrets[2] / regrets[1];
        ok = ok && r1 <= 2.5 && r2 <= 2.5;
        detail += std::string(detail.empty() ? "" : "; ") + (log_delta ? "delta=ln T" : "delta=1e-4") + " ratios " +
                  num(r1) + ", " + num(r2);
    }
    return {ok, detail};
}

Outcome c9() {
    return {violations_5_to_7 == 0 && runs_5_to_7 > 0,
            std::to_string(violations_5_to_7) + " violations over " + std::to_string(runs_5_to_7) + " runs"};
}

Outcome c10() {
    Rng rng = make_rng(110, 0);
    std::normal_distribution<double> g(0, 1);
    bool ok = true;
    for (int k = 0; k < 500; ++k) {
        const int du = uniform_int(rng, 1, 4), dx = uniform_int(rng, 1, 4), H = uniform_int(rng, 1, 6);
        const auto radii = policy_radii(std::abs(g(rng)) + 0.2, 1.0, 0.3, H);
        const auto M = checks::random_policy(rng, du, dx, radii, 3.0);
        const auto P = project_policy(M);
        ok = ok && P.feasible(1e-9) && project_policy(P).approx_equal(P, 1e-12);
        const double v = 5.0 * g(rng), r = 0.1 + std::abs(g(rng));
        const auto S = project_policy(DisturbancePolicy({scalar(v)}, {r}));
        ok = ok && S.block(1)(0, 0) == std::clamp(v, -r, r);
    }
    double worst = -1.0;
    for (int k = 0; k < 20; ++k) {
        const auto radii = policy_radii(1.0, 1.0, 0.3, 2);
        const auto M = checks::random_policy(rng, 3, 3, radii, 2.0);
        const auto P = project_policy(M);
        const double d = M.distance(P);
        for (int c = 0; c < 100; ++c) {
            const auto C = checks::random_feasible_policy(rng, 3, 3, radii);
            worst = std::max(worst, d - M.distance(C));
        }
    }
    ok = ok && worst <= 1e-12;
    return {ok, "500 random policies; worst dominance margin " + num(worst)};
}

Outcome c11() {
    bool ok = true;
    std::string detail;
    for (const char* name : {"scalar_sinusoid", "twodim_gaussian", "sufficiency_check"}) {
        const auto spec = parse_spec(fs::path(GPC_SPEC_DIR) / (std::string(name) + ".json"));
        for (TimeIndex T : spec.T) {
            const auto sys = build_system(spec);
            const auto ctrl = build_controller(spec);
            const auto cost = build_cost(spec, T);
            GpcConfig cfg(sys, ctrl, cost, build_generator(spec), T);
            cfg.H = spec.H;
            const auto resolved = resolve_gpc(cfg);
            HindsightOptions opts;
            opts.iterations = spec.hindsight_iterations;
            opts.restarts = spec.hindsight_restarts;
            opts.seed = spec.seed;
            const auto best = best_policy_in_hindsight(cfg.disturbances.stream(T), cost, ctrl, sys, resolved.H,
                                                       resolved.radii, opts);
            ok = ok && best.restart_spread <= 1e-6;
            detail += std::string(detail.empty() ? "" : ", ") + name + "/T" + std::to_string(T) + " spread " +
                      num(best.restart_spread);
        }
    }
    const auto sys = LdsSystem(scalar(0.9), scalar(1.0), -1, -1, 1.0);
    const StabilizingController ctrl(scalar(0.5), 1.0, 0.6);
    DisturbanceParams p;
    p.kind = DisturbanceKind::sinusoidal;
    const auto w = DisturbanceGenerator(p, 1, 1.0, 1).stream(5000);
    const auto radii = policy_radii(1, 1, 0.6, 1);
    // R = 1 puts the optimum on the radius, R = 5 inside it.
    for (double R : {1.0, 5.0}) {
        const auto cost = make_quadratic_cost(scalar(1), scalar(R));
        const auto best = best_policy_in_hindsight(w, cost, ctrl, sys, 1, radii);
        const HindsightObjective obj(sys, ctrl, cost, 1, w);
        const auto grid = oracle::grid_scan([&](double m) { return obj.summed_value(Vec::Constant(1, m)); },
                                            -radii[0], radii[0], 10000);
        const double miss = std::abs(best.policy.block(1)(0, 0) - grid.argmin);
        ok = ok && miss <= grid.resolution;
        detail += "; 1-d R=" + num(R) + " M=" + num(best.policy.block(1)(0, 0)) + " grid offset " + num(miss) +
                  " vs resolution " + num(grid.resolution);
    }
    return {ok, detail};
}

}  // namespace

int main() {
    const fs::path out = fs::temp_directory_path() / "gpc_acceptance";
    fs::remove_all(out);
    criterion(1, "dynamics round trip", 1, c1);
    criterion(2, "comparator telescoping identity", 5, c2);
    criterion(3, "state evolution identity", 10, c3);
    criterion(4, "gradient vs finite differences", 30, c4);
    criterion(5, "approximation decay in H", 60, c5);
    criterion(6, "sublinear regret", 600, [&] { return c6(out); });
    criterion(7, "OGD with memory regret bound", 120, c7);
    criterion(8, "ONS square-loss regret", 60, c8);
    criterion(9, "state and ideal-gap bounds", 0, c9);
    criterion(10, "projection correctness", 5, c10);
    criterion(11, "offline solver convexity", 60, c11);
    fs::remove_all(out);
    std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
