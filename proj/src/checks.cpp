#include "gpc/checks.hpp"

#include "gpc/error.hpp"
#include "gpc/harness.hpp"
#include "gpc/oracle.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace gpc::checks {

namespace {

Mat gaussian(Rng& rng, int r, int c) {
    std::normal_distribution<double> n(0.0, 1.0);
    Mat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = n(rng);
    return m;
}

Mat with_norm(Mat m, double target) {
    const double s = spectral_norm_svd(m);
    return s > 0.0 ? Mat(m * (target / s)) : m;
}

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

oracle::PolicyAt policy_at(const std::vector<DisturbancePolicy>& policies) {
    return [&policies](TimeIndex s) -> std::vector<Mat> {
        if (s < 0 || s >= static_cast<TimeIndex>(policies.size())) return {};
        return policies[static_cast<std::size_t>(s)].blocks();
    };
}

DisturbanceBuffer full_buffer(const std::vector<Vec>& w, int dim, double W) {
    DisturbanceBuffer buf(dim, w.size() + 1, W);
    for (const auto& v : w) buf.push(v);
    return buf;
}

double max_norm(const std::vector<Vec>& w) {
    double m = 1e-300;
    for (const auto& v : w) m = std::max(m, v.norm());
    return m;
}

class LogCoshCost final : public CostOracle {
public:
    LogCoshCost(int dx, int du) : dx_(dx), du_(du) {}
    int state_dim() const override { return dx_; }
    int action_dim() const override { return du_; }
    double value(TimeIndex, const Vec& x, const Vec& u) const override {
        double v = 0.5 * (x.squaredNorm() + u.squaredNorm());
        for (Eigen::Index i = 0; i < x.size(); ++i) v += std::log(std::cosh(x(i)));
        for (Eigen::Index i = 0; i < u.size(); ++i) v += std::log(std::cosh(u(i)));
        return v;
    }
    Vec grad_x(TimeIndex, const Vec& x, const Vec&) const override { return x.array().tanh().matrix() + x; }
    Vec grad_u(TimeIndex, const Vec&, const Vec& u) const override { return u.array().tanh().matrix() + u; }
    Mat hessian(TimeIndex, const Vec& x, const Vec& u) const override {
        Vec z(dx_ + du_);
        z << x, u;
        const Vec d = 1.0 - z.array().tanh().square() + 1.0;
        return d.asDiagonal();
    }
    double gradient_bound() const override { return std::sqrt(static_cast<double>(std::max(dx_, du_))) + 1.0; }
    double value_bound() const override { return 2.0 * (dx_ + du_); }
    double smoothness() const override { return 2.0; }

private:
    int dx_, du_;
};

}  // namespace

Instance random_instance(Rng& rng, int dx, int du) {
    const double closed_norm = uniform(rng, 0.2, 0.8);
    const Mat closed = with_norm(gaussian(rng, dx, dx), closed_norm);
    const Mat B = with_norm(gaussian(rng, dx, du), uniform(rng, 0.3, 1.0));
    const Mat K = with_norm(gaussian(rng, du, dx), uniform(rng, 0.1, 0.9));
    const Mat A = closed + B * K;
    const double gamma = 1.0 - spectral_norm_svd(closed);
    StabilityCertificate cert{Mat::Identity(dx, dx), closed};
    return Instance{LdsSystem::with_measured_bounds(A, B, 1.0), StabilizingController(K, 1.0, gamma, cert)};
}

StabilizingController random_comparator(Rng& rng, const Instance& inst) {
    const LdsSystem& sys = inst.system;
    const Mat closed = sys.A() - sys.B() * inst.controller.K;
    const double room = 1.0 - spectral_norm_svd(closed);
    const double b = std::max(spectral_norm_svd(sys.B()), 1e-12);
    const Mat delta = with_norm(gaussian(rng, sys.action_dim(), sys.state_dim()), 0.5 * room / b);
    const Mat K_star = inst.controller.K + delta;
    const Mat closed_star = sys.A() - sys.B() * K_star;
    const double kappa = std::max(1.0, spectral_norm_svd(K_star));
    const double gamma = 1.0 - spectral_norm_svd(closed_star);
    return StabilizingController(K_star, kappa, gamma,
                                 StabilityCertificate{Mat::Identity(sys.state_dim(), sys.state_dim()), closed_star});
}

DisturbancePolicy random_feasible_policy(Rng& rng, int du, int dx, const std::vector<double>& radii) {
    std::vector<Mat> blocks;
    for (double r : radii) blocks.push_back(with_norm(gaussian(rng, du, dx), r * uniform(rng, 0.05, 0.95)));
    return DisturbancePolicy(std::move(blocks), radii);
}

DisturbancePolicy random_policy(Rng& rng, int du, int dx, const std::vector<double>& radii, double scale) {
    std::vector<Mat> blocks;
    for (std::size_t i = 0; i < radii.size(); ++i) blocks.push_back(scale * gaussian(rng, du, dx));
    return DisturbancePolicy(std::move(blocks), radii);
}

std::vector<Vec> random_disturbances(Rng& rng, int dim, TimeIndex T, double W) {
    std::vector<Vec> w;
    for (TimeIndex t = 0; t < T; ++t) {
        Vec v = gaussian(rng, dim, 1);
        w.push_back(clip_to_ball(v * (W * uniform(rng, 0.1, 1.0) / std::max(v.norm(), 1e-300)), W));
    }
    return w;
}

double round_trip_error(Rng& rng, const LdsSystem& sys, int trials) {
    double worst = 0.0;
    for (int k = 0; k < trials; ++k) {
        const Vec x = gaussian(rng, sys.state_dim(), 1);
        const Vec u = gaussian(rng, sys.action_dim(), 1);
        const Vec w = clip_to_ball(gaussian(rng, sys.state_dim(), 1), sys.W());
        const Vec next = step_dynamics(sys, x, u, w);
        worst = std::max(worst, (recover_disturbance(sys, next, x, u) - w).cwiseAbs().maxCoeff());
    }
    return worst;
}

double sufficiency_identity_error(const LdsSystem& sys, const StabilizingController& base,
                                  const StabilizingController& comparator, int H) {
    const TransferCache cache(sys, base, H);
    const DisturbancePolicy M = sufficiency_policy(base, comparator, sys, H);
    const std::vector<PolicyRef> window(static_cast<std::size_t>(H + 1), std::cref(M));
    const Mat closed_star = sys.A() - sys.B() * comparator.K;
    double worst = 0.0;
    for (int i = 0; i <= H; ++i) {
        const Mat diff = transfer_matrix(cache, window, i) - oracle::matrix_power_naive(closed_star, i);
        worst = std::max(worst, diff.cwiseAbs().maxCoeff());
    }
    return worst;
}

EvolutionErrors evolution_errors(const LdsSystem& sys, const StabilizingController& ctrl,
                                 const std::vector<DisturbancePolicy>& policies, const std::vector<Vec>& w,
                                 TimeIndex t_max) {
    if (policies.empty()) throw std::invalid_argument("need at least one policy");
    const int H = policies.front().H();
    const int dx = sys.state_dim();
    if (static_cast<TimeIndex>(policies.size()) <= t_max || static_cast<TimeIndex>(w.size()) <= t_max)
        throw std::invalid_argument("policies and disturbances must cover t_max");
    const TransferCache cache(sys, ctrl, H);
    const auto at = policy_at(policies);
    const oracle::Rollout roll = oracle::rollout(sys.A(), sys.B(), ctrl.K, at, w, t_max + 1);
    const DisturbanceBuffer buf = full_buffer(w, dx, std::max(sys.W(), max_norm(w)));
    const DisturbancePolicy zero = DisturbancePolicy::zeros(policies.front().action_dim(), dx, policies.front().radii());
    std::vector<PolicyRef> history(policies.begin(), policies.end());

    EvolutionErrors e;
    for (TimeIndex t = 0; t <= t_max; ++t) {
        const Vec& brute = roll.x[static_cast<std::size_t>(t + 1)];
        const double scale = std::max(1.0, brute.cwiseAbs().maxCoeff());

        Vec full = Vec::Zero(dx);
        for (int i = 0; i <= t; ++i) full += history_transfer_matrix(cache, history, t, i) * w[static_cast<std::size_t>(t - i)];
        e.full = std::max(e.full, (full - brute).cwiseAbs().maxCoeff() / scale);

        std::vector<PolicyRef> window;
        for (TimeIndex s = t - H; s <= t; ++s)
            window.push_back(s < 0 ? std::cref(zero) : std::cref(policies[static_cast<std::size_t>(s)]));
        Vec trunc = Vec::Zero(dx);
        if (t - H >= 0) trunc = cache.closed_power(H + 1) * roll.x[static_cast<std::size_t>(t - H)];
        for (int i = 0; i <= 2 * H; ++i) trunc += transfer_matrix(cache, window, i) * buf.lookup(t - i);
        e.truncated = std::max(e.truncated, (trunc - brute).cwiseAbs().maxCoeff() / scale);

        // y_{t+1}: window M_{t−H} … M_{t+1}
        if (t + 1 < static_cast<TimeIndex>(policies.size())) {
            std::vector<PolicyRef> iw = window;
            iw.push_back(std::cref(policies[static_cast<std::size_t>(t + 1)]));
            const Vec y = ideal_state(cache, IdealWindow{t + 1, iw, std::cref(buf)});
            const Vec y_ref = oracle::ideal_state(sys.A(), sys.B(), ctrl.K, at, w, t + 1, H);
            e.ideal = std::max(e.ideal, (y - y_ref).cwiseAbs().maxCoeff() / std::max(1.0, y_ref.cwiseAbs().maxCoeff()));
        }
    }
    return e;
}

double gradient_relative_error(const LdsSystem& sys, const StabilizingController& ctrl, const CostOracle& cost,
                               const DisturbancePolicy& M, const std::vector<Vec>& w, TimeIndex t, double h) {
    const int du = M.action_dim(), dx = M.state_dim();
    const TransferCache cache(sys, ctrl, M.H());
    const DisturbanceBuffer buf = full_buffer(w, dx, std::max(sys.W(), max_norm(w)));
    const PolicyGradient g = grad_ideal_cost_diagonal(cost, cache, M, buf, t);
    auto f = [&](const Vec& m) {
        const DisturbancePolicy P = DisturbancePolicy::from_flat(m, du, dx, M.radii());
        const std::vector<Mat> blocks = P.blocks();
        const oracle::PolicyAt fixed = [&blocks](TimeIndex) { return blocks; };
        const Vec y = oracle::ideal_state(sys.A(), sys.B(), ctrl.K, fixed, w, t, M.H());
        return cost.value(t, y, oracle::ideal_action(ctrl.K, fixed, w, y, t));
    };
    const Vec fd = oracle::central_difference(f, M.flatten(), h);
    return (g.flat - fd).norm() / std::max(g.flat.norm(), 1e-12);
}

CostPtr make_log_cosh_cost(int dx, int du) { return std::make_shared<LogCoshCost>(dx, du); }

std::vector<CheckResult> verify_spec(const ExperimentSpec& spec) {
    std::vector<CheckResult> out;
    auto add = [&](std::string name, bool ok, std::string detail) {
        out.push_back({std::move(name), ok, std::move(detail)});
    };
    Rng rng = make_rng(spec.seed, 0x5eed);

    if (spec.scenario == Scenario::ons_counterexample) {
        for (TimeIndex T : spec.T) {
            const SquareLossScenario s = run_ons_square_scenario(T, spec.ons_delta);
            add("ons_scenario_T" + std::to_string(T), std::isfinite(s.regret) && std::abs(s.final_point) <= 1.0,
                "regret " + std::to_string(s.regret));
        }
        return out;
    }

    const LdsSystem sys = build_system(spec);
    const StabilizingController ctrl = build_controller(spec);
    const TimeIndex T = std::min<TimeIndex>(spec.T.front(), 2000);
    const CostPtr cost = build_cost(spec, T);
    const int dx = sys.state_dim(), du = sys.action_dim();
    const int H = spec.H.value_or(horizon_for(sys.kappa_B(), ctrl.kappa, ctrl.gamma, static_cast<double>(T)));
    const auto radii = policy_radii(sys.kappa_B(), ctrl.kappa, ctrl.gamma, H);

    const StabilityReport rep = verify_strong_stability(sys, ctrl, std::max(50, 2 * H + 2));
    add("strong_stability", rep.passed, rep.detail);

    const double rt = round_trip_error(rng, sys, 1000);
    add("dynamics_round_trip", rt <= 1e-12, "max error " + format_number(rt));

    const std::vector<Vec> w = build_generator(spec).stream(std::max<TimeIndex>(T, 3 * H + 2));
    std::vector<DisturbancePolicy> policies;
    for (TimeIndex s = 0; s <= 3 * H + 1; ++s) policies.push_back(random_feasible_policy(rng, du, dx, radii));
    const EvolutionErrors ev = evolution_errors(sys, ctrl, policies, w, 3 * H);
    add("state_evolution_identity", ev.full <= 1e-10 && ev.truncated <= 1e-10 && ev.ideal <= 1e-10,
        "full " + format_number(ev.full) + ", truncated " + format_number(ev.truncated) + ", ideal " +
            format_number(ev.ideal));

    double grad_err = 0.0;
    for (int k = 0; k < 5; ++k) {
        const TimeIndex t = std::min<TimeIndex>(static_cast<TimeIndex>(w.size()) - 1, 2 * H + 1 + 3 * k);
        grad_err = std::max(grad_err, gradient_relative_error(sys, ctrl, *cost, random_feasible_policy(rng, du, dx, radii), w, t));
    }
    add("gradient_vs_finite_differences", grad_err <= 1e-6, "max relative error " + format_number(grad_err));

    bool proj_ok = true;
    for (int k = 0; k < 100; ++k) {
        const DisturbancePolicy P = project_policy(random_policy(rng, du, dx, radii, 2.0));
        proj_ok = proj_ok && P.feasible() && project_policy(P).approx_equal(P, 1e-12);
    }
    add("projection_idempotent_feasible", proj_ok, "100 random policies");

    try {
        GpcConfig cfg(sys, ctrl, cost, build_generator(spec), T);
        cfg.eta = spec.eta;
        cfg.H = H;
        cfg.optimizer = spec.optimizer;
        cfg.eta_rule = spec.eta_rule;
        cfg.eta_scale = spec.eta_scale;
        cfg.ons_delta = spec.ons_delta;
        const ExperimentTrace tr = run_gpc(cfg);
        const auto& v = tr.violations;
        bool feasible = tr.final_policy->feasible();
        double recover = 0.0;
        const DisturbanceGenerator gen = build_generator(spec);
        for (const auto& s : tr.steps) recover = std::max(recover, (s.w - gen.emit(s.t)).cwiseAbs().maxCoeff());
        add("state_bounds", v.total() == 0,
            "violations: state " + std::to_string(v.state) + ", state gap " + std::to_string(v.state_gap) +
                ", action gap " + std::to_string(v.action_gap));
        add("disturbance_recovery", recover <= 1e-12, "max error " + format_number(recover));
        add("final_policy_feasible", feasible, "");
    } catch (const std::exception& e) {
        add("gpc_run", false, e.what());
    }

    if (spec.K_star) {
        const StabilizingController star(*spec.K_star, ctrl.kappa, ctrl.gamma);
        const double err = sufficiency_identity_error(sys, ctrl, star, H);
        add("sufficiency_identity", err <= 1e-10, "max entry error " + format_number(err));
    }
    return out;
}

std::string oracle_report(const ExperimentSpec& spec) {
    nlohmann::ordered_json j;
    j["name"] = spec.name;

    // Textbook one-step values for the learners.
    {
        BoxSet interval{Vec::Constant(1, -1.0), Vec::Constant(1, 1.0)};
        auto clip = [&](const Vec& v) { return project_box(v, interval); };
        j["ogd_step_small"] = ogd_memory_step(make_ogd_memory(Vec::Zero(1), 0.1, clip), Vec::Constant(1, 1.0)).point(0);
        j["ogd_step_clipped"] = ogd_memory_step(make_ogd_memory(Vec::Zero(1), 0.1, clip), Vec::Constant(1, 100.0)).point(0);
        const OnsState ons = ons_square_step(make_ons(Vec::Zero(1), 1.0, interval), Vec::Constant(1, -2.0),
                                             Mat::Constant(1, 1, 2.0));
        j["ons_step_unit"] = ons.point(0);
        OcoParams p;
        p.gamma = 1.0;
        const OcoConstants c = derive_constants(p);
        j["unit_constants"] = {{"D", c.D}, {"G_f", c.G_f}, {"L", c.L}, {"D_M", c.D_M}};
    }

    if (spec.scenario == Scenario::ons_counterexample) {
        auto runs = nlohmann::ordered_json::array();
        for (TimeIndex T : spec.T) {
            const SquareLossScenario s = run_ons_square_scenario(T, spec.ons_delta);
            runs.push_back({{"T", T}, {"regret", s.regret}, {"final_point", s.final_point}});
        }
        j["ons_scenario"] = runs;
        return j.dump(2) + "\n";
    }

    const LdsSystem sys = build_system(spec);
    const StabilizingController ctrl = build_controller(spec);
    auto horizons = nlohmann::ordered_json::array();
    for (TimeIndex T : spec.T) {
        const CostPtr cost = build_cost(spec, T);
        const int H = spec.H.value_or(horizon_for(sys.kappa_B(), ctrl.kappa, ctrl.gamma, static_cast<double>(T)));
        OcoParams p;
        p.kappa = ctrl.kappa;
        p.gamma = ctrl.gamma;
        p.kappa_B = sys.kappa_B();
        p.W = sys.W();
        p.G = cost->gradient_bound();
        p.d = std::max(sys.state_dim(), sys.action_dim());
        p.H = H;
        p.T = static_cast<double>(T);
        nlohmann::ordered_json h;
        h["T"] = T;
        h["H"] = H;
        try {
            const OcoConstants c = derive_constants(p);
            h["D"] = c.D;
            h["G_f"] = c.G_f;
            h["L"] = c.L;
            h["D_M"] = c.D_M;
            h["eta_oco_memory"] = c.eta;
        } catch (const std::exception& e) {
            h["constants_error"] = e.what();
        }
        h["eta_sqrt_horizon"] = eta_sqrt_horizon(p.G, p.W, p.T, spec.eta_scale);
        horizons.push_back(h);
    }
    j["horizons"] = horizons;

    const bool scalar = sys.state_dim() == 1 && sys.action_dim() == 1;
    if (scalar && spec.cost.kind == CostSpec::Kind::quadratic) {
        const double a = sys.A()(0, 0), b = sys.B()(0, 0), k = ctrl.K(0, 0);
        const double q = spec.cost.Q(0, 0), r = spec.cost.R(0, 0);
        if (spec.disturbance.kind == DisturbanceKind::constant) {
            const double wc = spec.disturbance.value(0);
            j["fixpoint"] = wc / (1.0 - (a - b * k));
            const double lo = (a - 1.0) / b, hi = (a + 1.0) / b;
            const auto best = oracle::grid_scan(
                [&](double kk) { return oracle::steady_state_scalar_cost(a, b, kk, wc, q, r); }, std::min(lo, hi) + 1e-6,
                std::max(lo, hi) - 1e-6, 100001);
            j["steady_state_best_K"] = best.argmin;
            j["steady_state_best_cost"] = best.value;
        }
        // Grid scan of Σ g_t over M^[1] with H = 1.
        const TimeIndex T = std::min<TimeIndex>(spec.T.front(), 500);
        const CostPtr cost = build_cost(spec, T);
        const auto radii = policy_radii(sys.kappa_B(), ctrl.kappa, ctrl.gamma, 1);
        const std::vector<Vec> w = build_generator(spec).stream(T);
        const auto grid = oracle::grid_scan(
            [&](double m) {
                return oracle::diagonal_objective(sys.A(), sys.B(), ctrl.K, {Mat::Constant(1, 1, m)}, w, *cost, 0, T);
            },
            -radii[0], radii[0], 10001);
        const HindsightPolicy solved = best_policy_in_hindsight(w, cost, ctrl, sys, 1, radii, {});
        j["grid_H1"] = {{"T", T},
                        {"grid_argmin", grid.argmin},
                        {"grid_value", grid.value},
                        {"resolution", grid.resolution},
                        {"solver_argmin", solved.policy.block(1)(0, 0)},
                        {"solver_value", solved.total}};
    }
    return j.dump(2) + "\n";
}

}  // namespace gpc::checks
