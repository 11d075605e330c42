#include "gpc/controller.hpp"
#include "gpc/error.hpp"
#include "gpc/oracle.hpp"

#include <doctest.h>

#include <cmath>

using namespace gpc;

namespace {
Mat scalar(double v) { return Mat::Constant(1, 1, v); }

LdsSystem scalar_system() { return LdsSystem(scalar(0.9), scalar(1.0), -1, -1, 1.0); }
StabilizingController scalar_controller() { return StabilizingController(scalar(0.5), 1.0, 0.6); }

DisturbanceGenerator generator(DisturbanceKind kind, double value = 0.0, std::uint64_t seed = 1) {
    DisturbanceParams p;
    p.kind = kind;
    p.value = Vec::Constant(1, value);
    return DisturbanceGenerator(p, 1, 1.0, seed);
}

GpcConfig scalar_config(DisturbanceKind kind, TimeIndex T) {
    return GpcConfig(scalar_system(), scalar_controller(), make_quadratic_cost(scalar(1), scalar(1)), generator(kind), T);
}
}  // namespace

TEST_CASE("zero disturbances keep everything at rest") {
    auto cfg = scalar_config(DisturbanceKind::zero, 200);
    cfg.keep_policies = true;
    const auto tr = run_gpc(cfg);
    REQUIRE(tr.steps.size() == 200);
    for (const auto& s : tr.steps) {
        CHECK(s.x.norm() == 0.0);
        CHECK(s.u.norm() == 0.0);
        CHECK(s.cost == 0.0);
    }
    for (const auto& M : tr.policies) CHECK(M.flatten().norm() == 0.0);
    CHECK(tr.total_cost == 0.0);
}

TEST_CASE("run_gpc is deterministic, feasible and recovers the disturbances") {
    auto cfg = scalar_config(DisturbanceKind::sinusoidal, 10000);
    cfg.keep_policies = true;
    cfg.eta_rule = EtaRule::sqrt_horizon;
    const auto a = run_gpc(cfg);
    const auto b = run_gpc(cfg);
    REQUIRE(a.steps.size() == b.steps.size());
    for (std::size_t t = 0; t < a.steps.size(); ++t) {
        REQUIRE(a.steps[t].x == b.steps[t].x);
        REQUIRE(a.steps[t].u == b.steps[t].u);
    }
    CHECK(a.total_cost == b.total_cost);
    CHECK(a.policies.size() == 10001);
    for (const auto& M : a.policies) REQUIRE(M.feasible(1e-9));
    const auto w = cfg.disturbances.stream(10000);
    double err = 0.0;
    for (std::size_t t = 0; t < w.size(); ++t) err = std::max(err, (a.steps[t].w - w[t]).norm());
    CHECK(err <= 1e-12);
    CHECK(a.violations.total() == 0);
}

TEST_CASE("restricted ONS optimizer stays feasible") {
    auto cfg = scalar_config(DisturbanceKind::sinusoidal, 2000);
    cfg.optimizer = Optimizer::ons_restricted;
    cfg.keep_policies = true;
    const auto tr = run_gpc(cfg);
    for (const auto& M : tr.policies) REQUIRE(M.feasible(1e-9));
}

TEST_CASE("run_gpc rejects unstable controllers and aborts on runaway states") {
    auto bad = GpcConfig(scalar_system(), StabilizingController(scalar(0.0), 1.0, 0.6),
                         make_quadratic_cost(scalar(1), scalar(1)), generator(DisturbanceKind::sinusoidal), 100);
    CHECK_THROWS_AS(run_gpc(bad), std::invalid_argument);
    auto tight = scalar_config(DisturbanceKind::constant, 100);
    tight.disturbances = generator(DisturbanceKind::constant, 0.5);
    tight.abort_factor = 1e-3;
    CHECK_THROWS_AS(run_gpc(tight), StateBoundAbort);
}

TEST_CASE("linear baseline") {
    const auto cost = make_quadratic_cost(scalar(1), scalar(1));
    const auto tr = run_linear_baseline(scalar_system(), scalar(0.5), generator(DisturbanceKind::constant, 0.25), *cost, 101);
    CHECK(std::abs(tr.steps[100].x(0) - 0.25 / 0.6) <= 1e-9);

    const auto zero = run_linear_baseline(scalar_system(), scalar(0.5), generator(DisturbanceKind::zero), *cost, 50);
    CHECK(zero.total_cost == 0.0);

    const auto gen = generator(DisturbanceKind::sinusoidal);
    const auto lin = run_linear_baseline(scalar_system(), scalar(0.5), gen, *cost, 500);
    const auto M0 = DisturbancePolicy::zeros(1, 1, policy_radii(1, 1, 0.6, 4));
    const auto fixed = run_fixed_policy(scalar_system(), scalar_controller(), M0, gen, *cost, 500);
    for (std::size_t t = 0; t < 500; ++t) REQUIRE(lin.steps[t].x == fixed.steps[t].x);
    CHECK(lin.total_cost == fixed.total_cost);
}

TEST_CASE("hindsight policy") {
    const auto sys = scalar_system();
    const auto ctrl = scalar_controller();
    const auto cost = make_quadratic_cost(scalar(1), scalar(1));

    const std::vector<Vec> zeros(300, Vec::Zero(1));
    const auto z = best_policy_in_hindsight(zeros, cost, ctrl, sys, 3, policy_radii(1, 1, 0.6, 3));
    CHECK(z.total == 0.0);
    CHECK(z.policy.flatten().norm() == 0.0);

    const auto w = generator(DisturbanceKind::sinusoidal).stream(2000);
    const auto radii = policy_radii(1, 1, 0.6, 1);
    const auto interior = make_quadratic_cost(scalar(1), scalar(5));
    const auto best = best_policy_in_hindsight(w, interior, ctrl, sys, 1, radii);
    const HindsightObjective obj(sys, ctrl, interior, 1, w);
    const auto grid = oracle::grid_scan([&](double m) { return obj.summed_value(Vec::Constant(1, m)); }, -radii[0],
                                        radii[0], 10000);
    CHECK(std::abs(best.policy.block(1)(0, 0) - grid.argmin) <= grid.resolution);
    CHECK(std::abs(grid.argmin) < radii[0] - 0.05);
    CHECK(best.total <= grid.value + 1e-9 * std::abs(grid.value));
    CHECK(best.restart_spread <= 1e-6);
    CHECK(best.restart_objectives.size() == 5);

    const auto w2 = generator(DisturbanceKind::sinusoidal).stream(1000);
    const auto h4 = best_policy_in_hindsight(w2, cost, ctrl, sys, 4, policy_radii(1, 1, 0.6, 4));
    CHECK(h4.restart_spread <= 1e-6);
    CHECK(h4.policy.feasible());
}

TEST_CASE("best linear controller in hindsight") {
    const auto sys = scalar_system();
    const auto cost = make_quadratic_cost(scalar(1), scalar(20));
    const auto w = generator(DisturbanceKind::constant, 0.5).stream(3000);
    CHECK_THROWS(best_linear_in_hindsight(w, *cost, sys, {}));
    const auto single = best_linear_in_hindsight(w, *cost, sys, {scalar(0.5)});
    CHECK(single.K(0, 0) == 0.5);
    CHECK(single.total == linear_rollout_cost(w, *cost, sys, scalar(0.5)));

    const auto analytic = oracle::grid_scan(
        [](double k) { return oracle::steady_state_scalar_cost(0.9, 1.0, k, 0.5, 1.0, 20.0); }, 0.2, 0.9, 7001);
    CHECK(analytic.argmin == doctest::Approx(0.5).epsilon(1e-3));
    auto grid = scalar_gain_grid(0.2, 0.9, 71);
    const auto best = best_linear_in_hindsight(w, *cost, sys, grid);
    CHECK(std::abs(best.K(0, 0) - analytic.argmin) <= 0.01 + 1e-12);
    grid.push_back(scalar(0.95));
    const auto again = best_linear_in_hindsight(w, *cost, sys, grid);
    CHECK(again.K(0, 0) == best.K(0, 0));
    CHECK(again.total == best.total);
}

TEST_CASE("regret series") {
    const auto tr = run_gpc(scalar_config(DisturbanceKind::sinusoidal, 300));
    for (double r : regret_series(tr, tr)) CHECK(r == 0.0);
    const auto r = regret_series(tr, 10.0);
    CHECK(r.size() == 300);
    CHECK(r.back() == doctest::Approx(tr.total_cost - 10.0));
}

TEST_CASE("enum names round trip") {
    CHECK(optimizer_from_string(to_string(Optimizer::ons_restricted)) == Optimizer::ons_restricted);
    CHECK(eta_rule_from_string(to_string(EtaRule::sqrt_horizon)) == EtaRule::sqrt_horizon);
    CHECK_THROWS(optimizer_from_string("adam"));
}
