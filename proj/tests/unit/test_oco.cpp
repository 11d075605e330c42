#include "gpc/error.hpp"
#include "gpc/oco.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace gpc;

namespace {
const BoxSet kUnit{Vec::Constant(1, -1.0), Vec::Constant(1, 1.0)};
ProjectionFn unit_interval() {
    return [](const Vec& z) { return project_box(z, kUnit); };
}
Vec v1(double x) { return Vec::Constant(1, x); }
}  // namespace

TEST_CASE("OGD with memory step") {
    auto s = make_ogd_memory(v1(0), 0.1, unit_interval());
    CHECK(ogd_memory_step(s, v1(0)).point(0) == 0.0);
    CHECK(ogd_memory_step(s, v1(1)).point(0) == doctest::Approx(-0.1).epsilon(1e-15));
    CHECK(ogd_memory_step(s, v1(100)).point(0) == -1.0);
    CHECK(ogd_memory_step(s, v1(1)).steps == 1);
    CHECK_THROWS_AS(make_ogd_memory(v1(0), 0.0, unit_interval()), std::invalid_argument);
}

TEST_CASE("ONS step") {
    const auto s0 = make_ons(v1(0), 1.0, kUnit);
    const auto s1 = ons_square_step(s0, v1(-2.0), Mat::Constant(1, 1, 2.0));
    CHECK(s1.point(0) == 1.0);
    CHECK(s1.A(0, 0) == 3.0);

    const auto s2 = ons_square_step(make_ons(v1(0.3), 1e-4, kUnit), v1(0.0), Mat::Constant(1, 1, 2.0));
    CHECK(s2.point(0) == 0.3);
    CHECK(s2.A(0, 0) == doctest::Approx(2.0001));

    const auto b = make_ons(Vec::Zero(2), 1.0, BallSet{Vec::Zero(2), 0.5});
    const auto b1 = ons_square_step(b, Vec::Constant(2, -10.0), Mat::Identity(2, 2));
    CHECK(b1.point.norm() == doctest::Approx(0.5));
}

TEST_CASE("A-norm projections are optimal") {
    Rng rng = make_rng(21, 0);
    std::normal_distribution<double> n(0, 1);
    for (int k = 0; k < 100; ++k) {
        Mat F(3, 3);
        for (int i = 0; i < 9; ++i) F(i) = n(rng);
        const Mat A = F * F.transpose() + 0.1 * Mat::Identity(3, 3);
        Vec z(3);
        for (int i = 0; i < 3; ++i) z(i) = 3.0 * n(rng);
        const auto anorm = [&](const Vec& x) { return (x - z).dot(A * (x - z)); };
        const BoxSet box{Vec::Constant(3, -1.0), Vec::Constant(3, 1.0)};
        const BallSet ball{Vec::Zero(3), 1.0};
        const Vec pb = project_box_in_norm(z, A, box);
        const Vec pr = project_ball_in_norm(z, A, ball);
        CHECK(pb.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
        CHECK(pr.norm() <= 1.0 + 1e-9);
        for (int j = 0; j < 50; ++j) {
            Vec c(3);
            for (int i = 0; i < 3; ++i) c(i) = n(rng);
            CHECK(anorm(pb) <= anorm(project_box(c, box)) + 1e-8);
            CHECK(anorm(pr) <= anorm(c / std::max(1.0, c.norm())) + 1e-8);
        }
    }
}

TEST_CASE("derive_constants") {
    OcoParams p;
    p.kappa = p.kappa_B = p.W = p.G = p.d = 1.0;
    p.gamma = 1.0;
    p.H = 1;
    p.T = 100;
    const auto c = derive_constants(p);
    CHECK(c.D == doctest::Approx(3.0));
    CHECK(c.G_f == doctest::Approx(9.0));
    CHECK(c.L == doctest::Approx(6.0));
    CHECK(c.D_M == doctest::Approx(1.0));
    CHECK(c.eta == doctest::Approx(1.0 / std::sqrt(9.0 * 15.0 * 100.0)));

    OcoParams q = p;
    q.G = 2.0;
    const auto c2 = derive_constants(q);
    CHECK(c2.G_f == doctest::Approx(2 * c.G_f));
    CHECK(c2.L == doctest::Approx(2 * c.L));
    CHECK(c2.D_M == c.D_M);

    q = p;
    q.T = 400;
    CHECK(derive_constants(q).eta / c.eta == doctest::Approx(0.5));
    CHECK(eta_sqrt_horizon(1, 1, 400) / eta_sqrt_horizon(1, 1, 100) == doctest::Approx(0.5));

    q = p;
    q.kappa = 2.0;
    q.gamma = 0.1;
    q.H = 2;
    try {
        derive_constants(q);
        FAIL("expected divergence");
    } catch (const std::domain_error& e) {
        CHECK(std::string(e.what()) == "state bound diverges; increase H");
    }
}

TEST_CASE("policy_regret") {
    CHECK(policy_regret({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(policy_regret({1, 2, 3}, {0, 0, 1}) == 5.0);
    CHECK_THROWS(policy_regret({1, 2}, {1}));
}

TEST_CASE("OGD with memory meets its regret bound on a fixed quadratic") {
    // f(x_{t-1}, x_t) = (x_{t-1} - c)² + (x_t - c)², so g(x) = 2(x - c)².
    const double c = 0.3, T = 5000;
    const double G_f = 4 * 1.3, L = 2 * 1.3, diam = 2.0;
    const double eta = diam / std::sqrt(G_f * (G_f + L * 4) * T);
    auto s = make_ogd_memory(v1(-1.0), eta, unit_interval());
    double prev = s.point(0), learner = 0.0;
    for (int t = 0; t < T; ++t) {
        const double x = s.point(0);
        learner += (prev - c) * (prev - c) + (x - c) * (x - c);
        prev = x;
        s = ogd_memory_step(s, v1(4 * (x - c)));
    }
    const double regret = learner - 0.0;
    CHECK(regret >= 0.0);
    CHECK(regret <= ogd_memory_regret_bound(diam, eta, G_f, L, 2, T));
}

TEST_CASE("ONS square-loss scenario") {
    const auto a = run_ons_square_scenario(1000, 1e-4, true);
    CHECK(a.loss_scale == doctest::Approx(1.0 / std::sqrt(1000.0)));
    CHECK(a.points.size() == 1000);
    CHECK(a.cumulative_regret.back() == doctest::Approx(a.regret));
    CHECK(a.best_loss == doctest::Approx(1000 * (1.0 / std::sqrt(1000.0) - 1) * (1.0 / std::sqrt(1000.0) - 1)));
    const auto b = run_ons_square_scenario(10000, 1e-4);
    const auto c = run_ons_square_scenario(100000, 1e-4);
    CHECK(c.regret / b.regret <= 2.5);
    CHECK(std::abs(c.final_point) <= 1.0);
}
