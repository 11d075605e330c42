#include "gpc/checks.hpp"
#include "gpc/error.hpp"
#include "gpc/policy.hpp"
#include "gpc/transfer.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace gpc;

namespace {
Mat scalar(double v) { return Mat::Constant(1, 1, v); }
}  // namespace

TEST_CASE("horizon_for") {
    CHECK(horizon_for(1, 1, 1, std::numbers::e) == 2);
    const double e4 = std::exp(4.0);
    CHECK(horizon_for(1, 1, 0.5, e4) == 16);
    CHECK(horizon_for(1, 1, 0.5, std::numbers::e * std::numbers::e) == 7);  // ceil gives 8, clamped to floor(T)
    for (double T : {2.0, 3.0, 10.0, 1e6}) CHECK(horizon_for(1, 1, 1, T) >= 1);
    CHECK(horizon_for(5, 2, 0.1, 3.0) <= 3);
}

TEST_CASE("policy_radii decay geometrically") {
    const auto r = policy_radii(2.0, 1.5, 0.25, 4);
    REQUIRE(r.size() == 4);
    CHECK(r[0] == doctest::Approx(2.0 * 3.375 * 0.75));
    for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i] / r[i - 1] == doctest::Approx(0.75));
}

TEST_CASE("policy_action") {
    const StabilizingController ctrl(scalar(0.5), 1.0, 0.6);
    DisturbanceBuffer buf(1, 4, 1.0);
    buf.push(Vec::Constant(1, 1.0));
    const DisturbancePolicy M({scalar(0.2)}, {1.0});
    CHECK(policy_action(ctrl, M, Vec::Constant(1, 2.0), buf, 1)(0) == doctest::Approx(-0.8).epsilon(1e-15));

    const auto zero = DisturbancePolicy::zeros(1, 1, {1.0});
    CHECK(policy_action(ctrl, zero, Vec::Constant(1, 2.0), buf, 1)(0) == -1.0);
    CHECK(policy_action(ctrl, M, Vec::Zero(1), DisturbanceBuffer(1, 4, 1.0), 0)(0) == 0.0);
}

TEST_CASE("flatten round trip and block order") {
    std::vector<Mat> blocks{Mat::Constant(2, 3, 1.0), Mat::Constant(2, 3, 2.0)};
    blocks[0](1, 2) = 7.0;
    const DisturbancePolicy M(blocks, {10.0, 10.0});
    const Vec f = M.flatten();
    CHECK(f.size() == 12);
    CHECK(f(5) == 7.0);
    CHECK(f(6) == 2.0);
    CHECK(DisturbancePolicy::from_flat(f, 2, 3, {10.0, 10.0}).approx_equal(M, 0.0));
    CHECK_THROWS(DisturbancePolicy({Mat::Zero(2, 3), Mat::Zero(3, 3)}, {1.0, 1.0}));
}

TEST_CASE("projection") {
    const DisturbancePolicy big({scalar(5.0)}, {1.0});
    CHECK(project_policy(big).block(1)(0, 0) == 1.0);

    Rng rng = make_rng(3, 0);
    std::normal_distribution<double> n(0, 1);
    const std::vector<double> radii{1.0, 0.5, 0.25};
    for (int k = 0; k < 500; ++k) {
        const auto M = checks::random_policy(rng, 2, 3, radii, 4.0);
        const auto P = project_policy(M);
        REQUIRE(P.feasible(1e-9));
        CHECK(project_policy(P).approx_equal(P, 1e-12));
    }
    const auto inside = checks::random_feasible_policy(rng, 2, 2, radii);
    CHECK(project_policy(inside).approx_equal(inside, 0.0));

    Mat a(3, 3);
    for (int i = 0; i < 9; ++i) a(i) = 3.0 * n(rng);
    const Mat p = project_spectral_ball(a, 1.0);
    CHECK(spectral_norm_svd(p) <= 1.0 + 1e-12);
    for (int k = 0; k < 200; ++k) {
        Mat c(3, 3);
        for (int i = 0; i < 9; ++i) c(i) = n(rng);
        c = project_spectral_ball(c, 1.0);
        CHECK((a - p).norm() <= (a - c).norm() + 1e-12);
    }
}

TEST_CASE("strong stability verification") {
    const LdsSystem sys(scalar(0.9), scalar(1.0), -1, -1, 1.0);
    CHECK(verify_strong_stability(sys, StabilizingController(scalar(0.5), 1.0, 0.6), 200).passed);

    Mat A(2, 2);
    A << 1.1, 0, 0, 0.5;
    const LdsSystem unstable(A, Mat::Identity(2, 2), -1, -1, 1.0);
    const auto rep = verify_strong_stability(unstable, StabilizingController(Mat::Zero(2, 2), 1.0, 0.1), 50);
    CHECK_FALSE(rep.passed);
    CHECK(rep.first_violation.has_value());

    const LdsSystem dead(scalar(0.7), scalar(1.0), -1, -1, 1.0);
    CHECK(verify_strong_stability(dead, StabilizingController(scalar(0.7), 1.0, 1.0), 20).passed);

    const StabilityCertificate singular{Mat::Zero(1, 1), scalar(0.4)};
    CHECK_FALSE(verify_strong_stability(sys, StabilizingController(scalar(0.5), 1.0, 0.6, singular), 10).passed);
    const StabilityCertificate ok{scalar(1.0), scalar(0.4)};
    CHECK(verify_strong_stability(sys, StabilizingController(scalar(0.5), 1.0, 0.6, ok), 10).passed);
}

TEST_CASE("sufficiency policy") {
    const LdsSystem sys(scalar(0.9), scalar(1.0), -1, -1, 1.0);
    const StabilizingController K(scalar(0.5), 1.0, 0.6), Kstar(scalar(0.7), 1.0, 0.8);
    const auto M = sufficiency_policy(K, Kstar, sys, 3);
    CHECK(M.block(1)(0, 0) == doctest::Approx(-0.2));
    CHECK(M.block(2)(0, 0) == doctest::Approx(-0.04));
    CHECK(M.block(3)(0, 0) == doctest::Approx(-0.008));
    const auto same = sufficiency_policy(K, K, sys, 4);
    for (int i = 1; i <= 4; ++i) CHECK(same.block(i).norm() == 0.0);

    Rng rng = make_rng(9, 0);
    for (int k = 0; k < 20; ++k) {
        const auto inst = checks::random_instance(rng, 1 + k % 3, 1 + k % 2);
        const auto cmp = checks::random_comparator(rng, inst);
        CHECK(checks::sufficiency_identity_error(inst.system, inst.controller, cmp, 2 + k % 8) <= 1e-10);
    }
}

TEST_CASE("policy JSON round trip") {
    Rng rng = make_rng(4, 0);
    const auto M = checks::random_feasible_policy(rng, 2, 3, {1.0, 0.5});
    CHECK(policy_from_json(policy_to_json(M)).approx_equal(M, 0.0));
    CHECK_THROWS(policy_from_json("{\"H\": 2}"));
}
