#include "gpc/checks.hpp"
#include "gpc/error.hpp"
#include "gpc/lds.hpp"

#include <doctest.h>

using namespace gpc;

namespace {
Mat scalar(double v) { return Mat::Constant(1, 1, v); }
Vec vec1(double v) { return Vec::Constant(1, v); }
}  // namespace

TEST_CASE("step_dynamics hand examples") {
    const LdsSystem zero(scalar(0.0), scalar(1.0), -1, -1, 1.0);
    CHECK(step_dynamics(zero, vec1(0), vec1(0), vec1(0))(0) == 0.0);

    const LdsSystem half(scalar(0.5), scalar(1.0), -1, -1, 1.0);
    CHECK(step_dynamics(half, vec1(2.0), vec1(1.0), vec1(0.25))(0) == 2.25);

    const LdsSystem id(Mat::Identity(2, 2), Mat::Identity(2, 2), -1, -1, 2.0);
    const Vec next = step_dynamics(id, Vec::Unit(2, 0), Vec::Unit(2, 1), Vec::Ones(2));
    CHECK(next(0) == 2.0);
    CHECK(next(1) == 2.0);
}

TEST_CASE("recover_disturbance inverts the step") {
    const LdsSystem half(scalar(0.5), scalar(1.0), -1, -1, 1.0);
    CHECK(recover_disturbance(half, vec1(2.25), vec1(2.0), vec1(1.0))(0) == 0.25);
    CHECK(recover_disturbance(half, vec1(0), vec1(0), vec1(0))(0) == 0.0);

    Rng rng = make_rng(11, 0);
    for (int k = 0; k < 50; ++k) {
        const auto inst = checks::random_instance(rng, 1 + k % 4, 1 + (k / 4) % 4);
        CHECK(checks::round_trip_error(rng, inst.system, 20) <= 1e-12);
    }
}

TEST_CASE("dimension mismatches are rejected") {
    const LdsSystem sys(Mat::Identity(2, 2), Mat::Ones(2, 1), -1, -1, 1.0);
    CHECK_THROWS_AS(step_dynamics(sys, Vec::Zero(3), Vec::Zero(1), Vec::Zero(2)), DimensionError);
    CHECK_THROWS_AS(step_dynamics(sys, Vec::Zero(2), Vec::Zero(2), Vec::Zero(2)), DimensionError);
    CHECK_THROWS_AS(recover_disturbance(sys, Vec::Zero(2), Vec::Zero(2), Vec::Zero(3)), DimensionError);
    CHECK_THROWS_AS(LdsSystem(Mat::Identity(2, 3), Mat::Ones(2, 1), -1, -1, 1.0), DimensionError);
    CHECK_THROWS_AS(LdsSystem(Mat::Identity(2, 2), Mat::Ones(3, 1), -1, -1, 1.0), DimensionError);
}

TEST_CASE("norm bounds are validated at construction") {
    CHECK_THROWS(LdsSystem(scalar(2.0), scalar(1.0), 1.5, -1, 1.0));
    CHECK_THROWS(LdsSystem(scalar(0.5), scalar(3.0), -1, 2.0, 1.0));
    CHECK_THROWS(LdsSystem(scalar(0.5), scalar(1.0), -1, -1, 0.0));
    const LdsSystem measured = LdsSystem::with_measured_bounds(Mat::Identity(2, 2) * 0.7, Mat::Identity(2, 2) * 3, 1);
    CHECK(measured.kappa_A() == doctest::Approx(0.7));
    CHECK(measured.kappa_B() == doctest::Approx(3.0));
}
