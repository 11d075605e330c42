#include "gpc/checks.hpp"
#include "gpc/cost.hpp"

#include <doctest.h>

#include <random>

using namespace gpc;

TEST_CASE("quadratic cost hand values") {
    const CostPtr c = make_quadratic_cost(Mat::Identity(2, 2), Mat::Identity(2, 2));
    CHECK(c->value(0, Vec::Unit(2, 0), Vec::Ones(2)) == 3.0);
    const Vec g = c->grad_x(0, (Vec(2) << 1, 2).finished(), Vec::Zero(2));
    CHECK(g(0) == 2.0);
    CHECK(g(1) == 4.0);
    const CostPtr z = make_quadratic_cost(Mat::Zero(2, 2), Mat::Zero(1, 1));
    CHECK(z->value(3, Vec::Ones(2), Vec::Ones(1)) == 0.0);
}

TEST_CASE("quadratic cost rejects non-symmetric or indefinite weights") {
    Mat Q(2, 2);
    Q << 1, 2, 0, 1;
    CHECK_THROWS(make_quadratic_cost(Q, Mat::Identity(1, 1)));
    CHECK_THROWS(make_quadratic_cost(-Mat::Identity(2, 2), Mat::Identity(1, 1)));
}

TEST_CASE("counterexample cost values") {
    CHECK(make_counterexample_cost(1)->value(0, Vec::Constant(1, 1.0), Vec::Zero(1)) == 0.0);
    CHECK(make_counterexample_cost(4)->value(0, Vec::Constant(1, 1.0), Vec::Zero(1)) == 0.25);
    CHECK(make_counterexample_cost(100)->value(0, Vec::Zero(1), Vec::Zero(1)) == 1.0);
    const CostPtr c = make_counterexample_cost(4);
    CHECK(c->grad_x(0, Vec::Constant(1, 1.0), Vec::Zero(1))(0) == doctest::Approx(2 * 0.5 * (0.5 - 1.0)));
    CHECK(c->grad_u(0, Vec::Constant(1, 1.0), Vec::Zero(1)).norm() == 0.0);
}

TEST_CASE("cost bounds and convexity spot checks") {
    Rng rng = make_rng(5, 1);
    std::normal_distribution<double> n(0, 1);
    Mat Aq(3, 3), Ar(2, 2);
    for (int i = 0; i < 9; ++i) Aq(i) = n(rng);
    for (int i = 0; i < 4; ++i) Ar(i) = n(rng);
    const std::vector<CostPtr> costs{make_quadratic_cost(Aq * Aq.transpose(), Ar * Ar.transpose()),
                                     checks::make_log_cosh_cost(3, 2)};
    for (const auto& c : costs) {
        for (int k = 0; k < 200; ++k) {
            const double D = 1.0 + 3.0 * std::abs(n(rng));
            Vec x(3), u(2), x2(3), u2(2);
            for (int i = 0; i < 3; ++i) x(i) = n(rng), x2(i) = n(rng);
            for (int i = 0; i < 2; ++i) u(i) = n(rng), u2(i) = n(rng);
            x *= D / std::max(x.norm(), D);
            u *= D / std::max(u.norm(), D);
            CHECK(std::abs(c->value(0, x, u)) <= c->value_bound() * D * D + 1e-12);
            CHECK(c->grad_x(0, x, u).norm() <= c->gradient_bound() * D + 1e-12);
            CHECK(c->grad_u(0, x, u).norm() <= c->gradient_bound() * D + 1e-12);
            const double mid = c->value(0, 0.5 * (x + x2), 0.5 * (u + u2));
            CHECK(mid <= 0.5 * (c->value(0, x, u) + c->value(0, x2, u2)) + 1e-10);
        }
    }
}
