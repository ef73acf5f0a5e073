#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "bermudan/analytic.hpp"
#include "bermudan/dual_ab.hpp"
#include "bermudan/parallel.hpp"

using namespace bermudan;

TEST_CASE("nested settings are validated") {
    NestedConfig c;
    CHECK_NOTHROW(c.validate());
    c.n_inner = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.n_inner = 1;
    c.n_outer = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("single exercise interval reduces to the european price") {
    ModelParams p;
    p.exercise_intervals = 1;
    const auto grids = make_grids(p, 0.1, 10);
    const auto est = ab_upper_bound(maturity_only_policy(p), p, grids, {200, 100}, 3);
    // max(h(x0), C_0) with h(x0) = 0 at the money.
    CHECK(std::abs(est.mean - merton_put_1d(0.0, 40.0, 1.0, p)) <= 3.0 * est.stderr_);
}

TEST_CASE("inner continuation at the last date") {
    ModelParams p;
    p.lambda = 3.0;
    const auto grids = make_grids(p, 0.05, 10);
    const auto policy = maturity_only_policy(p);
    const PolicyRule rule(policy, p);
    const double x[1] = {39.0};
    Rng rng(9);
    const std::size_t n = 200000;
    const double c = inner_continuation(rule, p, grids.time, 9, x, n, rng);
    // Discounted to 0 from T_9 = 0.9.
    const double ref = p.discount(0.9) * merton_put_1d(0.0, 39.0, 0.1, p);
    // Payoff variance is below (K e^{-rT})^2 / 4 for this put; use a loose bound.
    CHECK(std::abs(c - ref) <= 3.0 * 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("upper bound sits above the lower bound") {
    ModelParams p;
    p.x0 = {36.0};
    const auto grids = make_grids(p, 0.1, 10);
    const auto policy = fit_policy(simulate_paths(p, grids, 10000, 1), p);
    const auto lb = lower_bound(policy, simulate_paths(p, grids, 20000, 2), p);
    const auto ab = ab_upper_bound(policy, p, grids, {200, 50}, 4);
    CHECK(ab.kind == "AB");
    CHECK(ab.n_paths == 200);
    CHECK(ab.mean + 3.0 * joint_stderr(ab, lb) >= lb.mean);
    CHECK(ab.mean >= p.payoff(p.x0));
}

TEST_CASE("nested estimate is reproducible and thread independent") {
    ModelParams p;
    p.x0 = {36.0};
    const auto grids = make_grids(p, 0.1, 10);
    const auto policy = fit_policy(simulate_paths(p, grids, 5000, 1), p);
    set_thread_count(1);
    const auto a = ab_upper_bound(policy, p, grids, {40, 20}, 11);
    set_thread_count(3);
    const auto b = ab_upper_bound(policy, p, grids, {40, 20}, 11);
    set_thread_count(1);
    CHECK(a.mean == b.mean);
    CHECK(a.stderr_ == b.stderr_);
    const auto c = ab_upper_bound(policy, p, grids, {40, 20}, 12);
    CHECK(c.mean != a.mean);
}

TEST_CASE("grid mismatch throws") {
    ModelParams p;
    ModelParams five = p;
    five.exercise_intervals = 5;
    const auto grids = make_grids(five, 0.1, 10);
    CHECK_THROWS_AS(ab_upper_bound(maturity_only_policy(p), p, grids, {10, 10}, 1), std::invalid_argument);
    ModelParams longer = p;
    longer.maturity = 2.0;
    const auto long_grids = make_grids(longer, 0.1, 10);
    CHECK_THROWS_AS(ab_upper_bound(maturity_only_policy(p), p, long_grids, {10, 10}, 1), std::invalid_argument);
}
