#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numeric>

#include "bermudan/model.hpp"
#include "bermudan/parallel.hpp"

using namespace bermudan;

namespace {

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double stderr_of(const std::vector<double>& v) {
    const double mu = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - mu) * (x - mu);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

TEST_CASE("risk neutral drift at the table parameters") {
    ModelParams p;
    // r - delta - sigma^2/2 - lambda (exp(m + theta^2/2) - 1)
    const double expected = 0.04 - 0.0 - 0.02 - 1.0 * (std::exp(0.06 + 0.02) - 1.0);
    CHECK(p.risk_neutral_drift() == doctest::Approx(expected).epsilon(1e-14));
    CHECK(p.risk_neutral_drift() == doctest::Approx(-0.0632870677).epsilon(1e-9));
    p.lambda = 3.0;
    CHECK(p.risk_neutral_drift() == doctest::Approx(0.02 - 3.0 * (std::exp(0.08) - 1.0)).epsilon(1e-14));
}

TEST_CASE("payoff and exercise dates") {
    ModelParams p;
    p.x0 = {40.0, 40.0};
    const double x[2] = {38.0, 45.0};
    CHECK(p.payoff(x) == doctest::Approx(2.0));
    const double y[2] = {41.0, 45.0};
    CHECK(p.payoff(y) == 0.0);
    CHECK(p.exercise_date(3) == doctest::Approx(0.3));
    CHECK(p.discount(0.5) == doctest::Approx(std::exp(-0.02)));
}

TEST_CASE("validation lists every violation") {
    ModelParams p;
    p.sigma = -1.0;
    p.maturity = 0.0;
    p.x0 = {-1.0};
    try {
        p.validate();
        FAIL("expected an exception");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("sigma") != std::string::npos);
        CHECK(msg.find("maturity") != std::string::npos);
        CHECK(msg.find("x0") != std::string::npos);
    }
}

TEST_CASE("time grid places exercise dates on nodes") {
    const auto g = build_time_grid(1.0, 10, 0.01);
    CHECK(g.steps() == 100);
    REQUIRE(g.exercise_index.size() == 11);
    for (int j = 0; j <= 10; ++j) CHECK(g.exercise_index[static_cast<std::size_t>(j)] == 10 * j);
    CHECK(g.nodes.back() == 1.0);
    CHECK(g.interval_of_step(0) == 0);
    CHECK(g.interval_of_step(9) == 0);
    CHECK(g.interval_of_step(10) == 1);
    CHECK(g.interval_of_step(99) == 9);
    CHECK_THROWS_AS(build_time_grid(1.0, 10, 0.03), std::invalid_argument);
    CHECK_THROWS_AS(build_time_grid(1.0, 10, 0.0), std::invalid_argument);
}

TEST_CASE("space partition edges are normal quantiles") {
    const auto s = build_space_partition(0.06, 0.2, 10);
    REQUIRE(s.cells() == 10);
    REQUIRE(s.bounds.size() == 11);
    CHECK(std::isinf(s.bounds.front()));
    CHECK(std::isinf(s.bounds.back()));
    // 0.1 quantile of Normal(0.06, 0.2^2), from scipy.stats.norm.ppf
    CHECK(s.bounds[1] == doctest::Approx(-0.1963103131089201).epsilon(1e-12));
    CHECK(s.bounds[5] == doctest::Approx(0.06).epsilon(1e-12));
    double mean_rep = 0.0;
    for (std::size_t k = 0; k < s.cells(); ++k) {
        CHECK(s.mass[k] == doctest::Approx(0.1));
        if (k > 0) CHECK(s.reps[k] > s.bounds[k]);
        if (k + 1 < s.cells()) CHECK(s.reps[k] < s.bounds[k + 1]);
        CHECK(s.cell_of(s.reps[k]) == k);
        mean_rep += s.reps[k] * s.mass[k];
    }
    // Equal masses: the conditional means average to the mean.
    CHECK(mean_rep == doctest::Approx(0.06).epsilon(1e-12));
    // Symmetry about m.
    CHECK(s.reps[0] - 0.06 == doctest::Approx(0.06 - s.reps[9]).epsilon(1e-12));
    CHECK_THROWS_AS(build_space_partition(0.0, 0.2, 0), std::invalid_argument);
    CHECK_THROWS_AS(build_space_partition(0.0, 0.0, 10), std::invalid_argument);
}

TEST_CASE("single cell partition covers the line") {
    const auto s = build_space_partition(0.06, 0.2, 1);
    CHECK(s.reps[0] == doctest::Approx(0.06).epsilon(1e-12));
    CHECK(s.cell_of(-50.0) == 0);
    CHECK(s.cell_of(50.0) == 0);
}

TEST_CASE("deterministic dynamics without noise") {
    ModelParams p;
    p.sigma = 0.0;
    p.lambda = 0.0;
    const auto grids = make_grids(p, 0.01, 10);
    const auto paths = simulate_paths(p, grids, 3, 7);
    for (std::size_t i = 0; i < 3; ++i) CHECK(paths.exercise_price(i, 10)[0] == doctest::Approx(40.0 * std::exp(0.04)).epsilon(1e-12));
    CHECK(40.0 * std::exp(0.04) == doctest::Approx(41.6324).epsilon(1e-5));
}

TEST_CASE("discounted prices are martingales") {
    ModelParams p;
    p.lambda = 3.0;
    const auto grids = make_grids(p, 0.1, 10);
    const auto paths = simulate_paths(p, grids, 20000, 11);
    for (int j : {1, 5, 10}) {
        std::vector<double> v(paths.paths());
        for (std::size_t i = 0; i < paths.paths(); ++i)
            v[i] = p.discount(p.exercise_date(j)) * paths.exercise_price(i, j)[0];
        CHECK(std::abs(mean_of(v) - 40.0) <= 3.0 * stderr_of(v));
    }
}

TEST_CASE("compensated counts have zero mean") {
    ModelParams p;
    p.lambda = 20.0;   // about 200 events per (step, cell) box over the sample
    const auto grids = make_grids(p, 0.01, 10);
    const auto paths = simulate_paths(p, grids, 10000, 3);
    for (std::size_t l : {0u, 37u, 99u}) {
        for (std::size_t k : {0u, 4u, 9u}) {
            std::vector<double> v(paths.paths());
            for (std::size_t i = 0; i < paths.paths(); ++i) v[i] = paths.compensated(i, l, k);
            const double se = stderr_of(v);
            CHECK(std::abs(mean_of(v)) <= 3.0 * std::max(se, 1e-12));
        }
    }
    // Whole-horizon count matches lambda T.
    std::vector<double> totals(paths.paths());
    for (std::size_t i = 0; i < paths.paths(); ++i) totals[i] = static_cast<double>(paths.jumps(i).size());
    CHECK(std::abs(mean_of(totals) - 20.0) <= 3.0 * stderr_of(totals));
}

TEST_CASE("binning is consistent with the jump times") {
    ModelParams p;
    p.lambda = 5.0;
    const auto grids = make_grids(p, 0.01, 10);
    const auto paths = simulate_paths(p, grids, 500, 5);
    for (std::size_t i = 0; i < paths.paths(); ++i) {
        const auto events = paths.jumps(i);
        for (std::size_t e = 0; e < events.size(); ++e) {
            const auto& ev = events[e];
            CHECK(ev.time >= grids.time.nodes[ev.step]);
            CHECK(ev.time < grids.time.nodes[ev.step + 1]);
            CHECK(ev.cell == grids.space.cell_of(ev.amplitude));
            if (e > 0) CHECK(events[e - 1].time <= ev.time);
        }
        for (std::size_t l = 0; l < paths.steps(); l += 7) {
            int per_step = 0;
            for (std::size_t k = 0; k < grids.space.cells(); ++k) per_step += paths.jump_count(i, l, k);
            int direct = 0;
            for (const auto& ev : events)
                if (ev.time >= grids.time.nodes[l] && ev.time < grids.time.nodes[l + 1]) ++direct;
            CHECK(per_step == direct);
        }
    }
}

TEST_CASE("prices rebuild from stored increments") {
    ModelParams p;
    p.x0 = {38.0, 42.0};
    const auto grids = make_grids(p, 0.05, 10);
    const auto paths = simulate_paths(p, grids, 10, 9);
    const double mu = p.risk_neutral_drift();
    for (std::size_t i = 0; i < paths.paths(); ++i) {
        for (std::size_t a = 0; a < 2; ++a) {
            double logx = std::log(p.x0[a]);
            for (std::size_t l = 0; l < paths.steps(); ++l) {
                logx += mu * grids.time.dt(l) + p.sigma * paths.wiener_increment(i, l)[a];
                for (const auto& ev : paths.jumps(i))
                    if (ev.step == l) logx += ev.amplitude;
                CHECK(paths.price(i, l + 1)[a] == doctest::Approx(std::exp(logx)).epsilon(1e-10));
            }
        }
    }
    // The jump is common to both assets, the Wiener parts are not.
    CHECK(paths.wiener_increment(0, 0)[0] != paths.wiener_increment(0, 0)[1]);
}

TEST_CASE("bundles do not depend on the thread count") {
    ModelParams p;
    const auto grids = make_grids(p, 0.01, 10);
    set_thread_count(1);
    const auto a = simulate_paths(p, grids, 257, 42);
    set_thread_count(3);
    const auto b = simulate_paths(p, grids, 257, 42);
    set_thread_count(1);
    for (std::size_t i = 0; i < a.paths(); ++i) {
        CHECK(a.exercise_price(i, 10)[0] == b.exercise_price(i, 10)[0]);
        CHECK(a.jumps(i).size() == b.jumps(i).size());
    }
    const auto c = simulate_paths(p, grids, 257, 43);
    CHECK(c.exercise_price(0, 10)[0] != a.exercise_price(0, 10)[0]);
}

TEST_CASE("stream keys separate coordinates") {
    CHECK(stream_key(1, {0}) != stream_key(1, {1}));
    CHECK(stream_key(1, {0, 1}) != stream_key(1, {1, 0}));
    CHECK(stream_key(1, {2}) != stream_key(2, {1}));
    CHECK(stream_key(5, {3, 4}) == stream_key(5, {3, 4}));
}
