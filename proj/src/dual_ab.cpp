#include "bermudan/dual_ab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bermudan/parallel.hpp"

namespace bermudan {

void NestedConfig::validate() const {
    std::ostringstream err;
    if (n_outer < 1) err << " n_outer must be >= 1;";
    if (n_inner < 1) err << " n_inner must be >= 1;";
    const auto msg = err.str();
    if (!msg.empty()) throw std::invalid_argument("invalid nested config:" + msg);
}

double inner_continuation(const PolicyRule& rule, const ModelParams& params, const TimeGrid& grid, int date,
                          std::span<const double> x, std::size_t n_inner, Rng& rng) {
    const int J = grid.exercise_intervals();
    const std::size_t n = x.size();
    std::vector<double> y(n);
    std::vector<double> dw;
    std::vector<JumpEvent> scratch;
    double sum = 0.0;
    for (std::size_t i = 0; i < n_inner; ++i) {
        std::copy(x.begin(), x.end(), y.begin());
        PathStepper stepper(params, rng, params.exercise_date(date));
        for (int d = date + 1; d <= J; ++d) {
            advance_prices(params, grid, static_cast<std::size_t>(grid.exercise_index[static_cast<std::size_t>(d - 1)]),
                           static_cast<std::size_t>(grid.exercise_index[static_cast<std::size_t>(d)]), stepper, y, dw,
                           scratch);
            if (d == J || rule.exercises(d, y)) {
                sum += params.discount(params.exercise_date(d)) * params.payoff(y);
                break;
            }
        }
    }
    return sum / static_cast<double>(n_inner);
}

BoundEstimate ab_upper_bound(const Policy& policy, const ModelParams& params, const DiscretizationGrids& grids,
                             const NestedConfig& config, std::uint64_t seed) {
    config.validate();
    const int J = params.exercise_intervals;
    if (grids.time.exercise_intervals() != J || policy.exercise_intervals != J)
        throw std::invalid_argument("inner simulation grid does not match the policy exercise dates");
    for (int j = 0; j <= J; ++j) {
        const double t = grids.time.nodes[static_cast<std::size_t>(grids.time.exercise_index[static_cast<std::size_t>(j)])];
        if (std::abs(t - params.exercise_date(j)) > 1e-12 * params.maturity)
            throw std::invalid_argument("inner simulation grid does not match the policy exercise dates");
    }

    const auto start = std::chrono::steady_clock::now();
    const PolicyRule rule(policy, params);
    const PathBundle outer = simulate_paths(params, grids, config.n_outer, stream_key(seed, {0}));

    std::vector<double> samples(config.n_outer);
#pragma omp parallel for schedule(dynamic, 4) num_threads(thread_count())
    for (std::ptrdiff_t pp = 0; pp < static_cast<std::ptrdiff_t>(config.n_outer); ++pp) {
        const auto p = static_cast<std::size_t>(pp);
        std::vector<double> H(static_cast<std::size_t>(J) + 1), V(H.size()), C(H.size());
        for (int j = 0; j <= J; ++j) {
            const auto x = outer.exercise_price(p, j);
            H[static_cast<std::size_t>(j)] = params.discount(params.exercise_date(j)) * params.payoff(x);
        }
        for (int j = 0; j < J; ++j) {
            const auto x = outer.exercise_price(p, j);
            Rng rng = make_stream(seed, {1, p, static_cast<std::uint64_t>(j)});
            C[static_cast<std::size_t>(j)] = inner_continuation(rule, params, grids.time, j, x, config.n_inner, rng);
            V[static_cast<std::size_t>(j)] = rule.exercises(j, x) ? H[static_cast<std::size_t>(j)] : C[static_cast<std::size_t>(j)];
        }
        V[static_cast<std::size_t>(J)] = H[static_cast<std::size_t>(J)];

        double martingale = 0.0;
        double best = H[0];
        for (int j = 0; j < J; ++j) {
            martingale += V[static_cast<std::size_t>(j + 1)] - C[static_cast<std::size_t>(j)];
            best = std::max(best, H[static_cast<std::size_t>(j + 1)] - martingale);
        }
        samples[p] = best;
    }

    auto est = summarize("AB", samples, seed);
    est.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return est;
}

}  // namespace bermudan
