#pragma once

#include <cstddef>
#include <cstdint>

#include "bermudan/estimate.hpp"
#include "bermudan/lower_bound.hpp"
#include "bermudan/model.hpp"

namespace bermudan {

struct NestedConfig {
    std::size_t n_outer = 1000;
    std::size_t n_inner = 500;

    void validate() const;
};

/// Andersen-Broadie upper bound with nested inner simulation.
///
/// Along each outer path the value process of the policy is
///   V_j = H_j if the policy stops at j, else C_j,
/// where C_j estimates E_j[H_{tau_{j+1}}] from n_inner sub-paths launched at
/// the outer state and simulated on the same Euler grid. The martingale
/// follows M_{j+1} = M_j + V_{j+1} - C_j and the estimate is the mean of
/// max_j (H_j - M_j). The outer bundle is seeded with stream_key(seed, {0});
/// the inner batch at (p, j) draws from stream (seed, 1, p, j).
BoundEstimate ab_upper_bound(const Policy& policy, const ModelParams& params, const DiscretizationGrids& grids,
                             const NestedConfig& config, std::uint64_t seed);

/// Inner-simulation estimate of E[H_{tau_{date+1}} | X_{T_date} = x]: the mean
/// discounted payoff of n_inner sub-paths that follow the policy from date+1.
double inner_continuation(const PolicyRule& rule, const ModelParams& params, const TimeGrid& grid, int date,
                          std::span<const double> x, std::size_t n_inner, Rng& rng);

}  // namespace bermudan
