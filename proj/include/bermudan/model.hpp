#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bermudan/rng.hpp"

namespace bermudan {

/// Merton jump-diffusion market with a Bermudan min-put contract.
///
/// Every asset follows
///   dX/X- = (r - delta) dt + sigma dW_i + d(sum_{i<=P(t)} (V_i - 1)),
/// with log-amplitudes J = log V ~ Normal(m, theta^2). The Wiener components
/// are independent across assets; the jump process is common to all assets.
struct ModelParams {
    double r = 0.04;
    double delta = 0.0;
    double sigma = 0.2;
    double lambda = 1.0;
    double m = 0.06;
    double theta = 0.2;
    std::vector<double> x0{40.0};
    double strike = 40.0;
    double maturity = 1.0;
    int exercise_intervals = 10;

    std::size_t assets() const { return x0.size(); }

    /// Throws std::invalid_argument listing every violated constraint.
    void validate() const;

    /// E[e^J - 1].
    double jump_mean_relative() const;

    /// Log-price drift under the Merton risk-neutral measure,
    /// r - delta - sigma^2/2 - lambda E[e^J - 1].
    double risk_neutral_drift() const;

    /// Exercise date T_j = j T / J.
    double exercise_date(int j) const;

    /// Undiscounted intrinsic value (strike - min_i x_i)^+.
    double payoff(std::span<const double> x) const;

    double discount(double t) const;
};

struct TimeGrid {
    std::vector<double> nodes;          // t_0 = 0 < ... < t_L = T
    std::vector<int> exercise_index;    // node index of T_j, j = 0..J
    double step = 0.0;

    std::size_t steps() const { return nodes.size() - 1; }
    int exercise_intervals() const { return static_cast<int>(exercise_index.size()) - 1; }
    double dt(std::size_t l) const { return nodes[l + 1] - nodes[l]; }

    /// Exercise interval j with T_j <= t_l < T_{j+1}.
    int interval_of_step(std::size_t l) const;
};

/// Equiprobable partition of the log-amplitude line.
struct SpacePartition {
    std::vector<double> bounds;   // K + 1 edges, first -inf, last +inf
    std::vector<double> reps;     // conditional mean of the amplitude per cell
    std::vector<double> mass;     // Normal(m, theta^2) probability per cell

    std::size_t cells() const { return reps.size(); }
    std::size_t cell_of(double amplitude) const;
};

struct DiscretizationGrids {
    TimeGrid time;
    SpacePartition space;
    double lambda = 0.0;

    /// mu([t_l, t_{l+1}] x A_k) = lambda dt_l mass_k.
    double step_intensity(std::size_t l, std::size_t k) const {
        return lambda * time.dt(l) * space.mass[k];
    }
};

/// Equidistant grid of spacing `euler_step` on [0, T]; every exercise date
/// T/J * j must fall on a node (checked to 1e-12 relative).
TimeGrid build_time_grid(double maturity, int exercise_intervals, double euler_step);

/// K-cell partition whose edges are the k/K quantiles of Normal(m, theta^2).
SpacePartition build_space_partition(double m, double theta, std::size_t cells);

DiscretizationGrids make_grids(const ModelParams& params, double euler_step, std::size_t cells);

struct JumpEvent {
    std::uint32_t step;
    std::uint32_t cell;
    double time;
    double amplitude;
};

/// Draws the stochastic increments of one path, step by step. Jumps are
/// simulated exactly: exponential inter-arrival times and normal amplitudes.
class PathStepper {
public:
    PathStepper(const ModelParams& params, Rng& rng, double start_time);

    /// Fills `dw` with the Wiener increments over [t0, t1) and appends the
    /// (time, amplitude) of every jump arriving in [t0, t1) to `jumps`.
    void advance(double t0, double t1, std::span<double> dw, std::vector<JumpEvent>& jumps);

private:
    double lambda_;
    double m_;
    double theta_;
    Rng* rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    double next_arrival_;
};

/// Immutable ensemble of simulated paths on a fixed grid.
///
/// Storage is path-major. Jumps are kept as sparse events (step, cell) since
/// most (step, cell) boxes are empty.
class PathBundle {
public:
    PathBundle() = default;

    /// Rebuilds prices from increments. Wiener increments are laid out
    /// [path][step][asset]; `jumps[p]` lists the events of path p in time order.
    static PathBundle from_increments(const ModelParams& params, const DiscretizationGrids& grids,
                                      std::vector<double> wiener,
                                      std::vector<std::vector<JumpEvent>> jumps,
                                      std::uint64_t seed);

    std::size_t paths() const { return paths_; }
    std::size_t nodes() const { return nodes_; }
    std::size_t steps() const { return nodes_ - 1; }
    std::size_t assets() const { return assets_; }
    std::uint64_t seed() const { return seed_; }
    const DiscretizationGrids& grids() const { return grids_; }

    std::span<const double> price(std::size_t path, std::size_t node) const {
        return {prices_.data() + (path * nodes_ + node) * assets_, assets_};
    }
    std::span<const double> wiener_increment(std::size_t path, std::size_t step) const {
        return {wiener_.data() + (path * (nodes_ - 1) + step) * assets_, assets_};
    }
    std::span<const JumpEvent> jumps(std::size_t path) const {
        return {jumps_.data() + jump_offsets_[path], jump_offsets_[path + 1] - jump_offsets_[path]};
    }
    /// Price at exercise date T_j.
    std::span<const double> exercise_price(std::size_t path, int j) const {
        return price(path, static_cast<std::size_t>(grids_.time.exercise_index[j]));
    }

    /// P([t_l, t_{l+1}] x A_k) for one path.
    int jump_count(std::size_t path, std::size_t step, std::size_t cell) const;
    /// P minus its intensity.
    double compensated(std::size_t path, std::size_t step, std::size_t cell) const;

    /// Copies the raw increments out (used to build perturbed bundles).
    std::vector<double> wiener_data() const { return wiener_; }
    std::vector<std::vector<JumpEvent>> jump_lists() const;

private:
    std::size_t paths_ = 0;
    std::size_t nodes_ = 0;
    std::size_t assets_ = 0;
    std::uint64_t seed_ = 0;
    DiscretizationGrids grids_;
    std::vector<double> prices_;
    std::vector<double> wiener_;
    std::vector<JumpEvent> jumps_;
    std::vector<std::size_t> jump_offsets_;
};

/// Simulates `count` paths of the exact solution on the grid nodes. Path p
/// draws from its own stream keyed by (seed, p), so the bundle is identical
/// for any thread count.
PathBundle simulate_paths(const ModelParams& params, const DiscretizationGrids& grids,
                          std::size_t count, std::uint64_t seed);

/// Advances prices in place across the grid steps [first_step, last_step).
/// Used by nested inner simulation, which never stores increments.
void advance_prices(const ModelParams& params, const TimeGrid& grid, std::size_t first_step,
                    std::size_t last_step, PathStepper& stepper, std::span<double> x,
                    std::vector<double>& dw_scratch, std::vector<JumpEvent>& jump_scratch);

}  // namespace bermudan
