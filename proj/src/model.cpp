#include "bermudan/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

#include "bermudan/parallel.hpp"

namespace bermudan {

void ModelParams::validate() const {
    std::ostringstream err;
    if (!(sigma >= 0.0)) err << " sigma must be >= 0;";
    if (!(lambda >= 0.0)) err << " lambda must be >= 0;";
    if (lambda > 0.0 && !(theta > 0.0)) err << " theta must be > 0 when lambda > 0;";
    if (!(maturity > 0.0)) err << " maturity must be > 0;";
    if (exercise_intervals < 1) err << " exercise_intervals must be >= 1;";
    if (x0.empty()) err << " x0 must have at least one asset;";
    for (double x : x0)
        if (!(x > 0.0)) {
            err << " x0 components must be > 0;";
            break;
        }
    if (!(strike >= 0.0)) err << " strike must be >= 0;";
    if (!std::isfinite(r) || !std::isfinite(delta) || !std::isfinite(m))
        err << " r, delta and m must be finite;";
    const auto msg = err.str();
    if (!msg.empty()) throw std::invalid_argument("invalid model parameters:" + msg);
}

double ModelParams::jump_mean_relative() const {
    return std::exp(m + 0.5 * theta * theta) - 1.0;
}

double ModelParams::risk_neutral_drift() const {
    return r - delta - 0.5 * sigma * sigma - lambda * jump_mean_relative();
}

double ModelParams::exercise_date(int j) const {
    return maturity * static_cast<double>(j) / static_cast<double>(exercise_intervals);
}

double ModelParams::payoff(std::span<const double> x) const {
    const double lo = *std::min_element(x.begin(), x.end());
    return std::max(strike - lo, 0.0);
}

double ModelParams::discount(double t) const { return std::exp(-r * t); }

int TimeGrid::interval_of_step(std::size_t l) const {
    auto it = std::upper_bound(exercise_index.begin(), exercise_index.end(), static_cast<int>(l));
    return static_cast<int>(it - exercise_index.begin()) - 1;
}

TimeGrid build_time_grid(double maturity, int exercise_intervals, double euler_step) {
    if (!(maturity > 0.0) || exercise_intervals < 1 || !(euler_step > 0.0))
        throw std::invalid_argument("time grid needs maturity > 0, J >= 1 and a positive step");
    const double interval = maturity / exercise_intervals;
    const double ratio = interval / euler_step;
    const double per = std::round(ratio);
    if (per < 1.0 || std::abs(ratio - per) > 1e-12 * ratio) {
        std::ostringstream msg;
        msg << "euler step " << euler_step << " does not divide the exercise interval " << interval;
        throw std::invalid_argument(msg.str());
    }
    const auto steps_per = static_cast<std::size_t>(per);
    const std::size_t total = steps_per * static_cast<std::size_t>(exercise_intervals);

    TimeGrid grid;
    grid.step = maturity / static_cast<double>(total);
    grid.nodes.resize(total + 1);
    for (std::size_t l = 0; l <= total; ++l)
        grid.nodes[l] = maturity * static_cast<double>(l) / static_cast<double>(total);
    grid.exercise_index.resize(static_cast<std::size_t>(exercise_intervals) + 1);
    for (int j = 0; j <= exercise_intervals; ++j)
        grid.exercise_index[static_cast<std::size_t>(j)] = static_cast<int>(steps_per) * j;
    return grid;
}

SpacePartition build_space_partition(double m, double theta, std::size_t cells) {
    if (cells == 0) throw std::invalid_argument("space partition needs at least one cell");
    if (!(theta > 0.0)) throw std::invalid_argument("space partition needs theta > 0");

    const boost::math::normal_distribution<double> std_normal;
    const double inf = std::numeric_limits<double>::infinity();
    const double k = static_cast<double>(cells);

    SpacePartition part;
    part.bounds.resize(cells + 1);
    part.bounds.front() = -inf;
    part.bounds.back() = inf;
    std::vector<double> z(cells + 1);
    z.front() = -inf;
    z.back() = inf;
    for (std::size_t c = 1; c < cells; ++c) {
        z[c] = boost::math::quantile(std_normal, static_cast<double>(c) / k);
        part.bounds[c] = m + theta * z[c];
    }
    auto pdf = [&](double x) { return std::isinf(x) ? 0.0 : boost::math::pdf(std_normal, x); };

    part.mass.assign(cells, 1.0 / k);
    part.reps.resize(cells);
    for (std::size_t c = 0; c < cells; ++c) {
        // E[J | J in A_c] for J ~ N(m, theta^2): m + theta (phi(a) - phi(b)) / (1/K).
        part.reps[c] = m + theta * (pdf(z[c]) - pdf(z[c + 1])) * k;
    }
    return part;
}

std::size_t SpacePartition::cell_of(double amplitude) const {
    auto first = bounds.begin() + 1;
    auto last = bounds.end() - 1;
    return static_cast<std::size_t>(std::upper_bound(first, last, amplitude) - first);
}

DiscretizationGrids make_grids(const ModelParams& params, double euler_step, std::size_t cells) {
    DiscretizationGrids g;
    g.time = build_time_grid(params.maturity, params.exercise_intervals, euler_step);
    // theta only matters for the partition; a jump-free model still gets a valid one.
    const double theta = params.theta > 0.0 ? params.theta : 1.0;
    g.space = build_space_partition(params.m, theta, cells);
    g.lambda = params.lambda;
    return g;
}

PathStepper::PathStepper(const ModelParams& params, Rng& rng, double start_time)
    : lambda_(params.lambda), m_(params.m), theta_(params.theta), rng_(&rng) {
    next_arrival_ = std::numeric_limits<double>::infinity();
    if (lambda_ > 0.0) {
        std::exponential_distribution<double> wait(lambda_);
        next_arrival_ = start_time + wait(*rng_);
    }
}

void PathStepper::advance(double t0, double t1, std::span<double> dw, std::vector<JumpEvent>& jumps) {
    const double sd = std::sqrt(t1 - t0);
    for (auto& w : dw) w = sd * normal_(*rng_);
    while (next_arrival_ < t1) {
        const double amp = m_ + theta_ * normal_(*rng_);
        jumps.push_back(JumpEvent{0, 0, next_arrival_, amp});
        std::exponential_distribution<double> wait(lambda_);
        next_arrival_ += wait(*rng_);
    }
}

int PathBundle::jump_count(std::size_t path, std::size_t step, std::size_t cell) const {
    int count = 0;
    for (const auto& e : jumps(path))
        if (e.step == step && e.cell == cell) ++count;
    return count;
}

double PathBundle::compensated(std::size_t path, std::size_t step, std::size_t cell) const {
    return jump_count(path, step, cell) - grids_.step_intensity(step, cell);
}

std::vector<std::vector<JumpEvent>> PathBundle::jump_lists() const {
    std::vector<std::vector<JumpEvent>> out(paths_);
    for (std::size_t p = 0; p < paths_; ++p) {
        auto js = jumps(p);
        out[p].assign(js.begin(), js.end());
    }
    return out;
}

PathBundle PathBundle::from_increments(const ModelParams& params, const DiscretizationGrids& grids,
                                       std::vector<double> wiener,
                                       std::vector<std::vector<JumpEvent>> jumps,
                                       std::uint64_t seed) {
    const std::size_t n = params.assets();
    const std::size_t steps = grids.time.steps();
    const std::size_t count = jumps.size();
    if (wiener.size() != count * steps * n)
        throw std::invalid_argument("wiener increments do not match the grid and path count");

    PathBundle b;
    b.paths_ = count;
    b.nodes_ = steps + 1;
    b.assets_ = n;
    b.seed_ = seed;
    b.grids_ = grids;
    b.wiener_ = std::move(wiener);
    b.prices_.resize(count * b.nodes_ * n);

    b.jump_offsets_.resize(count + 1, 0);
    for (std::size_t p = 0; p < count; ++p) b.jump_offsets_[p + 1] = b.jump_offsets_[p] + jumps[p].size();
    b.jumps_.reserve(b.jump_offsets_.back());
    for (auto& list : jumps) b.jumps_.insert(b.jumps_.end(), list.begin(), list.end());

    const double drift = params.risk_neutral_drift();
    const double sigma = params.sigma;
    std::vector<double> log_x0(n);
    for (std::size_t i = 0; i < n; ++i) log_x0[i] = std::log(params.x0[i]);

#pragma omp parallel for schedule(static) num_threads(thread_count())
    for (std::ptrdiff_t pp = 0; pp < static_cast<std::ptrdiff_t>(count); ++pp) {
        const auto p = static_cast<std::size_t>(pp);
        std::vector<double> log_x = log_x0;
        double* out = b.prices_.data() + p * b.nodes_ * n;
        for (std::size_t i = 0; i < n; ++i) out[i] = params.x0[i];
        auto events = b.jumps(p);
        std::size_t e = 0;
        for (std::size_t l = 0; l < steps; ++l) {
            double jump_sum = 0.0;
            while (e < events.size() && events[e].step == l) jump_sum += events[e++].amplitude;
            const double dt = grids.time.dt(l);
            const double* dw = b.wiener_.data() + (p * steps + l) * n;
            for (std::size_t i = 0; i < n; ++i) {
                log_x[i] += drift * dt + sigma * dw[i] + jump_sum;
                out[(l + 1) * n + i] = std::exp(log_x[i]);
            }
        }
    }
    return b;
}

PathBundle simulate_paths(const ModelParams& params, const DiscretizationGrids& grids,
                          std::size_t count, std::uint64_t seed) {
    if (count == 0) throw std::invalid_argument("simulate_paths needs at least one path");
    params.validate();
    const std::size_t n = params.assets();
    const std::size_t steps = grids.time.steps();
    std::vector<double> wiener(count * steps * n);
    std::vector<std::vector<JumpEvent>> jumps(count);

#pragma omp parallel for schedule(static) num_threads(thread_count())
    for (std::ptrdiff_t pp = 0; pp < static_cast<std::ptrdiff_t>(count); ++pp) {
        const auto p = static_cast<std::size_t>(pp);
        Rng rng = make_stream(seed, {p});
        PathStepper stepper(params, rng, 0.0);
        auto& list = jumps[p];
        for (std::size_t l = 0; l < steps; ++l) {
            const std::size_t before = list.size();
            stepper.advance(grids.time.nodes[l], grids.time.nodes[l + 1],
                            {wiener.data() + (p * steps + l) * n, n}, list);
            for (std::size_t e = before; e < list.size(); ++e) {
                list[e].step = static_cast<std::uint32_t>(l);
                list[e].cell = static_cast<std::uint32_t>(grids.space.cell_of(list[e].amplitude));
            }
        }
    }
    return PathBundle::from_increments(params, grids, std::move(wiener), std::move(jumps), seed);
}

void advance_prices(const ModelParams& params, const TimeGrid& grid, std::size_t first_step,
                    std::size_t last_step, PathStepper& stepper, std::span<double> x,
                    std::vector<double>& dw_scratch, std::vector<JumpEvent>& jump_scratch) {
    const std::size_t n = x.size();
    dw_scratch.resize(n);
    const double drift = params.risk_neutral_drift();
    double log_ret[8];
    std::vector<double> log_ret_heap;
    double* acc = log_ret;
    if (n > 8) {
        log_ret_heap.resize(n);
        acc = log_ret_heap.data();
    }
    std::fill(acc, acc + n, 0.0);
    for (std::size_t l = first_step; l < last_step; ++l) {
        jump_scratch.clear();
        stepper.advance(grid.nodes[l], grid.nodes[l + 1], dw_scratch, jump_scratch);
        double jump_sum = 0.0;
        for (const auto& e : jump_scratch) jump_sum += e.amplitude;
        const double dt = grid.dt(l);
        for (std::size_t i = 0; i < n; ++i) acc[i] += drift * dt + params.sigma * dw_scratch[i] + jump_sum;
    }
    for (std::size_t i = 0; i < n; ++i) x[i] *= std::exp(acc[i]);
}

}  // namespace bermudan
