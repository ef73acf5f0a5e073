#include "bermudan/dual_tm.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "bermudan/parallel.hpp"

namespace bermudan {

std::string to_string(MartingaleTerms terms) {
    switch (terms) {
        case MartingaleTerms::both: return "both";
        case MartingaleTerms::wiener_only: return "wiener_only";
        case MartingaleTerms::jump_only: return "jump_only";
    }
    return "unknown";
}

MartingaleTerms martingale_terms_from_string(const std::string& name) {
    if (name == "both") return MartingaleTerms::both;
    if (name == "wiener_only") return MartingaleTerms::wiener_only;
    if (name == "jump_only") return MartingaleTerms::jump_only;
    throw std::invalid_argument("unknown martingale terms '" + name + "'");
}

std::string to_string(IntegrandTarget target) {
    return target == IntegrandTarget::centered ? "centered" : "stopped_payoff";
}

IntegrandTarget integrand_target_from_string(const std::string& name) {
    if (name == "stopped_payoff") return IntegrandTarget::stopped_payoff;
    if (name == "centered") return IntegrandTarget::centered;
    throw std::invalid_argument("unknown integrand target '" + name + "'");
}

std::string to_string(RegressionSchedule schedule) {
    switch (schedule) {
        case RegressionSchedule::exercise_dates: return "exercise_dates";
        case RegressionSchedule::every_step: return "every_step";
        case RegressionSchedule::pooled: return "pooled";
    }
    return "unknown";
}

RegressionSchedule regression_schedule_from_string(const std::string& name) {
    if (name == "exercise_dates") return RegressionSchedule::exercise_dates;
    if (name == "every_step") return RegressionSchedule::every_step;
    if (name == "pooled") return RegressionSchedule::pooled;
    throw std::invalid_argument("unknown regression schedule '" + name + "'");
}

namespace {

// Jump counts of one path in step l, accumulated into counts[k].
void step_counts(std::span<const JumpEvent> events, std::size_t& cursor, std::size_t step, std::span<int> counts) {
    std::fill(counts.begin(), counts.end(), 0);
    while (cursor < events.size() && events[cursor].step < step) ++cursor;
    while (cursor < events.size() && events[cursor].step == step) ++counts[events[cursor++].cell];
}

}  // namespace

MartingaleModel fit_integrands(const Policy& policy, const PathBundle& paths, const ModelParams& params,
                               BasisSpec basis_w, BasisSpec basis_p, IntegrandOptions options,
                               const EuroPricerConfig& euro) {
    if (basis_w.kind != BasisKind::rho_w || basis_p.kind != BasisKind::rho_p)
        throw std::invalid_argument("fit_integrands needs rho_w and rho_p bases");
    const auto& grids = paths.grids();
    const auto& time = grids.time;
    const int J = params.exercise_intervals;
    if (time.exercise_intervals() != J || paths.assets() != params.assets())
        throw std::invalid_argument("paths were not simulated for these parameters");

    const PolicyRule rule(policy, params);
    const Basis rho_w(basis_w, params, euro);
    const Basis rho_p(basis_p, params, euro);
    const std::size_t count = paths.paths();
    const std::size_t n = params.assets();
    const std::size_t cells = grids.space.cells();
    const std::size_t dim_w = rho_w.dimension();
    const std::size_t dim_p = rho_p.dimension();
    const std::size_t width = static_cast<std::size_t>(J) + 1;
    const bool has_jumps = params.lambda > 0.0;

    MartingaleModel model;
    model.exercise_intervals = J;
    model.maturity = params.maturity;
    model.basis_w = basis_w;
    model.basis_p = basis_p;
    model.euro = euro;
    model.schedule = options.schedule;
    model.target = options.target;
    model.time_nodes = time.nodes;
    model.exercise_index = time.exercise_index;
    model.cell_reps = grids.space.reps;

    // Euler steps whose rows enter each segment's regression.
    std::vector<std::vector<std::size_t>> segment_steps;
    model.segment_of_step.resize(time.steps());
    for (std::size_t l = 0; l < time.steps(); ++l) {
        const int j = time.interval_of_step(l);
        switch (options.schedule) {
            case RegressionSchedule::every_step:
                model.segment_of_step[l] = static_cast<int>(l);
                segment_steps.push_back({l});
                break;
            case RegressionSchedule::exercise_dates:
                model.segment_of_step[l] = j;
                if (static_cast<int>(l) == time.exercise_index[static_cast<std::size_t>(j)]) segment_steps.push_back({l});
                break;
            case RegressionSchedule::pooled:
                model.segment_of_step[l] = j;
                if (segment_steps.size() <= static_cast<std::size_t>(j)) segment_steps.emplace_back();
                segment_steps[static_cast<std::size_t>(j)].push_back(l);
                break;
        }
    }
    if (!has_jumps) model.diagnostics.push_back("zero jump intensity: jump integrands set to zero");

    // G[p][j]: discounted payoff of the policy stopped at or after j.
    std::vector<double> stopped(count * width);
#pragma omp parallel for schedule(static) num_threads(thread_count())
    for (std::ptrdiff_t pp = 0; pp < static_cast<std::ptrdiff_t>(count); ++pp) {
        const auto p = static_cast<std::size_t>(pp);
        rule.stopped_payoffs(paths, p, {stopped.data() + p * width, width});
    }

    // response[p][j] multiplies the scaled increments of interval j.
    std::vector<double> response(count * width, 0.0);
    for (std::size_t p = 0; p < count; ++p)
        for (int j = 0; j < J; ++j) response[p * width + static_cast<std::size_t>(j)] = stopped[p * width + static_cast<std::size_t>(j) + 1];
    if (options.target == IntegrandTarget::centered) {
        const Basis control(policy.basis.kind == BasisKind::ls_policy ? policy.basis : BasisSpec{BasisKind::ls_policy, 4},
                            params, euro);
        const std::size_t dim_c = control.dimension();
        Eigen::MatrixXd design(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim_c));
        Eigen::VectorXd target(static_cast<Eigen::Index>(count));
        for (int j = 0; j < J; ++j) {
            const double t = params.exercise_date(j);
#pragma omp parallel num_threads(thread_count())
            {
                std::vector<double> row(dim_c);
#pragma omp for schedule(static)
                for (std::ptrdiff_t pp = 0; pp < static_cast<std::ptrdiff_t>(count); ++pp) {
                    const auto p = static_cast<std::size_t>(pp);
                    control.evaluate(t, paths.exercise_price(p, j), j, 0.0, row);
                    for (std::size_t c = 0; c < dim_c; ++c) design(pp, static_cast<Eigen::Index>(c)) = row[c];
                    target[pp] = stopped[p * width + static_cast<std::size_t>(j) + 1];
                }
            }
            const Eigen::VectorXd fitted = design * Eigen::Map<const Eigen::VectorXd>(
                solve_least_squares(design, target).coefficients.data(), static_cast<Eigen::Index>(dim_c));
            for (std::size_t p = 0; p < count; ++p)
                response[p * width + static_cast<std::size_t>(j)] -= fitted[static_cast<Eigen::Index>(p)];
        }
    }

    for (const auto& steps : segment_steps) {
        const auto rows = static_cast<Eigen::Index>(count * steps.size());
        Eigen::MatrixXd design_w(rows, static_cast<Eigen::Index>(dim_w));
        Eigen::MatrixXd target_w(rows, static_cast<Eigen::Index>(n));
        std::vector<Eigen::MatrixXd> design_p(has_jumps ? cells : 0, Eigen::MatrixXd(rows, static_cast<Eigen::Index>(dim_p)));
        Eigen::MatrixXd target_p(rows, static_cast<Eigen::Index>(has_jumps ? cells : 0));

        for (std::size_t i = 0; i < steps.size(); ++i) {
            const std::size_t l = steps[i];
            const int j = time.interval_of_step(l);
            const double t = time.nodes[l];
            const double dt = time.dt(l);
            const auto offset = static_cast<Eigen::Index>(i * count);

#pragma omp parallel num_threads(thread_count())
            {
                std::vector<double> row_w(dim_w);
                std::vector<double> rows_p(cells * dim_p);
                std::vector<int> counts(cells);
#pragma omp for schedule(static)
                for (std::ptrdiff_t pp = 0; pp < static_cast<std::ptrdiff_t>(count); ++pp) {
                    const auto p = static_cast<std::size_t>(pp);
                    const Eigen::Index r = offset + pp;
                    const auto x = paths.price(p, l);
                    const double g = response[p * width + static_cast<std::size_t>(j)];
                    rho_w.evaluate(t, x, j, 0.0, row_w);
                    for (std::size_t c = 0; c < dim_w; ++c) design_w(r, static_cast<Eigen::Index>(c)) = row_w[c];
                    const auto dw = paths.wiener_increment(p, l);
                    for (std::size_t c = 0; c < n; ++c) target_w(r, static_cast<Eigen::Index>(c)) = dw[c] / dt * g;
                    if (!has_jumps) continue;

                    rho_p.evaluate_cells(t, x, j, grids.space.reps, rows_p);
                    std::size_t cursor = 0;
                    step_counts(paths.jumps(p), cursor, l, counts);
                    for (std::size_t k = 0; k < cells; ++k) {
                        for (std::size_t c = 0; c < dim_p; ++c)
                            design_p[k](r, static_cast<Eigen::Index>(c)) = rows_p[k * dim_p + c];
                        const double mu = grids.step_intensity(l, k);
                        target_p(r, static_cast<Eigen::Index>(k)) = (counts[k] - mu) / mu * g;
                    }
                }
            }
        }

        std::vector<std::vector<double>> alpha(n);
        for (std::size_t c = 0; c < n; ++c)
            alpha[c] = solve_least_squares(design_w, target_w.col(static_cast<Eigen::Index>(c))).coefficients;
        std::vector<std::vector<double>> beta(cells, std::vector<double>(dim_p, 0.0));
        if (has_jumps) {
#pragma omp parallel for schedule(dynamic) num_threads(thread_count())
            for (std::ptrdiff_t kk = 0; kk < static_cast<std::ptrdiff_t>(cells); ++kk) {
                const auto k = static_cast<std::size_t>(kk);
                beta[k] = solve_least_squares(design_p[k], target_p.col(kk)).coefficients;
            }
        }
        model.alpha.push_back(std::move(alpha));
        model.beta.push_back(std::move(beta));
    }
    return model;
}

MartingaleEvaluator::MartingaleEvaluator(const MartingaleModel& model, const ModelParams& params)
    : model_(&model),
      params_(params),
      basis_w_(model.basis_w, params, model.euro),
      basis_p_(model.basis_p, params, model.euro) {
    if (model.exercise_intervals != params.exercise_intervals)
        throw std::invalid_argument("martingale model exercise dates do not match the model");
    has_jumps_ = false;
    for (const auto& seg : model.beta)
        for (const auto& cell : seg)
            for (double b : cell)
                if (b != 0.0) has_jumps_ = true;
}

void MartingaleEvaluator::check_grid(const PathBundle& paths) const {
    const auto& g = paths.grids();
    if (g.time.nodes != model_->time_nodes || g.time.exercise_index != model_->exercise_index)
        throw std::invalid_argument("path grid differs from the grid the martingale was fitted on");
    if (g.space.reps != model_->cell_reps)
        throw std::invalid_argument("path amplitude partition differs from the fitted one");
    if (paths.assets() != params_.assets())
        throw std::invalid_argument("path asset count differs from the model");
}

void MartingaleEvaluator::values(const PathBundle& paths, std::size_t path, std::span<double> out,
                                 MartingaleTerms terms) const {
    const auto& model = *model_;
    const auto& grids = paths.grids();
    const std::size_t steps = model.segment_of_step.size();
    const std::size_t n = paths.assets();
    const std::size_t cells = model.cell_reps.size();
    const bool use_w = terms != MartingaleTerms::jump_only;
    const bool use_p = terms != MartingaleTerms::wiener_only && has_jumps_;

    std::vector<double> row_w(basis_w_.dimension());
    std::vector<double> rows_p(use_p ? cells * basis_p_.dimension() : 0);
    std::vector<int> counts(cells);
    const auto events = paths.jumps(path);
    std::size_t cursor = 0;

    double m = 0.0;
    out[0] = 0.0;
    int j = 0;
    for (std::size_t l = 0; l < steps; ++l) {
        const auto seg = static_cast<std::size_t>(model.segment_of_step[l]);
        const double t = model.time_nodes[l];
        const auto x = paths.price(path, l);
        if (use_w) {
            basis_w_.evaluate(t, x, j, 0.0, row_w);
            const auto dw = paths.wiener_increment(path, l);
            for (std::size_t c = 0; c < n; ++c) m += dot(row_w, model.alpha[seg][c]) * dw[c];
        }
        if (use_p) {
            basis_p_.evaluate_cells(t, x, j, model.cell_reps, rows_p);
            step_counts(events, cursor, l, counts);
            const std::size_t dp = basis_p_.dimension();
            for (std::size_t k = 0; k < cells; ++k) {
                const double psi = dot({rows_p.data() + k * dp, dp}, model.beta[seg][k]);
                m += psi * (counts[k] - grids.step_intensity(l, k));
            }
        }
        if (static_cast<int>(l + 1) == model.exercise_index[static_cast<std::size_t>(j + 1)]) {
            out[static_cast<std::size_t>(j + 1)] = m;
            ++j;
        }
    }
}

std::vector<double> build_martingale(const MartingaleModel& model, const ModelParams& params,
                                     const PathBundle& paths, std::size_t path, MartingaleTerms terms) {
    const MartingaleEvaluator eval(model, params);
    eval.check_grid(paths);
    std::vector<double> out(static_cast<std::size_t>(model.exercise_intervals) + 1);
    eval.values(paths, path, out, terms);
    return out;
}

BoundEstimate tm_upper_bound(const MartingaleModel& model, const PathBundle& fresh_paths, const ModelParams& params,
                             MartingaleTerms terms) {
    const auto start = std::chrono::steady_clock::now();
    const MartingaleEvaluator eval(model, params);
    eval.check_grid(fresh_paths);
    const int J = params.exercise_intervals;
    const std::size_t count = fresh_paths.paths();
    std::vector<double> samples(count);
#pragma omp parallel num_threads(thread_count())
    {
        std::vector<double> m(static_cast<std::size_t>(J) + 1);
#pragma omp for schedule(static)
        for (std::ptrdiff_t pp = 0; pp < static_cast<std::ptrdiff_t>(count); ++pp) {
            const auto p = static_cast<std::size_t>(pp);
            eval.values(fresh_paths, p, m, terms);
            double best = params.payoff(fresh_paths.exercise_price(p, 0)) - m[0];
            for (int j = 1; j <= J; ++j) {
                const double h = params.discount(params.exercise_date(j)) * params.payoff(fresh_paths.exercise_price(p, j));
                best = std::max(best, h - m[static_cast<std::size_t>(j)]);
            }
            samples[p] = best;
        }
    }
    auto est = summarize("TM", samples, fresh_paths.seed());
    est.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return est;
}

}  // namespace bermudan
