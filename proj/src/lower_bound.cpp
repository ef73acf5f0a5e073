#include "bermudan/lower_bound.hpp"

#include <algorithm>
#include <stdexcept>

#include "bermudan/parallel.hpp"

namespace bermudan {

PolicyRule::PolicyRule(const Policy& policy, const ModelParams& params)
    : policy_(&policy), params_(params), basis_(policy.basis, params, policy.euro) {
    if (policy.exercise_intervals != params.exercise_intervals ||
        static_cast<int>(policy.coefficients.size()) != policy.exercise_intervals + 1)
        throw std::invalid_argument("policy exercise dates do not match the model");
    for (const auto& c : policy.coefficients)
        if (!c.empty() && c.size() != basis_.dimension())
            throw std::invalid_argument("policy coefficients do not match the basis dimension");
}

double PolicyRule::continuation(int j, std::span<const double> x) const {
    const auto& coef = policy_->coefficients[static_cast<std::size_t>(j)];
    if (coef.empty()) return 0.0;
    double row[32];
    std::vector<double> heap;
    std::span<double> out;
    if (basis_.dimension() <= 32) {
        out = std::span<double>(row, basis_.dimension());
    } else {
        heap.resize(basis_.dimension());
        out = heap;
    }
    basis_.evaluate(params_.exercise_date(j), x, j, 0.0, out);
    return dot(out, coef);
}

bool PolicyRule::exercises(int j, std::span<const double> x) const {
    const int J = policy_->exercise_intervals;
    if (j <= 0) return false;
    if (j >= J) return true;
    const double h = params_.payoff(x);
    if (h <= 0.0) return false;
    if (policy_->coefficients[static_cast<std::size_t>(j)].empty()) return false;
    return params_.discount(params_.exercise_date(j)) * h >= continuation(j, x);
}

int PolicyRule::exercise_time(const PathBundle& paths, std::size_t path, int from) const {
    const int J = policy_->exercise_intervals;
    if (paths.grids().time.exercise_intervals() != J)
        throw std::invalid_argument("path grid and policy disagree on exercise dates");
    for (int j = std::max(from, 1); j < J; ++j)
        if (exercises(j, paths.exercise_price(path, j))) return j;
    return J;
}

void PolicyRule::stopped_payoffs(const PathBundle& paths, std::size_t path, std::span<double> out) const {
    const int J = policy_->exercise_intervals;
    if (paths.grids().time.exercise_intervals() != J)
        throw std::invalid_argument("path grid and policy disagree on exercise dates");
    auto discounted = [&](int j) {
        return params_.discount(params_.exercise_date(j)) * params_.payoff(paths.exercise_price(path, j));
    };
    out[static_cast<std::size_t>(J)] = discounted(J);
    for (int j = J - 1; j >= 1; --j) {
        const auto x = paths.exercise_price(path, j);
        out[static_cast<std::size_t>(j)] = exercises(j, x) ? discounted(j) : out[static_cast<std::size_t>(j + 1)];
    }
    out[0] = J >= 1 ? out[std::min<std::size_t>(1, static_cast<std::size_t>(J))] : discounted(0);
}

Policy fit_policy(const PathBundle& paths, const ModelParams& params, BasisSpec basis, PolicyOptions options,
                  const EuroPricerConfig& euro) {
    if (basis.kind != BasisKind::ls_policy) throw std::invalid_argument("fit_policy needs an ls_policy basis");
    const int J = params.exercise_intervals;
    if (paths.grids().time.exercise_intervals() != J || paths.assets() != params.assets())
        throw std::invalid_argument("paths were not simulated for these parameters");

    Policy policy;
    policy.exercise_intervals = J;
    policy.maturity = params.maturity;
    policy.basis = basis;
    policy.euro = euro;
    policy.itm_only = options.itm_only;
    policy.coefficients.assign(static_cast<std::size_t>(J) + 1, {});

    const Basis evaluator(basis, params, euro);
    const std::size_t dim = evaluator.dimension();
    const std::size_t count = paths.paths();

    // Realized discounted cash flow under the policy fitted so far.
    std::vector<double> cash(count);
    const double disc_T = params.discount(params.maturity);
    for (std::size_t p = 0; p < count; ++p) cash[p] = disc_T * params.payoff(paths.exercise_price(p, J));

    std::vector<double> payoff(count);
    std::vector<std::size_t> rows;
    for (int j = J - 1; j >= 1; --j) {
        const double t = params.exercise_date(j);
        const double disc = params.discount(t);
        rows.clear();
        for (std::size_t p = 0; p < count; ++p) {
            payoff[p] = params.payoff(paths.exercise_price(p, j));
            if (!options.itm_only || payoff[p] > 0.0) rows.push_back(p);
        }
        if (rows.size() < dim) {
            policy.fallback_dates.push_back(j);
            rows.resize(count);
            for (std::size_t p = 0; p < count; ++p) rows[p] = p;
        }

        Eigen::MatrixXd design(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
        Eigen::VectorXd target(static_cast<Eigen::Index>(rows.size()));
#pragma omp parallel num_threads(thread_count())
        {
            std::vector<double> row(dim);
#pragma omp for schedule(static)
            for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(rows.size()); ++ii) {
                const std::size_t p = rows[static_cast<std::size_t>(ii)];
                evaluator.evaluate(t, paths.exercise_price(p, j), j, 0.0, row);
                for (std::size_t c = 0; c < dim; ++c) design(ii, static_cast<Eigen::Index>(c)) = row[c];
                target[ii] = cash[p];
            }
        }
        auto fit = solve_least_squares(design, target);
        policy.coefficients[static_cast<std::size_t>(j)] = fit.coefficients;

        const auto& coef = policy.coefficients[static_cast<std::size_t>(j)];
        for (std::size_t ii = 0; ii < rows.size(); ++ii) {
            const std::size_t p = rows[ii];
            if (payoff[p] <= 0.0) continue;
            double cont = 0.0;
            for (std::size_t c = 0; c < dim; ++c) cont += design(static_cast<Eigen::Index>(ii), static_cast<Eigen::Index>(c)) * coef[c];
            if (disc * payoff[p] >= cont) cash[p] = disc * payoff[p];
        }
    }
    return policy;
}

int exercise_time(const Policy& policy, const ModelParams& params, const PathBundle& paths, std::size_t path,
                  int from) {
    return PolicyRule(policy, params).exercise_time(paths, path, from);
}

BoundEstimate lower_bound(const Policy& policy, const PathBundle& fresh_paths, const ModelParams& params) {
    const PolicyRule rule(policy, params);
    if (fresh_paths.grids().time.exercise_intervals() != policy.exercise_intervals)
        throw std::invalid_argument("path grid and policy disagree on exercise dates");
    const std::size_t count = fresh_paths.paths();
    std::vector<double> samples(count);
#pragma omp parallel for schedule(static) num_threads(thread_count())
    for (std::ptrdiff_t pp = 0; pp < static_cast<std::ptrdiff_t>(count); ++pp) {
        const auto p = static_cast<std::size_t>(pp);
        const int j = rule.exercise_time(fresh_paths, p);
        samples[p] = params.discount(params.exercise_date(j)) * params.payoff(fresh_paths.exercise_price(p, j));
    }
    auto est = summarize("LB", samples, fresh_paths.seed());
    est.mean = std::max(est.mean, params.payoff(params.x0));
    return est;
}

Policy maturity_only_policy(const ModelParams& params) {
    Policy policy;
    policy.exercise_intervals = params.exercise_intervals;
    policy.maturity = params.maturity;
    policy.coefficients.assign(static_cast<std::size_t>(params.exercise_intervals) + 1, {});
    return policy;
}

}  // namespace bermudan
