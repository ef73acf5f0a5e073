#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bermudan/analytic.hpp"
#include "bermudan/estimate.hpp"
#include "bermudan/model.hpp"
#include "bermudan/regression.hpp"

namespace bermudan {

struct PolicyOptions {
    bool itm_only = true;   // regress on in-the-money paths only
};

/// Regression exercise rule. coefficients[j] holds the continuation-value fit
/// at date j for 1 <= j <= J-1; entries for j = 0 and j = J stay empty.
///
/// Continuation values and payoffs are both discounted to time 0. At date j
/// the holder stops when the payoff is positive and at least the fitted
/// continuation value (ties stop). At j = J the holder always stops.
struct Policy {
    int exercise_intervals = 0;
    double maturity = 0.0;
    BasisSpec basis{BasisKind::ls_policy, 4};
    EuroPricerConfig euro;
    bool itm_only = true;
    std::vector<std::vector<double>> coefficients;
    std::vector<int> fallback_dates;   // dates regressed on all paths
};

/// Policy bound to a model; evaluates decisions along paths. Keeps a
/// reference to `policy`, which must outlive the rule.
class PolicyRule {
public:
    PolicyRule(const Policy& policy, const ModelParams& params);
    PolicyRule(Policy&&, const ModelParams&) = delete;

    const Policy& policy() const { return *policy_; }
    const ModelParams& params() const { return params_; }

    /// Fitted continuation value at date j (1 <= j <= J-1), discounted to 0.
    double continuation(int j, std::span<const double> x) const;

    /// Whether the rule stops at date j in state x. Always false at j = 0.
    bool exercises(int j, std::span<const double> x) const;

    /// First date j' >= max(from, 1) where the rule stops on this path.
    int exercise_time(const PathBundle& paths, std::size_t path, int from = 1) const;

    /// G_j = e^{-r T_tau_j} h(X_{tau_j}) with tau_j the first stop at or after j,
    /// for j = 0..J (entry 0 equals entry 1 since nothing stops at 0).
    void stopped_payoffs(const PathBundle& paths, std::size_t path, std::span<double> out) const;

private:
    const Policy* policy_;
    ModelParams params_;
    Basis basis_;
};

/// Longstaff-Schwartz backward induction on `paths`.
Policy fit_policy(const PathBundle& paths, const ModelParams& params, BasisSpec basis = {BasisKind::ls_policy, 4},
                  PolicyOptions options = {}, const EuroPricerConfig& euro = {});

/// Exercise index of `path` under the policy.
int exercise_time(const Policy& policy, const ModelParams& params, const PathBundle& paths, std::size_t path,
                  int from = 1);

/// Discounted payoff of following the policy on fresh paths. The reported mean
/// is max(h(0, X0), sample mean) since the rule takes no decision at t = 0.
BoundEstimate lower_bound(const Policy& policy, const PathBundle& fresh_paths, const ModelParams& params);

/// Rule that never stops before maturity.
Policy maturity_only_policy(const ModelParams& params);

}  // namespace bermudan
