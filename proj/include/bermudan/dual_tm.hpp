#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bermudan/estimate.hpp"
#include "bermudan/lower_bound.hpp"
#include "bermudan/model.hpp"
#include "bermudan/regression.hpp"

namespace bermudan {

/// Which Ito sums enter the martingale.
enum class MartingaleTerms { both, wiener_only, jump_only };

std::string to_string(MartingaleTerms terms);
MartingaleTerms martingale_terms_from_string(const std::string& name);

/// Response multiplied by the scaled increments in the integrand regressions.
///   stopped_payoff: G_{j+1}
///   centered:       G_{j+1} - c_j(X_{T_j}), where c_j is a regression of
///                   G_{j+1} on the policy basis at T_j over all fit paths.
/// Both have the same conditional mean given X_{t_l} since c_j is known at t_l.
enum class IntegrandTarget { stopped_payoff, centered };

std::string to_string(IntegrandTarget target);
IntegrandTarget integrand_target_from_string(const std::string& name);

/// Which Euler steps feed each coefficient set.
///   exercise_dates: one regression at t_l = T_j, held on [T_j, T_{j+1})
///   every_step:     one regression per Euler step
///   pooled:         rows from all steps of [T_j, T_{j+1}) in one regression
enum class RegressionSchedule { exercise_dates, every_step, pooled };

std::string to_string(RegressionSchedule schedule);
RegressionSchedule regression_schedule_from_string(const std::string& name);

struct IntegrandOptions {
    RegressionSchedule schedule = RegressionSchedule::exercise_dates;
    IntegrandTarget target = IntegrandTarget::stopped_payoff;
};

/// Fitted integrands of the martingale approximation.
///
/// The Euler steps are grouped into segments; each segment carries one set of
/// coefficients held constant over its steps. With exercise-date regression a
/// segment is an exercise interval [T_j, T_{j+1}) or a single Euler step.
///   phi_c(t_l, x)    = rho_w(t_l, x) . alpha[s][c]     (Wiener component c)
///   psi(t_l, y_k, x) = rho_p(t_l, y_k, x) . beta[s][k] (jump cell k)
struct MartingaleModel {
    int exercise_intervals = 0;
    double maturity = 0.0;
    BasisSpec basis_w{BasisKind::rho_w, 4};
    BasisSpec basis_p{BasisKind::rho_p, 4};
    EuroPricerConfig euro;
    RegressionSchedule schedule = RegressionSchedule::exercise_dates;
    IntegrandTarget target = IntegrandTarget::stopped_payoff;

    std::vector<double> time_nodes;           // Euler grid the model was fitted on
    std::vector<int> exercise_index;          // node of T_j on that grid
    std::vector<double> cell_reps;            // y_k
    std::vector<int> segment_of_step;         // step l -> segment s
    std::vector<std::vector<std::vector<double>>> alpha;   // [segment][component][coef]
    std::vector<std::vector<std::vector<double>>> beta;    // [segment][cell][coef]
    std::vector<std::string> diagnostics;

    std::size_t segments() const { return alpha.size(); }
};

/// Regresses the Wiener and jump integrand targets
///   (dW_l / dt_l) G_{j+1}  and  (Ptilde_{l,k} / mu_{l,k}) G_{j+1},
/// with G_{j+1} the discounted payoff of the policy stopped at or after j+1,
/// on rho_w(t_l, X_l) and rho_p(t_l, y_k, X_l). With zero jump intensity every
/// beta is the zero vector.
MartingaleModel fit_integrands(const Policy& policy, const PathBundle& paths, const ModelParams& params,
                               BasisSpec basis_w = {BasisKind::rho_w, 4}, BasisSpec basis_p = {BasisKind::rho_p, 4},
                               IntegrandOptions options = {}, const EuroPricerConfig& euro = {});

/// Evaluates the fitted martingale along stored paths.
class MartingaleEvaluator {
public:
    /// Keeps a reference to `model`.
    MartingaleEvaluator(const MartingaleModel& model, const ModelParams& params);
    MartingaleEvaluator(MartingaleModel&&, const ModelParams&) = delete;

    /// Checks that `paths` lie on the grid the model was fitted on.
    void check_grid(const PathBundle& paths) const;

    /// Martingale values at the exercise dates, out[j] for j = 0..J.
    /// Integrands are evaluated at the left end state X_{t_l} of each step.
    void values(const PathBundle& paths, std::size_t path, std::span<double> out,
                MartingaleTerms terms = MartingaleTerms::both) const;

private:
    const MartingaleModel* model_;
    ModelParams params_;
    Basis basis_w_;
    Basis basis_p_;
    bool has_jumps_;
};

std::vector<double> build_martingale(const MartingaleModel& model, const ModelParams& params,
                                     const PathBundle& paths, std::size_t path,
                                     MartingaleTerms terms = MartingaleTerms::both);

/// Mean over fresh paths of max_j (H_j - M_j).
BoundEstimate tm_upper_bound(const MartingaleModel& model, const PathBundle& fresh_paths, const ModelParams& params,
                             MartingaleTerms terms = MartingaleTerms::both);

}  // namespace bermudan
