#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bermudan/analytic.hpp"
#include "bermudan/model.hpp"

namespace bermudan {

enum class BasisKind { ls_policy, rho_w, rho_p };

std::string to_string(BasisKind kind);
BasisKind basis_kind_from_string(const std::string& name);

/// Which regression basis to evaluate.
///
/// ls_policy: variant 2 is the monomials of total degree <= 3 in the asset
/// prices; variant 4 (default) appends the jump-free European min-put with
/// maturity T, its square and its cube.
///
/// rho_w / rho_p, with C(t, x; S) the jump-free European min-put maturing at S
/// and t in [T_j, T_{j+1}):
///   1: {1}
///   2: {1, x_i, x_i^2, x_i^3} for every asset i
///   3: {1, C(t,x;T), C(t,x;T)^2}
///   4: rho_w {1, x_i dC(t,x;T_{j+1})/dx_i, x_i dC(t,x;T)/dx_i}
///      rho_p {1, C(t,x e^y;T_{j+1}) - C(t,x;T_{j+1}), C(t,x e^y;T) - C(t,x;T)}
struct BasisSpec {
    BasisKind kind = BasisKind::rho_w;
    int variant = 4;
};

/// Evaluates one basis family for a fixed model. Cheap to copy; holds no state
/// beyond the model and pricer settings.
class Basis {
public:
    Basis(BasisSpec spec, const ModelParams& params, EuroPricerConfig euro = {});

    const BasisSpec& spec() const { return spec_; }
    std::size_t dimension() const { return dim_; }

    /// Writes the row at (t, x). `interval` is the exercise interval j holding
    /// t (needed by variant 4); `y` is the cell representative for rho_p.
    void evaluate(double t, std::span<const double> x, int interval, double y, std::span<double> out) const;

    /// rho_p rows for every cell representative at once, row-major
    /// (reps.size() x dimension()). The jump-free prices at x are shared.
    void evaluate_cells(double t, std::span<const double> x, int interval, std::span<const double> reps,
                        std::span<double> out) const;

private:
    double euro(double t, std::span<const double> x, double maturity) const;
    double euro_delta(double t, std::span<const double> x, double maturity, std::size_t i) const;
    double next_date(double t, int interval) const;

    BasisSpec spec_;
    ModelParams params_;
    EuroPricerConfig euro_cfg_;
    std::size_t dim_ = 0;
    std::vector<std::vector<int>> exponents_;  // ls_policy monomials
};

std::vector<double> evaluate_basis(const BasisSpec& spec, const ModelParams& params, double t,
                                   std::span<const double> x, int interval = -1, double y = 0.0,
                                   const EuroPricerConfig& euro = {});

struct FitResult {
    std::vector<double> coefficients;
    int rank = 0;
    double smallest_singular = 0.0;   // smallest retained, column-equilibrated
    double residual_rms = 0.0;
};

/// Minimum-norm least squares through a rank-revealing SVD of the
/// column-equilibrated design. Singular values below 1e-10 times the largest
/// are treated as zero. Throws on non-finite input.
FitResult solve_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& target);

inline double dot(std::span<const double> row, std::span<const double> coef) {
    double s = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) s += row[i] * coef[i];
    return s;
}

}  // namespace bermudan
