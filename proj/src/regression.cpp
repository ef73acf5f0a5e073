#include "bermudan/regression.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bermudan {

std::string to_string(BasisKind kind) {
    switch (kind) {
        case BasisKind::ls_policy: return "ls_policy";
        case BasisKind::rho_w: return "rho_w";
        case BasisKind::rho_p: return "rho_p";
    }
    return "unknown";
}

BasisKind basis_kind_from_string(const std::string& name) {
    if (name == "ls_policy") return BasisKind::ls_policy;
    if (name == "rho_w") return BasisKind::rho_w;
    if (name == "rho_p") return BasisKind::rho_p;
    throw std::invalid_argument("unknown basis kind '" + name + "'");
}

namespace {

void monomial_exponents(std::size_t n, std::vector<int>& current, std::size_t pos, int remaining,
                        std::vector<std::vector<int>>& out) {
    if (pos == n) {
        out.push_back(current);
        return;
    }
    for (int d = 0; d <= remaining; ++d) {
        current[pos] = d;
        monomial_exponents(n, current, pos + 1, remaining - d, out);
    }
    current[pos] = 0;
}

}  // namespace

Basis::Basis(BasisSpec spec, const ModelParams& params, EuroPricerConfig euro)
    : spec_(spec), params_(params), euro_cfg_(euro) {
    const std::size_t n = params_.assets();
    if (spec_.kind == BasisKind::ls_policy) {
        if (spec_.variant != 2 && spec_.variant != 4)
            throw std::invalid_argument("ls_policy basis variant must be 2 or 4");
        std::vector<int> current(n, 0);
        monomial_exponents(n, current, 0, 3, exponents_);
        // Order by total degree so the constant comes first.
        std::stable_sort(exponents_.begin(), exponents_.end(), [](const auto& a, const auto& b) {
            int da = 0, db = 0;
            for (int e : a) da += e;
            for (int e : b) db += e;
            return da < db;
        });
        dim_ = exponents_.size() + (spec_.variant == 4 ? 3 : 0);
        return;
    }
    switch (spec_.variant) {
        case 1: dim_ = 1; break;
        case 2: dim_ = 1 + 3 * n; break;
        case 3: dim_ = 3; break;
        case 4: dim_ = spec_.kind == BasisKind::rho_w ? 1 + 2 * n : 3; break;
        default: {
            std::ostringstream msg;
            msg << "unknown " << to_string(spec_.kind) << " basis variant " << spec_.variant;
            throw std::invalid_argument(msg.str());
        }
    }
}

double Basis::euro(double t, std::span<const double> x, double maturity) const {
    return bs_min_put_vol(x, maturity - t, params_.sigma, params_, euro_cfg_);
}

double Basis::euro_delta(double t, std::span<const double> x, double maturity, std::size_t i) const {
    return bs_min_put_delta(t, x, maturity, i, params_, euro_cfg_);
}

double Basis::next_date(double t, int interval) const {
    if (interval < 0 || interval >= params_.exercise_intervals)
        throw std::invalid_argument("basis variant 4 needs the exercise interval of t");
    const double next = params_.exercise_date(interval + 1);
    if (!(next > t)) throw std::invalid_argument("t lies beyond its exercise interval");
    return next;
}

void Basis::evaluate(double t, std::span<const double> x, int interval, double y, std::span<double> out) const {
    if (out.size() != dim_) throw std::invalid_argument("basis output has the wrong length");
    const double T = params_.maturity;
    if (!(t >= 0.0 && t < T)) throw std::invalid_argument("basis time must lie in [0, T)");
    const std::size_t n = x.size();

    if (spec_.kind == BasisKind::ls_policy) {
        std::size_t c = 0;
        for (const auto& e : exponents_) {
            double v = 1.0;
            for (std::size_t i = 0; i < n; ++i)
                for (int d = 0; d < e[i]; ++d) v *= x[i];
            out[c++] = v;
        }
        if (spec_.variant == 4) {
            const double eu = euro(t, x, T);
            out[c++] = eu;
            out[c++] = eu * eu;
            out[c++] = eu * eu * eu;
        }
        return;
    }

    out[0] = 1.0;
    switch (spec_.variant) {
        case 1: return;
        case 2:
            for (std::size_t i = 0; i < n; ++i) {
                out[1 + 3 * i] = x[i];
                out[2 + 3 * i] = x[i] * x[i];
                out[3 + 3 * i] = x[i] * x[i] * x[i];
            }
            return;
        case 3: {
            const double eu = euro(t, x, T);
            out[1] = eu;
            out[2] = eu * eu;
            return;
        }
        default: break;
    }

    const double next = next_date(t, interval);
    if (spec_.kind == BasisKind::rho_w) {
        if (n == 1) {
            out[1] = bs_put_delta_fast(x[0], params_.strike, params_.r, params_.delta, params_.sigma, next - t) * x[0];
            out[2] = bs_put_delta_fast(x[0], params_.strike, params_.r, params_.delta, params_.sigma, T - t) * x[0];
            return;
        }
        for (std::size_t i = 0; i < n; ++i) {
            out[1 + i] = euro_delta(t, x, next, i) * x[i];
            out[1 + n + i] = euro_delta(t, x, T, i) * x[i];
        }
        return;
    }
    std::vector<double> shifted(x.begin(), x.end());
    const double scale = std::exp(y);
    for (auto& s : shifted) s *= scale;
    out[1] = euro(t, shifted, next) - euro(t, x, next);
    out[2] = euro(t, shifted, T) - euro(t, x, T);
}

void Basis::evaluate_cells(double t, std::span<const double> x, int interval, std::span<const double> reps,
                           std::span<double> out) const {
    if (spec_.kind != BasisKind::rho_p) throw std::invalid_argument("evaluate_cells needs a rho_p basis");
    if (out.size() != reps.size() * dim_) throw std::invalid_argument("basis output has the wrong length");
    if (spec_.variant != 4) {
        // Rows do not depend on the representative.
        evaluate(t, x, interval, 0.0, out.subspan(0, dim_));
        for (std::size_t k = 1; k < reps.size(); ++k)
            std::copy(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(dim_), out.begin() + static_cast<std::ptrdiff_t>(k * dim_));
        return;
    }
    const double T = params_.maturity;
    if (!(t >= 0.0 && t < T)) throw std::invalid_argument("basis time must lie in [0, T)");
    const double next = next_date(t, interval);
    const std::size_t cells = reps.size();
    if (x.size() == 1 && cells < 64) {
        // Slot `cells` holds the unshifted price.
        double shifts[64], scales[64], near[64], far[64];
        for (std::size_t k = 0; k < cells; ++k) {
            shifts[k] = reps[k];
            scales[k] = std::exp(reps[k]);
        }
        shifts[cells] = 0.0;
        scales[cells] = 1.0;
        const std::span<const double> sh(shifts, cells + 1), sc(scales, cells + 1);
        bs_put_strip(x[0], sh, sc, params_.strike, params_.r, params_.delta, params_.sigma, next - t, {near, cells + 1});
        bs_put_strip(x[0], sh, sc, params_.strike, params_.r, params_.delta, params_.sigma, T - t, {far, cells + 1});
        for (std::size_t k = 0; k < cells; ++k) {
            double* row = out.data() + k * dim_;
            row[0] = 1.0;
            row[1] = near[k] - near[cells];
            row[2] = far[k] - far[cells];
        }
        return;
    }
    const double base_next = euro(t, x, next);
    const double base_T = euro(t, x, T);
    std::vector<double> shifted(x.size());
    for (std::size_t k = 0; k < reps.size(); ++k) {
        const double scale = std::exp(reps[k]);
        for (std::size_t i = 0; i < x.size(); ++i) shifted[i] = x[i] * scale;
        double* row = out.data() + k * dim_;
        row[0] = 1.0;
        row[1] = euro(t, shifted, next) - base_next;
        row[2] = euro(t, shifted, T) - base_T;
    }
}

std::vector<double> evaluate_basis(const BasisSpec& spec, const ModelParams& params, double t,
                                   std::span<const double> x, int interval, double y,
                                   const EuroPricerConfig& euro) {
    for (double xi : x)
        if (!(xi > 0.0)) throw std::invalid_argument("basis needs positive prices");
    Basis basis(spec, params, euro);
    std::vector<double> row(basis.dimension());
    basis.evaluate(t, x, interval, y, row);
    return row;
}

FitResult solve_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& target) {
    if (design.rows() < 1 || design.cols() < 1)
        throw std::invalid_argument("least squares needs a non-empty design");
    if (design.rows() != target.size())
        throw std::invalid_argument("design rows and target length differ");
    if (!design.allFinite() || !target.allFinite())
        throw std::invalid_argument("least squares input contains non-finite entries");

    Eigen::VectorXd scale = design.colwise().norm().transpose();
    for (Eigen::Index c = 0; c < scale.size(); ++c)
        if (scale[c] == 0.0) scale[c] = 1.0;
    const Eigen::MatrixXd scaled = design * scale.cwiseInverse().asDiagonal();

    // Tall designs: Householder QR first, then the SVD of the small triangular
    // factor. Singular values and the minimum-norm solution are those of the
    // full scaled design.
    const Eigen::Index d = scaled.cols();
    Eigen::VectorXd coef;
    Eigen::VectorXd singular;
    Eigen::Index rank = 0;
    if (scaled.rows() >= d) {
        const Eigen::HouseholderQR<Eigen::MatrixXd> qr(scaled);
        const Eigen::VectorXd qtb = qr.householderQ().transpose() * target;
        const Eigen::MatrixXd r = qr.matrixQR().topLeftCorner(d, d).triangularView<Eigen::Upper>();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
        svd.setThreshold(1e-10);
        coef = svd.solve(qtb.head(d)).cwiseQuotient(scale);
        singular = svd.singularValues();
        rank = svd.rank();
    } else {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
        svd.setThreshold(1e-10);
        coef = svd.solve(target).cwiseQuotient(scale);
        singular = svd.singularValues();
        rank = svd.rank();
    }

    FitResult fit;
    fit.coefficients.assign(coef.data(), coef.data() + coef.size());
    fit.rank = static_cast<int>(rank);
    fit.smallest_singular = rank > 0 ? singular[rank - 1] : 0.0;
    fit.residual_rms = std::sqrt((design * coef - target).squaredNorm() / static_cast<double>(design.rows()));
    return fit;
}

}  // namespace bermudan
