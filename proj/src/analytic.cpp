#include "bermudan/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace bermudan {

void EuroPricerConfig::validate() const {
    std::ostringstream err;
    if (quad_nodes < 16) err << " quad_nodes must be >= 16;";
    if (series_cutoff < 0) err << " series_cutoff must be >= 0;";
    if (!(tail_tol > 0.0)) err << " tail_tol must be > 0;";
    const auto msg = err.str();
    if (!msg.empty()) throw std::invalid_argument("invalid european pricer config:" + msg);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2); }

namespace {

// Cubic Hermite table of the normal cdf on [-9, 9].
struct CdfTable {
    static constexpr double lo = -9.0;
    static constexpr double hi = 9.0;
    static constexpr int intervals = 8192;
    double h = (hi - lo) / intervals;
    std::vector<double> value, slope;

    CdfTable() : value(intervals + 1), slope(intervals + 1) {
        for (int i = 0; i <= intervals; ++i) {
            const double x = lo + h * i;
            value[static_cast<std::size_t>(i)] = normal_cdf(x);
            slope[static_cast<std::size_t>(i)] = normal_pdf(x) * h;
        }
    }
};

const CdfTable& cdf_table() {
    static const CdfTable table;
    return table;
}

GaussLegendreRule compute_rule(int n) {
    GaussLegendreRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.nodes[static_cast<std::size_t>(i)] = -z;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = z;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    return rule;
}

void check_inputs(double t, std::span<const double> x, double maturity, const ModelParams& params) {
    if (!(maturity > t)) throw std::invalid_argument("european pricer needs maturity > t");
    if (x.empty()) throw std::invalid_argument("european pricer needs at least one price");
    for (double xi : x)
        if (!(xi > 0.0)) throw std::invalid_argument("european pricer needs positive prices");
    if (!(params.sigma > 0.0)) throw std::invalid_argument("european pricer needs sigma > 0");
}

}  // namespace

const GaussLegendreRule& gauss_legendre(int n) {
    thread_local std::map<int, GaussLegendreRule> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
    return it->second;
}

double poisson_tail(double mean, int cutoff) {
    if (mean <= 0.0) return 0.0;
    // Sum the terms beyond the cutoff directly; 1 - head would cancel.
    double log_term = -mean;
    for (int k = 1; k <= cutoff + 1; ++k) log_term += std::log(mean) - std::log(static_cast<double>(k));
    double term = std::exp(log_term);
    double tail = 0.0;
    for (int k = cutoff + 1; k < cutoff + 100000; ++k) {
        tail += term;
        term *= mean / (k + 1);
        if (k > mean && term < tail * 1e-17) break;
    }
    return tail;
}

double bs_put(double x, double strike, double r, double delta, double sigma, double tau) {
    if (strike <= 0.0) return 0.0;
    const double vol = sigma * std::sqrt(tau);
    const double d_plus = (std::log(strike / x) - (r - delta - 0.5 * sigma * sigma) * tau) / vol;
    const double d_minus = d_plus - vol;
    return strike * std::exp(-r * tau) * normal_cdf(d_plus) - x * std::exp(-delta * tau) * normal_cdf(d_minus);
}

double normal_cdf_fast(double x) {
    const auto& t = cdf_table();
    if (!(x > CdfTable::lo && x < CdfTable::hi)) return normal_cdf(x);
    const double u = (x - CdfTable::lo) / t.h;
    const auto i = std::min(static_cast<std::size_t>(u), static_cast<std::size_t>(CdfTable::intervals - 1));
    const double s = u - static_cast<double>(i);
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * t.value[i] + (s3 - 2 * s2 + s) * t.slope[i] + (3 * s2 - 2 * s3) * t.value[i + 1] +
           (s3 - s2) * t.slope[i + 1];
}

double bs_put_delta_fast(double x, double strike, double r, double delta, double sigma, double tau) {
    if (strike <= 0.0) return 0.0;
    const double vol = sigma * std::sqrt(tau);
    const double d_minus = (std::log(strike / x) - (r - delta + 0.5 * sigma * sigma) * tau) / vol;
    return -std::exp(-delta * tau) * normal_cdf_fast(d_minus);
}

void bs_put_strip(double x, std::span<const double> shifts, std::span<const double> scales, double strike, double r,
                  double delta, double sigma, double tau, std::span<double> out) {
    if (out.size() != shifts.size() || scales.size() != shifts.size()) throw std::invalid_argument("put strip output has the wrong length");
    if (strike <= 0.0) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    const double vol = sigma * std::sqrt(tau);
    const double base = (std::log(strike / x) - (r - delta - 0.5 * sigma * sigma) * tau) / vol;
    const double k_disc = strike * std::exp(-r * tau);
    const double x_disc = x * std::exp(-delta * tau);
    for (std::size_t k = 0; k < shifts.size(); ++k) {
        const double d_plus = base - shifts[k] / vol;
        out[k] = k_disc * normal_cdf_fast(d_plus) - x_disc * scales[k] * normal_cdf_fast(d_plus - vol);
    }
}

double bs_min_put_vol(std::span<const double> x, double tau, double sigma, const ModelParams& params,
                      const EuroPricerConfig& config) {
    const double sk = params.strike;
    if (sk <= 0.0) return 0.0;
    if (x.size() == 1) return bs_put(x[0], sk, params.r, params.delta, sigma, tau);
    config.validate();

    const std::size_t n = x.size();
    const double vol = sigma * std::sqrt(tau);
    const double nu = params.r - params.delta - 0.5 * sigma * sigma;
    const auto& rule = gauss_legendre(config.quad_nodes);
    constexpr double lower = -8.0;

    double all_above = 1.0;
    double share_part = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        const double d_plus = (std::log(sk / x[l]) - nu * tau) / vol;
        const double d_minus = d_plus - vol;
        all_above *= 1.0 - normal_cdf(d_plus);
        if (d_minus <= lower) continue;
        // int_{lower}^{d_minus} phi(z) prod_{l' != l} N(a_{l'} - z - vol) dz
        const double half = 0.5 * (d_minus - lower);
        const double mid = 0.5 * (d_minus + lower);
        double integral = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double z = mid + half * rule.nodes[q];
            double f = normal_pdf(z);
            for (std::size_t o = 0; o < n; ++o) {
                if (o == l) continue;
                f *= normal_cdf(std::log(x[o] / x[l]) / vol - z - vol);
            }
            integral += rule.weights[q] * f;
        }
        share_part += x[l] * std::exp(-params.delta * tau) * half * integral;
    }
    return -share_part + std::exp(-params.r * tau) * sk * (1.0 - all_above);
}

double bs_min_put(double t, std::span<const double> x, double maturity, const ModelParams& params,
                  const EuroPricerConfig& config) {
    check_inputs(t, x, maturity, params);
    return bs_min_put_vol(x, maturity - t, params.sigma, params, config);
}

double bs_min_put_delta(double t, std::span<const double> x, double maturity, std::size_t asset,
                        const ModelParams& params, const EuroPricerConfig& config) {
    check_inputs(t, x, maturity, params);
    if (asset >= x.size()) throw std::invalid_argument("delta asset index out of range");
    if (params.strike <= 0.0) return 0.0;
    const double tau = maturity - t;
    if (x.size() == 1) {
        const double vol = params.sigma * std::sqrt(tau);
        const double d1 =
            (std::log(x[0] / params.strike) + (params.r - params.delta + 0.5 * params.sigma * params.sigma) * tau) / vol;
        return -std::exp(-params.delta * tau) * normal_cdf(-d1);
    }
    std::vector<double> bumped(x.begin(), x.end());
    const double h = 1e-4 * x[asset];
    bumped[asset] = x[asset] + h;
    const double up = bs_min_put_vol(bumped, tau, params.sigma, params, config);
    bumped[asset] = x[asset] - h;
    const double down = bs_min_put_vol(bumped, tau, params.sigma, params, config);
    return (up - down) / (2.0 * h);
}

double merton_put_1d(double t, double x, double maturity, const ModelParams& params,
                     const EuroPricerConfig& config) {
    if (params.assets() != 1) throw std::invalid_argument("merton_put_1d is defined for one asset only");
    const double xs[1] = {x};
    check_inputs(t, xs, maturity, params);
    config.validate();
    const double tau = maturity - t;
    const double lt = params.lambda * tau;
    if (poisson_tail(lt, config.series_cutoff) >= config.tail_tol)
        throw std::invalid_argument("series cutoff leaves more Poisson mass than tail_tol");

    const double jump_shift = params.m + 0.5 * params.theta * params.theta;
    const double compensator = params.lambda * (std::exp(jump_shift) - 1.0) * tau;
    double weight = std::exp(-lt);
    double price = 0.0;
    for (int k = 0; k <= config.series_cutoff; ++k) {
        if (k > 0) weight *= lt / k;
        if (weight == 0.0) break;
        const double sigma_k = std::sqrt(params.sigma * params.sigma + k * params.theta * params.theta / tau);
        const double x_k = x * std::exp(k * jump_shift - compensator);
        price += weight * bs_put(x_k, params.strike, params.r, params.delta, sigma_k, tau);
    }
    return price;
}

}  // namespace bermudan
