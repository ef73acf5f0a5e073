#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bermudan/model.hpp"

namespace bermudan {

/// Numerical settings of the closed-form European pricers.
struct EuroPricerConfig {
    int quad_nodes = 128;      // Gauss-Legendre nodes for the n >= 2 min-put integral
    int series_cutoff = 50;    // last Poisson term kept in the Merton series
    double tail_tol = 1e-12;   // bound on the discarded Poisson mass

    void validate() const;
};

double normal_cdf(double x);
double normal_pdf(double x);

struct GaussLegendreRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule. Cached per thread.
const GaussLegendreRule& gauss_legendre(int n);

/// P(Poisson(mean) > cutoff).
double poisson_tail(double mean, int cutoff);

/// Black-Scholes put on one asset with continuous dividend yield.
double bs_put(double x, double strike, double r, double delta, double sigma, double tau);

/// Table-interpolated normal cdf, absolute error below 1e-13.
double normal_cdf_fast(double x);

/// Delta of bs_put in x, using normal_cdf_fast.
double bs_put_delta_fast(double x, double strike, double r, double delta, double sigma, double tau);

/// bs_put at the prices x * scales[k], scales[k] = exp(shifts[k]), sharing the
/// work common to all k. Uses normal_cdf_fast.
void bs_put_strip(double x, std::span<const double> shifts, std::span<const double> scales, double strike, double r,
                  double delta, double sigma, double tau, std::span<double> out);

/// European min-put under the jump-free dynamics (r, delta, sigma of `params`)
/// at time t with the given maturity. For one asset this is the Black-Scholes
/// put; for several independent assets with a common volatility it integrates
/// the exchange-ordering probabilities numerically.
double bs_min_put(double t, std::span<const double> x, double maturity, const ModelParams& params,
                  const EuroPricerConfig& config = {});

/// Same as bs_min_put with an explicit volatility.
double bs_min_put_vol(std::span<const double> x, double tau, double sigma, const ModelParams& params,
                      const EuroPricerConfig& config = {});

/// d bs_min_put / d x_asset. Analytic for one asset; central difference with
/// relative bump 1e-4 otherwise.
double bs_min_put_delta(double t, std::span<const double> x, double maturity, std::size_t asset,
                        const ModelParams& params, const EuroPricerConfig& config = {});

/// European put under the Merton jump-diffusion, single asset, via the
/// Poisson-weighted Black-Scholes series truncated at config.series_cutoff.
double merton_put_1d(double t, double x, double maturity, const ModelParams& params,
                     const EuroPricerConfig& config = {});

}  // namespace bermudan
