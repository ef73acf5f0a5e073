#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "bermudan/analytic.hpp"
#include "bermudan/regression.hpp"
#include "bermudan/rng.hpp"

using namespace bermudan;

TEST_CASE("least squares matches the normal equations on a well conditioned design") {
    Rng rng(1);
    std::normal_distribution<double> z;
    const int n = 1000, d = 5;
    Eigen::MatrixXd a(n, d);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < d; ++c) a(i, c) = z(rng) * (c + 1.0);
        b(i) = 1.0 + a(i, 0) - 0.5 * a(i, 3) + 0.1 * z(rng);
    }
    const auto fit = solve_least_squares(a, b);
    const Eigen::VectorXd ref = (a.transpose() * a).ldlt().solve(a.transpose() * b);
    REQUIRE(fit.coefficients.size() == d);
    CHECK(fit.rank == d);
    for (int c = 0; c < d; ++c) CHECK(fit.coefficients[c] == doctest::Approx(ref(c)).epsilon(1e-9));
    // Residuals are orthogonal to every column.
    Eigen::VectorXd coef = Eigen::Map<const Eigen::VectorXd>(fit.coefficients.data(), d);
    const Eigen::VectorXd res = b - a * coef;
    for (int c = 0; c < d; ++c) CHECK(std::abs(a.col(c).dot(res)) <= 1e-8 * a.col(c).norm() * b.norm());
    CHECK(fit.residual_rms == doctest::Approx(std::sqrt(res.squaredNorm() / n)).epsilon(1e-9));
}

TEST_CASE("intercept only fit is the sample mean") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Ones(7, 1);
    Eigen::VectorXd b(7);
    b << 1, 2, 3, 4, 5, 6, 100;
    const auto fit = solve_least_squares(a, b);
    CHECK(fit.coefficients[0] == doctest::Approx(b.mean()).epsilon(1e-14));
}

TEST_CASE("duplicated columns share the weight") {
    Rng rng(2);
    std::normal_distribution<double> z;
    Eigen::MatrixXd a(200, 3);
    Eigen::VectorXd b(200);
    for (int i = 0; i < 200; ++i) {
        a(i, 0) = 1.0;
        a(i, 1) = z(rng);
        a(i, 2) = a(i, 1);
        b(i) = 0.5 + 2.0 * a(i, 1);
    }
    const auto fit = solve_least_squares(a, b);
    CHECK(fit.rank == 2);
    CHECK(fit.coefficients[0] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(fit.coefficients[1] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fit.coefficients[2] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("zero column gets a zero coefficient") {
    Eigen::MatrixXd a(4, 2);
    a << 1, 0, 1, 0, 1, 0, 1, 0;
    Eigen::VectorXd b(4);
    b << 1, 2, 3, 4;
    const auto fit = solve_least_squares(a, b);
    CHECK(fit.coefficients[0] == doctest::Approx(2.5));
    CHECK(fit.coefficients[1] == 0.0);
    CHECK(fit.rank == 1);
}

TEST_CASE("underdetermined systems return the minimum norm solution") {
    Eigen::MatrixXd a(1, 2);
    a << 1, 1;
    Eigen::VectorXd b(1);
    b << 2;
    const auto fit = solve_least_squares(a, b);
    CHECK(fit.coefficients[0] == doctest::Approx(1.0));
    CHECK(fit.coefficients[1] == doctest::Approx(1.0));
}

TEST_CASE("bad least squares input throws") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Ones(3, 2);
    Eigen::VectorXd b = Eigen::VectorXd::Ones(3);
    Eigen::VectorXd short_b = Eigen::VectorXd::Ones(2);
    CHECK_THROWS_AS(solve_least_squares(a, short_b), std::invalid_argument);
    a(1, 1) = std::nan("");
    CHECK_THROWS_AS(solve_least_squares(a, b), std::invalid_argument);
    a(1, 1) = 1.0;
    b(2) = INFINITY;
    CHECK_THROWS_AS(solve_least_squares(a, b), std::invalid_argument);
    CHECK_THROWS_AS(solve_least_squares(Eigen::MatrixXd(0, 2), Eigen::VectorXd(0)), std::invalid_argument);
}

TEST_CASE("basis dimensions") {
    ModelParams one;
    ModelParams two;
    two.x0 = {40.0, 40.0};
    CHECK(Basis({BasisKind::ls_policy, 2}, one).dimension() == 4);
    CHECK(Basis({BasisKind::ls_policy, 4}, one).dimension() == 7);
    CHECK(Basis({BasisKind::ls_policy, 2}, two).dimension() == 10);
    CHECK(Basis({BasisKind::rho_w, 1}, one).dimension() == 1);
    CHECK(Basis({BasisKind::rho_w, 2}, one).dimension() == 4);
    CHECK(Basis({BasisKind::rho_w, 2}, two).dimension() == 7);
    CHECK(Basis({BasisKind::rho_w, 3}, one).dimension() == 3);
    CHECK(Basis({BasisKind::rho_w, 4}, one).dimension() == 3);
    CHECK(Basis({BasisKind::rho_w, 4}, two).dimension() == 5);
    CHECK(Basis({BasisKind::rho_p, 4}, one).dimension() == 3);
    CHECK_THROWS_AS(Basis({BasisKind::ls_policy, 3}, one), std::invalid_argument);
    CHECK_THROWS_AS(Basis({BasisKind::rho_w, 5}, one), std::invalid_argument);
    CHECK_THROWS_AS(basis_kind_from_string("rho_q"), std::invalid_argument);
    CHECK(basis_kind_from_string(to_string(BasisKind::rho_p)) == BasisKind::rho_p);
}

TEST_CASE("variant four rows from direct pricing") {
    ModelParams p;
    const double x[1] = {37.5};
    const double t = 0.23;   // inside interval 2, next date 0.3
    std::vector<double> w(3), q(3);
    Basis({BasisKind::rho_w, 4}, p).evaluate(t, x, 2, 0.0, w);
    const double dn = -normal_cdf(-(std::log(37.5 / 40.0) + 0.06 * 0.07) / (0.2 * std::sqrt(0.07)));
    const double dt = -normal_cdf(-(std::log(37.5 / 40.0) + 0.06 * 0.77) / (0.2 * std::sqrt(0.77)));
    CHECK(w[0] == 1.0);
    CHECK(w[1] == doctest::Approx(37.5 * dn).epsilon(1e-11));
    CHECK(w[2] == doctest::Approx(37.5 * dt).epsilon(1e-11));
    const double y = -0.13;
    Basis({BasisKind::rho_p, 4}, p).evaluate(t, x, 2, y, q);
    const double xs = 37.5 * std::exp(y);
    CHECK(q[1] == doctest::Approx(bs_put(xs, 40, 0.04, 0, 0.2, 0.07) - bs_put(37.5, 40, 0.04, 0, 0.2, 0.07)).epsilon(1e-10));
    CHECK(q[2] == doctest::Approx(bs_put(xs, 40, 0.04, 0, 0.2, 0.77) - bs_put(37.5, 40, 0.04, 0, 0.2, 0.77)).epsilon(1e-10));
}

TEST_CASE("cell rows agree with single rows") {
    for (int assets : {1, 2}) {
        ModelParams p;
        p.x0.assign(static_cast<std::size_t>(assets), 40.0);
        const auto grids = make_grids(p, 0.01, 10);
        for (int variant : {1, 2, 3, 4}) {
            Basis b({BasisKind::rho_p, variant}, p);
            const std::vector<double> x = assets == 1 ? std::vector<double>{41.2} : std::vector<double>{41.2, 38.9};
            std::vector<double> all(grids.space.cells() * b.dimension()), one(b.dimension());
            b.evaluate_cells(0.57, x, 5, grids.space.reps, all);
            for (std::size_t k = 0; k < grids.space.cells(); ++k) {
                b.evaluate(0.57, x, 5, grids.space.reps[k], one);
                for (std::size_t c = 0; c < b.dimension(); ++c)
                    CHECK(std::abs(all[k * b.dimension() + c] - one[c]) <= 1e-10);
            }
        }
    }
}

TEST_CASE("basis arguments are checked") {
    ModelParams p;
    Basis b({BasisKind::rho_w, 4}, p);
    std::vector<double> out(3);
    const double x[1] = {40.0};
    CHECK_THROWS_AS(b.evaluate(1.0, x, 9, 0.0, out), std::invalid_argument);
    CHECK_THROWS_AS(b.evaluate(-0.1, x, 0, 0.0, out), std::invalid_argument);
    CHECK_THROWS_AS(b.evaluate(0.35, x, 2, 0.0, out), std::invalid_argument);
    CHECK_THROWS_AS(b.evaluate(0.5, x, -1, 0.0, out), std::invalid_argument);
    std::vector<double> shorter(2);
    CHECK_THROWS_AS(b.evaluate(0.5, x, 5, 0.0, shorter), std::invalid_argument);
    const double bad[1] = {-1.0};
    CHECK_THROWS_AS(evaluate_basis({BasisKind::rho_w, 4}, p, 0.5, bad, 5), std::invalid_argument);
}
