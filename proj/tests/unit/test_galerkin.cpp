#include <doctest.h>

#include "adl/error.hpp"
#include "adl/galerkin.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <vector>

using namespace adl;
using namespace adl::galerkin;

namespace {

double factorial(int n)
{
    return std::tgamma(n + 1.0);
}

// He_n by the explicit sum n! sum_m (-1)^m x^{n-2m} / (m! (n-2m)! 2^m).
double hermite_sum(int n, double x, double beta)
{
    const double y = std::sqrt(beta) * x;
    double s = 0.0;
    for (int m = 0; 2 * m <= n; ++m)
        s += std::pow(-1.0, m) * std::pow(y, n - 2 * m) / (factorial(m) * factorial(n - 2 * m) * std::pow(2.0, m));
    return s * factorial(n) / std::sqrt(factorial(n));
}

// Gauss rule for N(0, 1/beta) by Golub-Welsch on the He_n Jacobi matrix.
void gauss_normal(int nodes, double beta, std::vector<double>& x, std::vector<double>& w)
{
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(nodes, nodes);
    for (int i = 1; i < nodes; ++i)
        J(i, i - 1) = J(i - 1, i) = std::sqrt(double(i));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    x.resize(nodes);
    w.resize(nodes);
    for (int i = 0; i < nodes; ++i) {
        x[i] = es.eigenvalues()(i) / std::sqrt(beta);
        w[i] = es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
    }
}

struct Triple {
    int k, l, m;
};

Triple unflatten(int i, int L)
{
    return {(i / L) % L, i / (L * L), i % L};
}

// Generator of the normalized dynamics (n = 1, U = q^2/2) applied to
// f(p, xi, q) by central differences.
double generator_fd(const std::function<double(double, double, double)>& f, double p, double xi, double q,
                    double beta, double gamma, double eps)
{
    const double h = 1e-4;
    const double fp = (f(p + h, xi, q) - f(p - h, xi, q)) / (2 * h);
    const double fpp = (f(p + h, xi, q) - 2 * f(p, xi, q) + f(p - h, xi, q)) / (h * h);
    const double fq = (f(p, xi, q + h) - f(p, xi, q - h)) / (2 * h);
    const double fxi = (f(p, xi + h, q) - f(p, xi - h, q)) / (2 * h);
    return p * fq - q * fp - (xi / eps) * p * fp + gamma * (-p * fp + fpp / beta) + (p * p - 1 / beta) / eps * fxi;
}

} // namespace

TEST_SUITE("galerkin")
{
    TEST_CASE("hermite functions match the explicit sum")
    {
        for (double beta : {0.5, 1.0, 3.0})
            for (int l = 0; l <= 9; ++l)
                for (double x : {-2.1, -0.4, 0.0, 0.7, 1.9})
                    CHECK(hermite_eval(l, x, beta) == doctest::Approx(hermite_sum(l, x, beta)).epsilon(1e-11));
    }

    TEST_CASE("hermite functions are orthonormal")
    {
        std::vector<double> x, w;
        gauss_normal(20, 2.0, x, w);
        for (int a = 0; a < 8; ++a)
            for (int b = 0; b < 8; ++b) {
                double s = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i)
                    s += w[i] * hermite_eval(a, x[i], 2.0) * hermite_eval(b, x[i], 2.0);
                CHECK(s == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-10).scale(1.0));
            }
    }

    TEST_CASE("hash index")
    {
        CHECK(hash_index(1, 2, 3, 10) == 214);
        CHECK(hash_index(0, 0, 0, 10) == 1);
        CHECK(hash_index(9, 9, 9, 10) == 1000);
        CHECK_THROWS_AS(hash_index(10, 0, 0, 10), IndexError);
        CHECK_THROWS_AS(hash_index(-1, 0, 0, 10), IndexError);
        CHECK(hash_index(-1, 0, 0, 10, true) == 0);
        CHECK(hash_index(0, 0, 10, 10, true) == 0);
    }

    TEST_CASE("small operator entries")
    {
        const auto op = assemble(2, 1.0, 1.0, 1.0);
        REQUIRE(op.size() == 8);
        const std::vector<double> diag{0, 0, -1, -1, 0, 0, -1, -1};
        for (int i = 0; i < 8; ++i)
            CHECK(op.a_ou(i, i) == diag[i]);
        CHECK((op.a_ou - Eigen::MatrixXd(op.a_ou.diagonal().asDiagonal())).norm() == 0.0);
        // A_H couples (k, m) = (0, 1) -> (1, 0) with +1 and back with -1
        const auto src = hash_index(0, 0, 1, 2) - 1;
        const auto dst = hash_index(1, 0, 0, 2) - 1;
        CHECK(op.a_h(dst, src) == 1.0);
        CHECK(op.a_h(src, dst) == -1.0);

        const auto op3 = assemble(3, 1.0, 1.0, 1.0);
        // (k, l, m) = (0, 1, 0) -> (2, 0, 0): sqrt(1 * 2 * 1)
        CHECK(op3.a_nh(hash_index(2, 0, 0, 3) - 1, hash_index(0, 1, 0, 3) - 1) == doctest::Approx(std::sqrt(2.0)));
        const auto op3b = assemble(3, 4.0, 1.0, 1.0);
        CHECK(op3b.a_nh(hash_index(2, 0, 0, 3) - 1, hash_index(0, 1, 0, 3) - 1) ==
              doctest::Approx(std::sqrt(2.0) / 2.0));
    }

    TEST_CASE("structure: dissipative diagonal plus antisymmetric parts")
    {
        const auto op = assemble(6, 1.7, 0.8, 2.5);
        CHECK((op.a_nh + op.a_nh.transpose()).norm() == 0.0);
        CHECK((op.a_h + op.a_h.transpose()).norm() == 0.0);
        CHECK((op.a - (0.8 * op.a_ou + op.a_nh / 2.5 + op.a_h)).norm() < 1e-13);
        CHECK(op.mean_zero_block().rows() == op.size() - 1);
        // constant mode is annihilated
        CHECK(op.a.col(0).norm() == 0.0);
        CHECK_THROWS_AS(assemble(1, 1, 1, 1), ParameterError);
        CHECK_THROWS_AS(assemble(4, 1, 0, 1), ParameterError);
    }

    TEST_CASE("matrix entries equal generator projections by quadrature")
    {
        const int L = 4;
        const double beta = 1.3, gamma = 0.6, eps = 1.7;
        const auto op = assemble(L, beta, gamma, eps);
        std::vector<double> x, w;
        gauss_normal(10, beta, x, w);
        const int N = L * L * L;
        Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(N, N);
        for (int j = 0; j < N; ++j) {
            const auto s = unflatten(j, L);
            auto psi = [&](double p, double xi, double q) {
                return hermite_sum(s.k, p, beta) * hermite_sum(s.l, xi, beta) * hermite_sum(s.m, q, beta);
            };
            for (std::size_t a = 0; a < x.size(); ++a)
                for (std::size_t b = 0; b < x.size(); ++b)
                    for (std::size_t c = 0; c < x.size(); ++c) {
                        const double wt = w[a] * w[b] * w[c];
                        const double g = generator_fd(psi, x[a], x[b], x[c], beta, gamma, eps);
                        for (int i = 0; i < N; ++i) {
                            const auto t = unflatten(i, L);
                            oracle(i, j) += wt * g * hermite_sum(t.k, x[a], beta) * hermite_sum(t.l, x[b], beta) *
                                            hermite_sum(t.m, x[c], beta);
                        }
                    }
        }
        CHECK((oracle - op.a).cwiseAbs().maxCoeff() < 1e-5);
    }

    TEST_CASE("spectral gap")
    {
        const auto op = assemble(10, 1.0, 1.0, 1.0);
        const double gap = spectral_gap(op);
        CHECK(gap > 0.0);
        const auto spec = mean_zero_spectrum(op);
        CHECK(spec.real().minCoeff() >= -1e-8);
        const double gap12 = spectral_gap(assemble(12, 1.0, 1.0, 1.0));
        CHECK(std::abs(gap12 - gap) / gap < 0.05);
    }

    TEST_CASE("observable coefficients")
    {
        const double beta = 2.0;
        const auto cq = observable_coefficients(Observable::parse("q"), 5, beta);
        REQUIRE(cq.size() == 125);
        CHECK(cq(1) == doctest::Approx(1 / std::sqrt(beta)));
        CHECK(cq.norm() == doctest::Approx(1 / std::sqrt(beta)));
        const auto cq2 = observable_coefficients(Observable::parse("q^2"), 5, beta);
        CHECK(cq2(0) == 0.0);
        CHECK(cq2(2) == doctest::Approx(std::sqrt(2.0) / beta));
        CHECK(cq2.norm() == doctest::Approx(std::sqrt(2.0) / beta));
        const auto cqp = observable_coefficients(Observable::parse("q*p - 1"), 5, beta);
        CHECK(cqp(hash_index(1, 0, 1, 5) - 1) == doctest::Approx(1 / beta));
        CHECK(cqp(0) == 0.0);
        CHECK_THROWS_AS(observable_coefficients(Observable::parse("q^5"), 5, beta), ParameterError);
        CHECK_THROWS_AS(observable_coefficients(Observable::parse("q[1]"), 5, beta), ParameterError);
    }

    TEST_CASE("variance equals the dissipation of the Poisson solution")
    {
        const double gamma = 0.9, eps = 2.0;
        const auto op = assemble(8, 1.0, gamma, eps);
        for (const char* text : {"q", "q^2", "q*xi", "xi^2"}) {
            const auto c = observable_coefficients(Observable::parse(text), 8, 1.0);
            const double s2 = galerkin_variance(op, c);
            const Eigen::MatrixXd a0 = op.mean_zero_block();
            const Eigen::VectorXd u = a0.fullPivLu().solve(c.tail(c.size() - 1));
            double diss = 0.0;
            for (Eigen::Index i = 0; i < u.size(); ++i)
                diss += unflatten(int(i + 1), 8).k * u(i) * u(i);
            CHECK(s2 == doctest::Approx(2 * gamma * diss).epsilon(1e-9));
            CHECK(s2 > 0.0);
        }
        // p^2 - 1/beta and q p are generator images of xi and q^2/2
        for (const char* text : {"p^2 - 1", "p*q"})
            CHECK(galerkin_variance(op, observable_coefficients(Observable::parse(text), 8, 1.0)) < 1e-12);
        CHECK(galerkin_variance(op, Eigen::VectorXd::Zero(512)) == 0.0);
    }

    TEST_CASE("large thermal mass approaches the Langevin value")
    {
        // Langevin Poisson solution for phi = q is u = gamma q + p, so sigma^2 = 2 gamma / beta
        CHECK(langevin_limit_variance(10, 1.0, 1.0, Observable::parse("q")) == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(langevin_limit_variance(10, 2.0, 3.0, Observable::parse("q")) == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(langevin_limit_variance(10, 1.0, 1.0, Observable::parse("p^2 - 1")) == doctest::Approx(0.0).scale(1.0));
        const auto op = assemble(10, 1.0, 1.0, 100.0);
        const double s2 = galerkin_variance(op, observable_coefficients(Observable::parse("q"), 10, 1.0));
        CHECK(std::abs(s2 - 2.0) < 1e-6);
        CHECK_THROWS_AS(langevin_limit_variance(10, 1.0, 1.0, Observable::parse("xi")), ParameterError);
    }

    TEST_CASE("parallel sweeps equal the serial reference")
    {
        std::vector<GridPoint> grid;
        for (double g : {0.3, 1.0, 3.0})
            for (double e : {0.5, 2.0, 8.0})
                grid.push_back({g, e});
        CHECK(spectral_gap_sweep(6, 1.0, grid) == reference::spectral_gap_sweep(6, 1.0, grid));
        const auto obs = parse_observables({"q", "q^2"}, 1.0);
        const auto par = variance_sweep(6, 1.0, grid, obs);
        const auto ser = reference::variance_sweep(6, 1.0, grid, obs);
        REQUIRE(par.size() == ser.size());
        for (std::size_t i = 0; i < par.size(); ++i) {
            CHECK(par[i].sigma2 == ser[i].sigma2);
            CHECK(par[i].sigma2_limit == ser[i].sigma2_limit);
        }
    }
}
