#include "adl/galerkin.hpp"

#include "adl/error.hpp"

#include <Eigen/LU>
#include <fmt/format.h>
#include <lapacke.h>

#include <cmath>
#include <exception>
#include <limits>

namespace adl::galerkin {

namespace {

constexpr double kZeroEigenvalue = 1e-10;
constexpr double kNegativeRealPart = -1e-8;

// 0-based flat index, or -1 when out of range.
inline Eigen::Index flat(long k, long l, long m, long L)
{
    if (k < 0 || l < 0 || m < 0 || k >= L || l >= L || m >= L)
        return -1;
    return static_cast<Eigen::Index>(m + L * k + L * L * l);
}

// Coefficients of x^d in h_0..h_{L-1}: repeated x h_j = (sqrt(j) h_{j-1} + sqrt(j+1) h_{j+1}) / sqrt(beta).
Eigen::VectorXd monomial_coefficients(int degree, int L, double beta)
{
    Eigen::VectorXd c = Eigen::VectorXd::Zero(L);
    c(0) = 1.0;
    const double s = 1.0 / std::sqrt(beta);
    for (int d = 0; d < degree; ++d) {
        Eigen::VectorXd next = Eigen::VectorXd::Zero(L);
        for (int j = 0; j < L; ++j) {
            if (c(j) == 0.0)
                continue;
            if (j > 0)
                next(j - 1) += s * std::sqrt(static_cast<double>(j)) * c(j);
            if (j + 1 < L)
                next(j + 1) += s * std::sqrt(static_cast<double>(j + 1)) * c(j);
        }
        c = next;
    }
    return c;
}

struct Degrees {
    int p = 0, xi = 0, q = 0;
};

Degrees term_degrees(const Observable::Term& t)
{
    Degrees d;
    for (const auto& f : t.factors) {
        if (f.var != Observable::Variable::Friction && f.coord != 0)
            throw DimensionError("the Galerkin engine is one-dimensional; coordinate index must be 0");
        switch (f.var) {
        case Observable::Variable::P: d.p += f.power; break;
        case Observable::Variable::Friction: d.xi += f.power; break;
        case Observable::Variable::Q: d.q += f.power; break;
        }
    }
    return d;
}

void check_degree(const Observable& phi, const Degrees& d, int L)
{
    if (d.p >= L || d.xi >= L || d.q >= L)
        throw ParameterError(fmt::format("observable '{}' has per-variable degree >= L = {}", phi.name(), L));
}

Eigen::MatrixXd without_constant_mode(const Eigen::MatrixXd& a)
{
    const Eigen::Index n = a.rows() - 1;
    return a.bottomRightCorner(n, n);
}

Eigen::VectorXd solve_mean_zero(const Eigen::MatrixXd& a0, const Eigen::VectorXd& rhs, const char* what)
{
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a0);
    const double rcond = lu.rcond();
    if (!(rcond > 1e3 * std::numeric_limits<double>::epsilon()))
        throw SingularMatrixError(fmt::format("{} is numerically singular (condition ~ {:.3g})", what,
                                              rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity()),
                                  rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity());
    return lu.solve(rhs);
}

void check_params(double beta, double gamma, double epsilon)
{
    if (!(beta > 0.0) || !(gamma > 0.0) || !(epsilon > 0.0))
        throw ParameterError(
            fmt::format("Galerkin needs beta, gamma, epsilon > 0 (got {}, {}, {})", beta, gamma, epsilon));
}

} // namespace

double hermite_eval(int l, double x, double beta)
{
    if (l < 0)
        throw ParameterError("Hermite degree must be nonnegative");
    const double y = std::sqrt(beta) * x;
    double prev = 1.0;
    if (l == 0)
        return prev;
    double cur = y;
    for (int j = 1; j < l; ++j) {
        const double next = (y * cur - std::sqrt(static_cast<double>(j)) * prev) / std::sqrt(static_cast<double>(j + 1));
        prev = cur;
        cur = next;
    }
    return cur;
}

std::size_t hash_index(long k, long l, long m, long L, bool masked)
{
    if (L < 1)
        throw ParameterError("basis size L must be at least 1");
    const Eigen::Index i = flat(k, l, m, L);
    if (i < 0) {
        if (masked)
            return 0;
        throw IndexError(fmt::format("basis index ({}, {}, {}) outside [0, {})", k, l, m, L));
    }
    return static_cast<std::size_t>(i) + 1;
}

Eigen::MatrixXd GalerkinOperator::mean_zero_block() const { return without_constant_mode(a); }

GalerkinOperator assemble(int L, double beta, double gamma, double epsilon)
{
    if (L < 2)
        throw ParameterError(fmt::format("basis size L must be at least 2 (got {})", L));
    check_params(beta, gamma, epsilon);

    const Eigen::Index size = static_cast<Eigen::Index>(L) * L * L;
    GalerkinOperator op;
    op.L = L;
    op.beta = beta;
    op.gamma = gamma;
    op.epsilon = epsilon;
    op.a_ou = Eigen::MatrixXd::Zero(size, size);
    op.a_nh = Eigen::MatrixXd::Zero(size, size);
    op.a_h = Eigen::MatrixXd::Zero(size, size);

    const double rb = 1.0 / std::sqrt(beta);
    auto put = [](Eigen::MatrixXd& mat, Eigen::Index target, Eigen::Index source, double v) {
        if (target >= 0)
            mat(target, source) += v;
    };

    for (long l = 0; l < L; ++l) {
        for (long k = 0; k < L; ++k) {
            for (long m = 0; m < L; ++m) {
                const Eigen::Index src = flat(k, l, m, L);
                const double kd = static_cast<double>(k);
                const double ld = static_cast<double>(l);
                const double md = static_cast<double>(m);

                op.a_ou(src, src) = -kd;

                put(op.a_h, flat(k + 1, l, m - 1, L), src, std::sqrt(md * (kd + 1.0)));
                put(op.a_h, flat(k - 1, l, m + 1, L), src, -std::sqrt((md + 1.0) * kd));

                put(op.a_nh, flat(k, l - 1, m, L), src, rb * kd * std::sqrt(ld));
                put(op.a_nh, flat(k + 2, l - 1, m, L), src, rb * std::sqrt((kd + 1.0) * (kd + 2.0) * ld));
                put(op.a_nh, flat(k, l + 1, m, L), src, -rb * kd * std::sqrt(ld + 1.0));
                put(op.a_nh, flat(k - 2, l + 1, m, L), src, -rb * std::sqrt(kd * (kd - 1.0) * (ld + 1.0)));
            }
        }
    }
    op.a = gamma * op.a_ou + op.a_nh / epsilon + op.a_h;
    return op;
}

Eigen::VectorXcd mean_zero_spectrum(const GalerkinOperator& op)
{
    Eigen::MatrixXd m = -op.mean_zero_block();
    const auto n = static_cast<lapack_int>(m.rows());
    Eigen::VectorXd wr(n), wi(n);
    const lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, m.data(), n, wr.data(), wi.data(),
                                          nullptr, 1, nullptr, 1);
    if (info > 0)
        throw ConvergenceError(fmt::format("QR iteration failed to converge ({} eigenvalues unresolved)", info));
    if (info < 0)
        throw ConvergenceError(fmt::format("dgeev rejected argument {}", -info));
    Eigen::VectorXcd out(n);
    for (lapack_int i = 0; i < n; ++i)
        out(i) = {wr(i), wi(i)};
    return out;
}

double spectral_gap(const GalerkinOperator& op)
{
    const Eigen::VectorXcd lambda = mean_zero_spectrum(op);
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        const double re = lambda(i).real();
        if (re < kNegativeRealPart)
            throw StructureViolation(fmt::format(
                "eigenvalue of -A_0 with negative real part {:.3e} (gamma={}, epsilon={}, L={})", re, op.gamma,
                op.epsilon, op.L));
        if (std::abs(lambda(i)) < kZeroEigenvalue)
            continue;
        gap = std::min(gap, re);
    }
    return gap;
}

Eigen::VectorXd observable_coefficients(const Observable& phi, int L, double beta)
{
    if (L < 1)
        throw ParameterError("basis size L must be at least 1");
    const Eigen::Index size = static_cast<Eigen::Index>(L) * L * L;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(size);
    for (const auto& t : phi.terms()) {
        const Degrees d = term_degrees(t);
        check_degree(phi, d, L);
        const Eigen::VectorXd cp = monomial_coefficients(d.p, L, beta);
        const Eigen::VectorXd cx = monomial_coefficients(d.xi, L, beta);
        const Eigen::VectorXd cq = monomial_coefficients(d.q, L, beta);
        for (int l = 0; l <= d.xi; ++l)
            for (int k = 0; k <= d.p; ++k)
                for (int m = 0; m <= d.q; ++m)
                    out(flat(k, l, m, L)) += t.coeff * cp(k) * cx(l) * cq(m);
    }
    out(0) = 0.0;
    return out;
}

double galerkin_variance(const GalerkinOperator& op, const Eigen::VectorXd& coeffs)
{
    if (coeffs.size() != op.size())
        throw DimensionError(
            fmt::format("coefficient vector has length {}, operator has {}", coeffs.size(), op.size()));
    const Eigen::VectorXd phi0 = coeffs.tail(coeffs.size() - 1);
    if (phi0.isZero(0.0))
        return 0.0;
    const Eigen::VectorXd u = solve_mean_zero(op.mean_zero_block(), phi0, "mean-zero stiffness matrix");
    const double sigma2 = -2.0 * u.dot(phi0);
    if (sigma2 < -1e-10)
        throw StructureViolation(fmt::format("negative asymptotic variance {:.3e}", sigma2));
    return sigma2 > 0.0 ? sigma2 : 0.0;
}

double langevin_limit_variance(int L, double beta, double gamma, const Observable& phi)
{
    if (L < 2)
        throw ParameterError(fmt::format("basis size L must be at least 2 (got {})", L));
    check_params(beta, gamma, 1.0);
    if (phi.degree(Observable::Variable::Friction) > 0)
        throw ParameterError("the Langevin-limit formula takes observables of (q, p) only");

    // (k, m) basis, flat index m + L k.
    const Eigen::Index size = static_cast<Eigen::Index>(L) * L;
    auto idx = [L](long k, long m) -> Eigen::Index {
        if (k < 0 || m < 0 || k >= L || m >= L)
            return -1;
        return static_cast<Eigen::Index>(m + L * k);
    };
    Eigen::MatrixXd a_h = Eigen::MatrixXd::Zero(size, size);
    Eigen::MatrixXd a_ou = Eigen::MatrixXd::Zero(size, size);
    Eigen::VectorXd grad_weight(size); // beta k: |d/dp psi_{k,m}|^2
    for (long k = 0; k < L; ++k) {
        for (long m = 0; m < L; ++m) {
            const Eigen::Index src = idx(k, m);
            const double kd = static_cast<double>(k);
            const double md = static_cast<double>(m);
            a_ou(src, src) = -kd;
            grad_weight(src) = beta * kd;
            if (const auto t = idx(k + 1, m - 1); t >= 0)
                a_h(t, src) += std::sqrt(md * (kd + 1.0));
            if (const auto t = idx(k - 1, m + 1); t >= 0)
                a_h(t, src) -= std::sqrt((md + 1.0) * kd);
        }
    }

    Eigen::VectorXd f = Eigen::VectorXd::Zero(size);
    for (const auto& t : phi.terms()) {
        const Degrees d = term_degrees(t);
        check_degree(phi, d, L);
        const Eigen::VectorXd cp = monomial_coefficients(d.p, L, beta);
        const Eigen::VectorXd cq = monomial_coefficients(d.q, L, beta);
        for (int k = 0; k <= d.p; ++k)
            for (int m = 0; m <= d.q; ++m)
                f(idx(k, m)) += t.coeff * cp(k) * cq(m);
    }
    f(0) = 0.0;
    if (f.isZero(0.0))
        return 0.0;

    Eigen::VectorXd g = Eigen::VectorXd::Zero(size); // p^2 - 1/beta
    g(idx(2, 0)) = std::sqrt(2.0) / beta;

    const Eigen::Index n0 = size - 1;
    const Eigen::MatrixXd a0 = (a_h + gamma * a_ou).bottomRightCorner(n0, n0);
    const Eigen::VectorXd phi0 = -solve_mean_zero(a0, f.tail(n0), "Langevin stiffness matrix");
    const Eigen::VectorXd phim1 = -solve_mean_zero(a0, g.tail(n0), "Langevin stiffness matrix");
    const Eigen::VectorXd w = grad_weight.tail(n0);

    const double grad00 = (w.array() * phi0.array().square()).sum();
    const double grad11 = (w.array() * phim1.array().square()).sum();
    const double grad10 = (w.array() * phim1.array() * phi0.array()).sum();
    const double pairing = phim1.dot(a_h.bottomRightCorner(n0, n0) * phi0);

    const double bracket = gamma * grad00 - gamma * grad10 * grad10 / grad11
                           + beta * beta * pairing * pairing / (gamma * grad11);
    return 2.0 / beta * bracket;
}

// --- sweeps ---

namespace {

VarianceRow variance_row(int L, double beta, const GridPoint& g, const std::vector<Observable>& observables,
                         const std::vector<Eigen::VectorXd>& coeffs)
{
    const GalerkinOperator op = assemble(L, beta, g.gamma, g.epsilon);
    VarianceRow row;
    for (std::size_t j = 0; j < observables.size(); ++j) {
        row.sigma2.push_back(galerkin_variance(op, coeffs[j]));
        row.sigma2_limit.push_back(langevin_limit_variance(L, beta, g.gamma, observables[j]));
    }
    return row;
}

std::vector<Eigen::VectorXd> all_coefficients(const std::vector<Observable>& observables, int L, double beta)
{
    std::vector<Eigen::VectorXd> out;
    for (const auto& o : observables)
        out.push_back(observable_coefficients(o, L, beta));
    return out;
}

template <class Body>
void parallel_over(std::size_t count, Body&& body)
{
    std::vector<std::exception_ptr> errors(count);
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < static_cast<long>(count); ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace

std::vector<double> spectral_gap_sweep(int L, double beta, const std::vector<GridPoint>& grid)
{
    std::vector<double> out(grid.size());
    parallel_over(grid.size(), [&](std::size_t i) {
        out[i] = spectral_gap(assemble(L, beta, grid[i].gamma, grid[i].epsilon));
    });
    return out;
}

std::vector<VarianceRow> variance_sweep(int L, double beta, const std::vector<GridPoint>& grid,
                                        const std::vector<Observable>& observables)
{
    const auto coeffs = all_coefficients(observables, L, beta);
    std::vector<VarianceRow> out(grid.size());
    parallel_over(grid.size(), [&](std::size_t i) { out[i] = variance_row(L, beta, grid[i], observables, coeffs); });
    return out;
}

namespace reference {

std::vector<double> spectral_gap_sweep(int L, double beta, const std::vector<GridPoint>& grid)
{
    std::vector<double> out;
    out.reserve(grid.size());
    for (const auto& g : grid)
        out.push_back(spectral_gap(assemble(L, beta, g.gamma, g.epsilon)));
    return out;
}

std::vector<VarianceRow> variance_sweep(int L, double beta, const std::vector<GridPoint>& grid,
                                        const std::vector<Observable>& observables)
{
    const auto coeffs = all_coefficients(observables, L, beta);
    std::vector<VarianceRow> out;
    out.reserve(grid.size());
    for (const auto& g : grid)
        out.push_back(variance_row(L, beta, g, observables, coeffs));
    return out;
}

} // namespace reference

} // namespace adl::galerkin
