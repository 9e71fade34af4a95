#pragma once

#include "adl/observables.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <vector>

/// Hermite tensor-basis Galerkin discretization of the AdL generator for
/// n = 1 and U(q) = q^2 / 2.
///
/// Basis: psi_{k,l,m}(p, xi, q) = h_k(p) h_l(xi) h_m(q) with h_j the
/// Hermite polynomials orthonormal under the N(0, 1/beta) weight. Matrices
/// are stored as (row = target index, column = source index) in 0-based
/// flat order m + L k + L^2 l.
namespace adl::galerkin {

/// h_l(x) = He_l(sqrt(beta) x) / sqrt(l!) by the normalized three-term
/// recurrence.
double hermite_eval(int l, double x, double beta);

/// 1-based flat index 1 + m + L k + L^2 l. Unmasked calls throw IndexError
/// for out-of-range (k, l, m); masked calls return 0 instead.
std::size_t hash_index(long k, long l, long m, long L, bool masked = false);

struct GalerkinOperator {
    int L = 0;
    double beta = 1.0;
    double gamma = 1.0;
    double epsilon = 1.0;
    Eigen::MatrixXd a_ou; // diagonal, entries -k
    Eigen::MatrixXd a_nh; // antisymmetric
    Eigen::MatrixXd a_h;  // antisymmetric
    Eigen::MatrixXd a;    // gamma a_ou + a_nh / epsilon + a_h

    Eigen::Index size() const noexcept { return a.rows(); }

    /// A with the row and column of the constant mode removed.
    Eigen::MatrixXd mean_zero_block() const;
};

/// Throws ParameterError for L < 2 or non-positive beta, gamma, epsilon.
GalerkinOperator assemble(int L, double beta, double gamma, double epsilon);

/// min Re spec(-A_0) over the mean-zero subspace, ignoring eigenvalues of
/// modulus below 1e-10. Throws StructureViolation if any eigenvalue has
/// real part below -1e-8 and ConvergenceError if the QR iteration fails.
double spectral_gap(const GalerkinOperator& op);

/// Eigenvalues of -A_0 (unsorted).
Eigen::VectorXcd mean_zero_spectrum(const GalerkinOperator& op);

/// Coefficients of phi - E[phi] in the basis (length L^3, constant entry
/// zero). phi may involve q, p and xi (coordinate 0 only); each per-variable
/// degree must be below L.
Eigen::VectorXd observable_coefficients(const Observable& phi, int L, double beta);

/// sigma^2 = -2 u . phi_0 with A_0 u = phi_0. `coeffs` has length L^3.
double galerkin_variance(const GalerkinOperator& op, const Eigen::VectorXd& coeffs);

/// Limit of the asymptotic variance as epsilon -> infinity, built from the
/// underdamped Langevin generator on the (k, m) basis. phi must not
/// involve xi.
double langevin_limit_variance(int L, double beta, double gamma, const Observable& phi);

// --- parameter sweeps (one operator per grid point) ---

struct GridPoint {
    double gamma;
    double epsilon;
};

struct VarianceRow {
    std::vector<double> sigma2;       // per observable, at (gamma, epsilon)
    std::vector<double> sigma2_limit; // per observable, epsilon -> infinity
};

/// Spectral gaps over a grid, parallel over grid points with OpenMP.
std::vector<double> spectral_gap_sweep(int L, double beta, const std::vector<GridPoint>& grid);

std::vector<VarianceRow> variance_sweep(int L, double beta, const std::vector<GridPoint>& grid,
                                        const std::vector<Observable>& observables);

/// Serial versions of the sweeps, kept for testing the parallel ones.
namespace reference {

std::vector<double> spectral_gap_sweep(int L, double beta, const std::vector<GridPoint>& grid);

std::vector<VarianceRow> variance_sweep(int L, double beta, const std::vector<GridPoint>& grid,
                                        const std::vector<Observable>& observables);

} // namespace reference

} // namespace adl::galerkin
