#pragma once

#include "adl/core.hpp"
#include "adl/integrators.hpp"
#include "adl/observables.hpp"
#include "adl/potentials.hpp"
#include "adl/rng.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace adl {

// --- equilibrium initialization ---

/// Exact draws from the Gibbs marginal e^{-beta U(q)} of a separable
/// one-dimensional potential (harmonic or double well, applied to every
/// coordinate) by rejection against a centred Gaussian envelope.
///
/// The envelope width is twice the root second moment of the target,
/// computed by quadrature on a 4096-point grid over [-R, R], where R is the
/// first power of two with beta (U(+-R) - min U) > 50. The envelope
/// constant is the grid maximum of target / proposal, inflated by 1.2.
class EquilibriumSampler {
public:
    /// Throws ParameterError for a posterior model and EnvelopeError when the
    /// predicted acceptance rate is below 1e-4.
    EquilibriumSampler(const PotentialModel& model, double beta);

    double envelope_sd() const noexcept { return sd_; }
    double range() const noexcept { return range_; }
    double acceptance_rate() const noexcept { return acceptance_; }

    /// One coordinate of q.
    double draw_position(RngStream& rng) const;

    /// Full state: q by rejection, p ~ N(0, I / beta), then the friction
    /// variable: xi ~ N(0, 1/beta), or zeta ~ N(gamma, 1/(beta nu)) in
    /// raw form.
    SamplerState draw(const DynamicsParams& params, FrictionForm form, RngStream& rng) const;

private:
    std::size_t n_ = 1;
    double beta_ = 1.0;
    double sd_ = 1.0;
    double range_ = 1.0;
    double log_m_ = 0.0;   // log envelope constant
    double u_min_ = 0.0;
    double acceptance_ = 1.0;
    PotentialModel model_;
};

SamplerState rejection_init(const PotentialModel& model, const DynamicsParams& params, FrictionForm form,
                            RngStream& rng);

// --- trajectory averages ---

/// (1/K) sum_{k=0}^{K-1} phi_k over a series recorded at every step
/// (rows 0..K); the final row is excluded. Throws for K = 0 or a thinned
/// series.
double trajectory_average(const ObservableSeries& series, std::size_t column);
double trajectory_average(const ObservableSeries& series, const std::string& name);

/// Cumulative averages (1/k) sum_{j<k} phi_j reported every `stride`
/// steps, for k = stride, 2 stride, ..., K.
struct CumulativeSeries {
    std::vector<std::string> names;
    std::vector<std::size_t> steps;
    std::vector<double> times;
    Eigen::MatrixXd averages; // recorded row x observable
};

/// Arbitrary scalar function of the state, for non-polynomial quantities
/// such as a test-set likelihood.
struct NamedFunction {
    std::string name;
    std::function<double(const SamplerState&)> fn;
};

CumulativeSeries cumulative_averages(const SamplerState& init, const SamplerSpec& spec, const StepConfig& config,
                                     const std::vector<NamedFunction>& functions, std::size_t stride,
                                     RngStream& rng);
CumulativeSeries cumulative_averages(const SamplerState& init, const SamplerSpec& spec, const StepConfig& config,
                                     const std::vector<Observable>& observables, std::size_t stride,
                                     RngStream& rng);

// --- replica ensembles ---

enum class InitKind {
    Equilibrium,   // rejection_init per replica
    FixedPosition, // q = q0 for all replicas, p from equilibrium, friction fixed
};

struct InitSpec {
    InitKind kind = InitKind::Equilibrium;
    std::vector<double> q0;
    double friction0 = 0.0;
};

struct EnsembleConfig {
    SamplerSpec spec;
    StepConfig steps;                      // dt and K; thinning is ignored
    std::vector<Observable> observables;
    std::uint64_t seed = 0;
    std::size_t replicas = 2;
    InitSpec init;
    std::vector<std::size_t> checkpoints;  // K values to average over; empty = {K}
    std::vector<std::uint64_t> stream_ids; // per-replica override; empty = replica index
    double max_excluded_fraction = 0.01;

    void validate() const;
};

struct ReplicaEnsembleResult {
    std::vector<std::string> names;
    std::vector<std::size_t> checkpoints;
    std::vector<Eigen::MatrixXd> averages; // per checkpoint: kept replica x observable
    std::vector<std::size_t> replica_ids;  // row -> replica index
    std::vector<std::size_t> excluded;     // replicas dropped after diverging
    std::vector<std::size_t> divergence_steps;
    std::uint64_t seed = 0;
    double dt = 0.0;
    std::size_t requested = 0;
    SamplerSpec spec;

    std::size_t K() const noexcept { return checkpoints.back(); }
    const Eigen::MatrixXd& final_averages() const { return averages.back(); }
    std::size_t column(const std::string& name) const;
};

/// Runs every replica, in parallel with OpenMP. Replica n draws from the
/// stream (seed, n). Rows are keyed by replica index, so the result does
/// not depend on scheduling. Diverging replicas are excluded; more than
/// max_excluded_fraction of them raises NumericalError.
ReplicaEnsembleResult replica_ensemble(const EnsembleConfig& config);

namespace reference {

/// Same contract as adl::replica_ensemble, one replica after another.
ReplicaEnsembleResult replica_ensemble(const EnsembleConfig& config);

} // namespace reference

// --- variance and CLT ---

struct VarianceEstimate {
    double empirical_mean = 0.0;
    double var_of_means = 0.0;        // (1/N) sum (phi_n - mean)^2
    double asymptotic_variance = 0.0; // K dt var_of_means
    std::size_t N = 0;
    std::size_t K = 0;
    double dt = 0.0;
};

VarianceEstimate variance_estimate(std::span<const double> averages, std::size_t K, double dt);
VarianceEstimate variance_estimate(const ReplicaEnsembleResult& result, std::size_t column,
                                   std::size_t checkpoint = static_cast<std::size_t>(-1));

/// sqrt(K dt / sigma2) (phi_n - ref_mean). Throws for sigma2 <= 0.
std::vector<double> rescaled_residuals(std::span<const double> averages, std::size_t K, double dt,
                                       double ref_mean, double sigma2_as);
std::vector<double> rescaled_residuals(const ReplicaEnsembleResult& result, std::size_t column,
                                       double ref_mean, double sigma2_as);

struct Density {
    std::vector<double> centers;
    std::vector<double> densities;
    std::size_t outside = 0; // samples that fell outside the range
};

/// Histogram on [lo, hi] with `bins` equal bins, normalized over the
/// in-range samples so that sum density * width = 1.
Density epdf(std::span<const double> samples, std::size_t bins, double lo, double hi);

/// Least-squares slope of log y against log x over the points with
/// x in [x_lo, x_hi] (at least 3 required).
double loglog_slope(std::span<const double> xs, std::span<const double> ys, double x_lo, double x_hi);
double loglog_slope(std::span<const double> xs, std::span<const double> ys);

// --- distribution summaries ---

double normal_cdf(double x) noexcept;
double normal_pdf(double x) noexcept;

/// Kolmogorov-Smirnov distance of the empirical distribution to N(0, 1).
double ks_distance_normal(std::span<const double> samples);

double sample_mean(std::span<const double> xs);
double skewness(std::span<const double> xs);
/// Non-excess kurtosis (3 for a Gaussian).
double kurtosis(std::span<const double> xs);

} // namespace adl
