#include "adl/estimators.hpp"

#include "adl/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <numbers>

namespace adl {

// --- equilibrium initialization ---

namespace {

double energy_1d(const PotentialModel& model, double x)
{
    if (const auto* dw = std::get_if<DoubleWell>(&model)) {
        const double w = x * x - dw->a;
        return (dw->b / dw->a) * w * w + dw->c * x;
    }
    return 0.5 * x * x;
}

constexpr std::size_t kEnvelopeGrid = 4096;

} // namespace

EquilibriumSampler::EquilibriumSampler(const PotentialModel& model, double beta)
    : n_(dimension(model)), beta_(beta), model_(model)
{
    if (std::holds_alternative<BlrPosterior>(model))
        throw ParameterError("rejection initialization needs a separable one-dimensional potential");
    if (!(beta > 0.0))
        throw ParameterError("beta must be positive");

    auto grid_min = [&](double r, std::size_t points) {
        double u = energy_1d(model, -r);
        for (std::size_t i = 1; i < points; ++i)
            u = std::min(u, energy_1d(model, -r + 2.0 * r * static_cast<double>(i) / static_cast<double>(points - 1)));
        return u;
    };

    double r = 1.0;
    for (;;) {
        const double u0 = grid_min(r, 257);
        if (beta * (energy_1d(model, r) - u0) > 50.0 && beta * (energy_1d(model, -r) - u0) > 50.0)
            break;
        r *= 2.0;
        if (r > 1e6)
            throw EnvelopeError("cannot bracket the bulk of the Gibbs density; is the potential confining?");
    }
    range_ = r;

    std::vector<double> xs(kEnvelopeGrid), logf(kEnvelopeGrid);
    const double h = 2.0 * r / static_cast<double>(kEnvelopeGrid - 1);
    u_min_ = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < kEnvelopeGrid; ++i) {
        xs[i] = -r + h * static_cast<double>(i);
        logf[i] = energy_1d(model, xs[i]);
        u_min_ = std::min(u_min_, logf[i]);
    }
    double z = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < kEnvelopeGrid; ++i) {
        logf[i] = -beta * (logf[i] - u_min_);
        const double w = std::exp(logf[i]) * h;
        z += w;
        m2 += xs[i] * xs[i] * w;
    }
    sd_ = 2.0 * std::sqrt(m2 / z);

    double max_log_ratio = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < kEnvelopeGrid; ++i)
        max_log_ratio = std::max(max_log_ratio, logf[i] + xs[i] * xs[i] / (2.0 * sd_ * sd_));
    log_m_ = max_log_ratio + std::log(1.2);

    acceptance_ = z / (std::exp(log_m_) * std::sqrt(2.0 * std::numbers::pi) * sd_);
    if (acceptance_ < 1e-4)
        throw EnvelopeError(fmt::format(
            "rejection acceptance rate {:.2e} is below 1e-4 (envelope sd {}, range {}); adjust the envelope", acceptance_,
            sd_, range_));
}

double EquilibriumSampler::draw_position(RngStream& rng) const
{
    for (;;) {
        const double x = sd_ * rng.normal();
        const double log_ratio = -beta_ * (energy_1d(model_, x) - u_min_) + x * x / (2.0 * sd_ * sd_) - log_m_;
        if (std::log(rng.uniform()) <= log_ratio)
            return x;
    }
}

SamplerState EquilibriumSampler::draw(const DynamicsParams& params, FrictionForm form, RngStream& rng) const
{
    SamplerState s;
    s.form = form;
    s.q.resize(n_);
    s.p.resize(n_);
    for (auto& x : s.q)
        x = draw_position(rng);
    const double sp = 1.0 / std::sqrt(beta_);
    for (auto& x : s.p)
        x = sp * rng.normal();
    const double xi = sp * rng.normal();
    s.friction = form == FrictionForm::Normalized ? xi : params.gamma + xi / params.epsilon;
    return s;
}

SamplerState rejection_init(const PotentialModel& model, const DynamicsParams& params, FrictionForm form,
                            RngStream& rng)
{
    return EquilibriumSampler(model, params.beta).draw(params, form, rng);
}

// --- trajectory averages ---

double trajectory_average(const ObservableSeries& series, std::size_t column)
{
    const auto rows = series.values.rows();
    if (rows < 2)
        throw ParameterError("trajectory average needs K >= 1 recorded steps");
    if (column >= static_cast<std::size_t>(series.values.cols()))
        throw IndexError(fmt::format("observable column {} out of range", column));
    if (series.steps.size() >= 2 && series.steps[1] - series.steps[0] != 1)
        throw ParameterError("trajectory average needs a series recorded at every step (thinning = 1)");
    return series.values.col(static_cast<Eigen::Index>(column)).head(rows - 1).mean();
}

double trajectory_average(const ObservableSeries& series, const std::string& name)
{
    const auto it = std::find(series.names.begin(), series.names.end(), name);
    if (it == series.names.end())
        throw ParameterError(fmt::format("no observable named '{}' in the series", name));
    return trajectory_average(series, static_cast<std::size_t>(it - series.names.begin()));
}

CumulativeSeries cumulative_averages(const SamplerState& init, const SamplerSpec& spec, const StepConfig& config,
                                     const std::vector<NamedFunction>& functions, std::size_t stride,
                                     RngStream& rng)
{
    spec.validate();
    config.validate();
    init.validate();
    if (stride == 0)
        throw ParameterError("stride must be at least 1");
    if (functions.empty())
        throw ParameterError("cumulative averages need at least one observable");

    CumulativeSeries out;
    for (const auto& f : functions)
        out.names.push_back(f.name);
    const std::size_t rows = config.steps / stride;
    out.averages.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(functions.size()));

    with_stepper(spec, config.dt, [&](auto& stepper) {
        SamplerState s = init;
        std::vector<double> sums(functions.size(), 0.0);
        for (std::size_t k = 0; k < config.steps; ++k) {
            for (std::size_t j = 0; j < functions.size(); ++j)
                sums[j] += functions[j].fn(s);
            if ((k + 1) % stride == 0) {
                const auto r = static_cast<Eigen::Index>(out.steps.size());
                for (std::size_t j = 0; j < functions.size(); ++j)
                    out.averages(r, static_cast<Eigen::Index>(j)) = sums[j] / static_cast<double>(k + 1);
                out.steps.push_back(k + 1);
                out.times.push_back(static_cast<double>(k + 1) * config.dt);
            }
            if (k + 1 < config.steps)
                stepper.step(s, rng);
        }
    });
    return out;
}

CumulativeSeries cumulative_averages(const SamplerState& init, const SamplerSpec& spec, const StepConfig& config,
                                     const std::vector<Observable>& observables, std::size_t stride,
                                     RngStream& rng)
{
    std::vector<NamedFunction> functions;
    for (const auto& o : observables) {
        if (o.min_dimension() > init.dim())
            throw DimensionError(fmt::format("observable '{}' references a missing coordinate", o.name()));
        functions.push_back({o.name(), [o](const SamplerState& s) { return o(s); }});
    }
    return cumulative_averages(init, spec, config, functions, stride, rng);
}

// --- replica ensembles ---

void EnsembleConfig::validate() const
{
    spec.validate();
    steps.validate();
    const std::size_t n = dimension(spec.model);
    if (steps.steps == 0)
        throw ParameterError("replica ensembles need K >= 1 steps");
    if (replicas < 2)
        throw ParameterError("replica ensembles need N >= 2 replicas");
    if (observables.empty())
        throw ParameterError("replica ensembles need at least one observable");
    for (const auto& o : observables)
        if (o.min_dimension() > n)
            throw DimensionError(fmt::format("observable '{}' references a missing coordinate", o.name()));
    for (std::size_t c : checkpoints)
        if (c == 0 || c > steps.steps)
            throw ParameterError(fmt::format("checkpoint {} outside [1, K = {}]", c, steps.steps));
    if (!stream_ids.empty() && stream_ids.size() != replicas)
        throw ParameterError("stream id override must list one id per replica");
    if (init.kind == InitKind::FixedPosition && init.q0.size() != n)
        throw DimensionError(fmt::format("initial position has length {}, model has {}", init.q0.size(), n));
    if (!(max_excluded_fraction >= 0.0))
        throw ParameterError("max_excluded_fraction must be nonnegative");
}

std::size_t ReplicaEnsembleResult::column(const std::string& name) const
{
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end())
        throw ParameterError(fmt::format("no observable named '{}' in the ensemble", name));
    return static_cast<std::size_t>(it - names.begin());
}

namespace {

struct EnsembleRun {
    std::vector<std::size_t> checkpoints;
    std::vector<Eigen::MatrixXd> rows; // per checkpoint, all replicas
    std::vector<char> diverged;
    std::vector<std::size_t> divergence_step;
    std::unique_ptr<EquilibriumSampler> sampler;
};

EnsembleRun prepare(const EnsembleConfig& config)
{
    config.validate();
    EnsembleRun run;
    run.checkpoints = config.checkpoints.empty() ? std::vector<std::size_t>{config.steps.steps} : config.checkpoints;
    std::sort(run.checkpoints.begin(), run.checkpoints.end());
    run.checkpoints.erase(std::unique(run.checkpoints.begin(), run.checkpoints.end()), run.checkpoints.end());
    for (std::size_t c = 0; c < run.checkpoints.size(); ++c)
        run.rows.emplace_back(static_cast<Eigen::Index>(config.replicas),
                              static_cast<Eigen::Index>(config.observables.size()));
    run.diverged.assign(config.replicas, 0);
    run.divergence_step.assign(config.replicas, 0);
    if (config.init.kind == InitKind::Equilibrium)
        run.sampler = std::make_unique<EquilibriumSampler>(config.spec.model, config.spec.params.beta);
    return run;
}

void run_replica(const EnsembleConfig& config, EnsembleRun& run, std::size_t n)
{
    const std::uint64_t id = config.stream_ids.empty() ? n : config.stream_ids[n];
    RngStream rng(config.seed, id);
    const FrictionForm form = config.spec.form();

    SamplerState s;
    if (run.sampler) {
        s = run.sampler->draw(config.spec.params, form, rng);
    } else {
        s.form = form;
        s.q = config.init.q0;
        s.p.resize(s.q.size());
        const double sp = 1.0 / std::sqrt(config.spec.params.beta);
        for (auto& x : s.p)
            x = sp * rng.normal();
        s.friction = config.init.friction0;
    }

    const std::size_t K = config.steps.steps;
    const auto& obs = config.observables;
    std::vector<double> sums(obs.size(), 0.0);
    std::size_t next_cp = 0;
    try {
        with_stepper(config.spec, config.steps.dt, [&](auto& stepper) {
            for (std::size_t k = 0; k < K; ++k) {
                for (std::size_t j = 0; j < obs.size(); ++j)
                    sums[j] += obs[j](s);
                if (k + 1 == run.checkpoints[next_cp]) {
                    for (std::size_t j = 0; j < obs.size(); ++j)
                        run.rows[next_cp](static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j))
                            = sums[j] / static_cast<double>(k + 1);
                    ++next_cp;
                }
                if (k + 1 < K)
                    stepper.step(s, rng);
            }
        });
    } catch (const DivergenceError& e) {
        run.diverged[n] = 1;
        run.divergence_step[n] = e.step();
    }
}

ReplicaEnsembleResult collect(const EnsembleConfig& config, EnsembleRun& run)
{
    ReplicaEnsembleResult out;
    for (const auto& o : config.observables)
        out.names.push_back(o.name());
    out.checkpoints = run.checkpoints;
    out.seed = config.seed;
    out.dt = config.steps.dt;
    out.requested = config.replicas;
    out.spec = config.spec;

    for (std::size_t n = 0; n < config.replicas; ++n) {
        if (run.diverged[n]) {
            out.excluded.push_back(n);
            out.divergence_steps.push_back(run.divergence_step[n]);
        } else {
            out.replica_ids.push_back(n);
        }
    }
    const double fraction = static_cast<double>(out.excluded.size()) / static_cast<double>(config.replicas);
    if (fraction > config.max_excluded_fraction)
        throw NumericalError(fmt::format("{} of {} replicas diverged (limit {:.1f}%); reduce dt", out.excluded.size(),
                                         config.replicas, 100.0 * config.max_excluded_fraction));
    if (out.replica_ids.size() < 2)
        throw NumericalError("fewer than two replicas survived");

    for (auto& full : run.rows) {
        Eigen::MatrixXd kept(static_cast<Eigen::Index>(out.replica_ids.size()), full.cols());
        for (std::size_t r = 0; r < out.replica_ids.size(); ++r)
            kept.row(static_cast<Eigen::Index>(r)) = full.row(static_cast<Eigen::Index>(out.replica_ids[r]));
        out.averages.push_back(std::move(kept));
    }
    return out;
}

} // namespace

ReplicaEnsembleResult replica_ensemble(const EnsembleConfig& config)
{
    EnsembleRun run = prepare(config);
    std::vector<std::exception_ptr> errors(config.replicas);
#pragma omp parallel for schedule(dynamic, 16)
    for (long n = 0; n < static_cast<long>(config.replicas); ++n) {
        try {
            run_replica(config, run, static_cast<std::size_t>(n));
        } catch (...) {
            errors[static_cast<std::size_t>(n)] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return collect(config, run);
}

namespace reference {

ReplicaEnsembleResult replica_ensemble(const EnsembleConfig& config)
{
    EnsembleRun run = prepare(config);
    for (std::size_t n = 0; n < config.replicas; ++n)
        run_replica(config, run, n);
    return collect(config, run);
}

} // namespace reference

// --- variance and CLT ---

VarianceEstimate variance_estimate(std::span<const double> averages, std::size_t K, double dt)
{
    if (averages.size() < 2)
        throw ParameterError("variance estimate needs N >= 2 replicas");
    VarianceEstimate v;
    v.N = averages.size();
    v.K = K;
    v.dt = dt;
    v.empirical_mean = sample_mean(averages);
    double ss = 0.0;
    for (double x : averages)
        ss += (x - v.empirical_mean) * (x - v.empirical_mean);
    v.var_of_means = ss / static_cast<double>(v.N);
    v.asymptotic_variance = static_cast<double>(K) * dt * v.var_of_means;
    return v;
}

VarianceEstimate variance_estimate(const ReplicaEnsembleResult& result, std::size_t column, std::size_t checkpoint)
{
    if (checkpoint == static_cast<std::size_t>(-1))
        checkpoint = result.checkpoints.size() - 1;
    if (checkpoint >= result.checkpoints.size())
        throw IndexError(fmt::format("checkpoint {} out of range", checkpoint));
    const auto& m = result.averages[checkpoint];
    if (column >= static_cast<std::size_t>(m.cols()))
        throw IndexError(fmt::format("observable column {} out of range", column));
    const Eigen::VectorXd col = m.col(static_cast<Eigen::Index>(column));
    return variance_estimate(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())),
                             result.checkpoints[checkpoint], result.dt);
}

std::vector<double> rescaled_residuals(std::span<const double> averages, std::size_t K, double dt,
                                       double ref_mean, double sigma2_as)
{
    if (!(sigma2_as > 0.0))
        throw ParameterError(fmt::format("asymptotic variance must be positive (got {})", sigma2_as));
    const double scale = std::sqrt(static_cast<double>(K) * dt / sigma2_as);
    std::vector<double> r;
    r.reserve(averages.size());
    for (double x : averages)
        r.push_back(scale * (x - ref_mean));
    return r;
}

std::vector<double> rescaled_residuals(const ReplicaEnsembleResult& result, std::size_t column, double ref_mean,
                                       double sigma2_as)
{
    const Eigen::VectorXd col = result.final_averages().col(static_cast<Eigen::Index>(column));
    return rescaled_residuals(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())), result.K(),
                              result.dt, ref_mean, sigma2_as);
}

Density epdf(std::span<const double> samples, std::size_t bins, double lo, double hi)
{
    if (samples.empty())
        throw DataError("density estimate of an empty sample");
    if (bins < 2)
        throw ParameterError("density estimate needs at least 2 bins");
    if (!(hi > lo))
        throw ParameterError("density range must have hi > lo");
    const double width = (hi - lo) / static_cast<double>(bins);
    std::vector<std::size_t> counts(bins, 0);
    Density d;
    for (double x : samples) {
        if (!(x >= lo && x <= hi)) {
            ++d.outside;
            continue;
        }
        const auto b = std::min(bins - 1, static_cast<std::size_t>((x - lo) / width));
        ++counts[b];
    }
    const std::size_t inside = samples.size() - d.outside;
    if (inside == 0)
        throw DataError("no samples fall inside the density range");
    for (std::size_t b = 0; b < bins; ++b) {
        d.centers.push_back(lo + (static_cast<double>(b) + 0.5) * width);
        d.densities.push_back(static_cast<double>(counts[b]) / (static_cast<double>(inside) * width));
    }
    return d;
}

double loglog_slope(std::span<const double> xs, std::span<const double> ys, double x_lo, double x_hi)
{
    if (xs.size() != ys.size())
        throw ParameterError("slope fit needs equally many x and y values");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] >= x_lo && xs[i] <= x_hi))
            continue;
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            throw ParameterError(fmt::format("log-log fit needs positive values (x={}, y={})", xs[i], ys[i]));
        if (!lx.empty() && !(std::log(xs[i]) > lx.back()))
            throw ParameterError("log-log fit needs strictly increasing x");
        lx.push_back(std::log(xs[i]));
        ly.push_back(std::log(ys[i]));
    }
    if (lx.size() < 3)
        throw ParameterError(fmt::format("slope window holds {} points; at least 3 required", lx.size()));
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

double loglog_slope(std::span<const double> xs, std::span<const double> ys)
{
    return loglog_slope(xs, ys, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
}

// --- distribution summaries ---

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) noexcept { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double ks_distance_normal(std::span<const double> samples)
{
    if (samples.empty())
        throw DataError("KS distance of an empty sample");
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = normal_cdf(s[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double sample_mean(std::span<const double> xs)
{
    if (xs.empty())
        throw DataError("mean of an empty sample");
    double s = 0.0;
    for (double x : xs)
        s += x;
    return s / static_cast<double>(xs.size());
}

namespace {

double central_moment(std::span<const double> xs, double mean, int order)
{
    double s = 0.0;
    for (double x : xs)
        s += std::pow(x - mean, order);
    return s / static_cast<double>(xs.size());
}

} // namespace

double skewness(std::span<const double> xs)
{
    const double m = sample_mean(xs);
    const double m2 = central_moment(xs, m, 2);
    return central_moment(xs, m, 3) / std::pow(m2, 1.5);
}

double kurtosis(std::span<const double> xs)
{
    const double m = sample_mean(xs);
    const double m2 = central_moment(xs, m, 2);
    return central_moment(xs, m, 4) / (m2 * m2);
}

} // namespace adl
