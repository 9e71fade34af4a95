#include "commands.hpp"

#include "grid.hpp"

#include "adl/csv.hpp"
#include "adl/dataset.hpp"
#include "adl/error.hpp"
#include "adl/estimators.hpp"
#include "adl/integrators.hpp"
#include "adl/observables.hpp"

#include <fmt/format.h>

#include <cmath>
#include <exception>
#include <iostream>
#include <memory>

namespace adl::cli {

using nlohmann::json;

namespace {

void warn_if_stiff(double dt, double epsilon)
{
    if (thermostat_is_stiff(dt, epsilon))
        fmt::print(stderr, "warning: dt = {} exceeds epsilon / 10 = {}; the thermostat update may be inaccurate\n",
                   dt, epsilon / 10.0);
}

std::string output(const Common& common, const std::string& file) { return (common.out / file).string(); }

std::vector<double> axis(const std::string& grid, double fallback)
{
    return grid.empty() ? std::vector<double>{fallback} : parse_grid(grid);
}

std::vector<galerkin::GridPoint> product(const std::vector<double>& gammas, const std::vector<double>& epsilons)
{
    std::vector<galerkin::GridPoint> out;
    for (double g : gammas)
        for (double e : epsilons)
            out.push_back({g, e});
    return out;
}

json exclusions_json(const ReplicaEnsembleResult& r)
{
    return json{{"count", r.excluded.size()}, {"replicas", r.excluded}, {"steps", r.divergence_steps}};
}

std::shared_ptr<const Dataset> load_shared(const std::string& path, bool header, Split split)
{
    if (path.empty())
        throw ParameterError("a dataset path is required");
    return std::make_shared<const Dataset>(load_dataset(path, header, split));
}

} // namespace

PotentialModel PotentialOptions::build() const
{
    if (kind == "harmonic") {
        if (n == 0)
            throw ParameterError("dimension must be at least 1");
        return Harmonic{n};
    }
    if (kind == "double-well")
        return DoubleWell::make(a, b, c, n);
    throw ParameterError(fmt::format("unknown potential '{}' (expected harmonic or double-well)", kind));
}

std::vector<galerkin::GridPoint> GalerkinOptions::points() const
{
    if (!alpha_grid.empty()) {
        if (!gamma_grid.empty() || !epsilon_grid.empty())
            throw ParameterError("--alpha-grid cannot be combined with --gamma-grid or --epsilon-grid");
        std::vector<galerkin::GridPoint> out;
        for (double a : parse_grid(alpha_grid))
            out.push_back({a, a});
        return out;
    }
    return product(axis(gamma_grid, gamma), axis(epsilon_grid, epsilon));
}

// --- Galerkin commands ---

Report cmd_spectral_gap(const GalerkinOptions& o, const Common& common)
{
    const auto points = o.points();
    const auto gaps = galerkin::spectral_gap_sweep(o.L, o.beta, points);

    CsvTable table({"gamma", "epsilon", "L", "beta", "spectral_gap"});
    for (std::size_t i = 0; i < points.size(); ++i)
        table.add_row({points[i].gamma, points[i].epsilon, static_cast<double>(o.L), o.beta, gaps[i]});
    Report report;
    report.outputs.push_back(output(common, "spectral_gap.csv"));
    table.write(report.outputs.back());
    report.extra["points"] = points.size();
    return report;
}

Report cmd_galerkin_variance(const GalerkinOptions& o, const Common& common)
{
    const auto points = o.points();
    const auto observables = parse_observables(o.observables, o.beta);
    const auto rows = galerkin::variance_sweep(o.L, o.beta, points, observables);

    std::vector<std::string> header{"gamma", "epsilon", "L", "beta"};
    for (const auto& obs : observables) {
        header.push_back("sigma2:" + obs.name());
        header.push_back("sigma2_limit:" + obs.name());
    }
    CsvTable table(header);
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::vector<double> row{points[i].gamma, points[i].epsilon, static_cast<double>(o.L), o.beta};
        for (std::size_t j = 0; j < observables.size(); ++j) {
            row.push_back(rows[i].sigma2[j]);
            row.push_back(rows[i].sigma2_limit[j]);
        }
        table.add_row(std::move(row));
    }
    Report report;
    report.outputs.push_back(output(common, "galerkin_variance.csv"));
    table.write(report.outputs.back());
    return report;
}

// --- replica-ensemble commands ---

Report cmd_variance_sweep(const SweepOptions& o, const Common& common)
{
    const PotentialModel model = o.potential.build();
    const auto observables = parse_observables(o.observables, o.beta);
    const auto points = product(axis(o.gamma_grid, o.gamma), axis(o.epsilon_grid, o.epsilon));

    std::vector<std::string> header{"gamma", "epsilon", "beta", "dt", "K", "N", "excluded"};
    for (const auto& obs : observables) {
        header.push_back("mean:" + obs.name());
        header.push_back("var_of_means:" + obs.name());
        header.push_back("asymptotic_variance:" + obs.name());
    }
    CsvTable table(header);
    Report report;
    report.extra["exclusions"] = json::array();

    for (const auto& pt : points) {
        warn_if_stiff(o.dt, pt.epsilon);
        EnsembleConfig cfg;
        cfg.spec = SamplerSpec{Scheme::Badodab, model,
                               DynamicsParams::normalized(o.beta, pt.gamma, pt.epsilon, o.potential.n), 0};
        cfg.steps = StepConfig{o.dt, o.steps, 1};
        cfg.observables = observables;
        cfg.seed = common.seed;
        cfg.replicas = o.replicas;
        const auto result = replica_ensemble(cfg);

        std::vector<double> row{pt.gamma,
                                pt.epsilon,
                                o.beta,
                                o.dt,
                                static_cast<double>(o.steps),
                                static_cast<double>(result.replica_ids.size()),
                                static_cast<double>(result.excluded.size())};
        for (std::size_t j = 0; j < observables.size(); ++j) {
            const auto v = variance_estimate(result, j);
            row.insert(row.end(), {v.empirical_mean, v.var_of_means, v.asymptotic_variance});
        }
        table.add_row(std::move(row));
        json ex = exclusions_json(result);
        ex["gamma"] = pt.gamma;
        ex["epsilon"] = pt.epsilon;
        report.extra["exclusions"].push_back(ex);
    }
    report.outputs.push_back(output(common, "variance_sweep.csv"));
    table.write(report.outputs.back());
    return report;
}

Report cmd_clt(const CltOptions& o, const Common& common)
{
    warn_if_stiff(o.dt, o.epsilon);
    const auto observables = parse_observables(o.observables, o.beta);

    EnsembleConfig cfg;
    cfg.spec = SamplerSpec{Scheme::Badodab, o.potential.build(),
                           DynamicsParams::normalized(o.beta, o.gamma, o.epsilon, o.potential.n), 0};
    cfg.steps = StepConfig{o.dt, o.steps, 1};
    cfg.observables = observables;
    cfg.seed = common.seed;
    cfg.replicas = o.replicas;
    for (std::size_t k : o.checkpoints)
        if (k <= o.steps)
            cfg.checkpoints.push_back(k);
    cfg.checkpoints.push_back(o.steps);
    const auto result = replica_ensemble(cfg);
    const auto& ks = result.checkpoints;

    std::vector<std::string> res_header{"replica"};
    std::vector<std::string> pdf_header{"bin_center"};
    std::vector<std::vector<double>> residual_columns;
    std::vector<Density> densities;
    std::vector<double> fitted_var;
    Report report;
    report.extra["summary"] = json::array();

    for (std::size_t j = 0; j < observables.size(); ++j) {
        const auto v = variance_estimate(result, j);
        for (std::size_t c = 0; c < ks.size(); ++c) {
            const std::string tag = fmt::format("{}@K={}", observables[j].name(), ks[c]);
            const Eigen::VectorXd col = result.averages[c].col(static_cast<Eigen::Index>(j));
            auto r = rescaled_residuals(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())),
                                        ks[c], result.dt, v.empirical_mean, v.asymptotic_variance);
            const double mean = sample_mean(r);
            double var = 0.0;
            for (double x : r)
                var += (x - mean) * (x - mean);
            var /= static_cast<double>(r.size());

            res_header.push_back(tag);
            pdf_header.push_back("density:" + tag);
            densities.push_back(epdf(r, o.bins, o.lo, o.hi));
            fitted_var.push_back(var);
            report.extra["summary"].push_back({{"observable", observables[j].name()},
                                               {"K", ks[c]},
                                               {"ks_distance", ks_distance_normal(r)},
                                               {"skewness", skewness(r)},
                                               {"kurtosis", kurtosis(r)},
                                               {"residual_mean", mean},
                                               {"residual_variance", var},
                                               {"outside_range", densities.back().outside}});
            residual_columns.push_back(std::move(r));
        }
        report.extra["sigma2"][observables[j].name()] = v.asymptotic_variance;
        report.extra["reference_mean"][observables[j].name()] = v.empirical_mean;
    }
    for (std::size_t t = 1; t < res_header.size(); ++t)
        pdf_header.push_back("fitted:" + res_header[t]);
    pdf_header.push_back("normal");

    CsvTable residuals(res_header);
    for (std::size_t n = 0; n < result.replica_ids.size(); ++n) {
        std::vector<double> row{static_cast<double>(result.replica_ids[n])};
        for (const auto& col : residual_columns)
            row.push_back(col[n]);
        residuals.add_row(std::move(row));
    }
    CsvTable pdf(pdf_header);
    for (std::size_t b = 0; b < o.bins; ++b) {
        const double x = densities.front().centers[b];
        std::vector<double> row{x};
        for (const auto& d : densities)
            row.push_back(d.densities[b]);
        for (double var : fitted_var)
            row.push_back(var > 0.0 ? normal_pdf(x / std::sqrt(var)) / std::sqrt(var) : 0.0);
        row.push_back(normal_pdf(x));
        pdf.add_row(std::move(row));
    }
    report.outputs.push_back(output(common, "clt_residuals.csv"));
    residuals.write(report.outputs.back());
    report.outputs.push_back(output(common, "clt_epdf.csv"));
    pdf.write(report.outputs.back());
    report.extra["exclusions"] = exclusions_json(result);
    return report;
}

// --- single trajectories ---

Report cmd_sample(const SampleOptions& o, const Common& common)
{
    SamplerSpec spec;
    if (!o.train.empty())
        spec.model = BlrPosterior::make(load_shared(o.train, o.header, Split::Train), o.prior_sigma2);
    else
        spec.model = o.potential.build();
    const std::size_t n = dimension(spec.model);

    if (o.scheme == "badodab") {
        spec.scheme = Scheme::Badodab;
        spec.params = o.raw ? normalize_params(o.beta, o.nu, o.sigma_a, o.sigma_g, n)
                            : DynamicsParams::normalized(o.beta, o.gamma, o.epsilon, n);
        warn_if_stiff(o.dt, spec.params.epsilon);
    } else if (o.scheme == "odabado") {
        spec.scheme = Scheme::Odabado;
        spec.params = DynamicsParams{o.beta, o.beta * (o.sigma_a * o.sigma_a + o.sigma_g * o.sigma_g) / 2.0,
                                     std::sqrt(o.nu), n, RawParams{o.nu, o.sigma_a, o.sigma_g}};
        spec.minibatch = o.minibatch;
    } else {
        throw ParameterError(fmt::format("unknown scheme '{}' (expected badodab or odabado)", o.scheme));
    }
    spec.validate();

    RngStream rng(common.seed, 0);
    SamplerState init;
    if (!o.q0.empty() || std::holds_alternative<BlrPosterior>(spec.model)) {
        init.form = spec.form();
        if (!o.q0.empty())
            init.q = o.q0;
        else
            init.q = blr_map_estimate(std::get<BlrPosterior>(spec.model));
        if (init.q.size() != n)
            throw DimensionError(fmt::format("--q0 has {} entries, model dimension is {}", init.q.size(), n));
        init.p.resize(n);
        for (auto& x : init.p)
            x = rng.normal() / std::sqrt(o.beta);
        init.friction = o.friction0;
    } else {
        init = rejection_init(spec.model, spec.params, spec.form(), rng);
    }

    const auto observables = parse_observables(o.observables, o.beta);
    const auto series = simulate(init, spec, StepConfig{o.dt, o.steps, o.thinning}, observables, rng);

    std::vector<std::string> header{"step", "time"};
    header.insert(header.end(), series.names.begin(), series.names.end());
    CsvTable table(header);
    for (Eigen::Index r = 0; r < series.values.rows(); ++r) {
        std::vector<double> row{static_cast<double>(series.steps[static_cast<std::size_t>(r)]),
                                series.times[static_cast<std::size_t>(r)]};
        for (Eigen::Index c = 0; c < series.values.cols(); ++c)
            row.push_back(series.values(r, c));
        table.add_row(std::move(row));
    }
    Report report;
    report.outputs.push_back(output(common, "trajectory.csv"));
    table.write(report.outputs.back());
    return report;
}

Report cmd_blr(const BlrOptions& o, const Common& common)
{
    auto train = load_shared(o.train, o.header, Split::Train);
    std::shared_ptr<const Dataset> test;
    if (!o.test.empty())
        test = load_shared(o.test, o.header, Split::Test);
    if (o.pca > 0) {
        auto [tr, te] = pca_whiten(*train, test ? *test : *train, o.pca);
        train = std::make_shared<const Dataset>(std::move(tr));
        if (test)
            test = std::make_shared<const Dataset>(std::move(te));
    }
    const BlrPosterior posterior = BlrPosterior::make(train, o.prior_sigma2);
    const std::size_t d = posterior.dim();

    SamplerSpec spec;
    spec.model = posterior;
    if (o.scheme == "odabado") {
        spec.scheme = Scheme::Odabado;
        spec.params = DynamicsParams{o.beta, o.beta * o.sigma_a * o.sigma_a / 2.0, std::sqrt(o.nu), d,
                                     RawParams{o.nu, o.sigma_a, 0.0}};
        spec.minibatch = o.minibatch;
    } else if (o.scheme == "badodab") {
        spec.scheme = Scheme::Badodab;
        spec.params = DynamicsParams::normalized(o.beta, o.gamma, o.epsilon, d);
    } else {
        throw ParameterError(fmt::format("unknown scheme '{}' (expected odabado or badodab)", o.scheme));
    }
    spec.validate();
    if (o.replicas == 0)
        throw ParameterError("at least one replica is required");
    if (o.stride == 0 || o.stride > o.steps)
        throw ParameterError("stride must lie in [1, steps]");

    std::vector<double> q0;
    if (o.init == "map")
        q0 = blr_map_estimate(posterior);
    else if (o.init == "zero")
        q0.assign(d, 0.0);
    else
        throw ParameterError(fmt::format("unknown init '{}' (expected map or zero)", o.init));

    std::vector<NamedFunction> functions;
    for (std::size_t i = 0; i < d; ++i) {
        const auto obs = Observable::parse(fmt::format("q[{}]", i));
        functions.push_back({obs.name(), [obs](const SamplerState& s) { return obs(s); }});
    }
    for (std::size_t i = 0; i < d; ++i) {
        const auto obs = Observable::parse(fmt::format("q[{}]^2", i));
        functions.push_back({obs.name(), [obs](const SamplerState& s) { return obs(s); }});
    }
    if (test)
        functions.push_back({"test_likelihood", [test](const SamplerState& s) { return mean_likelihood(*test, s.q); }});

    const StepConfig steps{o.dt, o.steps, 1};
    std::vector<CumulativeSeries> runs(o.replicas);
    std::vector<std::exception_ptr> errors(o.replicas);
#pragma omp parallel for schedule(dynamic, 1)
    for (long r = 0; r < static_cast<long>(o.replicas); ++r) {
        try {
            RngStream rng(common.seed, static_cast<std::uint64_t>(r));
            SamplerState init;
            init.form = spec.form();
            init.q = q0;
            init.p.resize(d);
            for (auto& x : init.p)
                x = rng.normal() / std::sqrt(o.beta);
            init.friction = 0.0;
            runs[static_cast<std::size_t>(r)] = cumulative_averages(init, spec, steps, functions, o.stride, rng);
        } catch (...) {
            errors[static_cast<std::size_t>(r)] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e)
            std::rethrow_exception(e);

    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(runs.front().averages.rows(), runs.front().averages.cols());
    for (const auto& run : runs)
        mean += run.averages;
    mean /= static_cast<double>(o.replicas);

    std::vector<std::string> header{"step", "time"};
    header.insert(header.end(), runs.front().names.begin(), runs.front().names.end());
    CsvTable table(header);
    for (Eigen::Index r = 0; r < mean.rows(); ++r) {
        std::vector<double> row{static_cast<double>(runs.front().steps[static_cast<std::size_t>(r)]),
                                runs.front().times[static_cast<std::size_t>(r)]};
        for (Eigen::Index c = 0; c < mean.cols(); ++c)
            row.push_back(mean(r, c));
        table.add_row(std::move(row));
    }
    Report report;
    report.outputs.push_back(output(common, "blr_trace.csv"));
    table.write(report.outputs.back());
    report.extra["initial_position"] = q0;
    report.extra["dimension"] = d;
    return report;
}

Report cmd_synth_data(const SynthOptions& o, const Common& common)
{
    if (o.dim == 0 || o.n_train == 0 || o.n_test == 0)
        throw ParameterError("synthetic data needs positive dimension and row counts");
    RngStream truth_rng(common.seed, 0);
    std::vector<double> w(o.dim);
    for (auto& x : w)
        x = o.weight_scale * truth_rng.normal();
    RngStream train_rng(common.seed, 1);
    RngStream test_rng(common.seed, 2);
    const Dataset train = make_logistic_dataset(w, o.n_train, train_rng, Split::Train);
    const Dataset test = make_logistic_dataset(w, o.n_test, test_rng, Split::Test);

    Report report;
    report.outputs.push_back(output(common, "train.csv"));
    save_dataset(train, report.outputs.back(), false);
    report.outputs.push_back(output(common, "test.csv"));
    save_dataset(test, report.outputs.back(), false);
    std::vector<std::string> header;
    for (std::size_t i = 0; i < o.dim; ++i)
        header.push_back(fmt::format("w{}", i));
    CsvTable truth(header);
    truth.add_row(w);
    report.outputs.push_back(output(common, "truth.csv"));
    truth.write(report.outputs.back());
    report.extra["weights"] = w;
    return report;
}

// --- config echo ---

void to_json(json& j, const PotentialOptions& o)
{
    j = json{{"kind", o.kind}, {"a", o.a}, {"b", o.b}, {"c", o.c}, {"n", o.n}};
}

void to_json(json& j, const GalerkinOptions& o)
{
    j = json{{"L", o.L},
             {"beta", o.beta},
             {"gamma", o.gamma},
             {"epsilon", o.epsilon},
             {"gamma_grid", o.gamma_grid},
             {"epsilon_grid", o.epsilon_grid},
             {"alpha_grid", o.alpha_grid},
             {"observables", o.observables}};
}

void to_json(json& j, const SweepOptions& o)
{
    j = json{{"potential", o.potential}, {"beta", o.beta},         {"gamma", o.gamma},
             {"epsilon", o.epsilon},     {"gamma_grid", o.gamma_grid}, {"epsilon_grid", o.epsilon_grid},
             {"dt", o.dt},               {"steps", o.steps},       {"replicas", o.replicas},
             {"observables", o.observables}};
}

void to_json(json& j, const CltOptions& o)
{
    j = json{{"potential", o.potential}, {"beta", o.beta},         {"gamma", o.gamma},
             {"epsilon", o.epsilon},     {"dt", o.dt},             {"steps", o.steps},
             {"replicas", o.replicas},   {"observables", o.observables}, {"checkpoints", o.checkpoints},
             {"bins", o.bins},           {"range", {o.lo, o.hi}}};
}

void to_json(json& j, const SampleOptions& o)
{
    j = json{{"potential", o.potential}, {"train", o.train},     {"header", o.header},
             {"prior_sigma2", o.prior_sigma2}, {"scheme", o.scheme}, {"beta", o.beta},
             {"gamma", o.gamma},         {"epsilon", o.epsilon}, {"nu", o.nu},
             {"sigma_a", o.sigma_a},     {"sigma_g", o.sigma_g}, {"raw", o.raw},
             {"minibatch", o.minibatch}, {"dt", o.dt},           {"steps", o.steps},
             {"thinning", o.thinning},   {"observables", o.observables}, {"q0", o.q0},
             {"friction0", o.friction0}};
}

void to_json(json& j, const BlrOptions& o)
{
    j = json{{"train", o.train},       {"test", o.test},         {"header", o.header},
             {"pca", o.pca},           {"prior_sigma2", o.prior_sigma2}, {"scheme", o.scheme},
             {"beta", o.beta},         {"nu", o.nu},             {"sigma_a", o.sigma_a},
             {"gamma", o.gamma},       {"epsilon", o.epsilon},   {"minibatch", o.minibatch},
             {"dt", o.dt},             {"steps", o.steps},       {"replicas", o.replicas},
             {"stride", o.stride},     {"init", o.init}};
}

void to_json(json& j, const SynthOptions& o)
{
    j = json{{"n_train", o.n_train}, {"n_test", o.n_test}, {"dim", o.dim}, {"weight_scale", o.weight_scale}};
}

} // namespace adl::cli
