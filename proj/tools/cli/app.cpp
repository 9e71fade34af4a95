#include "app.hpp"

#include "commands.hpp"

#include "adl/error.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <omp.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>

#ifndef ADL_VERSION
#define ADL_VERSION "0.0.0"
#endif

namespace adl::cli {

namespace {

using nlohmann::json;
using Given = std::function<bool(const char*)>;

void add_common(CLI::App* sub, Common& c)
{
    sub->add_option("--seed", c.seed, "Random seed (64-bit)")->capture_default_str();
    sub->add_option("--threads", c.threads, "Worker threads (0: all available)")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", c.out, "Output directory")->capture_default_str();
    sub->add_option("--profile", c.profile, "Named parameter preset; explicit flags win");
}

void add_potential(CLI::App* sub, PotentialOptions& p)
{
    sub->add_option("--potential", p.kind, "harmonic | double-well")->capture_default_str();
    sub->add_option("--a", p.a, "Double-well a (well position squared)")->capture_default_str();
    sub->add_option("--b", p.b, "Double-well b (barrier scale)")->capture_default_str();
    sub->add_option("--c", p.c, "Double-well tilt c")->capture_default_str();
    sub->add_option("--dim", p.n, "Number of coordinates")->capture_default_str();
}

void add_galerkin(CLI::App* sub, GalerkinOptions& o)
{
    sub->add_option("--L", o.L, "Hermite basis size per variable")->capture_default_str();
    sub->add_option("--beta", o.beta, "Inverse temperature")->capture_default_str();
    sub->add_option("--gamma", o.gamma, "Friction gamma (when no gamma grid)")->capture_default_str();
    sub->add_option("--epsilon", o.epsilon, "Coupling epsilon (when no epsilon grid)")->capture_default_str();
    sub->add_option("--gamma-grid", o.gamma_grid, "Grid of gamma: log:a:b:n, lin:a:b:n or list:x,y");
    sub->add_option("--epsilon-grid", o.epsilon_grid, "Grid of epsilon");
    sub->add_option("--alpha-grid", o.alpha_grid, "Joint grid gamma = epsilon = alpha");
}

[[noreturn]] void unknown_profile(const std::string& name, const char* command)
{
    throw ParameterError(fmt::format("profile '{}' does not apply to {}", name, command));
}

// --- presets ---

void profile_spectral_gap(const std::string& name, GalerkinOptions& o, const Given& given)
{
    const bool desk = name.ends_with("-desk");
    const std::string base = desk ? name.substr(0, name.size() - 5) : name;
    const int points = desk ? 9 : 25;
    auto set = [&](const char* flag, auto& field, auto value) {
        if (!given(flag))
            field = value;
    };
    set("--L", o.L, 10);
    set("--beta", o.beta, 1.0);
    if (base == "fig2a") {
        set("--gamma", o.gamma, 1.0);
        set("--epsilon-grid", o.epsilon_grid, fmt::format("log:0.01:100:{}", points));
    } else if (base == "fig2b") {
        set("--epsilon", o.epsilon, 1.0);
        set("--gamma-grid", o.gamma_grid, fmt::format("log:0.0001:100:{}", points));
    } else if (base == "fig2c") {
        set("--alpha-grid", o.alpha_grid, fmt::format("log:0.01:100:{}", points));
    } else {
        unknown_profile(name, "spectral-gap");
    }
}

void profile_variance_sweep(const std::string& name, SweepOptions& o, const Given& given)
{
    const bool desk = name.ends_with("-desk");
    const std::string base = desk ? name.substr(0, name.size() - 5) : name;
    auto set = [&](const char* flag, auto& field, auto value) {
        if (!given(flag))
            field = value;
    };
    set("--potential", o.potential.kind, std::string("double-well"));
    set("--a", o.potential.a, 1.0);
    set("--c", o.potential.c, 0.5);
    set("--beta", o.beta, 1.0);
    set("--steps", o.steps, static_cast<std::size_t>(desk ? 20000 : 100000));
    set("--replicas", o.replicas, static_cast<std::size_t>(desk ? 2000 : 10000));
    if (base == "fig3a") {
        set("--b", o.potential.b, 1.0);
        set("--dt", o.dt, 2e-3);
        set("--gamma", o.gamma, 1.0);
        set("--epsilon-grid", o.epsilon_grid, std::string("log:0.01:10:7"));
    } else if (base == "fig3b") {
        set("--b", o.potential.b, 1.0);
        set("--dt", o.dt, 2e-3);
        set("--epsilon", o.epsilon, 1.0);
        set("--gamma-grid", o.gamma_grid, std::string("log:0.0001:100:7"));
    } else if (base == "appendixB") {
        set("--b", o.potential.b, 4.0);
        set("--dt", o.dt, 0.1);
        set("--epsilon", o.epsilon, 1.0);
        set("--gamma-grid", o.gamma_grid, std::string("log:0.0001:100:7"));
    } else {
        unknown_profile(name, "variance-sweep");
    }
}

void profile_clt(const std::string& name, CltOptions& o, const Given& given)
{
    auto set = [&](const char* flag, auto& field, auto value) {
        if (!given(flag))
            field = value;
    };
    if (name != "fig4" && name != "fig4-desk")
        unknown_profile(name, "clt");
    set("--potential", o.potential.kind, std::string("double-well"));
    set("--a", o.potential.a, 1.0);
    set("--b", o.potential.b, 1.0);
    set("--c", o.potential.c, 0.5);
    set("--gamma", o.gamma, 1.0);
    set("--epsilon", o.epsilon, 1.0);
    set("--dt", o.dt, 0.1);
    set("--steps", o.steps, std::size_t{1000});
    set("--replicas", o.replicas, static_cast<std::size_t>(name == "fig4" ? 500000 : 100000));
}

void profile_blr(const std::string& name, BlrOptions& o, const Given& given)
{
    auto set = [&](const char* flag, auto& field, auto value) {
        if (!given(flag))
            field = value;
    };
    if (name != "blr" && name != "blr-desk")
        unknown_profile(name, "blr");
    set("--scheme", o.scheme, std::string("odabado"));
    set("--minibatch", o.minibatch, std::size_t{100});
    set("--sigma-a", o.sigma_a, 0.0);
    set("--nu", o.nu, 1.0);
    set("--dt", o.dt, 1e-2);
    set("--prior-sigma2", o.prior_sigma2, 100.0);
    if (name == "blr") {
        set("--steps", o.steps, std::size_t{10000});
        set("--replicas", o.replicas, std::size_t{10000});
        set("--pca", o.pca, std::size_t{100});
    } else {
        set("--steps", o.steps, std::size_t{20000});
        set("--replicas", o.replicas, std::size_t{8});
    }
}

struct Command {
    CLI::App* sub;
    std::function<void(const Given&)> apply_profile;
    std::function<json()> config;
    std::function<Report()> run;
};

void write_sidecar(const std::string& command, const Common& common, const json& config, const Report& report,
                   double seconds)
{
    json j;
    j["command"] = command;
    j["version"] = ADL_VERSION;
    j["seed"] = common.seed;
    j["threads"] = common.threads;
    j["profile"] = common.profile;
    j["config"] = config;
    j["wall_time_seconds"] = seconds;
    j["outputs"] = report.outputs;
    for (auto it = report.extra.begin(); it != report.extra.end(); ++it)
        j[it.key()] = it.value();
    const auto path = common.out / (command + ".json");
    std::filesystem::create_directories(common.out);
    std::ofstream f(path);
    if (!f)
        throw DataError(fmt::format("cannot write '{}'", path.string()));
    f << j.dump(2) << '\n';
}

} // namespace

int run(int argc, const char* const* argv)
{
    CLI::App app{"Adaptive Langevin sampling, Galerkin spectral analysis and variance estimation", "adl"};
    app.set_version_flag("--version", ADL_VERSION);
    app.set_config("--config", "", "TOML/INI file with one [command] section; flags override it");
    app.require_subcommand(1, 1);
    app.fallthrough();

    Common common;
    GalerkinOptions gap_opts;
    GalerkinOptions var_opts;
    SweepOptions sweep_opts;
    CltOptions clt_opts;
    SampleOptions sample_opts;
    BlrOptions blr_opts;
    SynthOptions synth_opts;
    std::vector<Command> commands;

    {
        auto* sub = app.add_subcommand("spectral-gap", "Spectral gap of the Galerkin generator over a parameter grid");
        add_common(sub, common);
        add_galerkin(sub, gap_opts);
        commands.push_back({sub, [&](const Given& g) { profile_spectral_gap(common.profile, gap_opts, g); },
                            [&] { return json(gap_opts); }, [&] { return cmd_spectral_gap(gap_opts, common); }});
    }
    {
        auto* sub = app.add_subcommand("galerkin-variance", "Galerkin asymptotic variance and its epsilon -> infinity limit");
        add_common(sub, common);
        add_galerkin(sub, var_opts);
        sub->add_option("--observable", var_opts.observables, "Polynomial observable, e.g. q, q^2, p^2-1/beta")
            ->capture_default_str();
        commands.push_back({sub, [&](const Given&) { unknown_profile(common.profile, "galerkin-variance"); },
                            [&] { return json(var_opts); },
                            [&] { return cmd_galerkin_variance(var_opts, common); }});
    }
    {
        auto* sub = app.add_subcommand("variance-sweep", "Replica-ensemble asymptotic variance over a gamma/epsilon grid");
        add_common(sub, common);
        add_potential(sub, sweep_opts.potential);
        sub->add_option("--beta", sweep_opts.beta, "Inverse temperature")->capture_default_str();
        sub->add_option("--gamma", sweep_opts.gamma, "Friction gamma")->capture_default_str();
        sub->add_option("--epsilon", sweep_opts.epsilon, "Coupling epsilon")->capture_default_str();
        sub->add_option("--gamma-grid", sweep_opts.gamma_grid, "Grid of gamma");
        sub->add_option("--epsilon-grid", sweep_opts.epsilon_grid, "Grid of epsilon");
        sub->add_option("--dt", sweep_opts.dt, "Step size")->capture_default_str();
        sub->add_option("--steps", sweep_opts.steps, "Steps K per replica")->capture_default_str();
        sub->add_option("--replicas", sweep_opts.replicas, "Replicas N")->capture_default_str();
        sub->add_option("--observable", sweep_opts.observables, "Observables")->capture_default_str();
        commands.push_back({sub, [&](const Given& g) { profile_variance_sweep(common.profile, sweep_opts, g); },
                            [&] { return json(sweep_opts); }, [&] { return cmd_variance_sweep(sweep_opts, common); }});
    }
    {
        auto* sub = app.add_subcommand("clt", "Rescaled residuals and their empirical densities");
        add_common(sub, common);
        add_potential(sub, clt_opts.potential);
        sub->add_option("--beta", clt_opts.beta, "Inverse temperature")->capture_default_str();
        sub->add_option("--gamma", clt_opts.gamma, "Friction gamma")->capture_default_str();
        sub->add_option("--epsilon", clt_opts.epsilon, "Coupling epsilon")->capture_default_str();
        sub->add_option("--dt", clt_opts.dt, "Step size")->capture_default_str();
        sub->add_option("--steps", clt_opts.steps, "K_max")->capture_default_str();
        sub->add_option("--replicas", clt_opts.replicas, "Replicas N")->capture_default_str();
        sub->add_option("--observable", clt_opts.observables, "Observables")->capture_default_str();
        sub->add_option("--checkpoints", clt_opts.checkpoints, "K values for the densities")
            ->delimiter(',')
            ->capture_default_str();
        sub->add_option("--bins", clt_opts.bins, "Histogram bins")->capture_default_str();
        sub->add_option("--lo", clt_opts.lo, "Histogram lower edge")->capture_default_str();
        sub->add_option("--hi", clt_opts.hi, "Histogram upper edge")->capture_default_str();
        commands.push_back({sub, [&](const Given& g) { profile_clt(common.profile, clt_opts, g); },
                            [&] { return json(clt_opts); }, [&] { return cmd_clt(clt_opts, common); }});
    }
    {
        auto* sub = app.add_subcommand("sample", "Single trajectory with observables recorded along the way");
        add_common(sub, common);
        add_potential(sub, sample_opts.potential);
        sub->add_option("--train", sample_opts.train, "Training CSV; samples the logistic-regression posterior");
        sub->add_flag("--header", sample_opts.header, "CSV files start with a header line");
        sub->add_option("--prior-sigma2", sample_opts.prior_sigma2, "Gaussian prior variance")->capture_default_str();
        sub->add_option("--scheme", sample_opts.scheme, "badodab | odabado")->capture_default_str();
        sub->add_option("--beta", sample_opts.beta, "Inverse temperature")->capture_default_str();
        sub->add_option("--gamma", sample_opts.gamma, "Friction gamma")->capture_default_str();
        sub->add_option("--epsilon", sample_opts.epsilon, "Coupling epsilon")->capture_default_str();
        auto* nu = sub->add_option("--nu", sample_opts.nu, "Thermal mass nu")->capture_default_str();
        auto* sa = sub->add_option("--sigma-a", sample_opts.sigma_a, "Applied noise sigma_A")->capture_default_str();
        auto* sg = sub->add_option("--sigma-g", sample_opts.sigma_g, "Gradient noise sigma_G")->capture_default_str();
        sub->add_option("--minibatch", sample_opts.minibatch, "Minibatch size m (odabado on a posterior)");
        sub->add_option("--dt", sample_opts.dt, "Step size")->capture_default_str();
        sub->add_option("--steps", sample_opts.steps, "Steps K")->capture_default_str();
        sub->add_option("--thinning", sample_opts.thinning, "Record every t-th step")->capture_default_str();
        sub->add_option("--observable", sample_opts.observables, "Observables")->capture_default_str();
        sub->add_option("--q0", sample_opts.q0, "Initial position (comma separated)")->delimiter(',');
        sub->add_option("--friction0", sample_opts.friction0, "Initial friction when --q0 is given");
        commands.push_back({sub, [&](const Given&) { unknown_profile(common.profile, "sample"); },
                            [&] { return json(sample_opts); },
                            [&, nu, sa, sg] {
                                sample_opts.raw = nu->count() + sa->count() + sg->count() > 0;
                                return cmd_sample(sample_opts, common);
                            }});
    }
    {
        auto* sub = app.add_subcommand("blr", "Bayesian logistic regression: cumulative averages along ODABADO runs");
        add_common(sub, common);
        sub->add_option("--train", blr_opts.train, "Training CSV (features..., label)")->required();
        sub->add_option("--test", blr_opts.test, "Test CSV for the average test likelihood");
        sub->add_flag("--header", blr_opts.header, "CSV files start with a header line");
        sub->add_option("--pca", blr_opts.pca, "Whiten onto the top k principal components (0: off)");
        sub->add_option("--prior-sigma2", blr_opts.prior_sigma2, "Gaussian prior variance")->capture_default_str();
        sub->add_option("--scheme", blr_opts.scheme, "odabado | badodab (full-gradient reference)")
            ->capture_default_str();
        sub->add_option("--beta", blr_opts.beta, "Inverse temperature")->capture_default_str();
        sub->add_option("--nu", blr_opts.nu, "Thermal mass nu")->capture_default_str();
        sub->add_option("--sigma-a", blr_opts.sigma_a, "Applied noise sigma_A")->capture_default_str();
        sub->add_option("--gamma", blr_opts.gamma, "Friction gamma (badodab)")->capture_default_str();
        sub->add_option("--epsilon", blr_opts.epsilon, "Coupling epsilon (badodab)")->capture_default_str();
        sub->add_option("--minibatch", blr_opts.minibatch, "Minibatch size m")->capture_default_str();
        sub->add_option("--dt", blr_opts.dt, "Step size")->capture_default_str();
        sub->add_option("--steps", blr_opts.steps, "Steps K")->capture_default_str();
        sub->add_option("--replicas", blr_opts.replicas, "Independent runs averaged together")->capture_default_str();
        sub->add_option("--stride", blr_opts.stride, "Report every stride steps")->capture_default_str();
        sub->add_option("--init", blr_opts.init, "Initial position: map | zero")->capture_default_str();
        commands.push_back({sub, [&](const Given& g) { profile_blr(common.profile, blr_opts, g); },
                            [&] { return json(blr_opts); }, [&] { return cmd_blr(blr_opts, common); }});
    }
    {
        auto* sub = app.add_subcommand("synth-data", "Synthetic logistic-regression train/test data");
        add_common(sub, common);
        sub->add_option("--n-train", synth_opts.n_train, "Training rows")->capture_default_str();
        sub->add_option("--n-test", synth_opts.n_test, "Test rows")->capture_default_str();
        sub->add_option("--dim", synth_opts.dim, "Features d")->capture_default_str();
        sub->add_option("--weight-scale", synth_opts.weight_scale, "Standard deviation of the true weights")
            ->capture_default_str();
        commands.push_back({sub, [&](const Given&) { unknown_profile(common.profile, "synth-data"); },
                            [&] { return json(synth_opts); }, [&] { return cmd_synth_data(synth_opts, common); }});
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    for (auto& cmd : commands) {
        if (!cmd.sub->parsed())
            continue;
        const std::string name = cmd.sub->get_name();
        try {
            if (!common.profile.empty())
                cmd.apply_profile([sub = cmd.sub](const char* flag) { return sub->count(flag) > 0; });
            if (common.threads > 0)
                omp_set_num_threads(common.threads);
            const auto start = std::chrono::steady_clock::now();
            const Report report = cmd.run();
            const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            write_sidecar(name, common, cmd.config(), report, seconds);
            for (const auto& o : report.outputs)
                fmt::print("wrote {}\n", o);
            return 0;
        } catch (const adl::Error& e) {
            fmt::print(stderr, "adl {}: error: {}\n", name, e.what());
            return e.exit_code();
        } catch (const std::filesystem::filesystem_error& e) {
            fmt::print(stderr, "adl {}: error: {}\n", name, e.what());
            return 3;
        } catch (const std::exception& e) {
            fmt::print(stderr, "adl {}: unexpected error: {}\n", name, e.what());
            return 1;
        }
    }
    return 2;
}

} // namespace adl::cli
