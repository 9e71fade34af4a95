#pragma once

#include "adl/core.hpp"
#include "adl/galerkin.hpp"
#include "adl/potentials.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace adl::cli {

struct Common {
    std::uint64_t seed = 1;
    int threads = 0; // 0: OpenMP default
    std::filesystem::path out = "out";
    std::string profile;
};

struct PotentialOptions {
    std::string kind = "harmonic"; // harmonic | double-well
    double a = 1.0;
    double b = 1.0;
    double c = 0.5;
    std::size_t n = 1;

    PotentialModel build() const;
};

struct GalerkinOptions {
    int L = 10;
    double beta = 1.0;
    double gamma = 1.0;
    double epsilon = 1.0;
    std::string gamma_grid;
    std::string epsilon_grid;
    std::string alpha_grid; // joint gamma = epsilon = alpha
    std::vector<std::string> observables{"q"};

    std::vector<galerkin::GridPoint> points() const;
};

struct SweepOptions {
    PotentialOptions potential{"double-well"};
    double beta = 1.0;
    double gamma = 1.0;
    double epsilon = 1.0;
    std::string gamma_grid;
    std::string epsilon_grid;
    double dt = 2e-3;
    std::size_t steps = 100000;
    std::size_t replicas = 10000;
    std::vector<std::string> observables{"q", "q^2", "p^2", "xi^2"};
};

struct CltOptions {
    PotentialOptions potential{"double-well"};
    double beta = 1.0;
    double gamma = 1.0;
    double epsilon = 1.0;
    double dt = 0.1;
    std::size_t steps = 1000;
    std::size_t replicas = 500000;
    std::vector<std::string> observables{"q", "q^2"};
    std::vector<std::size_t> checkpoints{10, 100, 1000};
    std::size_t bins = 100;
    double lo = -5.0;
    double hi = 5.0;
};

struct SampleOptions {
    PotentialOptions potential;
    std::string train; // logistic-regression posterior when set
    bool header = false;
    double prior_sigma2 = 100.0;
    std::string scheme = "badodab"; // badodab | odabado
    double beta = 1.0;
    double gamma = 1.0;
    double epsilon = 1.0;
    double nu = 1.0;
    double sigma_a = 0.0;
    double sigma_g = 0.0;
    bool raw = false; // parameters given as (nu, sigma_A, sigma_G)
    std::size_t minibatch = 0;
    double dt = 2e-3;
    std::size_t steps = 1000;
    std::size_t thinning = 1;
    std::vector<std::string> observables{"q", "p", "xi"};
    std::vector<double> q0;
    double friction0 = 0.0;
};

struct BlrOptions {
    std::string train;
    std::string test;
    bool header = false;
    std::size_t pca = 0;
    double prior_sigma2 = 100.0;
    std::string scheme = "odabado";
    double beta = 1.0;
    double nu = 1.0;
    double sigma_a = 0.0;
    double gamma = 1.0;   // badodab reference runs
    double epsilon = 1.0; // badodab reference runs
    std::size_t minibatch = 100;
    double dt = 1e-2;
    std::size_t steps = 10000;
    std::size_t replicas = 1;
    std::size_t stride = 100;
    std::string init = "map"; // map | zero
};

struct SynthOptions {
    std::size_t n_train = 2000;
    std::size_t n_test = 1000;
    std::size_t dim = 5;
    double weight_scale = 1.0;
};

/// What a command produced, for the metadata sidecar.
struct Report {
    std::vector<std::string> outputs;
    nlohmann::json extra = nlohmann::json::object();
};

Report cmd_spectral_gap(const GalerkinOptions& o, const Common& common);
Report cmd_galerkin_variance(const GalerkinOptions& o, const Common& common);
Report cmd_variance_sweep(const SweepOptions& o, const Common& common);
Report cmd_clt(const CltOptions& o, const Common& common);
Report cmd_sample(const SampleOptions& o, const Common& common);
Report cmd_blr(const BlrOptions& o, const Common& common);
Report cmd_synth_data(const SynthOptions& o, const Common& common);

void to_json(nlohmann::json& j, const PotentialOptions& o);
void to_json(nlohmann::json& j, const GalerkinOptions& o);
void to_json(nlohmann::json& j, const SweepOptions& o);
void to_json(nlohmann::json& j, const CltOptions& o);
void to_json(nlohmann::json& j, const SampleOptions& o);
void to_json(nlohmann::json& j, const BlrOptions& o);
void to_json(nlohmann::json& j, const SynthOptions& o);

} // namespace adl::cli
