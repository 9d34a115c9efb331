#pragma once

// Experiment configuration shared by the command-line subcommands.

#include "floqnet/models.hpp"
#include "floqnet/network.hpp"
#include "floqnet/ode.hpp"

#include "json.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace floqnet::config {

struct ModelSection {
    std::string name = "vdp";
    /// Only the parameters given; the rest take the model defaults.
    models::ParamMap params;
    bool operator==(const ModelSection&) const = default;
};

struct GraphSection {
    /// "complete", "ring" or "adjacency".
    std::string kind = "complete";
    std::size_t n = 3;
    std::vector<std::vector<double>> adjacency;
    bool operator==(const GraphSection&) const = default;
};

struct CouplingSection {
    double K = 1.0;
    /// Empty means every coordinate is coupled.
    std::vector<double> mask;
    double activation_time = 20.0;
    bool operator==(const CouplingSection&) const = default;
};

struct IntegratorSection {
    double rel_tol = 1e-9;
    double abs_tol = 1e-11;
    bool operator==(const IntegratorSection&) const = default;
};

struct RunSection {
    double t_end = 100.0;
    std::size_t output_grid_points = network::kDefaultGridPoints;
    bool operator==(const RunSection&) const = default;
};

struct MsfSection {
    double kappa_min = 0.01;
    double kappa_max = 10.0;
    std::size_t points = 50;
    /// "linear" or "log".
    std::string spacing = "log";
    /// Prepends kappa = 0 to the grid.
    bool include_zero = true;
    bool operator==(const MsfSection&) const = default;
};

struct ExperimentConfig {
    ModelSection model;
    /// Empty (model and per-node defaults), one node state, or all n node states.
    std::vector<double> initial;
    GraphSection graph;
    CouplingSection coupling;
    IntegratorSection integrator;
    RunSection run;
    MsfSection msf;
    std::uint64_t seed = 0;
    bool operator==(const ExperimentConfig&) const = default;
};

/// Missing keys keep their defaults. Throws ConfigError naming the offending
/// key for unknown keys and wrongly typed values.
[[nodiscard]] ExperimentConfig from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const ExperimentConfig& c);

/// Reads and parses a JSON file; ConfigError on I/O or syntax errors.
[[nodiscard]] ExperimentConfig load(const std::string& path);

/// Value checks that need no computation. Throws ConfigError naming the key.
void validate(const ExperimentConfig& c);

/// Everything a subcommand needs, built from a validated config.
struct Resolved {
    models::OscillatorModel model;
    network::GraphSpec graph;
    std::vector<double> mask;
    /// One node state (length m).
    std::vector<double> node_initial;
    /// All node states (length n * m).
    std::vector<double> network_initial;
    ode::IntegratorConfig integrator;
    std::vector<double> kappa_grid;
};

/// Validates and builds the model, graph, mask, initial states and grid.
[[nodiscard]] Resolved resolve(const ExperimentConfig& c);

/// Node i of an n-node network: Van der Pol [2i, 2i+1]; the repressilator
/// uses three fixed vectors then [0, 6i+1, 0, 6i+3, 0, 6i+5]; other
/// models shift their default state by i.
[[nodiscard]] std::vector<double> default_network_initial(const models::OscillatorModel& model, std::size_t n);

/// Coordinates 1, 3, 5, ... coupled (the velocity / protein states).
[[nodiscard]] std::vector<double> partial_mask(std::size_t dim);

}  // namespace floqnet::config
