#pragma once

// Self-check suite run by `floqnet verify`.

#include "floqnet/config.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace floqnet::verify {

struct Check {
    std::string name;
    bool passed = false;
    /// The measured quantity compared against `tolerance`.
    double value = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct Options {
    /// Van der Pol only, complete graph only, fewer kappa values.
    bool quick = false;
    /// Flips the sign of the coupling term in the coupled variational runs.
    bool inject_sign_flip = false;
    /// Seeds the random matrices of the linear-algebra check.
    std::uint64_t seed = 0;
    /// When set, its model, mask and integrator replace the built-in pair of
    /// models (the mask becomes the partial mask if it is not all ones).
    std::optional<config::ExperimentConfig> config;
};

struct Report {
    std::vector<Check> checks;

    [[nodiscard]] bool all_passed() const;
    [[nodiscard]] nlohmann::json to_json() const;
    /// Fixed-width table, one row per check.
    [[nodiscard]] std::string to_text() const;
};

/// Shift law, AJL identity, P(t) periodicity, unity multiplier, period
/// convergence, MSF-versus-simulation agreement, K < 0 necessity and the
/// linear-algebra oracles. Numerical failures inside a check mark it failed;
/// config errors propagate.
[[nodiscard]] Report verify_all(const Options& opts);

}  // namespace floqnet::verify
