#pragma once

#include "floqnet/models.hpp"
#include "floqnet/ode.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace floqnet::limit_cycle {

inline constexpr double kClosureTolerance = 1e-6;
inline constexpr double kMinAmplitude = 1e-6;
inline constexpr std::size_t kDefaultSamples = 512;

struct LimitCycle {
    double period = 0.0;
    /// Point on the cycle at phase 0 (an upward section crossing).
    ode::State anchor;
    /// States at t_k = k * period / samples.size(), k = 0..samples-1.
    std::vector<ode::State> samples;
    /// ||x(T) - x(0)|| / ||x(0)|| for a fresh integration from the anchor.
    double closure_residual = 0.0;
    std::size_t section_coordinate = 0;
    double section_level = 0.0;
    /// One period from the anchor, with dense output over [0, period].
    ode::Trajectory orbit;

    [[nodiscard]] std::size_t dim() const { return anchor.size(); }
    [[nodiscard]] double sample_time(std::size_t k) const {
        return period * static_cast<double>(k) / static_cast<double>(samples.size());
    }
    /// State at phase t (taken modulo the period) from the dense orbit.
    [[nodiscard]] ode::State state_at(double t) const;
    /// Piecewise-linear interpolation between the stored samples.
    [[nodiscard]] ode::State interpolate_samples(double t) const;
};

struct FindOptions {
    std::size_t samples = kDefaultSamples;
    /// Overrides the automatic choice of section coordinate.
    std::optional<std::size_t> section_coordinate;
    /// Overrides the model's transient hint.
    std::optional<double> transient;
    /// Times the transient is doubled before giving up with NotPeriodic.
    int max_retries = 3;
};

/// Integrates past the transient, places a Poincare section on the coordinate
/// with the largest swing (at its time mean), and averages the last five
/// return times. Throws FixedPointConvergence, NoCrossings or NotPeriodic.
[[nodiscard]] LimitCycle find_limit_cycle(const models::OscillatorModel& model, std::span<const double> x0,
                                          const ode::IntegratorConfig& cfg = {}, const FindOptions& opts = {});

/// Uniform-phase resample from the dense orbit; requires count >= 64.
[[nodiscard]] LimitCycle resample(const LimitCycle& lc, std::size_t count);

}  // namespace floqnet::limit_cycle
