#pragma once

// Adaptive Dormand-Prince 5(4) integration with continuous (dense) output for
// autonomous systems.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace floqnet::ode {

using State = std::vector<double>;

/// Writes f(x) into dx. Both spans have the system dimension.
using VectorField = std::function<void(std::span<const double> x, std::span<double> dx)>;

/// Scalar function of the state whose upward zero crossings are reported.
using EventFunction = std::function<double(std::span<const double> x)>;

/// Called after every accepted step with the new time and state. May throw to
/// abort the integration.
using StepObserver = std::function<void(double t, std::span<const double> x)>;

/// A state whose infinity norm exceeds this is treated as divergence.
inline constexpr double kBlowupThreshold = 1e12;

struct IntegratorConfig {
    double rel_tol = 1e-9;
    double abs_tol = 1e-11;
    /// Largest allowed step; 0 means a tenth of the integration span.
    double max_step = 0.0;
    std::size_t max_steps = 10'000'000;
    /// First trial step; 0 selects one automatically.
    double initial_step = 0.0;

    /// Throws InvalidParam for non-positive tolerances or step budget.
    void validate() const;
};

class Trajectory {
public:
    Trajectory() = default;
    explicit Trajectory(std::size_t dim) : dim_(dim) {}

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    /// Number of stored nodes (steps + 1).
    [[nodiscard]] std::size_t size() const noexcept { return times_.size(); }
    [[nodiscard]] const std::vector<double>& times() const noexcept { return times_; }
    [[nodiscard]] std::span<const double> state(std::size_t i) const {
        return {states_.data() + i * dim_, dim_};
    }
    [[nodiscard]] double t_begin() const { return times_.front(); }
    [[nodiscard]] double t_end() const { return times_.back(); }
    [[nodiscard]] std::span<const double> front() const { return state(0); }
    [[nodiscard]] std::span<const double> back() const { return state(size() - 1); }

    /// Continuous evaluation. Returns the stored node state exactly when t is a
    /// node time. Throws OutOfRange outside [t_begin, t_end].
    void eval_into(double t, std::span<double> out) const;
    [[nodiscard]] State eval(double t) const;

    void push_first(double t, std::span<const double> x);
    /// Appends a step ending at (t, x). `coeffs` holds the four interpolation
    /// vectors of the step, each of length dim, concatenated.
    void push_step(double t, std::span<const double> x, std::span<const double> coeffs);
    /// Joins a trajectory that starts where this one ends. Throws
    /// DimensionMismatch or InvalidParam if they do not meet.
    void append(const Trajectory& later);

private:
    std::size_t dim_ = 0;
    std::vector<double> times_;
    std::vector<double> states_;
    std::vector<double> dense_;
};

[[nodiscard]] Trajectory integrate(const VectorField& field, std::span<const double> x0, double t0, double t1,
                                   const IntegratorConfig& cfg = {}, const StepObserver& observer = {});

/// Same integration as `integrate` but returns only the final state.
[[nodiscard]] State integrate_to(const VectorField& field, std::span<const double> x0, double t0, double t1,
                                 const IntegratorConfig& cfg = {});

[[nodiscard]] State dense_eval(const Trajectory& traj, double t);

struct Crossing {
    double time = 0.0;
    State state;
};

struct EventRun {
    Trajectory trajectory;
    std::vector<Crossing> crossings;
};

/// Reports upward crossings: the event goes from negative to non-negative
/// across a step. Times are refined on the dense interpolant.
[[nodiscard]] EventRun integrate_with_events(const VectorField& field, std::span<const double> x0, double t0,
                                             double t1, const IntegratorConfig& cfg, const EventFunction& event);

/// Classical fixed-step fourth-order Runge-Kutta. Returns steps + 1 states on
/// the uniform grid, including x0.
[[nodiscard]] std::vector<State> rk4(const VectorField& field, std::span<const double> x0, double t0, double t1,
                                     std::size_t steps);

}  // namespace floqnet::ode
