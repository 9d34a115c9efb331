#pragma once

#include "floqnet/linalg.hpp"
#include "floqnet/models.hpp"
#include "floqnet/ode.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace floqnet::network {

using linalg::Matrix;

inline constexpr std::size_t kDefaultGridPoints = 2000;

/// The coupled run is declared divergent (Blowup) once the state infinity norm
/// exceeds this multiple of the largest norm seen before coupling starts.
inline constexpr double kDivergenceFactor = 100.0;

struct GraphSpec {
    std::size_t n = 0;
    /// Real symmetric Laplacian D - A.
    Matrix laplacian;
    /// Ascending: 0 = lambda_1 <= lambda_2 <= ... <= lambda_n.
    std::vector<double> eigenvalues;

    [[nodiscard]] bool connected() const { return n >= 2 && eigenvalues[1] > 1e-10; }
};

[[nodiscard]] GraphSpec complete_graph(std::size_t n);
[[nodiscard]] GraphSpec ring_graph(std::size_t n);
/// Throws InvalidAdjacency unless `adjacency` is square (n >= 2), symmetric,
/// non-negative, finite and zero on the diagonal.
[[nodiscard]] GraphSpec from_adjacency(const std::vector<std::vector<double>>& adjacency);

struct CouplingSpec {
    double K = 0.0;
    /// Diagonal of DH, entries 0 or 1.
    std::vector<double> mask;
    /// Coupling is off before this time and K after it.
    double activation_time = 0.0;

    /// Throws DimensionMismatch or InvalidParam.
    void validate(std::size_t dim) const;
};

/// X' = (I_n (x) f)(X) - K (G (x) DH) X, i.e. node i receives
/// K * sum_j a_ij DH (x_j - x_i). Pass active = false for the uncoupled field.
[[nodiscard]] ode::VectorField assemble_coupled_field(const models::OscillatorModel& model, const GraphSpec& g,
                                                      const CouplingSpec& c, bool active = true);

struct SyncSeries {
    std::vector<double> times;
    /// max over node pairs and state coordinates of |x_{i,c} - x_{j,c}|.
    std::vector<double> error;
};

/// Synchronization error of one network state (n blocks of m).
[[nodiscard]] double sync_error_of(std::span<const double> x, std::size_t n, std::size_t m);

/// Synchronization error at every node of the trajectory.
[[nodiscard]] SyncSeries sync_error(const ode::Trajectory& traj, std::size_t n, std::size_t m);

struct NetworkRun {
    /// Continuous over [0, t_end] with a node at the activation time.
    ode::Trajectory trajectory;
    /// Uniform output grid over [0, t_end] (inclusive).
    std::vector<double> grid;
    std::vector<ode::State> grid_states;
    SyncSeries sync;
};

/// Uncoupled on [0, t_on], coupled on [t_on, t_end], as two separate adaptive
/// runs joined with state continuity. Integrator errors propagate. Blowup is
/// also raised when the coupled state leaves kDivergenceFactor times the
/// pre-coupling amplitude, which is the expected outcome for negative K.
[[nodiscard]] NetworkRun simulate_network(const models::OscillatorModel& model, const GraphSpec& g,
                                          const CouplingSpec& c, std::span<const double> x0, double t_end,
                                          const ode::IntegratorConfig& cfg = {},
                                          std::size_t grid_points = kDefaultGridPoints);

/// Earliest grid time from which the error stays below `threshold` through
/// the end of the series; negative when it never does.
[[nodiscard]] double time_converged(const SyncSeries& s, double threshold);

}  // namespace floqnet::network
