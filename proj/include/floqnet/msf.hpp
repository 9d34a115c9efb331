#pragma once

#include "floqnet/floquet.hpp"
#include "floqnet/limit_cycle.hpp"
#include "floqnet/linalg.hpp"
#include "floqnet/models.hpp"
#include "floqnet/network.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace floqnet::msf {

struct MsfPoint {
    double kappa = 0.0;
    /// Largest multiplier modulus; at kappa = 0 the unity multiplier is left out.
    double mu_max = 0.0;
    /// All multipliers of Df(x_s) - kappa * DH, canonical order.
    linalg::Spectrum multipliers;
};

struct MsfCurve {
    std::string model;
    std::vector<double> mask;
    double period = 0.0;
    /// Strictly increasing in kappa.
    std::vector<MsfPoint> points;
};

/// Worker count for parallel sweeps: FLOQNET_THREADS when set to a positive
/// integer, otherwise the hardware concurrency (at least 1).
[[nodiscard]] std::size_t thread_count();

/// Runs task(0..count-1) on up to `threads` workers (0 = thread_count()).
/// Every index runs even if some fail; the exception of the lowest failing
/// index is rethrown afterwards.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task, std::size_t threads = 0);

/// Negative kappa is accepted and only ever retains every multiplier.
[[nodiscard]] MsfPoint msf_point(const models::OscillatorModel& model, const limit_cycle::LimitCycle& lc,
                                 double kappa, std::span<const double> mask,
                                 const floquet::MonodromyOptions& opts = {});

struct SweepOptions {
    floquet::MonodromyOptions monodromy;
    /// 0 = thread_count().
    std::size_t threads = 0;
};

/// One point per grid value, in grid order. The grid must be strictly
/// increasing and non-negative (InvalidParam). If any point fails the sweep
/// throws with the first failure's code and a message listing every failed
/// kappa.
[[nodiscard]] MsfCurve msf_sweep(const models::OscillatorModel& model, const limit_cycle::LimitCycle& lc,
                                 std::span<const double> mask, std::span<const double> kappa_grid,
                                 const SweepOptions& opts = {});

/// `points` values evenly spaced on [lo, hi], endpoints included.
[[nodiscard]] std::vector<double> linear_grid(double lo, double hi, std::size_t points);
/// `points` values evenly spaced in log on [lo, hi]; requires 0 < lo < hi.
[[nodiscard]] std::vector<double> log_grid(double lo, double hi, std::size_t points);
/// kappa = 0 followed by 50 log-spaced values on [0.01, 10].
[[nodiscard]] std::vector<double> default_grid();

struct ModeResult {
    double lambda = 0.0;
    double kappa = 0.0;
    double mu_max = 0.0;
};

struct SyncVerdict {
    bool synchronizes = false;
    /// One entry per Laplacian eigenvalue, ascending; the first (lambda = 0)
    /// is reported but takes no part in the verdict.
    std::vector<ModeResult> per_mode;
};

/// Evaluates the MSF at kappa = K * lambda_i for the transverse modes
/// i = 2..n. Synchronizes iff every transverse mu_max < 1 and K != 0.
/// Throws DisconnectedGraph when lambda_2 <= 1e-10.
[[nodiscard]] SyncVerdict sync_predicate(const models::OscillatorModel& model, const limit_cycle::LimitCycle& lc,
                                         const network::GraphSpec& g, double K, std::span<const double> mask,
                                         const SweepOptions& opts = {});

}  // namespace floqnet::msf
