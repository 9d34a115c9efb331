#pragma once

#include "floqnet/limit_cycle.hpp"
#include "floqnet/linalg.hpp"
#include "floqnet/models.hpp"
#include "floqnet/ode.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace floqnet::floquet {

using linalg::Complex;
using linalg::Matrix;

/// |mu - 1| below this marks the multiplier along the flow at kappa = 0.
inline constexpr double kUnityTolerance = 1e-3;
/// Cycle state must come back within this (relative) distance of the anchor.
inline constexpr double kClosureDriftTolerance = 1e-4;

/// Tolerances for variational integration; multipliers amplify trajectory error.
[[nodiscard]] inline ode::IntegratorConfig tight_integrator_config() {
    ode::IntegratorConfig c;
    c.rel_tol = 1e-11;
    c.abs_tol = 1e-13;
    return c;
}

struct MonodromyOptions {
    ode::IntegratorConfig cfg = tight_integrator_config();
    /// Number of equal sub-intervals of the period; 0 uses the cycle's sample count.
    std::size_t segments = 0;
    /// Multiplies the coupling term. Only -1 (a deliberate sign error used to
    /// check that the verification suite notices) or +1 make sense.
    double coupling_sign = 1.0;
};

struct Monodromy {
    /// phi(T, 0), the product of the segment maps.
    Matrix matrix;
    linalg::Spectrum multipliers;
    /// log(multiplier) / T on the principal branch, in multiplier order.
    std::vector<Complex> exponents;
    double kappa = 0.0;
    std::vector<double> mask;
    double period = 0.0;
    /// det phi(T, 0) as the product of the segment determinants; accurate even
    /// when it is far below what the assembled matrix can resolve.
    double determinant = 0.0;
    /// phi over each segment [t_k, t_{k+1}], k = 0..N-1.
    std::vector<Matrix> segments;
    /// Ordered periodic Schur form of the segment maps.
    linalg::PeriodicSchur schur;
};

/// Integrates the cycle state together with Y' = (Df(x) - kappa * DH) Y from
/// the anchor. Y restarts from I on every segment so the multipliers come
/// from a product that never has to resolve contracting directions itself.
/// Throws ClosureDrift, DimensionMismatch, InvalidParam (mask entries not 0/1),
/// or any integrator error.
[[nodiscard]] Monodromy monodromy(const models::OscillatorModel& model, const limit_cycle::LimitCycle& lc,
                                  double kappa, std::span<const double> mask, const MonodromyOptions& opts = {});

/// Full-state shift law: every multiplier scaled by exp(-kappa T).
[[nodiscard]] std::vector<Complex> shifted_multipliers_fullstate(const Monodromy& base, double kappa, double period);

struct AjlSides {
    double det_phi = 1.0;
    double rhs = 1.0;
};

/// det phi(t, 0) from the variational integration, and
/// exp(int_0^t tr Df(x_s) dtau) * exp(-kappa tr(DH) t) by Gauss-Legendre
/// quadrature along the stored orbit.
[[nodiscard]] AjlSides ajl_determinant(const models::OscillatorModel& model, const limit_cycle::LimitCycle& lc,
                                       double kappa, std::span<const double> mask, double t,
                                       const MonodromyOptions& opts = {});

/// int_0^t tr Df(x_s(tau)) dtau along the dense orbit, 0 <= t <= T.
[[nodiscard]] double trace_integral(const models::OscillatorModel& model, const limit_cycle::LimitCycle& lc, double t);

struct LFDecomposition {
    /// exp(R T) = phi(T, 0).
    Matrix R;
    /// P(t_k) at the cycle's sample phases; P(0) = I.
    std::vector<Matrix> P_samples;
    std::vector<double> sample_times;
    /// ||P carried once around the cycle - P(0)|| / ||P(0)||.
    double periodicity_residual = 0.0;
    /// ||expm(R T) - phi(T, 0)|| / ||phi(T, 0)||.
    double reconstruction_residual = 0.0;
    Monodromy monodromy;
};

/// R = log(phi(T,0)) / T and P(t) = exp(R t) phi(t,0)^{-1} sampled at the
/// cycle phases, with P^{-1}(t) = phi(t,0) exp(-R t). Floquet vectors are
/// propagated backwards through the segment maps, which keeps every mode at
/// unit scale. Throws NonDiagonalizable or SingularInput.
[[nodiscard]] LFDecomposition lf_decomposition(const models::OscillatorModel& model, const limit_cycle::LimitCycle& lc,
                                               const MonodromyOptions& opts = {});

/// Index of the multiplier closest to 1 if it is within kUnityTolerance.
[[nodiscard]] std::ptrdiff_t unity_index(const linalg::Spectrum& multipliers);

/// Full mask (all ones) of the given dimension.
[[nodiscard]] std::vector<double> full_mask(std::size_t dim);

}  // namespace floqnet::floquet
