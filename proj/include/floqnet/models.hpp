#pragma once

#include "floqnet/linalg.hpp"
#include "floqnet/ode.hpp"

#include <atomic>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace floqnet::models {

using ParamMap = std::map<std::string, double>;

/// Writes Df(x) row-major into `jac` (dim * dim entries).
using JacobianField = std::function<void(std::span<const double> x, std::span<double> jac)>;

struct OscillatorModel {
    std::string name;
    std::size_t dim = 0;
    ParamMap params;
    ode::VectorField field;
    JacobianField jacobian;
    std::vector<double> default_initial;
    /// Time to integrate before the orbit is treated as settled.
    double transient_hint = 0.0;
    /// Counts field evaluations where a negative concentration was clipped to 0.
    std::shared_ptr<std::atomic<std::size_t>> clip_count = std::make_shared<std::atomic<std::size_t>>(0);

    [[nodiscard]] std::vector<double> eval(std::span<const double> x) const;
    [[nodiscard]] linalg::Matrix jacobian_matrix(std::span<const double> x) const;
};

/// x1' = x2, x2' = mu (1 - x1^2) x2 - x1. Throws InvalidParam unless mu > 0.
[[nodiscard]] OscillatorModel vdp_model(double mu);

/// Three-gene ring with state order (m1, p1, m2, p2, m3, p3):
///     m_j' = -m_j + alpha / (1 + p_{j-1}^n) + alpha0,   p_j' = -beta (p_j - m_j),
/// with p_0 = p_3. Requires alpha > 0, beta > 0, n >= 1, alpha0 >= 0.
[[nodiscard]] OscillatorModel repressilator_model(double alpha, double alpha0, double beta, double n);

/// x1' = x2, x2' = -x1. Every orbit has period 2*pi.
[[nodiscard]] OscillatorModel linear_rotation_model();

/// Registry lookup by name ("vdp", "repressilator", "linear_rotation"). Missing
/// parameters take their defaults. Throws InvalidParam naming an unknown model
/// or parameter key.
[[nodiscard]] OscillatorModel make_model(const std::string& name, const ParamMap& params = {});

[[nodiscard]] std::vector<std::string> model_names();

/// Default parameters of a registered model.
[[nodiscard]] ParamMap default_params(const std::string& name);

}  // namespace floqnet::models
