#include "floqnet/floquet.hpp"

#include "floqnet/error.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace floqnet::floquet {

namespace {

void validate_mask(std::span<const double> mask, std::size_t dim) {
    if (mask.size() != dim) {
        throw Error(ErrorCode::DimensionMismatch, "coupling mask has " + std::to_string(mask.size()) +
                                                      " entries for a " + std::to_string(dim) + "-dimensional model");
    }
    for (double d : mask) {
        if (d != 0.0 && d != 1.0) {
            throw Error(ErrorCode::InvalidParam, "coupling mask entries must be 0 or 1");
        }
    }
}

void validate_cycle(const models::OscillatorModel& model, const limit_cycle::LimitCycle& lc) {
    if (lc.dim() != model.dim) {
        throw Error(ErrorCode::DimensionMismatch, "limit cycle dimension does not match the model");
    }
    if (!(lc.period > 0.0)) {
        throw Error(ErrorCode::InvalidParam, "limit cycle period must be positive");
    }
}

double relative_distance(std::span<const double> a, std::span<const double> b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

struct SegmentRun {
    std::vector<Matrix> maps;
    double log_abs_det = 0.0;
    double det_sign = 1.0;
    ode::State end_state;
};

// Integrates (x, Y) across consecutive [bounds[k], bounds[k+1]], restarting Y
// at the identity on each one while x runs on continuously.
SegmentRun integrate_segments(const models::OscillatorModel& model, const limit_cycle::LimitCycle& lc, double kappa,
                              std::span<const double> mask, std::span<const double> bounds,
                              const MonodromyOptions& opts) {
    const std::size_t m = model.dim;
    const double shift = kappa * opts.coupling_sign;
    auto jac = std::make_shared<std::vector<double>>(m * m);
    std::vector<double> dh(mask.begin(), mask.end());
    const auto& f = model.field;
    const auto& df = model.jacobian;
    ode::VectorField augmented = [m, shift, jac, dh, &f, &df](std::span<const double> y, std::span<double> dy) {
        const auto x = y.first(m);
        f(x, dy.first(m));
        df(x, *jac);
        auto& a = *jac;
        for (std::size_t i = 0; i < m; ++i) {
            a[i * m + i] -= shift * dh[i];
        }
        const double* yy = y.data() + m;
        double* out = dy.data() + m;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                double s = 0.0;
                for (std::size_t l = 0; l < m; ++l) {
                    s += a[i * m + l] * yy[l * m + j];
                }
                out[i * m + j] = s;
            }
        }
    };

    SegmentRun run;
    run.maps.reserve(bounds.size() - 1);
    std::vector<double> y(m + m * m);
    std::copy(lc.anchor.begin(), lc.anchor.end(), y.begin());
    for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
        std::fill(y.begin() + static_cast<std::ptrdiff_t>(m), y.end(), 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            y[m + i * m + i] = 1.0;
        }
        y = ode::integrate_to(augmented, y, bounds[k], bounds[k + 1], opts.cfg);
        Matrix seg = Matrix::from_real(m, m, std::span<const double>(y).subspan(m));
        const Complex det = linalg::determinant(seg);
        run.log_abs_det += std::log(std::abs(det));
        if (det.real() < 0.0) {
            run.det_sign = -run.det_sign;
        }
        run.maps.push_back(std::move(seg));
    }
    run.end_state.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(m));
    return run;
}

std::size_t segment_count(const limit_cycle::LimitCycle& lc, const MonodromyOptions& opts) {
    const std::size_t n = opts.segments > 0 ? opts.segments : lc.samples.size();
    return std::max<std::size_t>(n, 1);
}

// Solves T X = B for upper triangular T.
Matrix upper_solve(const Matrix& t, const Matrix& b) {
    const std::size_t n = t.rows();
    Matrix x(n, b.cols());
    for (std::size_t c = 0; c < b.cols(); ++c) {
        for (std::size_t i = n; i-- > 0;) {
            Complex s = b(i, c);
            for (std::size_t l = i + 1; l < n; ++l) {
                s -= t(i, l) * x(l, c);
            }
            x(i, c) = s / t(i, i);
        }
    }
    return x;
}

}  // namespace

std::vector<double> full_mask(std::size_t dim) {
    return std::vector<double>(dim, 1.0);
}

std::ptrdiff_t unity_index(const linalg::Spectrum& multipliers) {
    std::ptrdiff_t best = -1;
    double best_dist = kUnityTolerance;
    for (std::size_t i = 0; i < multipliers.size(); ++i) {
        const double d = std::abs(multipliers[i] - 1.0);
        if (d < best_dist) {
            best_dist = d;
            best = static_cast<std::ptrdiff_t>(i);
        }
    }
    return best;
}

Monodromy monodromy(const models::OscillatorModel& model, const limit_cycle::LimitCycle& lc, double kappa,
                    std::span<const double> mask, const MonodromyOptions& opts) {
    validate_cycle(model, lc);
    validate_mask(mask, model.dim);
    if (!std::isfinite(kappa)) {
        throw Error(ErrorCode::InvalidParam, "kappa must be finite");
    }
    const std::size_t n = segment_count(lc, opts);
    std::vector<double> bounds(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        bounds[k] = lc.period * static_cast<double>(k) / static_cast<double>(n);
    }
    SegmentRun run = integrate_segments(model, lc, kappa, mask, bounds, opts);
    const double drift = relative_distance(run.end_state, lc.anchor);
    if (drift > kClosureDriftTolerance) {
        throw Error(ErrorCode::ClosureDrift,
                    "cycle state returned " + std::to_string(drift) + " (relative) away from the anchor");
    }

    Monodromy mono;
    mono.kappa = kappa;
    mono.mask.assign(mask.begin(), mask.end());
    mono.period = lc.period;
    mono.determinant = run.det_sign * std::exp(run.log_abs_det);
    mono.matrix = run.maps.front();
    for (std::size_t k = 1; k < run.maps.size(); ++k) {
        mono.matrix = run.maps[k] * mono.matrix;
    }
    mono.schur = linalg::periodic_schur(run.maps, true);
    std::vector<Complex> mult = mono.schur.diagonal_eigenvalues();
    linalg::symmetrize_conjugates(mult);
    linalg::sort_canonical(mult);
    mono.multipliers.values = std::move(mult);
    mono.exponents.reserve(mono.multipliers.size());
    for (const auto& mu : mono.multipliers) {
        mono.exponents.push_back(linalg::principal_log(mu) / lc.period);
    }
    mono.segments = std::move(run.maps);
    return mono;
}

std::vector<Complex> shifted_multipliers_fullstate(const Monodromy& base, double kappa, double period) {
    const double factor = std::exp(-kappa * period);
    std::vector<Complex> out;
    out.reserve(base.multipliers.size());
    for (const auto& mu : base.multipliers) {
        out.push_back(mu * factor);
    }
    return out;
}

double trace_integral(const models::OscillatorModel& model, const limit_cycle::LimitCycle& lc, double t) {
    validate_cycle(model, lc);
    const auto& times = lc.orbit.times();
    const std::size_t m = model.dim;
    std::vector<double> x(m), jac(m * m);
    auto trace_at = [&](double tau) {
        lc.orbit.eval_into(tau, x);
        model.jacobian(x, jac);
        double tr = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            tr += jac[i * m + i];
        }
        return tr;
    };
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < times.size() && times[i] < t; ++i) {
        const double a = times[i];
        const double b = std::min(times[i + 1], t);
        total += boost::math::quadrature::gauss<double, 10>::integrate(trace_at, a, b);
    }
    return total;
}

AjlSides ajl_determinant(const models::OscillatorModel& model, const limit_cycle::LimitCycle& lc, double kappa,
                         std::span<const double> mask, double t, const MonodromyOptions& opts) {
    validate_cycle(model, lc);
    validate_mask(mask, model.dim);
    if (!(t >= 0.0 && t <= lc.period)) {
        throw Error(ErrorCode::OutOfRange, "AJL time must lie in [0, T]");
    }
    if (t == 0.0) {
        return {1.0, 1.0};
    }
    const std::size_t n = segment_count(lc, opts);
    std::vector<double> bounds{0.0};
    for (std::size_t k = 1; k <= n; ++k) {
        const double tk = lc.period * static_cast<double>(k) / static_cast<double>(n);
        if (tk >= t) {
            break;
        }
        bounds.push_back(tk);
    }
    bounds.push_back(t);
    const SegmentRun run = integrate_segments(model, lc, kappa, mask, bounds, opts);
    double tr_dh = 0.0;
    for (double d : mask) {
        tr_dh += d;
    }
    AjlSides sides;
    sides.det_phi = run.det_sign * std::exp(run.log_abs_det);
    sides.rhs = std::exp(trace_integral(model, lc, t) - kappa * opts.coupling_sign * tr_dh * t);
    return sides;
}

LFDecomposition lf_decomposition(const models::OscillatorModel& model, const limit_cycle::LimitCycle& lc,
                                 const MonodromyOptions& opts) {
    const std::vector<double> mask = full_mask(model.dim);
    LFDecomposition lf;
    lf.monodromy = monodromy(model, lc, 0.0, mask, opts);
    const Monodromy& mono = lf.monodromy;
    const linalg::PeriodicSchur& ps = mono.schur;
    const std::size_t m = model.dim;
    const std::size_t n = ps.length();
    const double period = lc.period;
    const double dt = period / static_cast<double>(n);

    lf.R = linalg::log_principal(ps) * Complex{1.0 / period, 0.0};

    const std::vector<Complex> lam = ps.diagonal_eigenvalues();
    Matrix tprod = ps.triangular_product();
    for (std::size_t j = 0; j < m; ++j) {
        tprod(j, j) = lam[j];
    }
    const Matrix x = linalg::triangular_eigenvectors(tprod);
    const Matrix v0 = ps.bases.front() * x;
    std::vector<Complex> step_growth(m);
    for (std::size_t j = 0; j < m; ++j) {
        step_growth[j] = std::exp(linalg::principal_log(lam[j]) / period * dt);
    }

    // Columns of w hold the periodic Floquet vectors p_j(t_k) in the rotated
    // basis; p_j(t_k) = e^{rho_j dt} phi(t_{k+1}, t_k)^{-1} p_j(t_{k+1}).
    std::vector<Matrix> w_at(n);
    Matrix w = x;
    for (std::size_t k = n; k-- > 0;) {
        w = upper_solve(ps.triangular[k], w);
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t i = 0; i < m; ++i) {
                w(i, j) *= step_growth[j];
            }
        }
        w_at[k] = ps.bases[k] * w;
    }

    lf.P_samples.resize(n);
    lf.sample_times.resize(n);
    lf.P_samples[0] = Matrix::identity(m);
    for (std::size_t k = 0; k < n; ++k) {
        lf.sample_times[k] = period * static_cast<double>(k) / static_cast<double>(n);
        if (k > 0) {
            lf.P_samples[k] = v0 * linalg::inverse(w_at[k]);
        }
    }
    const Matrix p_wrapped = v0 * linalg::inverse(w_at[0]);
    lf.periodicity_residual = (p_wrapped - Matrix::identity(m)).frobenius_norm() / std::sqrt(static_cast<double>(m));
    lf.reconstruction_residual =
        (linalg::expm(lf.R * Complex{period, 0.0}) - mono.matrix).frobenius_norm() / mono.matrix.frobenius_norm();
    return lf;
}

}  // namespace floqnet::floquet
