#include "floqnet/ode.hpp"

#include "floqnet/error.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace floqnet::ode {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Fourth-order continuous extension.
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

// Step-size controller.
constexpr double kSafety = 0.9;
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;
constexpr double kMaxShrink = 5.0;   // h_new >= h / 5
constexpr double kMaxGrow = 0.1;     // h_new <= h * 10

constexpr double kEps = std::numeric_limits<double>::epsilon();

double inf_norm(std::span<const double> x) {
    double m = 0.0;
    for (double v : x) {
        if (!std::isfinite(v)) {
            return std::numeric_limits<double>::infinity();
        }
        m = std::max(m, std::abs(v));
    }
    return m;
}

void check_blowup(std::span<const double> x, double t) {
    if (!(inf_norm(x) <= kBlowupThreshold)) {
        throw Error(ErrorCode::Blowup, "state norm exceeded 1e12 at t = " + std::to_string(t));
    }
}

class Dopri5 {
public:
    Dopri5(const VectorField& field, std::size_t dim)
        : f_(field), n_(dim), k1_(dim), k2_(dim), k3_(dim), k4_(dim), k5_(dim), k6_(dim), k7_(dim), tmp_(dim),
          y_new_(dim), coeffs_(4 * dim) {}

    // on_step(t_old, t_new, y_old, y_new, coeffs) is called after every
    // accepted step, before y is advanced.
    template <class OnStep>
    void run(std::vector<double>& y, double t0, double t1, const IntegratorConfig& cfg, OnStep&& on_step) {
        const double span = t1 - t0;
        const double h_max = cfg.max_step > 0.0 ? std::min(cfg.max_step, span) : span / 10.0;
        double t = t0;
        f_(y, k1_);
        double h = cfg.initial_step > 0.0 ? std::min(cfg.initial_step, h_max) : initial_step(y, h_max, cfg);
        double err_old = 1e-4;
        bool rejected = false;
        std::size_t steps = 0;
        bool last = false;
        while (!last) {
            if (steps++ >= cfg.max_steps) {
                throw Error(ErrorCode::StepBudgetExceeded,
                            "step budget of " + std::to_string(cfg.max_steps) + " exhausted at t = " +
                                std::to_string(t));
            }
            if (t + 1.01 * h >= t1) {
                h = t1 - t;
                last = true;
            }
            if (!(0.1 * h > kEps * std::abs(t)) || !(h > 0.0)) {
                throw Error(ErrorCode::StepFailure, "step size underflow at t = " + std::to_string(t));
            }
            const double err = attempt(y, h, cfg);
            if (err <= 1.0) {
                const double t_new = last ? t1 : t + h;
                check_blowup(y_new_, t_new);
                fill_dense(y, h);
                on_step(t, t_new, std::span<const double>(y), std::span<const double>(y_new_),
                        std::span<const double>(coeffs_));
                std::copy(y_new_.begin(), y_new_.end(), y.begin());
                std::swap(k1_, k7_);
                t = t_new;
                const double fac11 = std::pow(err, kExpo);
                double fac = fac11 / std::pow(err_old, kBeta);
                fac = std::clamp(fac / kSafety, kMaxGrow, kMaxShrink);
                double h_new = h / fac;
                if (rejected) {
                    h_new = std::min(h_new, h);
                }
                err_old = std::max(err, 1e-4);
                rejected = false;
                h = std::min(h_new, h_max);
            } else {
                last = false;
                const double fac11 = std::isfinite(err) ? std::pow(err, kExpo) : kMaxShrink * kSafety;
                h /= std::min(kMaxShrink, fac11 / kSafety);
                rejected = true;
            }
        }
    }

private:
    double initial_step(std::span<const double> y, double h_max, const IntegratorConfig& cfg) {
        double dnf = 0.0, dny = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double sk = cfg.abs_tol + cfg.rel_tol * std::abs(y[i]);
            dnf += (k1_[i] / sk) * (k1_[i] / sk);
            dny += (y[i] / sk) * (y[i] / sk);
        }
        double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
        h = std::min(h, h_max);
        for (std::size_t i = 0; i < n_; ++i) {
            tmp_[i] = y[i] + h * k1_[i];
        }
        f_(tmp_, k2_);
        double der2 = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double sk = cfg.abs_tol + cfg.rel_tol * std::abs(y[i]);
            der2 += ((k2_[i] - k1_[i]) / sk) * ((k2_[i] - k1_[i]) / sk);
        }
        der2 = std::sqrt(der2) / h;
        const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
        const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
        return std::min({100.0 * h, h1, h_max});
    }

    // One trial step; leaves y_new_ and k7_ filled. Returns the scaled RMS error.
    double attempt(std::span<const double> y, double h, const IntegratorConfig& cfg) {
        for (std::size_t i = 0; i < n_; ++i) tmp_[i] = y[i] + h * a21 * k1_[i];
        f_(tmp_, k2_);
        for (std::size_t i = 0; i < n_; ++i) tmp_[i] = y[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
        f_(tmp_, k3_);
        for (std::size_t i = 0; i < n_; ++i) tmp_[i] = y[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
        f_(tmp_, k4_);
        for (std::size_t i = 0; i < n_; ++i)
            tmp_[i] = y[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
        f_(tmp_, k5_);
        for (std::size_t i = 0; i < n_; ++i)
            tmp_[i] = y[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i]);
        f_(tmp_, k6_);
        for (std::size_t i = 0; i < n_; ++i)
            y_new_[i] = y[i] + h * (a71 * k1_[i] + a73 * k3_[i] + a74 * k4_[i] + a75 * k5_[i] + a76 * k6_[i]);
        f_(y_new_, k7_);
        double err = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double e = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] + e7 * k7_[i]);
            const double sk = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(y_new_[i]));
            err += (e / sk) * (e / sk);
        }
        err = std::sqrt(err / static_cast<double>(n_));
        return std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
    }

    void fill_dense(std::span<const double> y, double h) {
        double* r2 = coeffs_.data();
        double* r3 = r2 + n_;
        double* r4 = r3 + n_;
        double* r5 = r4 + n_;
        for (std::size_t i = 0; i < n_; ++i) {
            const double ydiff = y_new_[i] - y[i];
            const double bspl = h * k1_[i] - ydiff;
            r2[i] = ydiff;
            r3[i] = bspl;
            r4[i] = ydiff - h * k7_[i] - bspl;
            r5[i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] + d6 * k6_[i] + d7 * k7_[i]);
        }
    }

    const VectorField& f_;
    std::size_t n_;
    std::vector<double> k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, y_new_, coeffs_;
};

void interpolate(std::span<const double> y0, std::span<const double> coeffs, double theta, std::span<double> out) {
    const std::size_t n = y0.size();
    const double* r2 = coeffs.data();
    const double* r3 = r2 + n;
    const double* r4 = r3 + n;
    const double* r5 = r4 + n;
    const double theta1 = 1.0 - theta;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = y0[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])));
    }
}

void check_inputs(std::span<const double> x0, double t0, double t1, const IntegratorConfig& cfg) {
    cfg.validate();
    if (!(t1 > t0)) {
        throw Error(ErrorCode::InvalidParam, "integration span must satisfy t1 > t0");
    }
    if (x0.empty()) {
        throw Error(ErrorCode::InvalidParam, "initial state is empty");
    }
    if (!std::isfinite(inf_norm(x0))) {
        throw Error(ErrorCode::InvalidParam, "initial state is not finite");
    }
    check_blowup(x0, t0);
}

}  // namespace

void IntegratorConfig::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
        throw Error(ErrorCode::InvalidParam, "integrator tolerances must be positive");
    }
    if (max_steps == 0) {
        throw Error(ErrorCode::InvalidParam, "max_steps must be positive");
    }
    if (max_step < 0.0 || initial_step < 0.0 || !std::isfinite(max_step) || !std::isfinite(initial_step)) {
        throw Error(ErrorCode::InvalidParam, "step limits must be finite and non-negative");
    }
}

void Trajectory::push_first(double t, std::span<const double> x) {
    times_.assign(1, t);
    states_.assign(x.begin(), x.end());
    dense_.clear();
}

void Trajectory::push_step(double t, std::span<const double> x, std::span<const double> coeffs) {
    times_.push_back(t);
    states_.insert(states_.end(), x.begin(), x.end());
    dense_.insert(dense_.end(), coeffs.begin(), coeffs.end());
}

void Trajectory::append(const Trajectory& later) {
    if (later.dim_ != dim_) {
        throw Error(ErrorCode::DimensionMismatch, "cannot join trajectories of different dimension");
    }
    if (times_.empty()) {
        *this = later;
        return;
    }
    if (later.times_.empty()) {
        return;
    }
    if (later.times_.front() != times_.back()) {
        throw Error(ErrorCode::InvalidParam, "joined trajectory must start where this one ends");
    }
    times_.insert(times_.end(), later.times_.begin() + 1, later.times_.end());
    states_.insert(states_.end(), later.states_.begin() + static_cast<std::ptrdiff_t>(dim_), later.states_.end());
    dense_.insert(dense_.end(), later.dense_.begin(), later.dense_.end());
}

void Trajectory::eval_into(double t, std::span<double> out) const {
    if (times_.empty() || !(t >= times_.front() && t <= times_.back())) {
        throw Error(ErrorCode::OutOfRange, "dense evaluation at t = " + std::to_string(t) + " outside trajectory span");
    }
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t k = static_cast<std::size_t>(it - times_.begin()) - 1;
    if (times_[k] == t) {
        const auto s = state(k);
        std::copy(s.begin(), s.end(), out.begin());
        return;
    }
    const double h = times_[k + 1] - times_[k];
    const double theta = (t - times_[k]) / h;
    interpolate(state(k), std::span<const double>(dense_.data() + 4 * k * dim_, 4 * dim_), theta, out);
}

State Trajectory::eval(double t) const {
    State out(dim_);
    eval_into(t, out);
    return out;
}

Trajectory integrate(const VectorField& field, std::span<const double> x0, double t0, double t1,
                     const IntegratorConfig& cfg, const StepObserver& observer) {
    check_inputs(x0, t0, t1, cfg);
    Trajectory traj(x0.size());
    traj.push_first(t0, x0);
    std::vector<double> y(x0.begin(), x0.end());
    Dopri5 solver(field, x0.size());
    solver.run(y, t0, t1, cfg,
               [&](double, double t_new, std::span<const double>, std::span<const double> y_new,
                   std::span<const double> coeffs) {
                   traj.push_step(t_new, y_new, coeffs);
                   if (observer) {
                       observer(t_new, y_new);
                   }
               });
    return traj;
}

State integrate_to(const VectorField& field, std::span<const double> x0, double t0, double t1,
                   const IntegratorConfig& cfg) {
    check_inputs(x0, t0, t1, cfg);
    std::vector<double> y(x0.begin(), x0.end());
    Dopri5 solver(field, x0.size());
    solver.run(y, t0, t1, cfg,
               [](double, double, std::span<const double>, std::span<const double>, std::span<const double>) {});
    return y;
}

State dense_eval(const Trajectory& traj, double t) {
    return traj.eval(t);
}

EventRun integrate_with_events(const VectorField& field, std::span<const double> x0, double t0, double t1,
                               const IntegratorConfig& cfg, const EventFunction& event) {
    check_inputs(x0, t0, t1, cfg);
    EventRun run{Trajectory(x0.size()), {}};
    run.trajectory.push_first(t0, x0);
    std::vector<double> y(x0.begin(), x0.end());
    std::vector<double> probe(x0.size());
    double g_prev = event(x0);
    Dopri5 solver(field, x0.size());
    solver.run(y, t0, t1, cfg,
               [&](double t_old, double t_new, std::span<const double> y_old, std::span<const double> y_new,
                   std::span<const double> coeffs) {
                   run.trajectory.push_step(t_new, y_new, coeffs);
                   const double g_new = event(y_new);
                   if (g_prev < 0.0 && g_new >= 0.0) {
                       const double h = t_new - t_old;
                       auto g_at = [&](double theta) {
                           if (theta >= 1.0) return g_new;
                           if (theta <= 0.0) return g_prev;
                           interpolate(y_old, coeffs, theta, probe);
                           return event(probe);
                       };
                       // Tolerance on theta giving ~1e-14 absolute resolution in time.
                       const double tol_theta = std::max(1e-14 / h, 4.0 * kEps);
                       auto tol = [tol_theta](double a, double b) { return std::abs(b - a) <= tol_theta; };
                       std::uintmax_t iters = 200;
                       const auto bracket =
                           boost::math::tools::toms748_solve(g_at, 0.0, 1.0, g_prev, g_new, tol, iters);
                       // Upper end keeps the event non-negative at the reported point.
                       const double theta = bracket.second;
                       Crossing c;
                       c.time = t_old + theta * h;
                       c.state.resize(y_new.size());
                       if (theta >= 1.0) {
                           std::copy(y_new.begin(), y_new.end(), c.state.begin());
                           c.time = t_new;
                       } else {
                           interpolate(y_old, coeffs, theta, c.state);
                       }
                       run.crossings.push_back(std::move(c));
                   }
                   g_prev = g_new;
               });
    return run;
}

std::vector<State> rk4(const VectorField& field, std::span<const double> x0, double t0, double t1,
                       std::size_t steps) {
    if (steps == 0 || !(t1 > t0)) {
        throw Error(ErrorCode::InvalidParam, "rk4 needs a positive step count and t1 > t0");
    }
    const std::size_t n = x0.size();
    const double h = (t1 - t0) / static_cast<double>(steps);
    std::vector<State> out;
    out.reserve(steps + 1);
    out.emplace_back(x0.begin(), x0.end());
    State k1(n), k2(n), k3(n), k4(n), tmp(n);
    for (std::size_t s = 0; s < steps; ++s) {
        const State& y = out.back();
        field(y, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        field(tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        field(tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
        field(tmp, k4);
        State next(n);
        for (std::size_t i = 0; i < n; ++i) {
            next[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        check_blowup(next, t0 + static_cast<double>(s + 1) * h);
        out.push_back(std::move(next));
    }
    return out;
}

}  // namespace floqnet::ode
