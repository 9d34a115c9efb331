#include "floqnet/limit_cycle.hpp"

#include "floqnet/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace floqnet::limit_cycle {

namespace {

constexpr std::size_t kStatSamples = 4096;
constexpr std::size_t kReturnsAveraged = 5;

double norm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) {
        s += v * v;
    }
    return std::sqrt(s);
}

double relative_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    return std::sqrt(s) / std::max(norm2(b), 1e-300);
}

struct WindowStats {
    std::vector<double> mean;
    std::vector<double> amplitude;
};

WindowStats window_stats(const ode::Trajectory& traj) {
    const std::size_t d = traj.dim();
    WindowStats st{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
    std::vector<double> lo(d, INFINITY), hi(d, -INFINITY), x(d);
    const double t0 = traj.t_begin();
    const double span = traj.t_end() - t0;
    for (std::size_t k = 0; k < kStatSamples; ++k) {
        traj.eval_into(t0 + span * static_cast<double>(k) / static_cast<double>(kStatSamples), x);
        for (std::size_t i = 0; i < d; ++i) {
            st.mean[i] += x[i];
            lo[i] = std::min(lo[i], x[i]);
            hi[i] = std::max(hi[i], x[i]);
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        st.mean[i] /= static_cast<double>(kStatSamples);
        st.amplitude[i] = hi[i] - lo[i];
    }
    return st;
}

void fill_samples(LimitCycle& lc, std::size_t count) {
    lc.samples.assign(count, ode::State(lc.dim()));
    lc.samples[0] = lc.anchor;
    for (std::size_t k = 1; k < count; ++k) {
        lc.orbit.eval_into(lc.sample_time(k), lc.samples[k]);
    }
}

}  // namespace

ode::State LimitCycle::state_at(double t) const {
    double phase = std::fmod(t, period);
    if (phase < 0.0) {
        phase += period;
    }
    return orbit.eval(std::min(phase, orbit.t_end()));
}

ode::State LimitCycle::interpolate_samples(double t) const {
    double phase = std::fmod(t, period);
    if (phase < 0.0) {
        phase += period;
    }
    const std::size_t n = samples.size();
    const double dt = period / static_cast<double>(n);
    const std::size_t k = std::min(static_cast<std::size_t>(phase / dt), n - 1);
    const double w = (phase - static_cast<double>(k) * dt) / dt;
    const auto& a = samples[k];
    const auto& b = samples[(k + 1) % n];
    ode::State out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        out[i] = (1.0 - w) * a[i] + w * b[i];
    }
    return out;
}

LimitCycle find_limit_cycle(const models::OscillatorModel& model, std::span<const double> x0,
                            const ode::IntegratorConfig& cfg, const FindOptions& opts) {
    if (x0.size() != model.dim) {
        throw Error(ErrorCode::DimensionMismatch, "initial state has " + std::to_string(x0.size()) +
                                                      " entries, model '" + model.name + "' has dimension " +
                                                      std::to_string(model.dim));
    }
    if (opts.samples < 64) {
        throw Error(ErrorCode::InvalidParam, "limit cycle needs at least 64 samples");
    }
    if (opts.section_coordinate && *opts.section_coordinate >= model.dim) {
        throw Error(ErrorCode::InvalidParam, "section coordinate out of range");
    }
    double transient = opts.transient.value_or(model.transient_hint);
    if (!(transient > 0.0)) {
        throw Error(ErrorCode::InvalidParam, "transient must be positive");
    }

    ode::State state = ode::integrate_to(model.field, x0, 0.0, transient, cfg);
    double last_distance = INFINITY;
    std::size_t last_crossings = 0;
    for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
        const double window = transient;
        const ode::Trajectory probe = ode::integrate(model.field, state, 0.0, window, cfg);
        const WindowStats st = window_stats(probe);
        const double max_amp = *std::max_element(st.amplitude.begin(), st.amplitude.end());
        if (max_amp < kMinAmplitude) {
            throw Error(ErrorCode::FixedPointConvergence,
                        "post-transient amplitude " + std::to_string(max_amp) + " is below 1e-6");
        }
        const std::size_t c = opts.section_coordinate.value_or(static_cast<std::size_t>(
            std::max_element(st.amplitude.begin(), st.amplitude.end()) - st.amplitude.begin()));
        const double level = st.mean[c];
        const auto run = ode::integrate_with_events(model.field, probe.back(), 0.0, window, cfg,
                                                    [c, level](std::span<const double> x) { return x[c] - level; });
        const auto& cr = run.crossings;
        last_crossings = cr.size();
        if (cr.size() > kReturnsAveraged) {
            const std::size_t last = cr.size() - 1;
            const double period = (cr[last].time - cr[last - kReturnsAveraged].time) / kReturnsAveraged;
            last_distance = relative_distance(cr[last].state, cr[last - 1].state);
            if (last_distance < kClosureTolerance) {
                LimitCycle lc;
                lc.period = period;
                lc.anchor = cr[last].state;
                lc.section_coordinate = c;
                lc.section_level = level;
                lc.orbit = ode::integrate(model.field, lc.anchor, 0.0, period, cfg);
                lc.closure_residual = relative_distance(lc.orbit.back(), lc.anchor);
                if (lc.closure_residual < kClosureTolerance) {
                    fill_samples(lc, opts.samples);
                    return lc;
                }
                last_distance = lc.closure_residual;
            }
        }
        // Not settled yet: run a doubled transient onward from where we are.
        transient *= 2.0;
        state = ode::integrate_to(model.field, run.trajectory.back(), 0.0, transient, cfg);
    }
    if (last_crossings < 2) {
        throw Error(ErrorCode::NoCrossings, "Poincare section was crossed " + std::to_string(last_crossings) +
                                                " times in the final window");
    }
    throw Error(ErrorCode::NotPeriodic,
                "return distance " + std::to_string(last_distance) + " did not contract below 1e-6");
}

LimitCycle resample(const LimitCycle& lc, std::size_t count) {
    if (count < 64) {
        throw Error(ErrorCode::InvalidParam, "resample needs at least 64 samples");
    }
    LimitCycle out = lc;
    fill_samples(out, count);
    return out;
}

}  // namespace floqnet::limit_cycle
