#include "doctest.h"

#include "floqnet/error.hpp"
#include "floqnet/ode.hpp"

#include <cmath>
#include <numbers>

using floqnet::Error;
using floqnet::ErrorCode;
using namespace floqnet::ode;

namespace {

constexpr double kPi = std::numbers::pi;

void harmonic(std::span<const double> x, std::span<double> dx) {
    dx[0] = x[1];
    dx[1] = -x[0];
}

void vdp1(std::span<const double> x, std::span<double> dx) {
    dx[0] = x[1];
    dx[1] = (1.0 - x[0] * x[0]) * x[1] - x[0];
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::ConfigError;
}

// Period of the Van der Pol cycle from a fine fixed-step RK4 run, with upward
// crossings of x2 located by cubic Hermite interpolation between grid points.
double rk4_vdp_period() {
    const double h = 2e-4;
    const std::size_t steps = static_cast<std::size_t>(std::llround(120.0 / h));
    const std::vector<double> x0{2.0, 0.0};
    const auto states = rk4(vdp1, x0, 0.0, 120.0, steps);
    std::vector<double> crossings;
    std::vector<double> f0(2), f1(2);
    for (std::size_t i = static_cast<std::size_t>(60.0 / h); i + 1 < states.size(); ++i) {
        const auto& a = states[i];
        const auto& b = states[i + 1];
        if (a[1] < 0.0 && b[1] >= 0.0) {
            vdp1(a, f0);
            vdp1(b, f1);
            double lo = 0.0, hi = 1.0;
            auto hermite = [&](double s) {
                const double s2 = s * s, s3 = s2 * s;
                return (2 * s3 - 3 * s2 + 1) * a[1] + (s3 - 2 * s2 + s) * h * f0[1] + (-2 * s3 + 3 * s2) * b[1] +
                       (s3 - s2) * h * f1[1];
            };
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                (hermite(mid) < 0.0 ? lo : hi) = mid;
            }
            crossings.push_back((static_cast<double>(i) + hi) * h);
        }
    }
    REQUIRE(crossings.size() >= 6);
    return (crossings.back() - crossings[crossings.size() - 6]) / 5.0;
}

}  // namespace

TEST_CASE("zero field gives a constant trajectory") {
    const std::vector<double> x0{1.0, 2.0};
    const auto traj = integrate([](auto, std::span<double> dx) { dx[0] = dx[1] = 0.0; }, x0, 0.0, 5.0);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        CHECK(traj.state(i)[0] == 1.0);
        CHECK(traj.state(i)[1] == 2.0);
    }
    const auto mid = traj.eval(2.345);
    CHECK(mid[0] == 1.0);
    CHECK(mid[1] == 2.0);
}

TEST_CASE("harmonic oscillator over one period") {
    const std::vector<double> x0{1.0, 0.0};
    const auto traj = integrate(harmonic, x0, 0.0, 2.0 * kPi);
    CHECK(traj.t_end() == 2.0 * kPi);
    CHECK(std::abs(traj.back()[0] - 1.0) < 1e-6);
    CHECK(std::abs(traj.back()[1]) < 1e-6);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto s = traj.state(i);
        CHECK(std::abs(s[0] * s[0] + s[1] * s[1] - 1.0) < 1e-6);
    }
    const auto final_only = integrate_to(harmonic, x0, 0.0, 2.0 * kPi);
    CHECK(final_only[0] == traj.back()[0]);
    CHECK(final_only[1] == traj.back()[1]);
}

TEST_CASE("dense output") {
    const std::vector<double> x0{1.0, 0.0};
    const auto traj = integrate(harmonic, x0, 0.0, 10.0);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const auto v = traj.eval(traj.times()[i]);
        CHECK(v[0] == traj.state(i)[0]);
        CHECK(v[1] == traj.state(i)[1]);
    }
    const auto q = dense_eval(traj, kPi / 2.0);
    CHECK(std::abs(q[0]) < 1e-5);
    CHECK(std::abs(q[1] + 1.0) < 1e-5);
    for (int i = 0; i <= 200; ++i) {
        const double t = 10.0 * i / 200.0;
        const auto v = traj.eval(t);
        CHECK(std::abs(v[0] - std::cos(t)) < 1e-7);
        CHECK(std::abs(v[1] + std::sin(t)) < 1e-7);
    }
    CHECK(code_of([&] { (void)traj.eval(10.5); }) == ErrorCode::OutOfRange);
    CHECK(code_of([&] { (void)traj.eval(-1e-9); }) == ErrorCode::OutOfRange);
}

TEST_CASE("dense output matches a restart from the node") {
    const std::vector<double> x0{2.0, 0.0};
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-8;
    cfg.abs_tol = 1e-10;
    const auto traj = integrate(vdp1, x0, 0.0, 20.0, cfg);
    for (std::size_t k = 5; k + 1 < traj.size(); k += 17) {
        const double ta = traj.times()[k];
        const double tb = traj.times()[k + 1];
        const double t = ta + 0.37 * (tb - ta);
        const std::vector<double> node(traj.state(k).begin(), traj.state(k).end());
        IntegratorConfig fine;
        fine.rel_tol = 1e-13;
        fine.abs_tol = 1e-15;
        const auto restart = integrate_to(vdp1, node, ta, t, fine);
        const auto dense = traj.eval(t);
        for (int c = 0; c < 2; ++c) {
            const double local_tol = cfg.abs_tol + cfg.rel_tol * std::abs(restart[c]);
            CHECK(std::abs(dense[c] - restart[c]) < 10.0 * local_tol);
        }
    }
}

TEST_CASE("Van der Pol trajectory stays bounded with amplitude near 2") {
    const std::vector<double> x0{2.0, 0.0};
    const auto traj = integrate(vdp1, x0, 0.0, 100.0);
    double amp = 0.0;
    for (int i = 0; i <= 20000; ++i) {
        const double t = 50.0 + 50.0 * i / 20000.0;
        amp = std::max(amp, std::abs(traj.eval(t)[0]));
    }
    // Reference amplitude from an independent fine-step RK4 run.
    const auto ref = rk4(vdp1, x0, 0.0, 100.0, 500000);
    double ref_amp = 0.0;
    for (std::size_t i = 250000; i < ref.size(); ++i) {
        ref_amp = std::max(ref_amp, std::abs(ref[i][0]));
    }
    CHECK(std::abs(amp - ref_amp) < 0.02 * ref_amp);
    CHECK(std::abs(amp - 2.0) < 0.02 * 2.0);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (traj.times()[i] >= 5.0) {
            CHECK(std::abs(traj.state(i)[0]) <= 3.0);
            CHECK(std::abs(traj.state(i)[1]) <= 4.0);
        }
    }
}

TEST_CASE("tightening rel_tol never increases the final-state error") {
    const std::vector<double> x0{2.0, 0.0};
    IntegratorConfig ref_cfg;
    ref_cfg.rel_tol = 1e-12;
    ref_cfg.abs_tol = 1e-14;
    const auto ref = integrate_to(vdp1, x0, 0.0, 20.0, ref_cfg);
    double prev_err = std::numeric_limits<double>::infinity();
    for (double rtol = 1e-5; rtol >= 1e-10; rtol /= 2.0) {
        IntegratorConfig cfg;
        cfg.rel_tol = rtol;
        cfg.abs_tol = rtol * 1e-2;
        const auto got = integrate_to(vdp1, x0, 0.0, 20.0, cfg);
        const double err = std::hypot(got[0] - ref[0], got[1] - ref[1]);
        CHECK(err <= prev_err);
        prev_err = err;
    }
}

TEST_CASE("upward crossings of the harmonic oscillator") {
    const std::vector<double> x0{1.0, 0.0};
    const auto run = integrate_with_events(harmonic, x0, 0.0, 4.0 * kPi - 0.1, {},
                                           [](std::span<const double> x) { return x[1]; });
    REQUIRE(run.crossings.size() == 2);
    CHECK(std::abs(run.crossings[0].time - kPi) < 1e-8);
    CHECK(std::abs(run.crossings[1].time - 3.0 * kPi) < 1e-8);
    CHECK(std::abs(run.crossings[0].state[0] + 1.0) < 1e-8);

    const auto none = integrate_with_events(harmonic, x0, 0.0, 20.0, {},
                                            [](std::span<const double> x) { return x[0] - 5.0; });
    CHECK(none.crossings.empty());
}

TEST_CASE("event times are bracketed by steps with a sign change") {
    const std::vector<double> x0{2.0, 0.0};
    auto event = [](std::span<const double> x) { return x[1]; };
    const auto run = integrate_with_events(vdp1, x0, 0.0, 40.0, {}, event);
    REQUIRE(!run.crossings.empty());
    const auto& times = run.trajectory.times();
    for (const auto& c : run.crossings) {
        const auto it = std::lower_bound(times.begin(), times.end(), c.time);
        REQUIRE(it != times.end());
        const std::size_t k = static_cast<std::size_t>(it - times.begin());
        REQUIRE(k > 0);
        CHECK(event(run.trajectory.state(k - 1)) < 0.0);
        CHECK(event(run.trajectory.state(k)) >= 0.0);
        CHECK(std::abs(c.state[1]) < 1e-9);
    }
}

TEST_CASE("Van der Pol crossing gaps converge to the period") {
    const std::vector<double> x0{2.0, 0.0};
    IntegratorConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-14;
    const auto run = integrate_with_events(vdp1, x0, 0.0, 120.0, cfg, [](std::span<const double> x) { return x[1]; });
    const auto& c = run.crossings;
    REQUIRE(c.size() >= 10);
    const double gap = c.back().time - c[c.size() - 2].time;
    const double oracle = rk4_vdp_period();
    CHECK(std::abs(gap - oracle) < 1e-7 * oracle);
    CHECK(std::abs(gap - 6.663286859317) < 1e-8);
}

TEST_CASE("rk4 matches the analytic harmonic solution") {
    const std::vector<double> x0{1.0, 0.0};
    const auto states = rk4(harmonic, x0, 0.0, 2.0 * kPi, 2000);
    REQUIRE(states.size() == 2001);
    CHECK(std::abs(states.back()[0] - 1.0) < 1e-10);
    CHECK(std::abs(states.back()[1]) < 1e-10);
}

TEST_CASE("error paths") {
    const std::vector<double> one{1.0};
    auto blowup = [](std::span<const double> x, std::span<double> dx) { dx[0] = x[0] * x[0]; };
    CHECK(code_of([&] { (void)integrate(blowup, one, 0.0, 2.0); }) == ErrorCode::Blowup);

    IntegratorConfig tiny_budget;
    tiny_budget.max_steps = 5;
    const std::vector<double> x0{2.0, 0.0};
    CHECK(code_of([&] { (void)integrate(vdp1, x0, 0.0, 100.0, tiny_budget); }) == ErrorCode::StepBudgetExceeded);

    IntegratorConfig bad;
    bad.rel_tol = 0.0;
    CHECK(code_of([&] { (void)integrate(vdp1, x0, 0.0, 1.0, bad); }) == ErrorCode::InvalidParam);
    CHECK(code_of([&] { (void)integrate(vdp1, x0, 1.0, 1.0); }) == ErrorCode::InvalidParam);
    const std::vector<double> nan_state{std::nan(""), 0.0};
    CHECK(code_of([&] { (void)integrate(vdp1, nan_state, 0.0, 1.0); }) == ErrorCode::InvalidParam);
}
