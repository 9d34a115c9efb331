// Acceptance gate. Each criterion prints one PASS/FAIL line with the measured
// quantity and its runtime. Usage: acceptance [criterion-number ...]

#include "oracles.hpp"

#include "floqnet/config.hpp"
#include "floqnet/error.hpp"
#include "floqnet/floquet.hpp"
#include "floqnet/limit_cycle.hpp"
#include "floqnet/msf.hpp"
#include "floqnet/network.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

using namespace floqnet;
using linalg::Complex;

namespace {

struct Outcome {
    bool passed = false;
    std::string measured;
};

struct Criterion {
    int id;
    const char* title;
    double time_limit;
    std::function<Outcome()> body;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), f, v);
    return buf;
}

struct Subject {
    models::OscillatorModel model;
    limit_cycle::LimitCycle lc;
    std::vector<double> partial;
};

Subject subject(const std::string& name) {
    auto m = models::make_model(name);
    auto lc = limit_cycle::find_limit_cycle(m, m.default_initial);
    auto partial = config::partial_mask(m.dim);
    return {std::move(m), std::move(lc), std::move(partial)};
}

double rel(Complex a, Complex b) {
    return std::abs(a - b) / std::abs(b);
}

constexpr double kSyncThreshold = 1e-3;

Outcome period_criterion() {
    const auto m = models::vdp_model(1.0);
    const auto lc = limit_cycle::find_limit_cycle(m, m.default_initial);
    // Fixed-step RK4 at h = 5e-4 has truncation error far below 1e-12 here.
    const double ref = oracle::rk4_period(m.field, {2.0, 0.0}, 0, 0.0, 60.0, 120.0, 5e-4);
    const double err = std::abs(lc.period - ref) / ref;
    return {err < 1e-3, "T = " + fmt("%.10f", lc.period) + ", reference " + fmt("%.10f", ref) + ", rel err " +
                            fmt("%.2e", err) + " (tol 1e-3)"};
}

Outcome unity_criterion() {
    bool ok = true;
    std::string msg;
    for (const char* name : {"vdp", "repressilator"}) {
        const Subject s = subject(name);
        const auto mono = floquet::monodromy(s.model, s.lc, 0.0, floquet::full_mask(s.model.dim));
        int near_one = 0;
        double others = 0.0;
        for (const auto& mu : mono.multipliers) {
            if (std::abs(mu - 1.0) < 1e-3) {
                ++near_one;
            } else {
                others = std::max(others, std::abs(mu));
            }
        }
        ok = ok && near_one == 1 && others < 1.0;
        msg += std::string(name) + ": " + std::to_string(near_one) + " unity, max other |mu| " + fmt("%.4g", others) +
               "; ";
    }
    return {ok, msg};
}

Outcome shift_criterion() {
    double worst = 0.0;
    for (const char* name : {"vdp", "repressilator"}) {
        const Subject s = subject(name);
        const auto mask = floquet::full_mask(s.model.dim);
        const auto base = floquet::monodromy(s.model, s.lc, 0.0, mask);
        for (double kappa : {0.25, 0.5, 1.0, 2.0}) {
            const auto direct = floquet::monodromy(s.model, s.lc, kappa, mask);
            const auto law = floquet::shifted_multipliers_fullstate(base, kappa, s.lc.period);
            for (std::size_t i = 0; i < law.size(); ++i) {
                worst = std::max(worst, rel(direct.multipliers[i], law[i]));
            }
        }
    }
    return {worst < 1e-6, "worst relative multiplier error " + fmt("%.2e", worst) + " (tol 1e-6)"};
}

Outcome ajl_criterion() {
    double worst = 0.0;
    for (const char* name : {"vdp", "repressilator"}) {
        const Subject s = subject(name);
        for (const auto& mask : {floquet::full_mask(s.model.dim), s.partial}) {
            for (double kappa : {0.0, 1.0, 2.0}) {
                const auto sides = floquet::ajl_determinant(s.model, s.lc, kappa, mask, s.lc.period);
                worst = std::max(worst, std::abs(sides.det_phi - sides.rhs) / sides.rhs);
            }
        }
    }
    return {worst < 1e-6, "worst |det phi - rhs| / rhs " + fmt("%.2e", worst) + " (tol 1e-6)"};
}

Outcome msf_shape_criterion() {
    const Subject s = subject("vdp");
    const std::vector<double> mask{0.0, 1.0};
    const auto grid = msf::linear_grid(0.1, 5.0, 50);
    const auto curve = msf::msf_sweep(s.model, s.lc, mask, grid);
    bool below_one = true;
    std::size_t increases = 0;
    double first_increase = -1.0;
    std::size_t argmin = 0;
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        below_one = below_one && curve.points[i].mu_max < 1.0;
        if (i > 0 && !(curve.points[i].mu_max < curve.points[i - 1].mu_max)) {
            ++increases;
            if (first_increase < 0.0) {
                first_increase = curve.points[i].kappa;
            }
        }
        if (curve.points[i].mu_max < curve.points[argmin].mu_max) {
            argmin = i;
        }
    }
    std::string msg = std::string("mu_max < 1 everywhere: ") + (below_one ? "yes" : "no") +
                      "; strictly decreasing: " + (increases == 0 ? "yes" : "no");
    if (increases > 0) {
        msg += " (minimum " + fmt("%.3e", curve.points[argmin].mu_max) + " at kappa " +
               fmt("%.1f", curve.points[argmin].kappa) + ", rises to " + fmt("%.3f", curve.points.back().mu_max) +
               " at kappa 5; " + std::to_string(increases) + " increasing steps from kappa " +
               fmt("%.1f", first_increase) + ")";
    }
    return {below_one && increases == 0, msg};
}

Outcome vdp_network_criterion() {
    const auto m = models::vdp_model(1.0);
    const auto g = network::complete_graph(3);
    const std::vector<double> x0{0, 1, 2, 3, 4, 5};
    bool ok = true;
    std::string msg;
    for (const auto& mask : {std::vector<double>{1, 1}, std::vector<double>{0, 1}}) {
        const auto run = network::simulate_network(m, g, network::CouplingSpec{1.0, mask, 20.0}, x0, 100.0);
        double worst = 0.0;
        for (std::size_t k = 0; k < run.sync.times.size(); ++k) {
            if (run.sync.times[k] >= 60.0) {
                worst = std::max(worst, run.sync.error[k]);
            }
        }
        ok = ok && worst < 1e-3;
        msg += std::string(mask[0] == 1.0 ? "full" : "partial") + ": max e(t >= 60) " + fmt("%.2e", worst) + "; ";
    }
    return {ok, msg + "(tol 1e-3)"};
}

Outcome repressilator_network_criterion() {
    const auto m = models::make_model("repressilator");
    const auto g = network::complete_graph(3);
    const std::vector<double> x0{0, 1, 0, 3, 0, 5, 0, 7, 0, 9, 0, 11, 0, 13, 15, 17, 4, 6};
    bool ok = true;
    std::string msg;
    for (const auto& mask : {std::vector<double>(6, 1.0), config::partial_mask(6)}) {
        const auto run = network::simulate_network(m, g, network::CouplingSpec{1.0, mask, 20.0}, x0, 100.0);
        const double at_on = network::sync_error_of(run.trajectory.eval(20.0), 3, 6);
        const double at_end = run.sync.error.back();
        ok = ok && at_end < 1e-2 && at_end < at_on;
        msg += std::string(mask[0] == 1.0 ? "full" : "partial") + ": e(20) " + fmt("%.3g", at_on) + " -> e(100) " +
               fmt("%.2e", at_end) + "; ";
    }
    return {ok, msg + "(tol 1e-2)"};
}

Outcome necessity_criterion() {
    const Subject s = subject("vdp");
    const auto g = network::complete_graph(3);
    const auto mask = floquet::full_mask(2);
    const std::vector<double> x0{0, 1, 2, 3, 4, 5};
    const auto base = floquet::monodromy(s.model, s.lc, 0.0, mask);
    double top = 0.0;
    for (const auto& mu : base.multipliers) {
        top = std::max(top, std::abs(mu));
    }
    bool ok = true;
    std::string msg;
    for (double K : {-0.1, -0.5}) {
        const auto verdict = msf::sync_predicate(s.model, s.lc, g, K, mask);
        double worst_closed_form = 0.0;
        double mu_max = 0.0;
        for (std::size_t i = 1; i < verdict.per_mode.size(); ++i) {
            const double want = std::exp(-K * verdict.per_mode[i].lambda * s.lc.period) * top;
            worst_closed_form = std::max(worst_closed_form, std::abs(verdict.per_mode[i].mu_max - want) / want);
            mu_max = std::max(mu_max, verdict.per_mode[i].mu_max);
        }
        ok = ok && !verdict.synchronizes && mu_max > 1.0 && worst_closed_form < 1e-6;
        msg += "K=" + fmt("%g", K) + ": predicate " + (verdict.synchronizes ? "true" : "false") + ", mu_max " +
               fmt("%.3g", mu_max) + ", simulation ";
        try {
            const auto run = network::simulate_network(s.model, g, network::CouplingSpec{K, mask, 20.0}, x0, 100.0);
            double low = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < run.sync.times.size(); ++k) {
                if (run.sync.times[k] >= 40.0) {
                    low = std::min(low, run.sync.error[k]);
                }
            }
            ok = ok && low > 0.1;
            msg += "min e on [40,100] " + fmt("%.3g", low) + "; ";
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Blowup) {
                throw;
            }
            msg += "diverged (Blowup); ";
        }
    }
    return {ok, msg};
}

Outcome agreement_criterion() {
    std::size_t cases = 0, agree = 0;
    std::string mismatches;
    for (const char* name : {"vdp", "repressilator"}) {
        const Subject s = subject(name);
        for (const auto& g : {network::complete_graph(3), network::ring_graph(4)}) {
            const auto x0 = config::default_network_initial(s.model, g.n);
            for (double K : {0.5, 1.0, 2.0}) {
                for (const auto& mask : {floquet::full_mask(s.model.dim), s.partial}) {
                    const auto verdict = msf::sync_predicate(s.model, s.lc, g, K, mask);
                    const auto run =
                        network::simulate_network(s.model, g, network::CouplingSpec{K, mask, 20.0}, x0, 300.0);
                    const bool converged = run.sync.error.back() < kSyncThreshold;
                    ++cases;
                    if (converged == verdict.synchronizes) {
                        ++agree;
                    } else {
                        mismatches += std::string(" ") + name + "/n=" + std::to_string(g.n) + "/K=" + fmt("%g", K);
                    }
                }
            }
        }
    }
    return {agree == cases && cases == 24,
            std::to_string(agree) + "/" + std::to_string(cases) + " verdicts match simulation" + mismatches};
}

Outcome periodicity_criterion() {
    double worst = 0.0;
    std::string msg;
    for (const char* name : {"vdp", "repressilator"}) {
        const Subject s = subject(name);
        const auto lf = floquet::lf_decomposition(s.model, s.lc);
        worst = std::max(worst, lf.periodicity_residual);
        msg += std::string(name) + " " + fmt("%.2e", lf.periodicity_residual) + "; ";
    }
    return {worst < 1e-4, "P(T) vs P(0) residual: " + msg + "(tol 1e-4)"};
}

Outcome linalg_criterion() {
    double spectrum = 0.0;
    for (std::size_t n : {3u, 4u, 5u}) {
        const auto g = network::complete_graph(n);
        spectrum = std::max(spectrum, std::abs(g.eigenvalues[0]));
        for (std::size_t i = 1; i < n; ++i) {
            spectrum = std::max(spectrum, std::abs(g.eigenvalues[i] - static_cast<double>(n)));
        }
    }
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    double det_err = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 7);
        linalg::Matrix a(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                a(i, j) = Complex{dist(rng), 0.0};
            }
        }
        Complex prod{1.0, 0.0};
        for (const auto& v : linalg::eigenvalues(a)) {
            prod *= v;
        }
        const Complex det = linalg::determinant(a);
        det_err = std::max(det_err, std::abs(prod - det) / std::abs(det));
    }
    return {spectrum < 1e-10 && det_err < 1e-8, "Laplacian spectrum error " + fmt("%.2e", spectrum) +
                                                    " (tol 1e-10); eigenvalue product vs determinant " +
                                                    fmt("%.2e", det_err) + " (tol 1e-8)"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {1, "limit cycle period", 1.0, period_criterion},
        {2, "uncoupled Floquet structure", 5.0, unity_criterion},
        {3, "full-state shift law", 10.0, shift_criterion},
        {4, "Abel-Jacobi-Liouville determinant", 10.0, ajl_criterion},
        {5, "partial-mask MSF decreasing and below 1 on (0,5]", 30.0, msf_shape_criterion},
        {6, "three Van der Pol oscillators synchronize", 10.0, vdp_network_criterion},
        {7, "three repressilators synchronize", 30.0, repressilator_network_criterion},
        {8, "negative coupling does not synchronize", 10.0, necessity_criterion},
        {9, "MSF verdict matches simulation", 300.0, agreement_criterion},
        {10, "Lyapunov-Floquet periodicity", 10.0, periodicity_criterion},
        {11, "linear-algebra oracles", 5.0, linalg_criterion},
    };
    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) {
        wanted.push_back(std::atoi(argv[i]));
    }
    int failures = 0;
    for (const auto& c : all) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) {
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.body();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        while (o.measured.size() >= 2 && o.measured.ends_with("; ")) {
            o.measured.resize(o.measured.size() - 2);
        }
        const bool in_time = seconds < c.time_limit;
        const bool passed = o.passed && in_time;
        std::printf("AC%-2d %s  %s: %s [%.2f s, limit %.0f s%s]\n", c.id, passed ? "PASS" : "FAIL", c.title,
                    o.measured.c_str(), seconds, c.time_limit, in_time ? "" : ", TOO SLOW");
        failures += passed ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
