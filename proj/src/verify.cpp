#include "floqnet/verify.hpp"

#include "floqnet/error.hpp"
#include "floqnet/floquet.hpp"
#include "floqnet/io.hpp"
#include "floqnet/limit_cycle.hpp"
#include "floqnet/msf.hpp"
#include "floqnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

namespace floqnet::verify {

namespace {

using linalg::Complex;

constexpr double kShiftTolerance = 1e-6;
constexpr double kAjlTolerance = 1e-6;
constexpr double kPeriodicityTolerance = 1e-4;
constexpr double kPeriodTolerance = 1e-3;
constexpr double kSyncThreshold = 1e-3;
constexpr double kNecessityFloor = 0.1;
constexpr double kSpectrumTolerance = 1e-10;
constexpr double kDeterminantTolerance = 1e-8;

constexpr double kActivation = 20.0;
constexpr double kAgreementEnd = 300.0;
constexpr double kNecessityEnd = 100.0;
constexpr double kNecessityWindowStart = 40.0;

struct Subject {
    models::OscillatorModel model;
    std::vector<double> initial;
    std::vector<double> partial;
    ode::IntegratorConfig cfg;
    limit_cycle::LimitCycle lc;
};

Check run_check(const std::string& name, double tolerance, const std::function<Check()>& body) {
    try {
        Check c = body();
        c.name = name;
        c.tolerance = tolerance;
        return c;
    } catch (const Error& e) {
        if (is_validation_error(e.code())) {
            throw;
        }
        return Check{name, false, std::nan(""), tolerance, std::string("error: ") + e.what()};
    }
}

Check below(double value, double tolerance, std::string detail = {}) {
    return Check{{}, value < tolerance, value, tolerance, std::move(detail)};
}

std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

double rel(Complex a, Complex b) {
    return std::abs(a - b) / std::abs(b);
}

std::vector<Subject> subjects(const Options& opts) {
    std::vector<Subject> out;
    if (opts.config) {
        const config::Resolved r = config::resolve(*opts.config);
        const bool full = std::all_of(r.mask.begin(), r.mask.end(), [](double d) { return d == 1.0; });
        out.push_back({r.model, r.node_initial, full ? config::partial_mask(r.model.dim) : r.mask, r.integrator, {}});
    } else {
        for (const char* name : {"vdp", "repressilator"}) {
            if (opts.quick && std::string(name) != "vdp") {
                continue;
            }
            auto m = models::make_model(name);
            std::vector<double> x0 = m.default_initial;
            std::vector<double> partial = config::partial_mask(m.dim);
            out.push_back({std::move(m), std::move(x0), std::move(partial), {}, {}});
        }
    }
    return out;
}

void period_check(Subject& s, Report& rep) {
    rep.checks.push_back(run_check("period[" + s.model.name + "]", kPeriodTolerance, [&] {
        s.lc = limit_cycle::find_limit_cycle(s.model, s.initial, s.cfg);
        ode::IntegratorConfig tight;
        tight.rel_tol = 1e-12;
        tight.abs_tol = 1e-14;
        const auto ref = limit_cycle::find_limit_cycle(s.model, s.initial, tight);
        const double err = std::abs(s.lc.period - ref.period) / ref.period;
        return below(err, kPeriodTolerance, "T = " + io::format_double(s.lc.period));
    }));
}

void unity_check(const Subject& s, Report& rep) {
    rep.checks.push_back(run_check("unity_multiplier[" + s.model.name + "]", 1.0, [&] {
        const auto mono = floquet::monodromy(s.model, s.lc, 0.0, floquet::full_mask(s.model.dim));
        std::size_t near_one = 0;
        double others = 0.0;
        for (const auto& mu : mono.multipliers) {
            if (std::abs(mu - 1.0) < floquet::kUnityTolerance) {
                ++near_one;
            } else {
                others = std::max(others, std::abs(mu));
            }
        }
        Check c = below(others, 1.0, std::to_string(near_one) + " multiplier(s) within 1e-3 of 1");
        c.passed = c.passed && near_one == 1;
        return c;
    }));
}

void shift_check(const Subject& s, const Options& opts, Report& rep) {
    rep.checks.push_back(run_check("shift_law[" + s.model.name + "]", kShiftTolerance, [&] {
        const auto mask = floquet::full_mask(s.model.dim);
        const auto base = floquet::monodromy(s.model, s.lc, 0.0, mask);
        floquet::MonodromyOptions coupled;
        coupled.coupling_sign = opts.inject_sign_flip ? -1.0 : 1.0;
        const std::vector<double> kappas =
            opts.quick ? std::vector<double>{0.5, 2.0} : std::vector<double>{0.25, 0.5, 1.0, 2.0};
        double worst = 0.0;
        for (double kappa : kappas) {
            const auto direct = floquet::monodromy(s.model, s.lc, kappa, mask, coupled);
            const auto law = floquet::shifted_multipliers_fullstate(base, kappa, s.lc.period);
            for (std::size_t i = 0; i < law.size(); ++i) {
                worst = std::max(worst, rel(direct.multipliers[i], law[i]));
            }
        }
        return below(worst, kShiftTolerance, "worst relative multiplier error");
    }));
}

void ajl_check(const Subject& s, const Options& opts, Report& rep) {
    rep.checks.push_back(run_check("ajl[" + s.model.name + "]", kAjlTolerance, [&] {
        double worst = 0.0;
        for (const auto& mask : {floquet::full_mask(s.model.dim), s.partial}) {
            for (double kappa : {0.0, 1.0, 2.0}) {
                const auto sides = floquet::ajl_determinant(s.model, s.lc, kappa, mask, s.lc.period);
                worst = std::max(worst, std::abs(sides.det_phi - sides.rhs) / sides.rhs);
                if (opts.quick) {
                    break;
                }
            }
        }
        return below(worst, kAjlTolerance, "|det phi(T) - exp(int tr A)| / rhs");
    }));
}

void lf_check(const Subject& s, Report& rep) {
    rep.checks.push_back(run_check("lf_periodicity[" + s.model.name + "]", kPeriodicityTolerance, [&] {
        const auto lf = floquet::lf_decomposition(s.model, s.lc);
        return below(lf.periodicity_residual, kPeriodicityTolerance,
                     "reconstruction residual " + io::format_double(lf.reconstruction_residual));
    }));
}

// Verdict of the MSF against direct simulation over graphs, gains and masks.
void agreement_check(const std::vector<Subject>& subs, const Options& opts, Report& rep) {
    rep.checks.push_back(run_check("sync_agreement", 1.0, [&] {
        std::vector<network::GraphSpec> graphs{network::complete_graph(3)};
        if (!opts.quick) {
            graphs.push_back(network::ring_graph(4));
        }
        const std::vector<double> gains = opts.quick ? std::vector<double>{1.0} : std::vector<double>{0.5, 1.0, 2.0};
        std::size_t cases = 0;
        std::size_t agree = 0;
        std::string mismatches;
        for (const auto& s : subs) {
            for (const auto& g : graphs) {
                const auto x0 = config::default_network_initial(s.model, g.n);
                for (double K : gains) {
                    for (const auto& mask : {floquet::full_mask(s.model.dim), s.partial}) {
                        const auto verdict = msf::sync_predicate(s.model, s.lc, g, K, mask);
                        const auto run = network::simulate_network(s.model, g, network::CouplingSpec{K, mask, kActivation},
                                                                   x0, kAgreementEnd, s.cfg);
                        const bool converged = run.sync.error.back() < kSyncThreshold;
                        ++cases;
                        if (converged == verdict.synchronizes) {
                            ++agree;
                        } else {
                            mismatches += " " + s.model.name + "/n=" + std::to_string(g.n) + "/K=" + short_number(K);
                        }
                    }
                }
            }
        }
        if (cases == 0) {
            return Check{{}, false, 0.0, 1.0, "no model available"};
        }
        const double fraction = static_cast<double>(agree) / static_cast<double>(cases);
        Check c{{}, agree == cases, fraction, 1.0,
                std::to_string(agree) + "/" + std::to_string(cases) + " cases agree" + mismatches};
        return c;
    }));
}

// K < 0 must neither synchronize in simulation nor be predicted to.
void necessity_check(const std::vector<Subject>& subs, Report& rep) {
    for (const auto& s : subs) {
        if (s.model.name != "vdp") {
            continue;
        }
        rep.checks.push_back(run_check("necessity[" + s.model.name + "]", kNecessityFloor, [&] {
            const auto g = network::complete_graph(3);
            const auto mask = floquet::full_mask(s.model.dim);
            const auto x0 = config::default_network_initial(s.model, g.n);
            bool ok = true;
            double smallest = std::numeric_limits<double>::infinity();
            std::string detail;
            for (double K : {-0.1, -0.5}) {
                const auto verdict = msf::sync_predicate(s.model, s.lc, g, K, mask);
                ok = ok && !verdict.synchronizes;
                try {
                    const auto run = network::simulate_network(s.model, g, network::CouplingSpec{K, mask, kActivation},
                                                               x0, kNecessityEnd, s.cfg);
                    double low = std::numeric_limits<double>::infinity();
                    for (std::size_t k = 0; k < run.sync.times.size(); ++k) {
                        if (run.sync.times[k] >= kNecessityWindowStart) {
                            low = std::min(low, run.sync.error[k]);
                        }
                    }
                    smallest = std::min(smallest, low);
                    ok = ok && low > kNecessityFloor;
                    detail += " K=" + short_number(K) + ": min error " + short_number(low) + ";";
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::Blowup) {
                        throw;
                    }
                    detail += " K=" + short_number(K) + ": diverged;";
                }
            }
            return Check{{}, ok, smallest, kNecessityFloor, "predicate false and" + detail};
        }));
    }
}

void linalg_check(const Options& opts, Report& rep) {
    rep.checks.push_back(run_check("laplacian_spectra", kSpectrumTolerance, [&] {
        double worst = 0.0;
        for (std::size_t n : {3u, 4u, 5u}) {
            const auto g = network::complete_graph(n);
            worst = std::max(worst, std::abs(g.eigenvalues[0]));
            for (std::size_t i = 1; i < n; ++i) {
                worst = std::max(worst, std::abs(g.eigenvalues[i] - static_cast<double>(n)));
            }
        }
        return below(worst, kSpectrumTolerance, "complete graphs n = 3, 4, 5");
    }));
    rep.checks.push_back(run_check("eigen_product_vs_determinant", kDeterminantTolerance, [&] {
        std::mt19937_64 rng(opts.seed);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t n = 2 + static_cast<std::size_t>(trial % 7);
            linalg::Matrix m(n, n);
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    m(i, j) = Complex{dist(rng), 0.0};
                }
            }
            Complex prod{1.0, 0.0};
            for (const auto& v : linalg::eigenvalues(m)) {
                prod *= v;
            }
            const Complex det = linalg::determinant(m);
            worst = std::max(worst, std::abs(prod - det) / std::abs(det));
        }
        return below(worst, kDeterminantTolerance, "100 random matrices, seed " + std::to_string(opts.seed));
    }));
}

}  // namespace

bool Report::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

nlohmann::json Report::to_json() const {
    nlohmann::json j;
    j["passed"] = all_passed();
    j["checks"] = nlohmann::json::array();
    for (const auto& c : checks) {
        nlohmann::json e;
        e["name"] = c.name;
        e["passed"] = c.passed;
        e["value"] = std::isfinite(c.value) ? nlohmann::json(c.value) : nlohmann::json(nullptr);
        e["tolerance"] = c.tolerance;
        e["detail"] = c.detail;
        j["checks"].push_back(e);
    }
    return j;
}

std::string Report::to_text() const {
    std::size_t width = 5;
    for (const auto& c : checks) {
        width = std::max(width, c.name.size());
    }
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-*s  %-6s %-12s %-12s %s\n", static_cast<int>(width), "check", "result",
                  "value", "tolerance", "detail");
    out << line;
    for (const auto& c : checks) {
        std::snprintf(line, sizeof(line), "%-*s  %-6s %-12.4g %-12.4g ", static_cast<int>(width), c.name.c_str(),
                      c.passed ? "PASS" : "FAIL", c.value, c.tolerance);
        out << line << c.detail << '\n';
    }
    out << (all_passed() ? "all checks passed\n" : "some checks FAILED\n");
    return out.str();
}

Report verify_all(const Options& opts) {
    Report rep;
    std::vector<Subject> subs = subjects(opts);
    std::vector<Subject> ready;
    for (auto& s : subs) {
        period_check(s, rep);
        if (!rep.checks.back().passed && s.lc.period == 0.0) {
            continue;
        }
        unity_check(s, rep);
        shift_check(s, opts, rep);
        ajl_check(s, opts, rep);
        lf_check(s, rep);
        ready.push_back(s);
    }
    agreement_check(ready, opts, rep);
    necessity_check(ready, rep);
    linalg_check(opts, rep);
    return rep;
}

}  // namespace floqnet::verify
