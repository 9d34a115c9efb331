#include "floqnet/msf.hpp"

#include "floqnet/error.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <sstream>
#include <thread>

namespace floqnet::msf {

namespace {

constexpr double kDisconnectedTolerance = 1e-10;

double retained_max(const linalg::Spectrum& multipliers, double kappa) {
    const std::ptrdiff_t skip = kappa == 0.0 ? floquet::unity_index(multipliers) : -1;
    double best = 0.0;
    for (std::size_t i = 0; i < multipliers.size(); ++i) {
        if (static_cast<std::ptrdiff_t>(i) != skip) {
            best = std::max(best, std::abs(multipliers[i]));
        }
    }
    return best;
}

}  // namespace

std::size_t thread_count() {
    if (const char* env = std::getenv("FLOQNET_THREADS")) {
        char* end = nullptr;
        errno = 0;
        const long v = std::strtol(env, &end, 10);
        if (errno == 0 && end != env && *end == '\0' && v > 0) {
            return static_cast<std::size_t>(v);
        }
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task, std::size_t threads) {
    if (count == 0) {
        return;
    }
    const std::size_t workers = std::min(count, threads == 0 ? thread_count() : threads);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                task(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

MsfPoint msf_point(const models::OscillatorModel& model, const limit_cycle::LimitCycle& lc, double kappa,
                   std::span<const double> mask, const floquet::MonodromyOptions& opts) {
    const floquet::Monodromy mono = floquet::monodromy(model, lc, kappa, mask, opts);
    MsfPoint p;
    p.kappa = kappa;
    p.multipliers = mono.multipliers;
    p.mu_max = retained_max(p.multipliers, kappa);
    return p;
}

MsfCurve msf_sweep(const models::OscillatorModel& model, const limit_cycle::LimitCycle& lc,
                   std::span<const double> mask, std::span<const double> kappa_grid, const SweepOptions& opts) {
    for (std::size_t i = 0; i < kappa_grid.size(); ++i) {
        if (!std::isfinite(kappa_grid[i]) || kappa_grid[i] < 0.0) {
            throw Error(ErrorCode::InvalidParam, "kappa grid values must be finite and non-negative");
        }
        if (i > 0 && !(kappa_grid[i] > kappa_grid[i - 1])) {
            throw Error(ErrorCode::InvalidParam, "kappa grid must be strictly increasing");
        }
    }
    MsfCurve curve;
    curve.model = model.name;
    curve.mask.assign(mask.begin(), mask.end());
    curve.period = lc.period;
    curve.points.resize(kappa_grid.size());

    std::vector<std::string> failures(kappa_grid.size());
    std::vector<ErrorCode> codes(kappa_grid.size(), ErrorCode::NonConvergence);
    std::vector<char> failed(kappa_grid.size(), 0);
    parallel_for(
        kappa_grid.size(),
        [&](std::size_t i) {
            try {
                curve.points[i] = msf_point(model, lc, kappa_grid[i], mask, opts.monodromy);
            } catch (const Error& e) {
                failed[i] = 1;
                codes[i] = e.code();
                failures[i] = e.what();
            }
        },
        opts.threads);

    const auto first = std::find(failed.begin(), failed.end(), 1);
    if (first != failed.end()) {
        std::ostringstream msg;
        msg << "MSF sweep failed at";
        for (std::size_t i = 0; i < failed.size(); ++i) {
            if (failed[i]) {
                msg << " kappa=" << kappa_grid[i] << " (" << failures[i] << ")";
            }
        }
        throw Error(codes[static_cast<std::size_t>(first - failed.begin())], msg.str());
    }
    return curve;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
    if (points < 2 || !std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
        throw Error(ErrorCode::InvalidParam, "linear grid needs lo < hi and at least 2 points");
    }
    std::vector<double> g(points);
    const double step = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
        g[i] = lo + step * static_cast<double>(i);
    }
    g.back() = hi;
    return g;
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
    if (!(lo > 0.0)) {
        throw Error(ErrorCode::InvalidParam, "log grid needs a positive lower end");
    }
    std::vector<double> g = linear_grid(std::log(lo), std::log(hi), points);
    for (double& v : g) {
        v = std::exp(v);
    }
    g.front() = lo;
    g.back() = hi;
    return g;
}

std::vector<double> default_grid() {
    std::vector<double> g{0.0};
    const std::vector<double> tail = log_grid(0.01, 10.0, 50);
    g.insert(g.end(), tail.begin(), tail.end());
    return g;
}

SyncVerdict sync_predicate(const models::OscillatorModel& model, const limit_cycle::LimitCycle& lc,
                           const network::GraphSpec& g, double K, std::span<const double> mask,
                           const SweepOptions& opts) {
    if (g.n < 2 || g.eigenvalues.size() != g.n || !(g.eigenvalues[1] > kDisconnectedTolerance)) {
        throw Error(ErrorCode::DisconnectedGraph, "graph is disconnected (lambda_2 <= 1e-10)");
    }
    if (!std::isfinite(K)) {
        throw Error(ErrorCode::InvalidParam, "coupling gain must be finite");
    }

    // Modes with equal kappa share one evaluation.
    std::map<double, double> by_kappa;
    for (std::size_t i = 0; i < g.n; ++i) {
        const double lambda = i == 0 ? 0.0 : g.eigenvalues[i];
        by_kappa.emplace(K * lambda, 0.0);
    }
    std::vector<double> kappas;
    for (const auto& kv : by_kappa) {
        kappas.push_back(kv.first);
    }
    std::vector<double> mu(kappas.size());
    parallel_for(
        kappas.size(), [&](std::size_t i) { mu[i] = msf_point(model, lc, kappas[i], mask, opts.monodromy).mu_max; },
        opts.threads);
    for (std::size_t i = 0; i < kappas.size(); ++i) {
        by_kappa[kappas[i]] = mu[i];
    }

    SyncVerdict v;
    v.synchronizes = K != 0.0;
    for (std::size_t i = 0; i < g.n; ++i) {
        ModeResult r;
        r.lambda = i == 0 ? 0.0 : g.eigenvalues[i];
        r.kappa = K * r.lambda;
        r.mu_max = by_kappa.at(r.kappa);
        if (i > 0 && !(r.mu_max < 1.0)) {
            v.synchronizes = false;
        }
        v.per_mode.push_back(r);
    }
    return v;
}

}  // namespace floqnet::msf
