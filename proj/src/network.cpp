#include "floqnet/network.hpp"

#include "floqnet/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace floqnet::network {

namespace {

double inf_norm(std::span<const double> x) {
    double v = 0.0;
    for (double e : x) {
        v = std::max(v, std::abs(e));
    }
    return v;
}

GraphSpec make_graph(Matrix laplacian) {
    GraphSpec g;
    g.n = laplacian.rows();
    const linalg::Spectrum s = linalg::eigenvalues(laplacian);
    g.eigenvalues.reserve(s.size());
    for (const auto& v : s) {
        g.eigenvalues.push_back(v.real());
    }
    std::sort(g.eigenvalues.begin(), g.eigenvalues.end());
    g.laplacian = std::move(laplacian);
    return g;
}

}  // namespace

GraphSpec from_adjacency(const std::vector<std::vector<double>>& a) {
    const std::size_t n = a.size();
    if (n < 2) {
        throw Error(ErrorCode::InvalidAdjacency, "graph needs at least 2 nodes");
    }
    Matrix lap(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i].size() != n) {
            throw Error(ErrorCode::InvalidAdjacency, "adjacency row " + std::to_string(i) + " has wrong length");
        }
        if (a[i][i] != 0.0) {
            throw Error(ErrorCode::InvalidAdjacency, "adjacency diagonal must be zero");
        }
        for (std::size_t j = 0; j < n; ++j) {
            const double w = a[i][j];
            if (!std::isfinite(w) || w < 0.0) {
                throw Error(ErrorCode::InvalidAdjacency, "adjacency weights must be finite and non-negative");
            }
            if (j < i && w != a[j][i]) {
                throw Error(ErrorCode::InvalidAdjacency, "adjacency must be symmetric");
            }
            if (i != j) {
                lap(i, j) = -w;
                lap(i, i) += w;
            }
        }
    }
    return make_graph(std::move(lap));
}

GraphSpec complete_graph(std::size_t n) {
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 1.0));
    for (std::size_t i = 0; i < n; ++i) {
        a[i][i] = 0.0;
    }
    return from_adjacency(a);
}

GraphSpec ring_graph(std::size_t n) {
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n && n >= 2; ++i) {
        const std::size_t j = (i + 1) % n;
        a[i][j] = a[j][i] = 1.0;
    }
    return from_adjacency(a);
}

void CouplingSpec::validate(std::size_t dim) const {
    if (mask.size() != dim) {
        throw Error(ErrorCode::DimensionMismatch, "coupling mask has " + std::to_string(mask.size()) +
                                                      " entries for a " + std::to_string(dim) + "-dimensional model");
    }
    for (double d : mask) {
        if (d != 0.0 && d != 1.0) {
            throw Error(ErrorCode::InvalidParam, "coupling mask entries must be 0 or 1");
        }
    }
    if (!std::isfinite(K)) {
        throw Error(ErrorCode::InvalidParam, "coupling gain must be finite");
    }
    if (!(activation_time >= 0.0) || !std::isfinite(activation_time)) {
        throw Error(ErrorCode::InvalidParam, "activation time must be finite and non-negative");
    }
}

ode::VectorField assemble_coupled_field(const models::OscillatorModel& model, const GraphSpec& g,
                                        const CouplingSpec& c, bool active) {
    c.validate(model.dim);
    const std::size_t n = g.n;
    const std::size_t m = model.dim;
    const std::size_t dim = n * m;
    std::vector<double> coupling;
    if (active && c.K != 0.0) {
        const Matrix kg = linalg::kron(g.laplacian, Matrix::diagonal(std::span<const double>(c.mask))) *
                          linalg::Complex{c.K, 0.0};
        coupling = kg.real_entries();
    }
    return [f = model.field, n, m, dim, coupling](std::span<const double> x, std::span<double> dx) {
        if (x.size() != dim) {
            throw Error(ErrorCode::DimensionMismatch, "network state has wrong dimension");
        }
        for (std::size_t i = 0; i < n; ++i) {
            f(x.subspan(i * m, m), dx.subspan(i * m, m));
        }
        if (coupling.empty()) {
            return;
        }
        for (std::size_t r = 0; r < dim; ++r) {
            const double* row = coupling.data() + r * dim;
            double s = 0.0;
            for (std::size_t col = 0; col < dim; ++col) {
                s += row[col] * x[col];
            }
            dx[r] -= s;
        }
    };
}

double sync_error_of(std::span<const double> x, std::size_t n, std::size_t m) {
    double worst = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
        double lo = x[c], hi = x[c];
        for (std::size_t i = 1; i < n; ++i) {
            lo = std::min(lo, x[i * m + c]);
            hi = std::max(hi, x[i * m + c]);
        }
        worst = std::max(worst, hi - lo);
    }
    return worst;
}

SyncSeries sync_error(const ode::Trajectory& traj, std::size_t n, std::size_t m) {
    if (traj.dim() != n * m) {
        throw Error(ErrorCode::DimensionMismatch, "trajectory dimension is not n * m");
    }
    SyncSeries s;
    s.times = traj.times();
    s.error.reserve(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        s.error.push_back(sync_error_of(traj.state(k), n, m));
    }
    return s;
}

NetworkRun simulate_network(const models::OscillatorModel& model, const GraphSpec& g, const CouplingSpec& c,
                            std::span<const double> x0, double t_end, const ode::IntegratorConfig& cfg,
                            std::size_t grid_points) {
    c.validate(model.dim);
    const std::size_t n = g.n;
    const std::size_t m = model.dim;
    if (x0.size() != n * m) {
        throw Error(ErrorCode::DimensionMismatch, "initial network state has " + std::to_string(x0.size()) +
                                                      " entries, expected " + std::to_string(n * m));
    }
    if (!(t_end > c.activation_time)) {
        throw Error(ErrorCode::InvalidParam, "t_end must exceed the activation time");
    }
    if (grid_points < 2) {
        throw Error(ErrorCode::InvalidParam, "output grid needs at least 2 points");
    }

    NetworkRun run;
    const double t_on = c.activation_time;
    double amplitude = inf_norm(x0);
    const ode::StepObserver track = [&amplitude](double, std::span<const double> x) {
        amplitude = std::max(amplitude, inf_norm(x));
    };
    std::vector<double> x_on(x0.begin(), x0.end());
    if (t_on > 0.0) {
        run.trajectory = ode::integrate(assemble_coupled_field(model, g, c, false), x0, 0.0, t_on, cfg, track);
        x_on.assign(run.trajectory.back().begin(), run.trajectory.back().end());
    }
    const double limit = kDivergenceFactor * std::max(amplitude, 1.0);
    const ode::StepObserver guard = [limit](double t, std::span<const double> x) {
        if (inf_norm(x) > limit) {
            throw Error(ErrorCode::Blowup, "coupled network diverged: state norm exceeded " + std::to_string(limit) +
                                               " at t = " + std::to_string(t));
        }
    };
    ode::Trajectory coupled = ode::integrate(assemble_coupled_field(model, g, c, true), x_on, t_on, t_end, cfg, guard);
    if (t_on > 0.0) {
        run.trajectory.append(coupled);
    } else {
        run.trajectory = std::move(coupled);
    }

    run.grid.resize(grid_points);
    run.grid_states.resize(grid_points);
    run.sync.times.resize(grid_points);
    run.sync.error.resize(grid_points);
    for (std::size_t k = 0; k < grid_points; ++k) {
        const double t = k + 1 == grid_points ? t_end
                                              : t_end * static_cast<double>(k) / static_cast<double>(grid_points - 1);
        run.grid[k] = t;
        run.grid_states[k] = run.trajectory.eval(t);
        run.sync.times[k] = t;
        run.sync.error[k] = sync_error_of(run.grid_states[k], n, m);
    }
    return run;
}

double time_converged(const SyncSeries& s, double threshold) {
    for (std::size_t k = s.error.size(); k-- > 0;) {
        if (!(s.error[k] < threshold)) {
            return k + 1 < s.error.size() ? s.times[k + 1] : -1.0;
        }
    }
    return s.times.empty() ? -1.0 : s.times.front();
}

}  // namespace floqnet::network
