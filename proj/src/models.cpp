#include "floqnet/models.hpp"

#include "floqnet/error.hpp"

#include <cmath>
#include <string>

namespace floqnet::models {

namespace {

std::string fmt(double v) {
    return std::to_string(v);
}

void require(bool ok, const std::string& what) {
    if (!ok) {
        throw Error(ErrorCode::InvalidParam, what);
    }
}

}  // namespace

std::vector<double> OscillatorModel::eval(std::span<const double> x) const {
    std::vector<double> dx(dim);
    field(x, dx);
    return dx;
}

linalg::Matrix OscillatorModel::jacobian_matrix(std::span<const double> x) const {
    std::vector<double> jac(dim * dim);
    jacobian(x, jac);
    return linalg::Matrix::from_real(dim, dim, jac);
}

OscillatorModel vdp_model(double mu) {
    require(mu > 0.0 && std::isfinite(mu), "vdp: mu must be positive, got " + fmt(mu));
    OscillatorModel m;
    m.name = "vdp";
    m.dim = 2;
    m.params = {{"mu", mu}};
    m.field = [mu](std::span<const double> x, std::span<double> dx) {
        dx[0] = x[1];
        dx[1] = mu * (1.0 - x[0] * x[0]) * x[1] - x[0];
    };
    m.jacobian = [mu](std::span<const double> x, std::span<double> j) {
        j[0] = 0.0;
        j[1] = 1.0;
        j[2] = -2.0 * mu * x[0] * x[1] - 1.0;
        j[3] = mu * (1.0 - x[0] * x[0]);
    };
    m.default_initial = {2.0, 0.0};
    // The relaxation period grows roughly linearly in mu.
    m.transient_hint = 50.0 * std::max(1.0, mu);
    return m;
}

OscillatorModel repressilator_model(double alpha, double alpha0, double beta, double n) {
    require(alpha > 0.0 && std::isfinite(alpha), "repressilator: alpha must be positive, got " + fmt(alpha));
    require(alpha0 >= 0.0 && std::isfinite(alpha0), "repressilator: alpha0 must be non-negative, got " + fmt(alpha0));
    require(beta > 0.0 && std::isfinite(beta), "repressilator: beta must be positive, got " + fmt(beta));
    require(n >= 1.0 && std::isfinite(n), "repressilator: n must be at least 1, got " + fmt(n));
    OscillatorModel m;
    m.name = "repressilator";
    m.dim = 6;
    m.params = {{"alpha", alpha}, {"alpha0", alpha0}, {"beta", beta}, {"n", n}};
    auto clips = m.clip_count;
    m.field = [alpha, alpha0, beta, n, clips](std::span<const double> x, std::span<double> dx) {
        for (std::size_t j = 0; j < 3; ++j) {
            const std::size_t mj = 2 * j;
            const std::size_t pj = mj + 1;
            const std::size_t prev = 2 * ((j + 2) % 3) + 1;
            double p = x[prev];
            if (p < 0.0) {
                clips->fetch_add(1, std::memory_order_relaxed);
                p = 0.0;
            }
            const double pn = p > 0.0 ? std::exp(n * std::log(p)) : 0.0;
            dx[mj] = -x[mj] + alpha / (1.0 + pn) + alpha0;
            dx[pj] = -beta * (x[pj] - x[mj]);
        }
    };
    m.jacobian = [alpha, beta, n](std::span<const double> x, std::span<double> jac) {
        std::fill(jac.begin(), jac.end(), 0.0);
        for (std::size_t j = 0; j < 3; ++j) {
            const std::size_t mj = 2 * j;
            const std::size_t pj = mj + 1;
            const std::size_t prev = 2 * ((j + 2) % 3) + 1;
            const double p = x[prev];
            jac[mj * 6 + mj] = -1.0;
            if (p >= 0.0) {
                const double pn = p > 0.0 ? std::exp(n * std::log(p)) : 0.0;
                const double pn1 = p > 0.0 ? std::exp((n - 1.0) * std::log(p)) : (n == 1.0 ? 1.0 : 0.0);
                jac[mj * 6 + prev] = -alpha * n * pn1 / ((1.0 + pn) * (1.0 + pn));
            }
            jac[pj * 6 + mj] = beta;
            jac[pj * 6 + pj] = -beta;
        }
    };
    m.default_initial = {0.0, 1.0, 0.0, 3.0, 0.0, 5.0};
    m.transient_hint = 30.0;
    return m;
}

OscillatorModel linear_rotation_model() {
    OscillatorModel m;
    m.name = "linear_rotation";
    m.dim = 2;
    m.field = [](std::span<const double> x, std::span<double> dx) {
        dx[0] = x[1];
        dx[1] = -x[0];
    };
    m.jacobian = [](std::span<const double>, std::span<double> j) {
        j[0] = 0.0;
        j[1] = 1.0;
        j[2] = -1.0;
        j[3] = 0.0;
    };
    m.default_initial = {1.0, 0.0};
    m.transient_hint = 10.0;
    return m;
}

std::vector<std::string> model_names() {
    return {"vdp", "repressilator", "linear_rotation"};
}

ParamMap default_params(const std::string& name) {
    if (name == "vdp") {
        return {{"mu", 1.0}};
    }
    if (name == "repressilator") {
        return {{"alpha", 1000.0}, {"alpha0", 1.0}, {"beta", 5.0}, {"n", 2.0}};
    }
    if (name == "linear_rotation") {
        return {};
    }
    throw Error(ErrorCode::InvalidParam, "unknown model '" + name + "'");
}

OscillatorModel make_model(const std::string& name, const ParamMap& params) {
    ParamMap p = default_params(name);
    for (const auto& [key, value] : params) {
        if (!p.contains(key)) {
            throw Error(ErrorCode::InvalidParam, "model '" + name + "' has no parameter '" + key + "'");
        }
        p[key] = value;
    }
    if (name == "vdp") {
        return vdp_model(p.at("mu"));
    }
    if (name == "repressilator") {
        return repressilator_model(p.at("alpha"), p.at("alpha0"), p.at("beta"), p.at("n"));
    }
    return linear_rotation_model();
}

}  // namespace floqnet::models
