#include "floqnet/config.hpp"

#include "floqnet/error.hpp"
#include "floqnet/msf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>

namespace floqnet::config {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& what) {
    throw Error(ErrorCode::ConfigError, key + ": " + what);
}

void expect_object(const json& j, const std::string& key, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
        fail(key.empty() ? "<root>" : key, "expected an object");
    }
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* a : allowed) {
            known = known || item.key() == a;
        }
        if (!known) {
            fail(key.empty() ? item.key() : key + "." + item.key(), "unknown key");
        }
    }
}

double read_number(const json& j, const std::string& key) {
    if (!j.is_number()) {
        fail(key, "expected a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        fail(key, "expected a finite number");
    }
    return v;
}

std::size_t read_count(const json& j, const std::string& key) {
    if (!j.is_number_unsigned()) {
        fail(key, "expected a non-negative integer");
    }
    return j.get<std::size_t>();
}

std::string read_string(const json& j, const std::string& key) {
    if (!j.is_string()) {
        fail(key, "expected a string");
    }
    return j.get<std::string>();
}

std::vector<double> read_numbers(const json& j, const std::string& key) {
    if (!j.is_array()) {
        fail(key, "expected an array of numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(read_number(j[i], key + "[" + std::to_string(i) + "]"));
    }
    return out;
}

template <class F>
void if_present(const json& j, const char* key, F&& f) {
    if (const auto it = j.find(key); it != j.end()) {
        f(*it);
    }
}

}  // namespace

ExperimentConfig from_json(const json& j) {
    ExperimentConfig c;
    expect_object(j, "", {"model", "initial", "graph", "coupling", "integrator", "run", "msf", "seed"});

    if_present(j, "model", [&](const json& s) {
        expect_object(s, "model", {"name", "params"});
        if_present(s, "name", [&](const json& v) { c.model.name = read_string(v, "model.name"); });
        if_present(s, "params", [&](const json& p) {
            if (!p.is_object()) {
                fail("model.params", "expected an object");
            }
            for (const auto& item : p.items()) {
                c.model.params[item.key()] = read_number(item.value(), "model.params." + item.key());
            }
        });
    });
    if_present(j, "initial", [&](const json& v) { c.initial = read_numbers(v, "initial"); });
    if_present(j, "graph", [&](const json& s) {
        expect_object(s, "graph", {"kind", "n", "adjacency"});
        if_present(s, "kind", [&](const json& v) { c.graph.kind = read_string(v, "graph.kind"); });
        if_present(s, "n", [&](const json& v) { c.graph.n = read_count(v, "graph.n"); });
        if_present(s, "adjacency", [&](const json& v) {
            if (!v.is_array()) {
                fail("graph.adjacency", "expected an array of rows");
            }
            for (std::size_t i = 0; i < v.size(); ++i) {
                c.graph.adjacency.push_back(read_numbers(v[i], "graph.adjacency[" + std::to_string(i) + "]"));
            }
        });
    });
    if_present(j, "coupling", [&](const json& s) {
        expect_object(s, "coupling", {"K", "mask", "activation_time"});
        if_present(s, "K", [&](const json& v) { c.coupling.K = read_number(v, "coupling.K"); });
        if_present(s, "mask", [&](const json& v) { c.coupling.mask = read_numbers(v, "coupling.mask"); });
        if_present(s, "activation_time",
                   [&](const json& v) { c.coupling.activation_time = read_number(v, "coupling.activation_time"); });
    });
    if_present(j, "integrator", [&](const json& s) {
        expect_object(s, "integrator", {"rel_tol", "abs_tol"});
        if_present(s, "rel_tol", [&](const json& v) { c.integrator.rel_tol = read_number(v, "integrator.rel_tol"); });
        if_present(s, "abs_tol", [&](const json& v) { c.integrator.abs_tol = read_number(v, "integrator.abs_tol"); });
    });
    if_present(j, "run", [&](const json& s) {
        expect_object(s, "run", {"t_end", "output_grid_points"});
        if_present(s, "t_end", [&](const json& v) { c.run.t_end = read_number(v, "run.t_end"); });
        if_present(s, "output_grid_points",
                   [&](const json& v) { c.run.output_grid_points = read_count(v, "run.output_grid_points"); });
    });
    if_present(j, "msf", [&](const json& s) {
        expect_object(s, "msf", {"kappa_min", "kappa_max", "points", "spacing", "include_zero"});
        if_present(s, "kappa_min", [&](const json& v) { c.msf.kappa_min = read_number(v, "msf.kappa_min"); });
        if_present(s, "kappa_max", [&](const json& v) { c.msf.kappa_max = read_number(v, "msf.kappa_max"); });
        if_present(s, "points", [&](const json& v) { c.msf.points = read_count(v, "msf.points"); });
        if_present(s, "spacing", [&](const json& v) { c.msf.spacing = read_string(v, "msf.spacing"); });
        if_present(s, "include_zero", [&](const json& v) {
            if (!v.is_boolean()) {
                fail("msf.include_zero", "expected true or false");
            }
            c.msf.include_zero = v.get<bool>();
        });
    });
    if_present(j, "seed", [&](const json& v) {
        if (!v.is_number_unsigned()) {
            fail("seed", "expected a non-negative integer");
        }
        c.seed = v.get<std::uint64_t>();
    });
    return c;
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["model"] = {{"name", c.model.name}, {"params", json::object()}};
    for (const auto& [k, v] : c.model.params) {
        j["model"]["params"][k] = v;
    }
    j["initial"] = c.initial;
    j["graph"] = {{"kind", c.graph.kind}, {"n", c.graph.n}};
    if (!c.graph.adjacency.empty()) {
        j["graph"]["adjacency"] = c.graph.adjacency;
    }
    j["coupling"] = {{"K", c.coupling.K}, {"mask", c.coupling.mask}, {"activation_time", c.coupling.activation_time}};
    j["integrator"] = {{"rel_tol", c.integrator.rel_tol}, {"abs_tol", c.integrator.abs_tol}};
    j["run"] = {{"t_end", c.run.t_end}, {"output_grid_points", c.run.output_grid_points}};
    j["msf"] = {{"kappa_min", c.msf.kappa_min},
                {"kappa_max", c.msf.kappa_max},
                {"points", c.msf.points},
                {"spacing", c.msf.spacing},
                {"include_zero", c.msf.include_zero}};
    j["seed"] = c.seed;
    return j;
}

ExperimentConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::ConfigError, "cannot open config file '" + path + "'");
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, "config file '" + path + "' is not valid JSON: " + e.what());
    }
    return from_json(j);
}

void validate(const ExperimentConfig& c) {
    if (c.graph.kind != "complete" && c.graph.kind != "ring" && c.graph.kind != "adjacency") {
        fail("graph.kind", "must be complete, ring or adjacency (got '" + c.graph.kind + "')");
    }
    if (c.graph.kind == "adjacency") {
        if (c.graph.adjacency.size() < 2) {
            fail("graph.adjacency", "needs at least 2 rows");
        }
        if (c.graph.n != c.graph.adjacency.size()) {
            fail("graph.n", "does not match the adjacency size");
        }
    } else {
        if (c.graph.n < 2) {
            fail("graph.n", "must be at least 2");
        }
        if (!c.graph.adjacency.empty()) {
            fail("graph.adjacency", "only allowed with kind = adjacency");
        }
    }
    for (double d : c.coupling.mask) {
        if (d != 0.0 && d != 1.0) {
            fail("coupling.mask", "entries must be 0 or 1");
        }
    }
    if (c.coupling.activation_time < 0.0) {
        fail("coupling.activation_time", "must be non-negative");
    }
    if (!(c.integrator.rel_tol > 0.0)) {
        fail("integrator.rel_tol", "must be positive");
    }
    if (!(c.integrator.abs_tol > 0.0)) {
        fail("integrator.abs_tol", "must be positive");
    }
    if (!(c.run.t_end > c.coupling.activation_time)) {
        fail("run.t_end", "must exceed coupling.activation_time");
    }
    if (c.run.output_grid_points < 2) {
        fail("run.output_grid_points", "must be at least 2");
    }
    if (c.msf.spacing != "linear" && c.msf.spacing != "log") {
        fail("msf.spacing", "must be linear or log (got '" + c.msf.spacing + "')");
    }
    if (c.msf.kappa_min < 0.0) {
        fail("msf.kappa_min", "must be non-negative");
    }
    if (c.msf.spacing == "log" && !(c.msf.kappa_min > 0.0)) {
        fail("msf.kappa_min", "must be positive for log spacing");
    }
    if (!(c.msf.kappa_max > c.msf.kappa_min)) {
        fail("msf.kappa_max", "must exceed msf.kappa_min");
    }
    if (c.msf.points < 2) {
        fail("msf.points", "must be at least 2");
    }
    if (c.msf.include_zero && c.msf.kappa_min == 0.0) {
        fail("msf.include_zero", "kappa_min is already 0");
    }
}

std::vector<double> partial_mask(std::size_t dim) {
    std::vector<double> mask(dim, 0.0);
    for (std::size_t i = 1; i < dim; i += 2) {
        mask[i] = 1.0;
    }
    return mask;
}

std::vector<double> default_network_initial(const models::OscillatorModel& model, std::size_t n) {
    const std::size_t m = model.dim;
    std::vector<double> x(n * m);
    for (std::size_t i = 0; i < n; ++i) {
        std::span<double> node(x.data() + i * m, m);
        const double fi = static_cast<double>(i);
        if (model.name == "vdp") {
            node[0] = 2.0 * fi;
            node[1] = 2.0 * fi + 1.0;
        } else if (model.name == "repressilator") {
            static const double fixed[3][6] = {{0, 1, 0, 3, 0, 5}, {0, 7, 0, 9, 0, 11}, {0, 13, 15, 17, 4, 6}};
            for (std::size_t c = 0; c < 6; ++c) {
                node[c] = i < 3 ? fixed[i][c] : (c % 2 == 0 ? 0.0 : 6.0 * fi + static_cast<double>(c));
            }
        } else {
            for (std::size_t c = 0; c < m; ++c) {
                node[c] = model.default_initial[c] + fi;
            }
        }
    }
    return x;
}

Resolved resolve(const ExperimentConfig& c) {
    validate(c);
    Resolved r;
    const auto names = models::model_names();
    if (std::find(names.begin(), names.end(), c.model.name) == names.end()) {
        fail("model.name", "unknown model '" + c.model.name + "'");
    }
    try {
        r.model = models::make_model(c.model.name, c.model.params);
    } catch (const Error& e) {
        fail("model.params", e.what());
    }
    const std::size_t m = r.model.dim;

    try {
        if (c.graph.kind == "complete") {
            r.graph = network::complete_graph(c.graph.n);
        } else if (c.graph.kind == "ring") {
            r.graph = network::ring_graph(c.graph.n);
        } else {
            r.graph = network::from_adjacency(c.graph.adjacency);
        }
    } catch (const Error& e) {
        fail("graph", e.what());
    }
    const std::size_t n = r.graph.n;

    if (c.coupling.mask.empty()) {
        r.mask.assign(m, 1.0);
    } else if (c.coupling.mask.size() != m) {
        fail("coupling.mask", "has " + std::to_string(c.coupling.mask.size()) + " entries, model '" + r.model.name +
                                  "' has dimension " + std::to_string(m));
    } else {
        r.mask = c.coupling.mask;
    }

    if (c.initial.empty()) {
        r.node_initial = r.model.default_initial;
        r.network_initial = default_network_initial(r.model, n);
    } else if (c.initial.size() == m) {
        r.node_initial = c.initial;
        r.network_initial.clear();
        for (std::size_t i = 0; i < n; ++i) {
            r.network_initial.insert(r.network_initial.end(), c.initial.begin(), c.initial.end());
        }
    } else if (c.initial.size() == n * m) {
        r.node_initial.assign(c.initial.begin(), c.initial.begin() + static_cast<std::ptrdiff_t>(m));
        r.network_initial = c.initial;
    } else {
        fail("initial", "has " + std::to_string(c.initial.size()) + " entries; expected 0, " + std::to_string(m) +
                            " or " + std::to_string(n * m));
    }

    r.integrator.rel_tol = c.integrator.rel_tol;
    r.integrator.abs_tol = c.integrator.abs_tol;

    r.kappa_grid = c.msf.spacing == "log" ? msf::log_grid(c.msf.kappa_min, c.msf.kappa_max, c.msf.points)
                                          : msf::linear_grid(c.msf.kappa_min, c.msf.kappa_max, c.msf.points);
    if (c.msf.include_zero) {
        r.kappa_grid.insert(r.kappa_grid.begin(), 0.0);
    }
    return r;
}

}  // namespace floqnet::config
