#include "floqnet/cli.hpp"

#include "floqnet/config.hpp"
#include "floqnet/error.hpp"
#include "floqnet/floquet.hpp"
#include "floqnet/io.hpp"
#include "floqnet/limit_cycle.hpp"
#include "floqnet/msf.hpp"
#include "floqnet/network.hpp"
#include "floqnet/verify.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace floqnet::cli {

namespace {

using nlohmann::json;

constexpr double kSyncThreshold = 1e-3;

struct Flags {
    std::string config;
    std::string model;
    std::vector<std::string> params;
    std::optional<double> kappa;
    std::string mask;
    std::string out;
    bool plot_script = false;
    bool quick = false;
    bool sign_flip = false;
    std::optional<std::uint64_t> seed;
};

double parse_number(std::string_view text, const std::string& what) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::ConfigError, what + ": '" + std::string(text) + "' is not a finite number");
    }
    return v;
}

config::ExperimentConfig build_config(const Flags& f) {
    config::ExperimentConfig c = f.config.empty() ? config::ExperimentConfig{} : config::load(f.config);
    if (!f.model.empty() && f.model != c.model.name) {
        // Model-specific settings of the file do not carry over.
        c.model.name = f.model;
        c.model.params.clear();
        c.initial.clear();
        c.coupling.mask.clear();
    }
    for (const auto& kv : f.params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw Error(ErrorCode::ConfigError, "--param: expected key=value, got '" + kv + "'");
        }
        c.model.params[kv.substr(0, eq)] = parse_number(std::string_view(kv).substr(eq + 1), "--param " + kv);
    }
    if (!f.mask.empty()) {
        c.coupling.mask.clear();
        std::string_view rest = f.mask;
        while (true) {
            const auto comma = rest.find(',');
            c.coupling.mask.push_back(parse_number(rest.substr(0, comma), "--mask"));
            if (comma == std::string_view::npos) {
                break;
            }
            rest.remove_prefix(comma + 1);
        }
    }
    if (f.seed) {
        c.seed = *f.seed;
    }
    return c;
}

std::string dump(const json& j) {
    return j.dump(2) + "\n";
}

json params_json(const models::OscillatorModel& m) {
    json p = json::object();
    for (const auto& [k, v] : m.params) {
        p[k] = v;
    }
    return p;
}

json complex_list(const linalg::Spectrum& s) {
    json a = json::array();
    for (const auto& mu : s) {
        a.push_back({{"re", mu.real()}, {"im", mu.imag()}, {"abs", std::abs(mu)}});
    }
    return a;
}

std::filesystem::path with_ext(const std::string& stem, const char* ext) {
    return std::filesystem::path(stem + ext);
}

int cmd_limit_cycle(const Flags& f, std::ostream& out) {
    const config::Resolved r = config::resolve(build_config(f));
    const auto lc = limit_cycle::find_limit_cycle(r.model, r.node_initial, r.integrator);

    std::string csv = "t";
    for (std::size_t c = 0; c < r.model.dim; ++c) {
        csv += ",x" + std::to_string(c + 1);
    }
    csv += '\n';
    for (std::size_t k = 0; k < lc.samples.size(); ++k) {
        csv += io::format_double(lc.sample_time(k)) + "," + io::join_csv(lc.samples[k]) + "\n";
    }
    json j{{"model", r.model.name},
           {"params", params_json(r.model)},
           {"period", lc.period},
           {"closure_residual", lc.closure_residual},
           {"samples", lc.samples.size()},
           {"section_coordinate", lc.section_coordinate + 1}};
    io::write_atomic(with_ext(f.out, ".csv"), csv);
    io::write_atomic(with_ext(f.out, ".json"), dump(j));
    out << dump(j);
    return 0;
}

int cmd_floquet(const Flags& f, std::ostream& out) {
    const config::Resolved r = config::resolve(build_config(f));
    const double kappa = f.kappa.value_or(0.0);
    const auto lc = limit_cycle::find_limit_cycle(r.model, r.node_initial, r.integrator);
    const auto mono = floquet::monodromy(r.model, lc, kappa, r.mask);
    const auto sides = floquet::ajl_determinant(r.model, lc, kappa, r.mask, lc.period);

    json j{{"model", r.model.name},
           {"params", params_json(r.model)},
           {"period", lc.period},
           {"kappa", kappa},
           {"mask", r.mask},
           {"multipliers", complex_list(mono.multipliers)},
           {"det_check", {{"lhs", sides.det_phi}, {"rhs", sides.rhs}}}};
    if (kappa == 0.0) {
        const auto lf = floquet::lf_decomposition(r.model, lc);
        j["lyapunov_floquet"] = {{"periodicity_residual", lf.periodicity_residual},
                                 {"reconstruction_residual", lf.reconstruction_residual}};
    }
    io::write_atomic(with_ext(f.out, ".json"), dump(j));
    out << dump(j);
    return 0;
}

std::string msf_plot_script(const std::string& csv_name) {
    return "set datafile separator ','\n"
           "set xlabel 'effective coupling kappa'\n"
           "set ylabel 'maximum Floquet multiplier'\n"
           "set key off\n"
           "set grid\n"
           "plot '" +
           csv_name + "' using 1:2 every ::1 with linespoints pt 7 ps 0.6, 1 with lines dashtype 2 lc rgb 'gray'\n";
}

int cmd_msf(const Flags& f, std::ostream& out) {
    const config::Resolved r = config::resolve(build_config(f));
    const auto lc = limit_cycle::find_limit_cycle(r.model, r.node_initial, r.integrator);
    const auto curve = msf::msf_sweep(r.model, lc, r.mask, r.kappa_grid);

    std::string csv = "kappa,mu_max";
    for (std::size_t i = 0; i < r.model.dim; ++i) {
        csv += ",mult_" + std::to_string(i + 1) + "_re,mult_" + std::to_string(i + 1) + "_im";
    }
    csv += '\n';
    bool stable = true;
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& p : curve.points) {
        csv += io::format_double(p.kappa) + "," + io::format_double(p.mu_max);
        for (const auto& mu : p.multipliers) {
            csv += "," + io::format_double(mu.real()) + "," + io::format_double(mu.imag());
        }
        csv += '\n';
        if (p.kappa > 0.0) {
            stable = stable && p.mu_max < 1.0;
        }
        lowest = std::min(lowest, p.mu_max);
    }
    json j{{"model", r.model.name},
           {"params", params_json(r.model)},
           {"mask", r.mask},
           {"period", lc.period},
           {"points", curve.points.size()},
           {"min_mu_max", lowest},
           {"stable_for_positive_kappa", stable}};
    const auto csv_path = with_ext(f.out, ".csv");
    io::write_atomic(csv_path, csv);
    io::write_atomic(with_ext(f.out, ".json"), dump(j));
    if (f.plot_script) {
        io::write_atomic(with_ext(f.out, ".gp"), msf_plot_script(csv_path.filename().string()));
    }
    out << dump(j);
    return 0;
}

std::string sync_plot_script(const std::string& csv_name, std::size_t column) {
    return "set datafile separator ','\n"
           "set xlabel 't'\n"
           "set ylabel 'synchronization error'\n"
           "set logscale y\n"
           "set key off\n"
           "plot '" +
           csv_name + "' using 1:" + std::to_string(column) + " every ::1 with lines\n";
}

int cmd_simulate(const Flags& f, std::ostream& out) {
    const config::ExperimentConfig c = build_config(f);
    const config::Resolved r = config::resolve(c);
    const network::CouplingSpec coupling{c.coupling.K, r.mask, c.coupling.activation_time};
    const std::size_t n = r.graph.n;
    const std::size_t m = r.model.dim;

    json j{{"threshold", kSyncThreshold}};
    std::optional<network::NetworkRun> run;
    try {
        run = network::simulate_network(r.model, r.graph, coupling, r.network_initial, c.run.t_end, r.integrator,
                                        c.run.output_grid_points);
    } catch (const Error& e) {
        // Divergence is the expected outcome of negative coupling.
        if (e.code() != ErrorCode::Blowup || !(c.coupling.K < 0.0)) {
            throw;
        }
        j["final_error"] = nullptr;
        j["converged"] = false;
        j["t_converged"] = nullptr;
        j["diverged"] = true;
        j["detail"] = e.what();
    }
    if (run) {
        std::string csv = "t";
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < m; ++k) {
                csv += ",x_" + std::to_string(i + 1) + "_" + std::to_string(k + 1);
            }
        }
        csv += ",sync_error\n";
        for (std::size_t k = 0; k < run->grid.size(); ++k) {
            csv += io::format_double(run->grid[k]) + "," + io::join_csv(run->grid_states[k]) + "," +
                   io::format_double(run->sync.error[k]) + "\n";
        }
        const auto csv_path = with_ext(f.out, ".csv");
        io::write_atomic(csv_path, csv);
        if (f.plot_script) {
            io::write_atomic(with_ext(f.out, ".gp"), sync_plot_script(csv_path.filename().string(), n * m + 2));
        }
        const double final_error = run->sync.error.back();
        const double t_conv = network::time_converged(run->sync, kSyncThreshold);
        j["final_error"] = final_error;
        j["converged"] = final_error < kSyncThreshold;
        j["t_converged"] = t_conv < 0.0 ? json(nullptr) : json(t_conv);
        j["diverged"] = false;
    }
    io::write_atomic(with_ext(f.out, ".json"), dump(j));
    out << dump(j);
    return 0;
}

int cmd_verify(const Flags& f, std::ostream& out) {
    verify::Options opts;
    opts.quick = f.quick;
    opts.inject_sign_flip = f.sign_flip;
    const config::ExperimentConfig c = build_config(f);
    opts.seed = c.seed;
    if (!f.config.empty() || !f.model.empty() || !f.params.empty() || !f.mask.empty()) {
        opts.config = c;
    }
    const verify::Report rep = verify::verify_all(opts);
    const std::string text = rep.to_text();
    io::write_atomic(with_ext(f.out, ".json"), dump(rep.to_json()));
    io::write_atomic(with_ext(f.out, ".txt"), text);
    out << text;
    return rep.all_passed() ? 0 : 1;
}

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "JSON experiment config");
    sub->add_option("--model", f.model, "Model name (vdp, repressilator, linear_rotation)");
    sub->add_option("--param", f.params, "Model parameter override key=value (repeatable)");
    sub->add_option("--mask", f.mask, "Coupled coordinates as comma-separated 0/1 values");
    sub->add_option("--out", f.out, "Output path stem; extensions are appended");
    sub->add_option("--seed", f.seed, "Seed for randomized checks");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Floquet multipliers, master stability functions and coupled-oscillator networks", "floqnet"};
    app.require_subcommand(1);
    Flags f;

    auto* lc = app.add_subcommand("limit-cycle", "Locate the limit cycle and write its samples");
    add_common(lc, f);
    auto* fl = app.add_subcommand("floquet", "Monodromy multipliers and the determinant identity");
    add_common(fl, f);
    fl->add_option("--kappa", f.kappa, "Effective coupling kappa (default 0)");
    auto* ms = app.add_subcommand("msf", "Master stability function over the configured kappa grid");
    add_common(ms, f);
    ms->add_flag("--emit-plot-script", f.plot_script, "Also write a gnuplot script next to the CSV");
    auto* sim = app.add_subcommand("simulate", "Simulate the coupled network");
    add_common(sim, f);
    sim->add_flag("--emit-plot-script", f.plot_script, "Also write a gnuplot script next to the CSV");
    auto* ver = app.add_subcommand("verify", "Run the self-check suite");
    add_common(ver, f);
    ver->add_flag("--quick", f.quick, "Reduced suite");
    ver->add_flag("--inject-sign-flip", f.sign_flip, "Flip the coupling sign in the variational runs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    CLI::App* chosen = app.get_subcommands().front();
    if (f.out.empty()) {
        f.out = chosen->get_name();
    }
    try {
        if (chosen == lc) return cmd_limit_cycle(f, out);
        if (chosen == fl) return cmd_floquet(f, out);
        if (chosen == ms) return cmd_msf(f, out);
        if (chosen == sim) return cmd_simulate(f, out);
        return cmd_verify(f, out);
    } catch (const Error& e) {
        err << "floqnet: " << e.what() << "\n";
        return is_validation_error(e.code()) ? 2 : 1;
    } catch (const std::exception& e) {
        err << "floqnet: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace floqnet::cli
