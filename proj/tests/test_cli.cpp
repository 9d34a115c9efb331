#include "doctest.h"

#include "oracles.hpp"

#include "floqnet/cli.hpp"
#include "floqnet/config.hpp"
#include "floqnet/error.hpp"
#include "floqnet/io.hpp"
#include "floqnet/models.hpp"

#include "json.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

using floqnet::Error;
using floqnet::ErrorCode;
using namespace floqnet;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kConfigDir = FLOQNET_CONFIG_DIR;

// Per-process scratch directory, removed when the test binary exits.
struct Scratch {
    fs::path dir = fs::temp_directory_path() / ("floqnet_cli_test_" + std::to_string(::getpid()));
    Scratch() { fs::create_directories(dir); }
    ~Scratch() {
        std::error_code ignored;
        fs::remove_all(dir, ignored);
    }
};

fs::path scratch() {
    static const Scratch s;
    return s.dir;
}

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "floqnet");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::NonConvergence;
}

std::string message_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

fs::path write_config(const std::string& name, const json& j) {
    const fs::path p = scratch() / name;
    std::ofstream(p) << j.dump();
    return p;
}

}  // namespace

TEST_CASE("shipped configs round-trip") {
    const std::vector<std::string> names{"fig1_msf", "fig2_full", "fig2_partial", "fig3_full", "fig3_partial"};
    for (const auto& name : names) {
        CAPTURE(name);
        const auto first = config::load((kConfigDir / (name + ".json")).string());
        const auto again = config::from_json(config::to_json(first));
        CHECK(again == first);
        CHECK(config::to_json(again) == config::to_json(first));
        CHECK_NOTHROW((void)config::resolve(first));
    }
}

TEST_CASE("shipped configs hold the reference initial states") {
    const auto f2 = config::load((kConfigDir / "fig2_partial.json").string());
    CHECK(f2.model.name == "vdp");
    CHECK(f2.model.params.at("mu") == 1.0);
    CHECK(f2.initial == std::vector<double>{0, 1, 2, 3, 4, 5});
    CHECK(f2.coupling.K == 1.0);
    CHECK(f2.coupling.activation_time == 20.0);
    CHECK(f2.coupling.mask == std::vector<double>{0, 1});

    const auto f3 = config::load((kConfigDir / "fig3_full.json").string());
    CHECK(f3.model.params == models::ParamMap{{"alpha", 1000.0}, {"alpha0", 1.0}, {"beta", 5.0}, {"n", 2.0}});
    CHECK(f3.initial == std::vector<double>{0, 1, 0, 3, 0, 5, 0, 7, 0, 9, 0, 11, 0, 13, 15, 17, 4, 6});
    CHECK(f3.coupling.mask == std::vector<double>(6, 1.0));
}

TEST_CASE("unknown keys and wrong types are rejected by name") {
    CHECK(message_of([] { (void)config::from_json(json{{"modle", json::object()}}); }).find("modle") !=
          std::string::npos);
    CHECK(message_of([] { (void)config::from_json(json{{"coupling", {{"gain", 1.0}}}}); }).find("coupling.gain") !=
          std::string::npos);
    CHECK(message_of([] { (void)config::from_json(json{{"run", {{"t_end", "long"}}}}); }).find("run.t_end") !=
          std::string::npos);
    CHECK(message_of([] { (void)config::from_json(json{{"graph", {{"n", -3}}}}); }).find("graph.n") !=
          std::string::npos);
    CHECK(code_of([] { (void)config::from_json(json::array()); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { (void)config::load("/nonexistent/config.json"); }) == ErrorCode::ConfigError);
}

TEST_CASE("validation names the offending key") {
    auto bad = [](auto&& edit) {
        config::ExperimentConfig c;
        edit(c);
        return message_of([&] { (void)config::resolve(c); });
    };
    CHECK(bad([](auto& c) { c.model.name = "nosuch"; }).find("model.name") != std::string::npos);
    CHECK(bad([](auto& c) { c.model.params["gamma"] = 1.0; }).find("model.params") != std::string::npos);
    CHECK(bad([](auto& c) { c.graph.kind = "star"; }).find("graph.kind") != std::string::npos);
    CHECK(bad([](auto& c) { c.coupling.mask = {1, 1, 1}; }).find("coupling.mask") != std::string::npos);
    CHECK(bad([](auto& c) { c.coupling.mask = {0.5, 1}; }).find("coupling.mask") != std::string::npos);
    CHECK(bad([](auto& c) { c.run.t_end = 10.0; }).find("run.t_end") != std::string::npos);
    CHECK(bad([](auto& c) { c.initial = {1, 2, 3}; }).find("initial") != std::string::npos);
    CHECK(bad([](auto& c) { c.msf.spacing = "cubic"; }).find("msf.spacing") != std::string::npos);
    CHECK(bad([](auto& c) { c.integrator.rel_tol = 0.0; }).find("integrator.rel_tol") != std::string::npos);
    CHECK(bad([](auto& c) {
              c.graph.kind = "adjacency";
              c.graph.n = 2;
              c.graph.adjacency = {{0, 1}, {2, 0}};
          }).find("graph") != std::string::npos);
}

TEST_CASE("resolve builds grids and initial states") {
    config::ExperimentConfig c;
    const auto r = config::resolve(c);
    CHECK(r.kappa_grid.size() == 51);
    CHECK(r.kappa_grid.front() == 0.0);
    CHECK(r.network_initial == std::vector<double>{0, 1, 2, 3, 4, 5});
    CHECK(r.mask == std::vector<double>{1, 1});

    c.model.name = "repressilator";
    c.graph = {"ring", 4, {}};
    const auto rr = config::resolve(c);
    REQUIRE(rr.network_initial.size() == 24);
    CHECK(std::vector<double>(rr.network_initial.begin() + 12, rr.network_initial.begin() + 18) ==
          std::vector<double>{0, 13, 15, 17, 4, 6});
    CHECK(std::vector<double>(rr.network_initial.begin() + 18, rr.network_initial.end()) ==
          std::vector<double>{0, 19, 0, 21, 0, 23});
}

TEST_CASE("doubles are written with 17 significant digits and round-trip") {
    CHECK(io::format_double(0.1) == "0.10000000000000001");
    CHECK(io::format_double(0.0) == "0");
    CHECK(io::format_double(-2.5e-300) == "-2.5e-300");
    CHECK(io::format_double(1.0 / 3.0) == "0.33333333333333331");
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-300, 300);
    for (int i = 0; i < 1000; ++i) {
        const double v = std::ldexp(mant(rng), expo(rng));
        const std::string s = io::format_double(v);
        double back = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        CHECK(back == v);
    }
}

TEST_CASE("atomic writes leave no temporary files") {
    const fs::path dir = scratch() / "atomic";
    fs::create_directories(dir);
    io::write_atomic(dir / "a.txt", "first");
    io::write_atomic(dir / "a.txt", "second");
    CHECK(slurp(dir / "a.txt") == "second");
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) {
        ++files;
    }
    CHECK(files == 1);
    CHECK(code_of([&] { io::write_atomic(dir / "missing" / "b.txt", "x"); }) == ErrorCode::ConfigError);
}

TEST_CASE("limit-cycle subcommand reports the Van der Pol period") {
    const fs::path stem = scratch() / "lc";
    const Result r = run({"limit-cycle", "--model", "vdp", "--param", "mu=1", "--out", stem.string()});
    REQUIRE(r.code == 0);
    const json j = json::parse(slurp(stem.string() + ".json"));
    CHECK(json::parse(r.out) == j);

    const auto m = models::vdp_model(1.0);
    const double ref = oracle::rk4_period(m.field, {2.0, 0.0}, 0, 0.0, 60.0, 120.0, 1e-3);
    CHECK(std::abs(j["period"].get<double>() - ref) < 1e-3 * ref);

    const std::string csv = slurp(stem.string() + ".csv");
    CHECK(csv.rfind("t,x1,x2\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 513);
}

TEST_CASE("floquet subcommand output") {
    const fs::path stem = scratch() / "fl";
    const Result r = run({"floquet", "--model", "vdp", "--kappa", "1", "--mask", "0,1", "--out", stem.string()});
    REQUIRE(r.code == 0);
    const json j = json::parse(slurp(stem.string() + ".json"));
    CHECK(j["kappa"] == 1.0);
    CHECK(j["multipliers"].size() == 2);
    const double lhs = j["det_check"]["lhs"], rhs = j["det_check"]["rhs"];
    CHECK(std::abs(lhs - rhs) < 1e-6 * rhs);
    for (const auto& mu : j["multipliers"]) {
        CHECK(mu["abs"].get<double>() < 1.0);
    }
}

TEST_CASE("msf and simulate outputs are byte-identical across runs") {
    const std::string cfg = (kConfigDir / "fig1_msf.json").string();
    const fs::path a = scratch() / "msf_a", b = scratch() / "msf_b";
    REQUIRE(run({"msf", "--config", cfg, "--out", a.string(), "--emit-plot-script"}).code == 0);
    REQUIRE(run({"msf", "--config", cfg, "--out", b.string(), "--emit-plot-script"}).code == 0);
    CHECK(slurp(a.string() + ".csv") == slurp(b.string() + ".csv"));
    CHECK(slurp(a.string() + ".json") == slurp(b.string() + ".json"));
    CHECK(fs::exists(a.string() + ".gp"));
    const std::string csv = slurp(a.string() + ".csv");
    CHECK(csv.rfind("kappa,mu_max,mult_1_re,mult_1_im,mult_2_re,mult_2_im\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 51);

    const std::string sim = (kConfigDir / "fig2_full.json").string();
    const fs::path c = scratch() / "sim_a", d = scratch() / "sim_b";
    REQUIRE(run({"simulate", "--config", sim, "--out", c.string()}).code == 0);
    REQUIRE(run({"simulate", "--config", sim, "--out", d.string()}).code == 0);
    CHECK(slurp(c.string() + ".csv") == slurp(d.string() + ".csv"));
    CHECK(slurp(c.string() + ".json") == slurp(d.string() + ".json"));
}

TEST_CASE("simulate subcommand on the shipped network configs") {
    for (const char* name : {"fig2_full", "fig2_partial"}) {
        CAPTURE(name);
        const fs::path stem = scratch() / name;
        const Result r =
            run({"simulate", "--config", (kConfigDir / (std::string(name) + ".json")).string(), "--out", stem.string()});
        REQUIRE(r.code == 0);
        const json j = json::parse(slurp(stem.string() + ".json"));
        CHECK(j["converged"] == true);
        CHECK(j["threshold"] == 1e-3);
        CHECK(j["final_error"].get<double>() < 1e-3);
        CHECK(j["t_converged"].get<double>() > 20.0);
        const std::string csv = slurp(stem.string() + ".csv");
        CHECK(csv.rfind("t,x_1_1,x_1_2,x_2_1,x_2_2,x_3_1,x_3_2,sync_error\n", 0) == 0);
    }
}

TEST_CASE("negative coupling reports divergence without failing") {
    json j = json::parse(slurp(kConfigDir / "fig2_full.json"));
    j["coupling"]["K"] = -0.5;
    const fs::path cfg = write_config("negative.json", j);
    const fs::path stem = scratch() / "negative";
    const Result r = run({"simulate", "--config", cfg.string(), "--out", stem.string()});
    REQUIRE(r.code == 0);
    const json s = json::parse(slurp(stem.string() + ".json"));
    CHECK(s["diverged"] == true);
    CHECK(s["converged"] == false);
}

TEST_CASE("exit codes") {
    const fs::path stem = scratch() / "codes";
    Result r = run({"verify", "--model", "nosuch", "--out", stem.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("model.name") != std::string::npos);

    CHECK(run({"limit-cycle", "--config", "/nonexistent.json", "--out", stem.string()}).code == 2);
    CHECK(run({"limit-cycle", "--no-such-flag"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"limit-cycle", "--param", "mu", "--out", stem.string()}).code == 2);
    CHECK(run({"limit-cycle", "--help"}).code == 0);

    // An equilibrium start is a numerical failure, not bad input.
    json j{{"model", {{"name", "vdp"}}}, {"initial", {0.0, 0.0}}};
    r = run({"limit-cycle", "--config", write_config("rest.json", j).string(), "--out", stem.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("FixedPointConvergence") != std::string::npos);
}

TEST_CASE("quick verify passes and notices a flipped coupling sign") {
    const fs::path good = scratch() / "verify_good";
    const Result ok = run({"verify", "--quick", "--out", good.string()});
    CHECK(ok.code == 0);
    const json report = json::parse(slurp(good.string() + ".json"));
    CHECK(report["passed"] == true);
    CHECK(slurp(good.string() + ".txt") == ok.out);

    const fs::path bad = scratch() / "verify_bad";
    const Result flipped = run({"verify", "--quick", "--inject-sign-flip", "--out", bad.string()});
    CHECK(flipped.code == 1);
    const json broken = json::parse(slurp(bad.string() + ".json"));
    bool shift_failed = false;
    for (const auto& c : broken["checks"]) {
        if (c["name"].get<std::string>().rfind("shift_law", 0) == 0) {
            shift_failed = c["passed"] == false;
        } else {
            CHECK(c["passed"] == true);
        }
    }
    CHECK(shift_failed);
}
