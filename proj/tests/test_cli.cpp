#include <doctest.h>

#include "fracheat/cli.hpp"
#include "fracheat/errors.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fracheat;
using namespace fracheat::cli;
namespace fs = std::filesystem;

namespace {

struct Invocation {
    int code;
    std::string out;
    std::string err;
};

Invocation invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "fracheat");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("fracheat_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path only_run(const fs::path& out) {
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(out)) dirs.push_back(e.path());
    REQUIRE(dirs.size() == 1);
    return dirs.front();
}

}  // namespace

TEST_CASE("defaults cover the schema and parse with their declared types") {
    const Config c = Config::defaults();
    CHECK(c.values().size() == schema().size());
    for (const auto& k : schema()) CHECK(c.origins().at(k.key) == "default");
    CHECK(c.integer("n") == 512);
    CHECK(c.real("s") == -2.0 / 3.0);
    CHECK_FALSE(c.flag("linear"));
    CHECK(c.reals("alphas") == std::vector<double>{0.5, 0.8});
}

TEST_CASE("precedence is defaults < command defaults < file < flags") {
    Config c = Config::defaults("verify-weak-convergence");
    CHECK(c.real("alpha") == 0.8);
    CHECK(c.origins().at("alpha") == "verify-weak-convergence");
    c.merge_text("alpha = 0.6\nn = 128 # comment\n\n", "file.cfg");
    CHECK(c.real("alpha") == 0.6);
    CHECK(c.origins().at("n") == "file.cfg:2");
    c.set("alpha", "0.7", "flag");
    CHECK(c.real("alpha") == 0.7);
    CHECK(c.integer("n") == 128);
}

TEST_CASE("render round-trips") {
    Config c = Config::defaults("global");
    c.set("lambdas", "1, 0.5", "flag");
    Config d = Config::defaults();
    d.merge_text(c.render(), "rendered");
    CHECK(d.values() == c.values());
}

TEST_CASE("unknown keys and type mismatches name the key") {
    Config c = Config::defaults();
    auto message = [&](const std::string& text) {
        try {
            c.merge_text(text, "f");
        } catch (const UsageError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("nope = 1").find("'nope'") != std::string::npos);
    CHECK(message("n = 1.5").find("'n'") != std::string::npos);
    CHECK(message("alpha = abc").find("'alpha'") != std::string::npos);
    CHECK(message("alpha = inf").find("'alpha'") != std::string::npos);
    CHECK(message("linear = maybe").find("'linear'") != std::string::npos);
    CHECK(message("backend = fft").find("'backend'") != std::string::npos);
    CHECK(message("data = cauchy").find("'data'") != std::string::npos);
    CHECK(message("alphas = 0.5,x").find("'alphas'") != std::string::npos);
    CHECK(message("just text").find("f:1") != std::string::npos);
}

TEST_CASE("mappings validate ranges") {
    Config c = Config::defaults();
    c.set("n", "100", "t");
    CHECK_THROWS_AS(make_grid(c), UsageError);
    c.set("n", "64", "t");
    CHECK(make_grid(c).n() == 64);
    c.set("alpha", "1.5", "t");
    CHECK_THROWS(frac_params(c));
    c = Config::defaults();
    c.set("grid", "log", "t");
    c.set("T", "10", "t");
    const auto sc = solver_config(c);
    CHECK(sc.time.spacing() == solver::Spacing::LogSpaced);
    CHECK(sc.time[1] == doctest::Approx(1e-4));
    CHECK(sc.time.T() == doctest::Approx(10.0));
}

TEST_CASE("fnv1a reference values") {
    CHECK(fnv1a("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("s outside the local window is a usage error unless forced") {
    const auto out = scratch("window");
    auto r = invoke({"solve", "--s", "0.25", "--out", out.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("max{−2/αγ,−2} < s < 0") != std::string::npos);
    CHECK(fs::is_empty(out));
    r = invoke({"solve", "--s", "-0.9", "--force", "--n", "64", "--M", "8", "--out", out.string()});
    CHECK(r.code == 0);
}

TEST_CASE("bad flags exit with code 2") {
    CHECK(invoke({"solve", "--n", "abc"}).code == 2);
    CHECK(invoke({"solve", "--set", "zzz=1"}).code == 2);
    CHECK(invoke({"frobnicate"}).code == 2);
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("solve writes a manifest, tables and states") {
    const auto out = scratch("solve");
    const fs::path cfg = out / "run.cfg";
    std::ofstream(cfg) << "n = 64\nM = 8\nT = 0.1\n";
    const auto r = invoke({"solve", "--config", cfg.string(), "--amplitude", "0.2", "--out", (out / "runs").string()});
    REQUIRE(r.code == 0);
    const fs::path dir = only_run(out / "runs");
    std::ifstream is(dir / "manifest.json");
    const auto m = nlohmann::json::parse(is);
    CHECK(m["command"] == "solve");
    CHECK(m["verdict"] == "converged");
    CHECK(m["config"]["n"] == "64");
    CHECK(m["config_origins"]["amplitude"] == "flag");
    CHECK(m["config_origins"]["M"] == cfg.string() + ":2");
    CHECK(m["inputs"]["config_file_fnv1a"].get<std::string>().size() == 16);
    CHECK(m["inputs"].contains("data_fnv1a"));
    for (const auto& f : m["outputs"]) CHECK(fs::exists(dir / f.get<std::string>()));
    const auto table = read_csv(dir / "trajectory.csv");
    CHECK(table.rows().size() == 8);
    CHECK(table.number(7, "t") == doctest::Approx(0.1));
    const auto last = spectral::read_field((dir / "states/u_0008.bin").string());
    CHECK(last.grid().n() == 64);
    CHECK(last.max_abs() == doctest::Approx(table.number(7, "max_abs")));
}

TEST_CASE("identical configurations map to the same fingerprint") {
    const auto out = scratch("fingerprint");
    REQUIRE(invoke({"specfun", "--points", "5", "--out", out.string()}).code == 0);
    REQUIRE(invoke({"specfun", "--points", "5", "--out", out.string()}).code == 0);
    std::vector<std::string> tails;
    for (const auto& e : fs::directory_iterator(out)) {
        const auto name = e.path().filename().string();
        tails.push_back(name.substr(name.find('-') + 1, 8));
    }
    REQUIRE(tails.size() == 2);
    CHECK(tails[0] == tails[1]);
}

TEST_CASE("plot writes one SVG per CSV") {
    const auto out = scratch("plot");
    REQUIRE(invoke({"specfun", "--points", "7", "--out", out.string()}).code == 0);
    const fs::path dir = only_run(out);
    const auto r = invoke({"plot", dir.string()});
    CHECK(r.code == 0);
    std::ifstream is(dir / "specfun.svg");
    std::stringstream ss;
    ss << is.rdbuf();
    CHECK(ss.str().rfind("<svg", 0) == 0);
    CHECK(ss.str().find("<polyline") != std::string::npos);
    CHECK(invoke({"plot", (out / "missing").string()}).code == 2);
}

TEST_CASE("svg of a table without numeric series") {
    experiments::Table t({"name", "kind"});
    t.add_row({"a", "b"});
    CHECK(render_svg(t, "x").find("no numeric series") != std::string::npos);
}

TEST_CASE("study verdicts map to exit codes") {
    const auto out = scratch("verify");
    CHECK(invoke({"doubly-critical", "--gamma", "2", "--out", out.string()}).code == 2);
    auto r = invoke({"global", "--p_query", "10", "--n", "128", "--M", "16", "--out", out.string()});
    CHECK(r.code == 1);
    CHECK(r.out.find("global: FAIL") != std::string::npos);
    r = invoke({"verify-scaling", "--n", "64", "--M", "8", "--out", out.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("verify-scaling: PASS") != std::string::npos);
}
