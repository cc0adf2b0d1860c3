#include "fracheat/cli.hpp"

#include "fracheat/errors.hpp"
#include "fracheat/parallel.hpp"
#include "fracheat/specfun.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#ifndef FRACHEAT_VERSION
#define FRACHEAT_VERSION "0.0.0"
#endif

namespace fracheat::cli {

namespace fs = std::filesystem;
using experiments::Table;
using nlohmann::json;
using spectral::Field;

namespace {

const KeySpec* find_key(std::string_view key) {
    for (const auto& k : schema()) {
        if (k.key == key) return &k;
    }
    return nullptr;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

bool parse_bool(std::string_view v, bool& out) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") {
        out = true;
        return true;
    }
    if (v == "false" || v == "0" || v == "no" || v == "off") {
        out = false;
        return true;
    }
    return false;
}

bool parse_real(const std::string& v, double& out) {
    if (v.empty()) return false;
    char* end = nullptr;
    out = std::strtod(v.c_str(), &end);
    return *end == '\0' && std::isfinite(out);
}

bool parse_int(const std::string& v, long& out) {
    if (v.empty()) return false;
    char* end = nullptr;
    out = std::strtol(v.c_str(), &end, 10);
    return *end == '\0';
}

std::string hex(std::uint64_t x) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << x;
    return os.str();
}

/// Checks that enumerated text keys name a known choice.
void check_choice(std::string_view key, const std::string& v) {
    auto fail = [&](const char* choices) {
        throw UsageError("config key '" + std::string(key) + "': '" + v + "' is not one of " + choices);
    };
    if (key == "backend") {
        try {
            operators::parse_backend(v);
        } catch (const UsageError&) {
            fail("ml_multiplier, subordination");
        }
    } else if (key == "metric" && v != "local" && v != "global") {
        fail("local, global");
    } else if (key == "grid" && v != "graded" && v != "log") {
        fail("graded, log");
    } else if (key == "operator" && v != "heat" && v != "p_alpha" && v != "s_alpha") {
        fail("heat, p_alpha, s_alpha");
    } else if (key == "data") {
        try {
            experiments::parse_data_kind(v);
        } catch (const UsageError&) {
            fail("gaussian, l1_bump, dirac, dirac_derivative, power_law, random_band");
        }
    } else if (key == "alphas" || key == "lambdas" || key == "psi_widths") {
        std::stringstream ss(v);
        std::string item;
        double x = 0.0;
        bool any = false;
        while (std::getline(ss, item, ',')) {
            if (!parse_real(trim(item), x)) fail("a comma-separated list of numbers");
            any = true;
        }
        if (!any) fail("a comma-separated list of numbers");
    }
}

// ---------------------------------------------------------------- run plumbing

struct Run {
    std::string command;
    Config cfg;
    fs::path dir;
    json manifest;
    std::vector<std::string> warnings;
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point started;

    fs::path file(const std::string& name) {
        outputs.push_back(name);
        const fs::path p = dir / name;
        fs::create_directories(p.parent_path());
        return p;
    }

    void write_table(const std::string& name, const Table& t) {
        std::ofstream os(file(name));
        t.write_csv(os);
        if (cfg.flag("plot")) {
            std::ofstream svg(file(fs::path(name).replace_extension(".svg").string()));
            svg << render_svg(t, command + ": " + name);
        }
    }
};

std::string utc_stamp(const char* format) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, format, &tm);
    return buf;
}

Run open_run(const std::string& command, Config cfg, const std::string& config_path) {
    Run run{command, std::move(cfg), {}, json::object(), {}, {}, std::chrono::steady_clock::now()};
    const std::string fingerprint = hex(fnv1a(command + "\n" + run.cfg.render()));
    const fs::path base = fs::path(run.cfg.text("out")) / (utc_stamp("%Y%m%dT%H%M%SZ") + "-" + fingerprint.substr(0, 8));
    run.dir = base;
    for (int k = 1; fs::exists(run.dir); ++k) run.dir = base.string() + "-" + std::to_string(k);
    fs::create_directories(run.dir);

    run.manifest["tool"] = "fracheat";
    run.manifest["version"] = FRACHEAT_VERSION;
    run.manifest["command"] = command;
    run.manifest["started_utc"] = utc_stamp("%Y-%m-%dT%H:%M:%SZ");
    run.manifest["config"] = run.cfg.values();
    run.manifest["config_origins"] = run.cfg.origins();
    run.manifest["config_text"] = run.cfg.render();
    json inputs = json::object();
    inputs["config_fnv1a"] = fingerprint;
    if (!config_path.empty()) {
        std::ifstream is(config_path, std::ios::binary);
        std::stringstream ss;
        ss << is.rdbuf();
        inputs["config_file"] = config_path;
        inputs["config_file_fnv1a"] = hex(fnv1a(ss.str()));
    }
    run.manifest["inputs"] = inputs;
    run.manifest["threads"] = worker_count();
    return run;
}

void close_run(Run& run, std::ostream& out) {
    run.manifest["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - run.started).count();
    run.manifest["warnings"] = run.warnings;
    run.outputs.push_back("manifest.json");
    run.manifest["outputs"] = run.outputs;
    std::ofstream os(run.dir / "manifest.json");
    os << run.manifest.dump(2) << '\n';
    out << "run directory: " << run.dir.string() << '\n';
    for (const auto& w : run.warnings) out << "warning: " << w << '\n';
}

std::string fingerprint(const experiments::Datum& d) {
    const Field f = experiments::as_field(d);
    const auto& v = f.values();
    return hex(fnv1a(std::string_view(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double))));
}

void note_boundary(Run& run, const Field& f, const std::string& what) {
    const double frac = spectral::boundary_mass_fraction(f);
    if (frac > 1e-3) {
        std::ostringstream os;
        os << what << ": boundary mass fraction " << frac << " exceeds 1e-3 (torus wrap-around may matter)";
        run.warnings.push_back(os.str());
    }
}

void record_report(Run& run, const experiments::StudyReport& rep) {
    run.manifest["study"] = rep.name;
    run.manifest["passed"] = rep.passed;
    run.manifest["metrics"] = rep.metrics;
    for (const auto& w : rep.warnings) run.warnings.push_back(w);
    run.write_table(rep.name + ".csv", rep.table);
}

/// Raised before the run directory exists so that rejected parameters leave no trace.
void check_admissible(const Config& cfg) {
    if (cfg.flag("force")) return;
    const auto rep = experiments::admissible_params(frac_params(cfg), {cfg.real("s"), cfg.real("p"), cfg.real("q")});
    const bool global = cfg.text("metric") == "global";
    const auto& reasons = global ? rep.global_reasons : rep.local_reasons;
    if (reasons.empty()) return;
    std::string msg = std::string("parameters violate the ") + (global ? "global" : "local") +
                      " existence hypotheses (pass --force to run anyway): ";
    for (std::size_t i = 0; i < reasons.size(); ++i) msg += (i ? "; " : "") + reasons[i];
    if (!global) msg += "; admissible s for these (α, γ, p, q): " + rep.s_window.str();
    throw UsageError(msg);
}

// ---------------------------------------------------------------- commands

int cmd_specfun(Run& run) {
    const double alpha = run.cfg.real("alpha");
    const long points = run.cfg.integer("points");
    if (points < 2) throw UsageError("config key 'points': need at least 2");
    const auto xs = experiments::log_times(1e-3, run.cfg.real("xmax"), static_cast<std::size_t>(points));
    Table t({"x", "wright_phi", "ml_alpha_1", "ml_alpha_alpha"});
    const specfun::MittagLeffler e1(alpha, 1.0), ea(alpha, alpha);
    for (double x : xs) {
        t.add_row({experiments::fmt(x), experiments::fmt(alpha < 1.0 ? specfun::wright_phi(alpha, x) : 0.0),
                   experiments::fmt(e1(-x)), experiments::fmt(ea(-x))});
    }
    json moments = json::object();
    for (double r : {0.0, 0.5, 1.0, 2.0}) moments[experiments::fmt(r)] = specfun::wright_moment(alpha, r);
    run.manifest["wright_moments"] = moments;
    if (alpha == 1.0) run.warnings.push_back("alpha = 1: the Wright density is a point mass; wright_phi column is 0");
    run.write_table("specfun.csv", t);
    return 0;
}

int cmd_apply(Run& run) {
    const auto grid = make_grid(run.cfg);
    const auto datum = experiments::make_data(data_spec(run.cfg), grid);
    run.manifest["inputs"]["data_fnv1a"] = fingerprint(datum);
    const Field mu = experiments::as_field(datum);
    const auto fp = frac_params(run.cfg);
    const double t = run.cfg.real("t");
    operators::OperatorBackend backend{operators::parse_backend(run.cfg.text("backend")),
                                       static_cast<std::size_t>(run.cfg.integer("quad_nodes"))};
    const std::string& op = run.cfg.text("operator");
    const Field u = op == "heat"      ? spectral::heat_semigroup(t, mu)
                    : op == "p_alpha" ? operators::p_alpha(t, mu, fp, backend)
                                      : operators::s_alpha(t, mu, fp, backend);
    spectral::write_field(run.file("field.bin").string(), u);
    {
        std::ofstream os(run.file("field.csv"));
        spectral::write_field_csv(os, u);
    }
    note_boundary(run, u, op);
    run.manifest["metrics"] = json{{"max_abs", u.max_abs()}, {"integral", u.integral()}};
    return 0;
}

int cmd_norms(Run& run) {
    const auto grid = make_grid(run.cfg);
    const auto datum = experiments::make_data(data_spec(run.cfg), grid);
    run.manifest["inputs"]["data_fnv1a"] = fingerprint(datum);
    norms::Sampling sampling{static_cast<std::size_t>(run.cfg.integer("stride")), {}};
    auto space = space_params(run.cfg);
    const auto bank = spectral::filter_bank(grid, false);
    for (const auto& w : bank.warnings()) run.warnings.push_back(w);
    const int j0 = static_cast<int>(run.cfg.integer("j0"));

    Table t({"quantity", "value"});
    auto add = [&](const std::string& name, double v) { t.add_row({name, experiments::fmt(v)}); };
    auto absorb = [&](const std::vector<std::string>& ws) {
        for (const auto& w : ws) run.warnings.push_back(w);
    };
    if (const auto* mu = std::get_if<norms::DiscreteMeasure>(&datum)) {
        const auto m = norms::measure_morrey_norm(*mu, space.p, false, sampling);
        absorb(m.warnings);
        add("measure_morrey", m.value);
        const auto b = norms::besov_morrey_norm(*mu, space, bank, sampling);
        absorb(b.warnings);
        add("besov_morrey", b.value);
        add("highfreq_surrogate", norms::highfreq_limsup(*mu, space.s, space.p, space.q, j0, bank, sampling));
        add("total_variation", mu->total_variation());
    } else {
        const auto& f = std::get<Field>(datum);
        const auto m = norms::morrey_norm(f, {space.p, space.q, false}, sampling);
        absorb(m.warnings);
        add("morrey", m.value);
        add("morrey_radius", m.radius);
        const auto b = norms::besov_morrey_norm(f, space, bank, sampling);
        absorb(b.warnings);
        add("besov_morrey", b.value);
        add("highfreq_surrogate", norms::highfreq_limsup(f, space.s, space.p, space.q, j0, bank, sampling));
        add("l1", f.lp_norm(1.0));
        note_boundary(run, f, "datum");
    }
    run.write_table("norms.csv", t);
    return 0;
}

int cmd_solve(Run& run) {
    const auto sc = solver_config(run.cfg);
    const auto grid = make_grid(run.cfg);
    const auto datum = experiments::make_data(data_spec(run.cfg), grid);
    run.manifest["inputs"]["data_fnv1a"] = fingerprint(datum);
    const auto sol = std::visit([&](const auto& mu) { return solver::solve(mu, sc); }, datum);
    const auto& d = sol.diagnostics;
    const auto& traj = sol.trajectory;

    Table nodes({"m", "t", "weighted_norm", "max_abs"});
    for (std::size_t m = 1; m <= traj.time.M(); ++m) {
        nodes.add_row({experiments::fmt(static_cast<double>(m)), experiments::fmt(traj.time[m]),
                       experiments::fmt(traj.weighted_norms[m - 1]), experiments::fmt(traj.at(m).max_abs())});
        std::ostringstream name;
        name << "states/u_" << std::setw(4) << std::setfill('0') << m << ".bin";
        spectral::write_field(run.file(name.str()).string(), traj.at(m));
    }
    run.write_table("trajectory.csv", nodes);
    Table iters({"iteration", "distance", "ratio", "iterate_norm"});
    for (std::size_t i = 0; i < d.distances.size(); ++i) {
        iters.add_row({experiments::fmt(static_cast<double>(i + 1)), experiments::fmt(d.distances[i]),
                       experiments::fmt(i < d.ratios.size() + 1 && i > 0 ? d.ratios[i - 1] : 0.0),
                       experiments::fmt(i < d.iterate_norms.size() ? d.iterate_norms[i] : 0.0)});
    }
    run.write_table("iterations.csv", iters);
    for (const auto& w : d.warnings) run.warnings.push_back(w);
    if (!traj.states.empty()) note_boundary(run, traj.states.back(), "final state");
    run.manifest["verdict"] = solver::verdict_name(d.verdict);
    run.manifest["metrics"] = json{{"iterations", d.iterations},   {"linear_norm", d.linear_norm},
                               {"sup_norm", d.sup_norm},       {"halvings", d.halvings},
                               {"horizon", d.horizon},         {"beta", d.beta}};
    return 0;
}

int finish_study(Run& run, const experiments::StudyReport& rep) {
    record_report(run, rep);
    return rep.passed ? 0 : 1;
}

int cmd_verify_smoothing(Run& run) {
    experiments::SmoothingConfig c;
    c.n = static_cast<std::size_t>(run.cfg.integer("n"));
    c.half_width = run.cfg.real("L");
    c.alphas = run.cfg.reals("alphas");
    c.sigma = run.cfg.real("sigma");
    c.space = {0.0, run.cfg.real("p"), run.cfg.real("q"), 1.0, true};
    if (run.cfg.integer("dim") != 1) throw UsageError("verify-smoothing: only dim = 1 is supported");
    return finish_study(run, experiments::study_smoothing(c));
}

int cmd_verify_scaling(Run& run) {
    experiments::ScalingConfig c;
    c.solver = solver_config(run.cfg);
    c.n = static_cast<std::size_t>(run.cfg.integer("n"));
    c.half_width = run.cfg.real("L");
    c.data = data_spec(run.cfg);
    c.lambdas = run.cfg.reals("lambdas");
    return finish_study(run, experiments::study_scaling(c));
}

int cmd_verify_weak(Run& run) {
    experiments::WeakConvergenceConfig c;
    const auto sc = solver_config(run.cfg);
    c.fp = sc.fp;
    c.space = sc.space;
    c.backend = sc.backend;
    c.horizon = sc.time.T();
    c.n = static_cast<std::size_t>(run.cfg.integer("n"));
    c.half_width = run.cfg.real("L");
    c.smooth_amplitude = run.cfg.real("amplitude");
    c.psi_widths = run.cfg.reals("psi_widths");
    return finish_study(run, experiments::study_weak_convergence(c));
}

int cmd_verify_continuity(Run& run) {
    experiments::ContinuityConfig c;
    c.solver = solver_config(run.cfg);
    c.n = static_cast<std::size_t>(run.cfg.integer("n"));
    c.half_width = run.cfg.real("L");
    c.data = data_spec(run.cfg);
    return finish_study(run, experiments::study_continuity(c));
}

int cmd_doubly_critical(Run& run) {
    experiments::DoublyCriticalConfig c;
    c.solver = solver_config(run.cfg);
    c.n = static_cast<std::size_t>(run.cfg.integer("n"));
    c.half_width = run.cfg.real("L");
    c.data = data_spec(run.cfg);
    c.lambdas = run.cfg.reals("lambdas");
    c.j0 = static_cast<int>(run.cfg.integer("j0"));
    c.delta = run.cfg.real("delta");
    c.large_amplitude = run.cfg.real("large_amplitude");
    return finish_study(run, experiments::study_doubly_critical(c));
}

int cmd_global(Run& run) {
    experiments::GlobalConfig c;
    c.fp = frac_params(run.cfg);
    c.p = run.cfg.real("p");
    c.q = run.cfg.real("q");
    c.p_query = run.cfg.real("p_query");
    c.n = static_cast<std::size_t>(run.cfg.integer("n"));
    c.half_width = run.cfg.real("L");
    c.horizon = run.cfg.real("T");
    c.M = static_cast<std::size_t>(run.cfg.integer("M"));
    c.t_first = run.cfg.real("t_first");
    c.data = data_spec(run.cfg);
    c.delta = run.cfg.real("delta");
    c.cauchy_tol = run.cfg.real("tol");
    return finish_study(run, experiments::study_global(c));
}

int cmd_plot(const fs::path& dir, std::ostream& out) {
    if (!fs::is_directory(dir)) throw UsageError("plot: '" + dir.string() + "' is not a directory");
    std::vector<fs::path> csvs;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".csv") csvs.push_back(entry.path());
    }
    std::sort(csvs.begin(), csvs.end());
    for (const auto& p : csvs) {
        const auto table = read_csv(p);
        fs::path svg = p;
        svg.replace_extension(".svg");
        std::ofstream os(svg);
        os << render_svg(table, p.filename().string());
        out << "wrote " << svg.string() << '\n';
    }
    return 0;
}

struct Command {
    const char* name;
    const char* help;
    int (*fn)(Run&);
};

const std::vector<Command>& commands() {
    static const std::vector<Command> list{
        {"specfun", "tabulate Φ_α, E_α and E_{α,α} on the negative axis", cmd_specfun},
        {"apply", "apply heat, P_α(t) or S_α(t) to a datum", cmd_apply},
        {"norms", "Morrey, Besov–Morrey and high-frequency norms of a datum", cmd_norms},
        {"solve", "Picard iteration for the mild solution", cmd_solve},
        {"verify-smoothing", "smoothing slopes of heat, P_α and S_α", cmd_verify_smoothing},
        {"verify-scaling", "scale invariance of the solution map", cmd_verify_scaling},
        {"verify-weak-convergence", "pairings ⟨u(t), ψ⟩ as t → 0", cmd_verify_weak},
        {"verify-continuity", "‖u(t+h) − u(t)‖ as h → 0", cmd_verify_continuity},
        {"doubly-critical", "high-frequency surrogate and solves along μ_λ", cmd_doubly_critical},
        {"global", "global small-data run on a log-spaced grid", cmd_global},
    };
    return list;
}

}  // namespace

const std::vector<KeySpec>& schema() {
    static const std::vector<KeySpec> keys{
        {"dim", ValueType::Int, "1", "space dimension N (1 or 2)"},
        {"n", ValueType::Int, "512", "grid points per axis"},
        {"L", ValueType::Real, "32", "half width of the periodic box [−L, L)^N"},
        {"alpha", ValueType::Real, "0.5", "order α ∈ ]0, 1]"},
        {"gamma", ValueType::Real, "3", "nonlinearity exponent γ > 1"},
        {"s", ValueType::Real, "-0.6666666666666666", "smoothness index s"},
        {"p", ValueType::Real, "3", "Morrey exponent p"},
        {"q", ValueType::Real, "3", "Morrey exponent q (q <= p)"},
        {"T", ValueType::Real, "0.5", "time horizon"},
        {"M", ValueType::Int, "64", "number of time intervals"},
        {"rho", ValueType::Real, "2", "grading exponent of the graded grid"},
        {"grid", ValueType::Text, "graded", "time grid: graded or log"},
        {"t_first", ValueType::Real, "0.0001", "first node of the log grid"},
        {"backend", ValueType::Text, "ml_multiplier", "operator backend: ml_multiplier or subordination"},
        {"quad_nodes", ValueType::Int, "16", "Gauss–Legendre nodes per panel of the subordination rule"},
        {"max_iters", ValueType::Int, "30", "Picard iteration cap"},
        {"tol", ValueType::Real, "1e-08", "Cauchy tolerance on successive iterates"},
        {"cap", ValueType::Real, "1000000", "divergence cap on the iterate norm"},
        {"max_halvings", ValueType::Int, "8", "horizon halvings after a diverged attempt"},
        {"metric", ValueType::Text, "local", "iterate metric: local (X_T) or global (β-weighted)"},
        {"linear", ValueType::Bool, "false", "drop the nonlinearity"},
        {"stride", ValueType::Int, "1", "Morrey ball centre stride"},
        {"data", ValueType::Text, "gaussian", "datum kind"},
        {"amplitude", ValueType::Real, "0.5", "datum amplitude c"},
        {"scale", ValueType::Real, "1", "datum scale λ"},
        {"seed", ValueType::Int, "0", "random_band seed"},
        {"exponent", ValueType::Real, "1", "power_law decay exponent"},
        {"band_lo", ValueType::Int, "1", "first Littlewood–Paley block of random_band"},
        {"band_hi", ValueType::Int, "3", "last Littlewood–Paley block of random_band"},
        {"operator", ValueType::Text, "p_alpha", "apply: heat, p_alpha or s_alpha"},
        {"t", ValueType::Real, "1", "apply: evaluation time"},
        {"points", ValueType::Int, "25", "specfun: number of abscissae"},
        {"xmax", ValueType::Real, "20", "specfun: largest abscissa"},
        {"sigma", ValueType::Real, "0.5", "verify-smoothing: target smoothness σ"},
        {"alphas", ValueType::Text, "0.5,0.8", "verify-smoothing: orders to test"},
        {"lambdas", ValueType::Text, "0.5,2", "scaling factors (verify-scaling, doubly-critical)"},
        {"psi_widths", ValueType::Text, "0.5,1,2", "verify-weak-convergence: test function widths"},
        {"j0", ValueType::Int, "1", "first block of the high-frequency surrogate"},
        {"delta", ValueType::Real, "0.05", "smallness threshold δ"},
        {"large_amplitude", ValueType::Real, "20", "doubly-critical: observational large datum (0 skips)"},
        {"p_query", ValueType::Real, "2", "global: p reported against the displayed window"},
        {"out", ValueType::Text, "runs", "parent directory of run directories"},
        {"plot", ValueType::Bool, "false", "also write an SVG next to each CSV"},
        {"force", ValueType::Bool, "false", "run inadmissible parameter combinations"},
    };
    return keys;
}

std::map<std::string, std::string> command_defaults(std::string_view command) {
    if (command == "verify-smoothing") return {{"n", "4096"}, {"p", "2"}, {"q", "1"}};
    if (command == "verify-scaling") return {{"n", "256"}, {"L", "16"}};
    if (command == "verify-weak-convergence") {
        return {{"n", "4096"}, {"L", "8"}, {"alpha", "0.8"}, {"s", "-0.3333333333333333"}, {"T", "0.1"},
                {"amplitude", "0.3"}};
    }
    if (command == "doubly-critical") {
        return {{"data", "l1_bump"}, {"amplitude", "2"}, {"lambdas", "1,0.5,0.25,0.125"}};
    }
    if (command == "global") {
        return {{"alpha", "0.8"}, {"n", "1024"}, {"L", "64"}, {"T", "100"}, {"amplitude", "1"}, {"grid", "log"}};
    }
    return {};
}

Config Config::defaults(std::string_view command) {
    Config c;
    for (const auto& k : schema()) {
        c.values_[k.key] = k.default_value;
        c.origins_[k.key] = "default";
    }
    for (const auto& [k, v] : command_defaults(command)) c.set(k, v, command);
    return c;
}

void Config::set(std::string_view key, std::string_view value, std::string_view origin) {
    const KeySpec* spec = find_key(key);
    if (!spec) throw UsageError("unknown config key '" + std::string(key) + "' (from " + std::string(origin) + ")");
    const std::string v = trim(value);
    bool ok = true;
    switch (spec->type) {
        case ValueType::Int: {
            long x = 0;
            ok = parse_int(v, x);
            break;
        }
        case ValueType::Real: {
            double x = 0.0;
            ok = parse_real(v, x);
            break;
        }
        case ValueType::Bool: {
            bool x = false;
            ok = parse_bool(v, x);
            break;
        }
        case ValueType::Text:
            ok = !v.empty();
            break;
    }
    if (!ok) {
        static const char* names[] = {"an integer", "a finite real", "true or false", "a non-empty string"};
        throw UsageError("config key '" + std::string(key) + "': '" + v + "' is not " +
                         names[static_cast<int>(spec->type)] + " (from " + std::string(origin) + ")");
    }
    if (spec->type == ValueType::Text) check_choice(key, v);
    values_[spec->key] = v;
    origins_[spec->key] = std::string(origin);
}

void Config::merge_text(std::string_view text, std::string_view origin) {
    std::istringstream is{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw UsageError(std::string(origin) + ":" + std::to_string(lineno) + ": expected key = value");
        }
        set(trim(t.substr(0, eq)), t.substr(eq + 1), std::string(origin) + ":" + std::to_string(lineno));
    }
}

void Config::merge_file(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw UsageError("cannot read config file '" + path.string() + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    merge_text(ss.str(), path.string());
}

double Config::real(std::string_view key) const {
    double x = 0.0;
    parse_real(values_.at(std::string(key)), x);
    return x;
}

long Config::integer(std::string_view key) const {
    long x = 0;
    parse_int(values_.at(std::string(key)), x);
    return x;
}

bool Config::flag(std::string_view key) const {
    bool x = false;
    parse_bool(values_.at(std::string(key)), x);
    return x;
}

const std::string& Config::text(std::string_view key) const { return values_.at(std::string(key)); }

std::vector<double> Config::reals(std::string_view key) const {
    std::vector<double> out;
    std::stringstream ss(text(key));
    std::string item;
    while (std::getline(ss, item, ',')) {
        double x = 0.0;
        parse_real(trim(item), x);
        out.push_back(x);
    }
    return out;
}

std::string Config::render() const {
    std::ostringstream os;
    for (const auto& [k, v] : values_) os << k << " = " << v << '\n';
    return os.str();
}

spectral::Grid make_grid(const Config& cfg) {
    const long dim = cfg.integer("dim");
    const long n = cfg.integer("n");
    if (dim != 1 && dim != 2) throw UsageError("config key 'dim': must be 1 or 2");
    if (n < 8 || (n & (n - 1)) != 0) throw UsageError("config key 'n': must be a power of two >= 8");
    if (!(cfg.real("L") > 0.0)) throw UsageError("config key 'L': must be positive");
    return spectral::Grid(static_cast<int>(dim), static_cast<std::size_t>(n), cfg.real("L"));
}

operators::FracParams frac_params(const Config& cfg) {
    operators::FracParams fp{cfg.real("alpha"), cfg.real("gamma"), static_cast<int>(cfg.integer("dim"))};
    fp.validate();
    return fp;
}

norms::SpaceParams space_params(const Config& cfg) {
    norms::SpaceParams sp{cfg.real("s"), cfg.real("p"), cfg.real("q")};
    sp.validate();
    return sp;
}

solver::SolverConfig solver_config(const Config& cfg) {
    solver::SolverConfig sc;
    sc.fp = frac_params(cfg);
    sc.space = space_params(cfg);
    const double T = cfg.real("T");
    const long M = cfg.integer("M");
    if (!(T > 0.0)) throw UsageError("config key 'T': must be positive");
    if (M < 1) throw UsageError("config key 'M': must be >= 1");
    sc.time = cfg.text("grid") == "log"
                  ? solver::TimeGrid::log_spaced(T, static_cast<std::size_t>(M), cfg.real("t_first"))
                  : solver::TimeGrid::graded(T, static_cast<std::size_t>(M), cfg.real("rho"));
    if (cfg.integer("max_iters") < 1) throw UsageError("config key 'max_iters': must be >= 1");
    if (cfg.integer("max_halvings") < 0) throw UsageError("config key 'max_halvings': must be >= 0");
    if (cfg.integer("stride") < 1) throw UsageError("config key 'stride': must be >= 1");
    sc.max_picard_iters = static_cast<std::size_t>(cfg.integer("max_iters"));
    sc.cauchy_tol = cfg.real("tol");
    sc.divergence_cap = cfg.real("cap");
    sc.max_halvings = static_cast<std::size_t>(cfg.integer("max_halvings"));
    sc.backend = {operators::parse_backend(cfg.text("backend")), static_cast<std::size_t>(cfg.integer("quad_nodes"))};
    sc.sampling.stride = static_cast<std::size_t>(cfg.integer("stride"));
    sc.metric = cfg.text("metric") == "global" ? solver::Metric::Global : solver::Metric::Local;
    sc.linear = cfg.flag("linear");
    sc.validate();
    return sc;
}

experiments::DataSpec data_spec(const Config& cfg) {
    experiments::DataSpec d;
    d.kind = experiments::parse_data_kind(cfg.text("data"));
    d.amplitude = cfg.real("amplitude");
    d.scale = cfg.real("scale");
    if (cfg.integer("seed") < 0) throw UsageError("config key 'seed': must be >= 0");
    d.seed = static_cast<std::uint64_t>(cfg.integer("seed"));
    d.exponent = cfg.real("exponent");
    d.band_lo = static_cast<int>(cfg.integer("band_lo"));
    d.band_hi = static_cast<int>(cfg.integer("band_hi"));
    return d;
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

Table read_csv(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw UsageError("cannot read '" + path.string() + "'");
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        return cells;
    };
    std::string line;
    if (!std::getline(is, line)) throw UsageError("'" + path.string() + "' is empty");
    Table t(split(line));
    while (std::getline(is, line)) {
        if (!line.empty()) t.add_row(split(line));
    }
    return t;
}

std::string render_svg(const Table& table, const std::string& title) {
    constexpr double W = 720, H = 480, ml = 80, mr = 170, mt = 40, mb = 60;
    const auto& header = table.header();
    const std::size_t rows = table.rows().size();

    std::vector<std::size_t> numeric;
    for (std::size_t c = 0; c < header.size(); ++c) {
        bool ok = rows > 0;
        for (std::size_t r = 0; r < rows && ok; ++r) {
            double x = 0.0;
            ok = parse_real(table.rows()[r][c], x);
        }
        if (ok) numeric.push_back(c);
    }
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
       << title << "</text>\n";
    if (numeric.size() < 2) {
        os << "<text x=\"" << W / 2 << "\" y=\"" << H / 2
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\">no numeric series</text>\n</svg>\n";
        return os.str();
    }
    auto column = [&](std::size_t c) {
        std::vector<double> v(rows);
        for (std::size_t r = 0; r < rows; ++r) parse_real(table.rows()[r][c], v[r]);
        return v;
    };
    auto wants_log = [](const std::vector<double>& v) {
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        return *lo > 0.0 && *hi / *lo > 100.0;
    };
    const auto xs = column(numeric[0]);
    std::vector<std::vector<double>> ys;
    std::vector<double> all;
    for (std::size_t k = 1; k < numeric.size(); ++k) {
        ys.push_back(column(numeric[k]));
        all.insert(all.end(), ys.back().begin(), ys.back().end());
    }
    const bool logx = wants_log(xs);
    const bool logy = wants_log(all);
    auto tx = [&](double v) { return logx ? std::log10(v) : v; };
    auto ty = [&](double v) { return logy ? std::log10(std::max(v, 1e-300)) : v; };
    double x0 = tx(*std::min_element(xs.begin(), xs.end())), x1 = tx(*std::max_element(xs.begin(), xs.end()));
    double y0 = ty(*std::min_element(all.begin(), all.end())), y1 = ty(*std::max_element(all.begin(), all.end()));
    if (x1 == x0) x1 = x0 + 1.0;
    if (y1 == y0) y1 = y0 + 1.0;
    auto px = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * (W - ml - mr); };
    auto py = [&](double v) { return H - mb - (ty(v) - y0) / (y1 - y0) * (H - mt - mb); };

    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    auto label = [](double v, bool log) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", log ? std::pow(10.0, v) : v);
        return std::string(buf);
    };
    for (int i = 0; i <= 4; ++i) {
        const double fx = x0 + (x1 - x0) * i / 4.0, fy = y0 + (y1 - y0) * i / 4.0;
        const double sx = ml + (W - ml - mr) * i / 4.0, sy = H - mb - (H - mt - mb) * i / 4.0;
        os << "<text x=\"" << sx << "\" y=\"" << H - mb + 18
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << label(fx, logx)
           << "</text>\n";
        os << "<text x=\"" << ml - 6 << "\" y=\"" << sy + 4
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << label(fy, logy)
           << "</text>\n";
    }
    os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 16
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << header[numeric[0]]
       << (logx ? " (log)" : "") << "</text>\n";
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
    for (std::size_t k = 0; k < ys.size(); ++k) {
        const char* color = colors[k % 7];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t r = 0; r < rows; ++r) {
            if (logy && !(ys[k][r] > 0.0)) continue;
            os << px(xs[r]) << ',' << py(ys[k][r]) << ' ';
        }
        os << "\"/>\n";
        const double ly = mt + 16.0 * static_cast<double>(k) + 10.0;
        os << "<line x1=\"" << W - mr + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - mr + 30 << "\" y2=\"" << ly
           << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
           << "<text x=\"" << W - mr + 34 << "\" y=\"" << ly + 4
           << "\" font-family=\"sans-serif\" font-size=\"11\">" << header[numeric[k + 1]]
           << (logy ? " (log)" : "") << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"fracheat: numerical laboratory for the time-fractional semilinear heat equation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", FRACHEAT_VERSION);

    struct Bound {
        CLI::App* sub = nullptr;
        const Command* cmd = nullptr;
        std::string config_path;
        std::vector<std::string> sets;
        std::map<std::string, std::string> text;
        std::map<std::string, CLI::Option*> options;
    };
    std::vector<Bound> bound(commands().size());
    for (std::size_t i = 0; i < commands().size(); ++i) {
        auto& b = bound[i];
        b.cmd = &commands()[i];
        b.sub = app.add_subcommand(b.cmd->name, b.cmd->help);
        b.sub->add_option("--config", b.config_path, "flat key = value configuration file");
        b.sub->add_option("--set", b.sets, "key=value override (repeatable)");
        for (const auto& k : schema()) {
            if (k.type == ValueType::Bool) {
                b.options[k.key] = b.sub->add_flag("--" + k.key, k.help);
            } else {
                b.options[k.key] = b.sub->add_option("--" + k.key, b.text[k.key], k.help + " [" + k.default_value + "]");
            }
        }
    }
    std::string plot_dir;
    auto* plot = app.add_subcommand("plot", "write an SVG for every CSV of a run directory");
    plot->add_option("run_dir", plot_dir, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << FRACHEAT_VERSION << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (plot->parsed()) return cmd_plot(plot_dir, out);
        for (auto& b : bound) {
            if (!b.sub->parsed()) continue;
            Config cfg = Config::defaults(b.cmd->name);
            if (!b.config_path.empty()) cfg.merge_file(b.config_path);
            for (const auto& kv : b.sets) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
                cfg.set(kv.substr(0, eq), kv.substr(eq + 1), "flag");
            }
            for (const auto& k : schema()) {
                if (b.options[k.key]->count() == 0) continue;
                cfg.set(k.key, k.type == ValueType::Bool ? "true" : b.text[k.key], "flag");
            }
            if (std::string_view(b.cmd->name) == "solve") check_admissible(cfg);
            Run r = open_run(b.cmd->name, std::move(cfg), b.config_path);
            int code = 0;
            try {
                code = b.cmd->fn(r);
            } catch (...) {
                r.manifest["error"] = "aborted";
                close_run(r, out);
                throw;
            }
            if (r.manifest.contains("passed")) out << b.cmd->name << ": " << (r.manifest["passed"].get<bool>() ? "PASS" : "FAIL") << '\n';
            if (r.manifest.contains("verdict")) out << "verdict: " << r.manifest["verdict"].get<std::string>() << '\n';
            close_run(r, out);
            return code;
        }
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace fracheat::cli
