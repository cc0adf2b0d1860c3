#include "fracheat/errors.hpp"
#include "fracheat/experiments.hpp"
#include "fracheat/norms.hpp"
#include "fracheat/operators.hpp"
#include "fracheat/solver.hpp"
#include "fracheat/specfun.hpp"
#include "fracheat/spectral.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace fracheat;
using spectral::Field;
using spectral::Grid;

namespace {

// Tolerances and budgets, fixed here and nowhere else.
constexpr double kMomentTol = 1e-8;
constexpr double kMomentBudget = 5.0;
constexpr double kDualityTol = 1e-8;
constexpr double kDualityBudget = 10.0;
constexpr double kPartitionTol = 1e-12;
constexpr double kMorreyLpTol = 0.02;
constexpr double kProfileFlatTol = 0.05;
constexpr double kPowerIdentityTol = 1e-12;  // relative; read as exact up to round-off
constexpr double kBackendTol = 1e-7;
constexpr double kBackendBudget = 30.0;
constexpr double kDecayTol = 0.03;
constexpr double kSmoothingTol = 0.05;
constexpr double kDuhamelTol = 1e-8;
constexpr double kTelescopeTol = 1e-10;
constexpr double kContractionRatio = 0.5;
constexpr std::size_t kMaxPicardIters = 10;
constexpr double kClassicalTol = 0.01;
constexpr double kPicardBudget = 120.0;
constexpr double kScalingTol = 0.02;
constexpr double kGapFactor = 10.0;
constexpr double kWeakSlopeTol = 0.1;
constexpr double kHeatFilterTol = 1e-8;
constexpr double kGlobalBudget = 300.0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

double rel(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
    }
    return v;
}

Field random_field(const Grid& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d;
    std::vector<double> v(g.size());
    for (auto& x : v) x = d(rng);
    return Field(g, std::move(v));
}

Field gaussian(const Grid& g, double amp, double width = 1.0) {
    return Field::sample(g, [=](const double* x) { return amp * std::exp(-x[0] * x[0] / (2.0 * width * width)); });
}

std::string report_metrics(const experiments::StudyReport& rep, const std::vector<std::string>& keys) {
    std::ostringstream os;
    for (const auto& k : keys) {
        const auto it = rep.metrics.find(k);
        if (it != rep.metrics.end()) os << k << "=" << sci(it->second) << " ";
    }
    return os.str();
}

// ------------------------------------------------------------------ criteria

Outcome c1_wright_moments() {
    double worst = 0.0;
    for (double alpha : {0.3, 0.5, 0.7}) {
        specfun::WrightEvaluator w(alpha);
        for (double r : {-0.5, 0.0, 0.5, 1.0, 2.0}) {
            const auto m = specfun::subordinate(w, [r](double t) { return std::pow(t, r); }, 0, kMomentTol);
            const double want = std::tgamma(1.0 + r) / std::tgamma(1.0 + alpha * r);
            worst = std::max(worst, std::abs(m.value - want));
        }
    }
    return {worst <= kMomentTol, "max |quadrature − Γ(1+r)/Γ(1+αr)| = " + sci(worst)};
}

Outcome c2_subordination_duality() {
    double worst = 0.0;
    for (double alpha : {0.3, 0.5, 0.7}) {
        specfun::WrightEvaluator w(alpha);
        const specfun::MittagLeffler e1(alpha, 1.0), ea(alpha, alpha);
        for (double lambda : log_spaced(1e-3, 1e3, 20)) {
            auto g = [lambda](double t) { return std::exp(-lambda * t); };
            worst = std::max(worst, std::abs(specfun::subordinate(w, g, 0).value - e1(-lambda)));
            worst = std::max(worst, std::abs(specfun::subordinate(w, g, 1).value - ea(-lambda)));
        }
    }
    return {worst <= kDualityTol, "max |subordinate − Mittag-Leffler| = " + sci(worst)};
}

Outcome c3_partition() {
    double worst = 0.0;
    for (int dim : {1, 2}) {
        for (std::size_t n : {256u, 1024u}) {
            const Grid g(dim, n, 32.0);
            worst = std::max(worst, spectral::filter_bank(g, false).partition_deviation());
        }
    }
    return {worst <= kPartitionTol, "max |1 − φ_(0) − Σφ_j| = " + sci(worst)};
}

Outcome c4_morrey() {
    const Grid g(1, 1024, 32.0);
    auto bumps = Field::sample(g, [](const double* x) {
        return std::exp(-x[0] * x[0]) + 0.5 * std::exp(-std::pow(x[0] - 2.0, 2) / 0.1);
    });
    double lp_err = 0.0;
    for (double p : {1.0, 2.0, 3.5}) {
        lp_err = std::max(lp_err, rel(norms::morrey_norm(bumps, {p, p, false}).value, bumps.lp_norm(p)));
    }

    // |x|^{−1/2}: R^{1/2 − 1} ∫_{−R}^{R} |x|^{−1/2} dx = 4 for every R
    const Grid fine(1, 4096, 32.0);
    const double h = fine.spacing();
    auto singular = Field::sample(fine, [h](const double* x) {
        return x[0] == 0.0 ? 2.0 * std::sqrt(2.0 / h) : 1.0 / std::sqrt(std::abs(x[0]));
    });
    std::vector<double> radii;
    for (int k = 3; k <= 10; ++k) radii.push_back(h * std::ldexp(1.0, k));
    const auto profile = norms::morrey_profile(singular, {2.0, 1.0, false}, fine.origin_index(), radii);
    const auto [lo, hi] = std::minmax_element(profile.begin(), profile.end());
    const double flat = *hi / *lo - 1.0;
    const double decades = std::log10(radii.back() / radii.front());

    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> d(-0.9, 1.0);
    const Grid small(1, 512, 4.0);
    std::vector<double> v(small.size());
    for (auto& x : v) x = d(rng);
    const Field u(small, v);
    double power_err = 0.0;
    for (double gamma : {2.0, 3.0}) {
        std::vector<double> pw(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) pw[i] = std::pow(std::abs(v[i]), gamma);
        const Field ug(small, pw);
        for (bool local : {false, true}) {
            const double lhs = norms::morrey_norm(ug, {6.0 / gamma, 3.0 / gamma, local}).value;
            const double rhs = std::pow(norms::morrey_norm(u, {6.0, 3.0, local}).value, gamma);
            power_err = std::max(power_err, rel(lhs, rhs));
        }
    }
    const bool pass = lp_err <= kMorreyLpTol && flat <= kProfileFlatTol && decades >= 2.0 &&
                      power_err <= kPowerIdentityTol;
    return {pass, "M^p_p vs L^p " + sci(lp_err) + ", profile spread " + sci(flat) + " over " + sci(decades) +
                      " decades, power identity " + sci(power_err)};
}

Outcome c5_backends() {
    const Grid g(1, 512, 32.0);
    const Field f = random_field(g, 17);
    double worst = 0.0;
    for (double alpha : {0.3, 0.5, 0.7}) {
        const operators::FracParams fp{alpha, 3.0, 1};
        for (double t : {0.01, 1.0, 100.0}) {
            using operators::Backend;
            const double dp = (operators::p_alpha(t, f, fp, {Backend::MlMultiplier}) -
                               operators::p_alpha(t, f, fp, {Backend::Subordination})).max_abs();
            const double ds = (operators::s_alpha(t, f, fp, {Backend::MlMultiplier}) -
                               operators::s_alpha(t, f, fp, {Backend::Subordination})).max_abs();
            worst = std::max({worst, dp / f.max_abs(), ds / f.max_abs()});
        }
    }
    return {worst <= kBackendTol, "max relative discrepancy " + sci(worst)};
}

Outcome c6_delta_decay() {
    experiments::DecayConfig cfg;
    cfg.n = 4096;
    cfg.alphas = {0.5, 0.8};
    cfg.tolerance = kDecayTol;
    const auto rep = experiments::study_delta_decay(cfg);
    return {rep.passed, report_metrics(rep, {"slope_alpha_0.5", "slope_alpha_0.8"}) + "(expected −α/2)"};
}

Outcome c7_smoothing() {
    experiments::SmoothingConfig cfg;
    cfg.tolerance = kSmoothingTol;
    const auto rep = experiments::study_smoothing(cfg);
    return {rep.passed, report_metrics(rep, {"worst_abs_error", "ratio_alpha_0.5", "ratio_alpha_0.8"})};
}

/// (1/α) ∫_{(t−b)^α}^{(t−a)^α} E_{α,α}(−λu) du, the Duhamel weight after u = (t−τ)^α.
double duhamel_oracle(double alpha, double lambda, double t, double a, double b) {
    const specfun::MittagLeffler e(alpha, alpha);
    const double lo = std::pow(t - b, alpha);
    const double hi = std::pow(t - a, alpha);
    auto f = [&](double u) { return e(-lambda * u); };
    std::vector<double> cuts{lo};
    for (double c = lambda > 0.0 ? 1.0 / lambda : hi; c < hi; c *= 2.0) {
        if (c > cuts.back()) cuts.push_back(c);
    }
    cuts.push_back(hi);
    double v = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        v += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, cuts[i], cuts[i + 1], 6, 1e-13);
    }
    return v / alpha;
}

Outcome c8_duhamel_weights() {
    double worst = 0.0;
    for (double alpha : {0.3, 0.5, 0.7}) {
        operators::DuhamelKernel k(alpha);
        for (double lambda : {0.0, 1e-3, 0.5, 4.0, 100.0, 1e4}) {
            for (auto [a, b] : {std::pair{0.0, 0.5}, {0.5, 1.0}, {0.99, 1.0}, {0.0, 1e-3}, {0.3, 0.31}}) {
                worst = std::max(worst, std::abs(k.weight(lambda, 1.0, a, b) - duhamel_oracle(alpha, lambda, 1.0, a, b)));
            }
        }
    }
    double tele = 0.0;
    for (double alpha : {0.3, 0.5, 0.7, 1.0}) {
        operators::DuhamelKernel k(alpha);
        const specfun::MittagLeffler e(alpha, 1.0);
        const double t = 0.8;
        for (double lambda : {0.0, 1e-4, 0.2, 3.0, 50.0, 3e3}) {
            const double want = lambda == 0.0 ? std::pow(t, alpha) / std::tgamma(1.0 + alpha)
                                              : (1.0 - e(-lambda * std::pow(t, alpha))) / lambda;
            for (int m : {1, 7, 64}) {
                double sum = 0.0;
                for (int i = 0; i < m; ++i) {
                    const double a = t * std::pow(static_cast<double>(i) / m, 2.0);
                    const double b = i + 1 == m ? t : t * std::pow(static_cast<double>(i + 1) / m, 2.0);
                    sum += k.weight(lambda, t, a, b);
                }
                tele = std::max(tele, std::abs(sum - want) / std::max(1.0, want));
            }
        }
    }
    return {worst <= kDuhamelTol && tele <= kTelescopeTol,
            "max |weight − quadrature| = " + sci(worst) + ", telescoping " + sci(tele)};
}

/// Classical u_t = Δu + |u|^{γ−1}u by the integrating-factor RK4 scheme.
Field classical_reference(const Field& u0, double gamma, double T, std::size_t steps) {
    using spectral::heat_semigroup;
    const double h = T / static_cast<double>(steps);
    auto N = [gamma](const Field& u) { return solver::nonlinearity(u, gamma); };
    Field u = u0;
    for (std::size_t i = 0; i < steps; ++i) {
        const Field eu_half = heat_semigroup(h / 2, u);
        const Field k1 = N(u);
        const Field k2 = N(eu_half + heat_semigroup(h / 2, k1) * (h / 2));
        const Field k3 = N(eu_half + k2 * (h / 2));
        const Field k4 = N(heat_semigroup(h, u) + heat_semigroup(h / 2, k3) * h);
        u = heat_semigroup(h, u) + (heat_semigroup(h, k1) + heat_semigroup(h / 2, k2 + k3) * 2.0 + k4) * (h / 6.0);
    }
    return u;
}

Outcome c9_picard() {
    const Grid g(1, 512, 32.0);
    solver::SolverConfig cfg;
    cfg.fp = {0.5, 3.0, 1};
    cfg.space = {-2.0 / 3.0, 3.0, 3.0};
    cfg.time = solver::TimeGrid::graded(0.5, 64, 2.0);
    const auto sol = solver::solve(gaussian(g, 0.5), cfg);
    const auto& d = sol.diagnostics;
    double worst_ratio = 0.0;
    for (std::size_t i = 1; i < d.ratios.size(); ++i) worst_ratio = std::max(worst_ratio, d.ratios[i]);
    const solver::DuhamelOperator op(sol.trajectory.datum, sol.trajectory.time, cfg.fp, cfg.backend);
    const double residual = solver::metric_distance(solver::picard_step(sol.trajectory, op, cfg), sol.trajectory, cfg);

    solver::SolverConfig heat = cfg;
    heat.fp = {1.0, 3.0, 1};
    heat.time = solver::TimeGrid::graded(0.1, 64, 2.0);
    const Field mu = gaussian(g, 1.5);
    const auto classical = solver::solve(mu, heat);
    const Field ref = classical_reference(mu, 3.0, 0.1, 400);
    const double classical_err = (classical.trajectory.states.back() - ref).max_abs() / ref.max_abs();

    const bool pass = d.verdict == solver::Verdict::Converged && d.iterations <= kMaxPicardIters &&
                      worst_ratio <= kContractionRatio && residual <= 2.0 * cfg.cauchy_tol &&
                      classical.diagnostics.verdict == solver::Verdict::Converged && classical_err <= kClassicalTol;
    return {pass, std::string(solver::verdict_name(d.verdict)) + " in " + std::to_string(d.iterations) +
                      " iterations, worst ratio from iteration 2 " + sci(worst_ratio) + ", residual " + sci(residual) +
                      ", α = 1 vs classical " + sci(classical_err)};
}

Outcome c10_scaling() {
    experiments::ScalingConfig cfg;
    cfg.lambdas = {0.5, 2.0};
    cfg.tolerance = kScalingTol;
    const auto rep = experiments::study_scaling(cfg);
    return {rep.passed, report_metrics(rep, {"worst_lambda_0.5", "worst_lambda_2"})};
}

Outcome c11_weak_convergence() {
    experiments::WeakConvergenceConfig cfg;
    cfg.gap_factor = kGapFactor;
    cfg.slope_tolerance = kWeakSlopeTol;
    const auto rep = experiments::study_weak_convergence(cfg);
    return {rep.passed, report_metrics(rep, {"gap_drop_min", "duhamel_slope_expected", "duhamel_slope_worst_error"})};
}

Outcome c12_heat_filter() {
    const Grid g(1, 1024, 32.0);
    const auto bank = spectral::filter_bank(g, false);
    double worst = -std::numeric_limits<double>::infinity();
    const double alpha = 0.5;
    for (double width : {0.25, 1.0}) {
        const Field psi = gaussian(g, 1.0, width);
        for (double s : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
            const double base = norms::besov_l1_norm(psi, s, bank);
            for (double t : {1e-3, 0.1, 1.0, 10.0}) {
                for (double theta : {0.1, 1.0, 5.0}) {
                    const Field filtered = spectral::heat_semigroup(std::pow(t, alpha) * theta, psi);
                    worst = std::max(worst, norms::besov_l1_norm(filtered, s, bank) / base - 1.0);
                }
            }
        }
    }
    return {worst <= kHeatFilterTol, "max filtered/unfiltered − 1 = " + sci(worst)};
}

Outcome c13_doubly_critical() {
    experiments::DoublyCriticalConfig cfg;
    const auto rep = experiments::study_doubly_critical(cfg);
    std::ostringstream os;
    const auto& t = rep.table;
    for (std::size_t r = 0; r < t.rows().size(); ++r) {
        os << "λ=" << t.rows()[r][0] << " a=" << sci(t.number(r, "amplitude")) << " surrogate "
           << sci(t.number(r, "surrogate")) << " " << t.rows()[r][3] << "; ";
    }
    return {rep.passed, report_metrics(rep, {"strictly_decreasing"}) + os.str()};
}

Outcome c14_global() {
    const auto adm = experiments::admissible_params({0.8, 3.0, 1}, {-0.5, 2.0, 2.0});
    experiments::GlobalConfig cfg;
    cfg.horizon = 100.0;
    const auto rep = experiments::study_global(cfg);
    const bool pass = !adm.p_window.empty() && adm.p_window.contains(2.0) && rep.passed &&
                      rep.metrics.at("converged") == 1.0 && std::isfinite(rep.metrics.at("sup_weighted_norm"));
    return {pass, "p-window " + adm.p_window.str() + ", " +
                      report_metrics(rep, {"amplitude", "iterations", "sup_weighted_norm", "tail_over_sup"})};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
    double budget;  // seconds; 0 = none
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "Wright moments", c1_wright_moments, kMomentBudget},
        {2, "subordination / Mittag-Leffler duality", c2_subordination_duality, kDualityBudget},
        {3, "Littlewood-Paley partition", c3_partition, 0.0},
        {4, "Morrey analytics", c4_morrey, 0.0},
        {5, "operator backend equivalence", c5_backends, kBackendBudget},
        {6, "point-mass decay", c6_delta_decay, 0.0},
        {7, "smoothing exponents", c7_smoothing, 0.0},
        {8, "Duhamel weights", c8_duhamel_weights, 0.0},
        {9, "Picard contraction", c9_picard, kPicardBudget},
        {10, "scale invariance", c10_scaling, 0.0},
        {11, "weak convergence", c11_weak_convergence, 0.0},
        {12, "heat-filter Besov contraction", c12_heat_filter, 0.0},
        {13, "doubly critical study", c13_doubly_critical, 0.0},
        {14, "global study", c14_global, kGlobalBudget},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::string timing = sci(secs) + " s";
        if (c.budget > 0.0) {
            timing += " of " + sci(c.budget) + " s";
            if (secs > c.budget) {
                o.pass = false;
                o.detail += " [over budget]";
            }
        }
        if (!o.pass) ++failures;
        std::printf("criterion %2d %s  %s: %s (%s)\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(),
                    timing.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
