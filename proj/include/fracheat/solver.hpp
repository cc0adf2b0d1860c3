#pragma once

#include "fracheat/norms.hpp"
#include "fracheat/operators.hpp"
#include "fracheat/spectral.hpp"

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace fracheat::solver {

using operators::FracParams;
using operators::OperatorBackend;
using spectral::Field;
using spectral::Grid;

enum class Spacing { Graded, LogSpaced };

/// Time nodes 0 = t_0 < t_1 < ... < t_M = T.
class TimeGrid {
public:
    /// t_m = T (m/M)^rho.
    static TimeGrid graded(double T, std::size_t M, double rho);
    /// t_1 = t_first, then geometric up to t_M = T.
    static TimeGrid log_spaced(double T, std::size_t M, double t_first);

    const std::vector<double>& nodes() const noexcept { return nodes_; }
    double operator[](std::size_t m) const noexcept { return nodes_[m]; }
    std::size_t M() const noexcept { return nodes_.size() - 1; }
    double T() const noexcept { return nodes_.back(); }
    Spacing spacing() const noexcept { return spacing_; }
    /// Grading exponent (graded) or first positive node (log spaced).
    double shape() const noexcept { return shape_; }

    /// Same spacing rule and node count on a different horizon.
    TimeGrid with_horizon(double T) const;

private:
    TimeGrid(std::vector<double> nodes, Spacing spacing, double shape);

    std::vector<double> nodes_;
    Spacing spacing_;
    double shape_;
};

/// Grading exponent max(1, 2/(1 + sαγ/2)) clipped to [1, 4]; resolves the τ^{sαγ/2}
/// behaviour of the nonlinear term near τ = 0.
double default_grading(double s, double alpha, double gamma);

/// Which weighted norm measures iterates: the local X_T norm sup t^{−sα/2}‖u|M^p_q‖
/// or the global X norm sup t^β ‖u|𝓜^p_q‖.
enum class Metric { Local, Global };

struct SolverConfig {
    FracParams fp;
    norms::SpaceParams space{-2.0 / 3.0, 3.0, 3.0};
    TimeGrid time = TimeGrid::graded(0.5, 64, 2.0);
    std::size_t max_picard_iters = 30;
    double cauchy_tol = 1e-8;
    double divergence_cap = 1e6;
    std::size_t max_halvings = 8;
    OperatorBackend backend;
    norms::Sampling sampling;
    Metric metric = Metric::Local;
    /// Drops the nonlinearity (u = P_α(t)μ), for linear reference runs.
    bool linear = false;

    void validate() const;
};

/// u(·, t_m) for m = 1..M together with the datum.
struct Trajectory {
    TimeGrid time;
    Field datum;
    std::vector<Field> states;  // states[m − 1] = u(·, t_m)
    /// Per-node weighted norms of the metric that produced the trajectory.
    std::vector<double> weighted_norms;

    const Field& at(std::size_t m) const { return states.at(m - 1); }
};

/// Pointwise |u|^{γ−1} u.
Field nonlinearity(const Field& u, double gamma);

/// Exponent α/(γ−1) − αN/(2p) of the global norm.
double beta_exponent(const FracParams& fp, double p);
/// Throws UsageError unless −βγ > −1 and β < α.
void check_beta(double beta, const FracParams& fp);

/// t_m^{−sα/2} ‖u(t_m) | M^p_q‖ (local balls) for every node.
std::vector<double> xt_profile(const Trajectory& traj, double s, double alpha, double p, double q,
                               const norms::Sampling& sampling = {});
/// max over nodes m >= 1 of the profile.
double xt_norm(const Trajectory& traj, double s, double alpha, double p, double q, const norms::Sampling& sampling = {});

/// t_m^β ‖u(t_m) | 𝓜^p_q‖ (all radii) for every node, and its max.
std::vector<double> global_profile(const Trajectory& traj, double beta, const FracParams& fp, double p, double q,
                                   const norms::Sampling& sampling = {});
double global_norm(const Trajectory& traj, double beta, const FracParams& fp, double p, double q,
                   const norms::Sampling& sampling = {});

/// Linear part and product-integration weights for one grid, datum and parameter set.
/// Built once per solve and reused by every Picard step.
class DuhamelOperator {
public:
    DuhamelOperator(const Field& datum, const TimeGrid& time, const FracParams& fp, const OperatorBackend& backend);

    const TimeGrid& time() const noexcept { return time_; }
    /// P_α(t_m)μ for m = 1..M.
    const std::vector<Field>& linear_part() const noexcept { return u0_; }

    /// u_0(t_m) + Σ_{k<m} w_{m,k}(ξ) ℱ[g_k] with g_k = nonlinearity(state at t_{k+1}).
    /// `linear` returns u_0 unchanged. Throws DivergenceError with the node index on
    /// non-finite values.
    std::vector<Field> apply(const std::vector<Field>& states, double gamma, bool linear = false) const;

    /// Σ_{k<m} w_{m,k}(ξ) ℱ[g_k] for given source fields g_0..g_{M−1}.
    std::vector<Field> integrate(const std::vector<Field>& sources) const;

private:
    Grid grid_;
    TimeGrid time_;
    std::vector<Field> u0_;
    // weights_[m − 1][k · n_lambda + λ index] for k < m
    std::vector<std::vector<double>> weights_;
};

/// One Picard sweep over the whole trajectory (right-endpoint representatives).
Trajectory picard_step(const Trajectory& prev, const DuhamelOperator& op, const SolverConfig& config);

enum class Verdict { Converged, Diverged, MaxIters };

std::string_view verdict_name(Verdict v);

struct Diagnostics {
    Verdict verdict = Verdict::MaxIters;
    std::size_t iterations = 0;
    std::vector<double> distances;   // metric distance between successive iterates
    std::vector<double> ratios;      // distances[i] / distances[i − 1]
    std::vector<double> iterate_norms;
    double linear_norm = 0.0;        // metric norm of u_0
    double sup_norm = 0.0;           // sup_n of the iterate norms
    std::size_t halvings = 0;
    double horizon = 0.0;
    double beta = 0.0;
    std::vector<std::string> warnings;
};

struct Solution {
    Trajectory trajectory;
    Diagnostics diagnostics;
};

/// Picard iteration until the metric distance drops below cauchy_tol (converged),
/// exceeds divergence_cap (diverged) or max_picard_iters is reached. A diverged
/// attempt is retried with half the horizon, at most max_halvings times.
Solution solve(const Field& mu, const SolverConfig& config);
Solution solve(const norms::DiscreteMeasure& mu, const SolverConfig& config);

/// Metric norm and distance used by solve for the given configuration.
std::vector<double> metric_profile(const Trajectory& traj, const SolverConfig& config);
double metric_distance(const Trajectory& a, const Trajectory& b, const SolverConfig& config);

}  // namespace fracheat::solver
