#include "fracheat/solver.hpp"

#include "fracheat/errors.hpp"
#include "fracheat/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

namespace fracheat::solver {

namespace {

void check_finite(const std::vector<std::complex<double>>& c, std::size_t node) {
    for (const auto& z : c) {
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
            std::ostringstream os;
            os << "picard: non-finite values at time node " << node;
            throw DivergenceError(os.str(), node);
        }
    }
}

std::vector<double> power_law(const Field& u, double gamma, std::size_t node) {
    std::vector<double> v(u.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double x = u[i];
        v[i] = std::pow(std::abs(x), gamma - 1.0) * x;
        if (!std::isfinite(v[i])) {
            std::ostringstream os;
            os << "picard: nonlinearity overflowed at time node " << node;
            throw DivergenceError(os.str(), node);
        }
    }
    return v;
}

}  // namespace

// ---------------------------------------------------------------- TimeGrid --

TimeGrid::TimeGrid(std::vector<double> nodes, Spacing spacing, double shape)
    : nodes_(std::move(nodes)), spacing_(spacing), shape_(shape) {
    for (std::size_t m = 1; m < nodes_.size(); ++m) {
        if (!(nodes_[m] > nodes_[m - 1])) throw UsageError("time grid: nodes must increase strictly");
    }
}

TimeGrid TimeGrid::graded(double T, std::size_t M, double rho) {
    if (!(T > 0.0) || !std::isfinite(T)) throw UsageError("time grid: T must be positive");
    if (M < 1) throw UsageError("time grid: need at least one step");
    if (!(rho >= 1.0) || !std::isfinite(rho)) throw UsageError("time grid: grading exponent must be >= 1");
    std::vector<double> t(M + 1);
    for (std::size_t m = 0; m <= M; ++m) t[m] = T * std::pow(static_cast<double>(m) / static_cast<double>(M), rho);
    t[M] = T;
    return TimeGrid(std::move(t), Spacing::Graded, rho);
}

TimeGrid TimeGrid::log_spaced(double T, std::size_t M, double t_first) {
    if (!(T > 0.0) || !std::isfinite(T)) throw UsageError("time grid: T must be positive");
    if (M < 2) throw UsageError("time grid: log spacing needs at least two steps");
    if (!(t_first > 0.0 && t_first < T)) throw UsageError("time grid: first node must lie in ]0, T[");
    std::vector<double> t(M + 1, 0.0);
    const double ratio = std::log(T / t_first);
    for (std::size_t m = 1; m <= M; ++m) {
        t[m] = t_first * std::exp(ratio * static_cast<double>(m - 1) / static_cast<double>(M - 1));
    }
    t[M] = T;
    return TimeGrid(std::move(t), Spacing::LogSpaced, t_first);
}

TimeGrid TimeGrid::with_horizon(double T) const {
    if (spacing_ == Spacing::Graded) return graded(T, M(), shape_);
    return log_spaced(T, M(), shape_ * T / this->T());
}

double default_grading(double s, double alpha, double gamma) {
    const double e = 1.0 + s * alpha * gamma / 2.0;
    if (e <= 0.0) return 4.0;
    return std::clamp(2.0 / (e + 1e-12), 1.0, 4.0);
}

void SolverConfig::validate() const {
    fp.validate();
    space.validate();
    if (!(cauchy_tol > 0.0)) throw UsageError("cauchy_tol must be positive");
    if (!(divergence_cap > 0.0)) throw UsageError("divergence_cap must be positive");
    if (max_picard_iters < 1) throw UsageError("max_picard_iters must be >= 1");
    if (sampling.stride < 1) throw UsageError("Morrey center stride must be >= 1");
    if (metric == Metric::Local && !(space.s < 0.0)) throw UsageError("the X_T weight needs s < 0");
    if (metric == Metric::Global) check_beta(beta_exponent(fp, space.p), fp);
}

// ------------------------------------------------------------------- norms --

Field nonlinearity(const Field& u, double gamma) {
    std::vector<double> v(u.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::pow(std::abs(u[i]), gamma - 1.0) * u[i];
    return Field(u.grid(), std::move(v));
}

double beta_exponent(const FracParams& fp, double p) {
    return fp.alpha / (fp.gamma - 1.0) - fp.alpha * fp.dim / (2.0 * p);
}

void check_beta(double beta, const FracParams& fp) {
    if (!(-beta * fp.gamma > -1.0 && beta < fp.alpha)) {
        std::ostringstream os;
        os << "global norm: beta = " << beta << " violates -beta*gamma > -1 and beta < alpha";
        throw UsageError(os.str());
    }
}

std::vector<double> xt_profile(const Trajectory& traj, double s, double alpha, double p, double q,
                               const norms::Sampling& sampling) {
    std::vector<double> out(traj.states.size());
    for (std::size_t m = 1; m <= traj.states.size(); ++m) {
        const double w = std::pow(traj.time[m], -s * alpha / 2.0);
        out[m - 1] = w * norms::morrey_norm(traj.at(m), {p, q, true}, sampling).value;
    }
    return out;
}

double xt_norm(const Trajectory& traj, double s, double alpha, double p, double q, const norms::Sampling& sampling) {
    const auto prof = xt_profile(traj, s, alpha, p, q, sampling);
    return prof.empty() ? 0.0 : *std::max_element(prof.begin(), prof.end());
}

std::vector<double> global_profile(const Trajectory& traj, double beta, const FracParams& fp, double p, double q,
                                   const norms::Sampling& sampling) {
    check_beta(beta, fp);
    std::vector<double> out(traj.states.size());
    for (std::size_t m = 1; m <= traj.states.size(); ++m) {
        out[m - 1] = std::pow(traj.time[m], beta) * norms::morrey_norm(traj.at(m), {p, q, false}, sampling).value;
    }
    return out;
}

double global_norm(const Trajectory& traj, double beta, const FracParams& fp, double p, double q,
                   const norms::Sampling& sampling) {
    const auto prof = global_profile(traj, beta, fp, p, q, sampling);
    return prof.empty() ? 0.0 : *std::max_element(prof.begin(), prof.end());
}

std::vector<double> metric_profile(const Trajectory& traj, const SolverConfig& config) {
    const auto& sp = config.space;
    if (config.metric == Metric::Local) return xt_profile(traj, sp.s, config.fp.alpha, sp.p, sp.q, config.sampling);
    return global_profile(traj, beta_exponent(config.fp, sp.p), config.fp, sp.p, sp.q, config.sampling);
}

double metric_distance(const Trajectory& a, const Trajectory& b, const SolverConfig& config) {
    Trajectory diff{a.time, a.datum, {}, {}};
    diff.states.reserve(a.states.size());
    for (std::size_t i = 0; i < a.states.size(); ++i) diff.states.push_back(a.states[i] - b.states.at(i));
    const auto prof = metric_profile(diff, config);
    return prof.empty() ? 0.0 : *std::max_element(prof.begin(), prof.end());
}

// --------------------------------------------------------- DuhamelOperator --

DuhamelOperator::DuhamelOperator(const Field& datum, const TimeGrid& time, const FracParams& fp,
                                 const OperatorBackend& backend)
    : grid_(datum.grid()), time_(time) {
    fp.validate();
    if (grid_.dim() != fp.dim) throw UsageError("solver: grid dimension differs from the parameter dimension");
    const std::size_t M = time.M();
    const auto& nodes = time.nodes();

    const auto coeffs = spectral::dft(datum);
    u0_.reserve(M);
    for (std::size_t m = 1; m <= M; ++m) {
        u0_.push_back(spectral::idft(spectral::apply_table(coeffs, operators::p_alpha_table(nodes[m], grid_, fp.alpha, backend))));
    }

    const auto& lambdas = grid_.modes().lambdas;
    const std::size_t nl = lambdas.size();
    weights_.resize(M);
    for (std::size_t m = 1; m <= M; ++m) weights_[m - 1].assign(m * nl, 0.0);
    const operators::DuhamelKernel kernel(fp.alpha);
    parallel_for(nl, [&](std::size_t b, std::size_t e) {
        std::vector<double> row(M);
        for (std::size_t li = b; li < e; ++li) {
            for (std::size_t m = 1; m <= M; ++m) {
                kernel.row(lambdas[li], nodes, m, row.data());
                auto& w = weights_[m - 1];
                for (std::size_t k = 0; k < m; ++k) w[k * nl + li] = row[k];
            }
        }
    });
}

std::vector<Field> DuhamelOperator::integrate(const std::vector<Field>& sources) const {
    const std::size_t M = time_.M();
    if (sources.size() != M) throw UsageError("duhamel: need one source per time interval");
    std::vector<spectral::SpectralField> src;
    src.reserve(M);
    for (const auto& f : sources) {
        if (f.grid() != grid_) throw UsageError("duhamel: source grid differs from the datum grid");
        src.push_back(spectral::dft(f));
    }
    const auto& map = grid_.modes().mode_to_lambda;
    const std::size_t nl = grid_.modes().lambdas.size();
    const std::size_t size = grid_.size();

    std::vector<std::vector<std::complex<double>>> acc(M, std::vector<std::complex<double>>(size));
    parallel_for(M, [&](std::size_t b, std::size_t e) {
        for (std::size_t mi = b; mi < e; ++mi) {
            const auto& w = weights_[mi];
            auto& out = acc[mi];
            for (std::size_t k = 0; k <= mi; ++k) {
                const double* wk = &w[k * nl];
                const auto& c = src[k].coeffs();
                for (std::size_t j = 0; j < size; ++j) out[j] += wk[map[j]] * c[j];
            }
        }
    });

    std::vector<Field> result;
    result.reserve(M);
    for (std::size_t mi = 0; mi < M; ++mi) {
        check_finite(acc[mi], mi + 1);
        result.push_back(spectral::idft(spectral::SpectralField(grid_, std::move(acc[mi]))));
    }
    return result;
}

std::vector<Field> DuhamelOperator::apply(const std::vector<Field>& states, double gamma, bool linear) const {
    if (linear) return u0_;
    if (states.size() != u0_.size()) throw UsageError("duhamel: state count differs from the time grid");
    // the interval [t_k, t_{k+1}] is represented by the state at its right end
    std::vector<Field> sources;
    sources.reserve(states.size());
    for (std::size_t k = 0; k < states.size(); ++k) sources.emplace_back(grid_, power_law(states[k], gamma, k + 1));
    auto out = integrate(sources);
    for (std::size_t m = 0; m < out.size(); ++m) out[m] = u0_[m] + out[m];
    return out;
}

Trajectory picard_step(const Trajectory& prev, const DuhamelOperator& op, const SolverConfig& config) {
    Trajectory next{prev.time, prev.datum, op.apply(prev.states, config.fp.gamma, config.linear), {}};
    next.weighted_norms = metric_profile(next, config);
    return next;
}

// ------------------------------------------------------------------- solve --

std::string_view verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Converged: return "converged";
        case Verdict::Diverged: return "diverged";
        case Verdict::MaxIters: return "max_iters";
    }
    return "?";
}

Solution solve(const Field& mu, const SolverConfig& config) {
    config.validate();
    Diagnostics diag;
    if (config.metric == Metric::Global) diag.beta = beta_exponent(config.fp, config.space.p);
    TimeGrid time = config.time;

    for (;;) {
        diag.distances.clear();
        diag.ratios.clear();
        diag.iterate_norms.clear();
        diag.iterations = 0;
        diag.verdict = Verdict::MaxIters;
        diag.horizon = time.T();

        const DuhamelOperator op(mu, time, config.fp, config.backend);
        Trajectory cur{time, mu, op.linear_part(), {}};
        cur.weighted_norms = metric_profile(cur, config);
        const auto max_of = [](const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); };
        diag.linear_norm = max_of(cur.weighted_norms);
        diag.iterate_norms.push_back(diag.linear_norm);

        for (std::size_t it = 1; it <= config.max_picard_iters; ++it) {
            Trajectory next = picard_step(cur, op, config);
            const double dist = metric_distance(next, cur, config);
            if (!diag.distances.empty()) {
                const double prev = diag.distances.back();
                diag.ratios.push_back(prev > 0.0 ? dist / prev : 0.0);
            }
            diag.distances.push_back(dist);
            diag.iterate_norms.push_back(max_of(next.weighted_norms));
            diag.iterations = it;
            cur = std::move(next);
            if (dist < config.cauchy_tol) {
                diag.verdict = Verdict::Converged;
                break;
            }
            if (dist > config.divergence_cap || diag.iterate_norms.back() > config.divergence_cap) {
                diag.verdict = Verdict::Diverged;
                break;
            }
        }
        diag.sup_norm = max_of(diag.iterate_norms);

        if (diag.verdict == Verdict::Diverged && diag.halvings < config.max_halvings) {
            std::ostringstream os;
            os << "diverged on horizon T = " << time.T() << "; retrying with T = " << time.T() / 2.0;
            diag.warnings.push_back(os.str());
            ++diag.halvings;
            time = time.with_horizon(time.T() / 2.0);
            continue;
        }
        return {std::move(cur), std::move(diag)};
    }
}

Solution solve(const norms::DiscreteMeasure& mu, const SolverConfig& config) { return solve(mu.binned(), config); }

}  // namespace fracheat::solver
