#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <string_view>
#include <vector>

namespace fracheat::specfun {

/// Gamma function on the real line. Lanczos (g = 7) for x >= 1/2, reflection below.
/// Throws DomainError at 0, -1, -2, ...
double gamma_fn(double x);

/// log Γ(x) for x > 0.
double log_gamma(double x);

/// 1/Γ(x); entire, so poles map to exactly 0.
double rgamma(double x);

enum class Branch { Closed, Series, Integral, Asymptotic, Recurrence };

std::string_view branch_name(Branch b);

struct Evaluation {
    double value = 0.0;
    double error_estimate = 0.0;
    Branch branch = Branch::Series;
};

/// Wright type function Φ_α(θ) = Σ_k (−θ)^k / (k! Γ(1 − α − αk)) on θ >= 0.
///
/// Small θ uses the power series summed with Neumaier compensation; once the
/// cancellation bound exceeds `series_tol`, the evaluator switches to the
/// positive integral representation obtained from the one-sided stable density
///
///   Φ_α(θ) = θ^{α/(1−α)} / ((1−α)π) ∫_0^π a(φ) exp(−θ^{1/(1−α)} a(φ)) dφ,
///   a(φ) = (sin αφ / sin φ)^{1/(1−α)} sin((1−α)φ) / sin αφ,
///
/// which has no cancellation. Immutable after construction apart from the
/// clamp counter, which is atomic.
class WrightEvaluator {
public:
    struct Options {
        std::size_t series_cutoff = 600;
        double theta_max = 0.0;  // 0 selects the truncation from the tail estimate
        std::size_t quad_nodes = 16;
        double tail_tol = 1e-10;
        double series_tol = 1e-12;
    };

    explicit WrightEvaluator(double alpha);
    WrightEvaluator(double alpha, Options opts);

    WrightEvaluator(const WrightEvaluator& other);
    WrightEvaluator& operator=(const WrightEvaluator&) = delete;

    double alpha() const noexcept { return alpha_; }
    double theta_max() const noexcept { return theta_max_; }
    /// Largest θ for which the series branch is used.
    double series_limit() const noexcept { return series_limit_; }
    const Options& options() const noexcept { return opts_; }

    Evaluation evaluate(double theta) const;
    double operator()(double theta) const { return evaluate(theta).value; }
    /// Memoized value, shared by copies; used by repeated adaptive quadratures.
    double cached(double theta) const;

    /// Series branch only. Throws AccuracyError when the cancellation bound
    /// exceeds `series_tol`.
    Evaluation series(double theta) const;
    Evaluation integral(double theta) const;
    /// Leading-order large-θ asymptote A θ^{(α−1/2)/(1−α)} exp(−B θ^{1/(1−α)}).
    double asymptotic(double theta) const;

    /// Number of slightly negative round-off results that were clamped to 0,
    /// and the largest clamped magnitude.
    std::size_t clamped_count() const noexcept { return clamped_.load(); }
    double clamped_max() const noexcept { return clamped_max_.load(); }

private:
    Evaluation series_unchecked(double theta) const;
    double clamp(double v) const;

    double alpha_;
    Options opts_;
    double theta_max_ = 0.0;
    double series_limit_ = 0.0;
    mutable std::atomic<std::size_t> clamped_{0};
    mutable std::atomic<double> clamped_max_{0.0};
    struct Memo;
    std::shared_ptr<Memo> memo_;
};

double wright_phi(double alpha, double theta);

/// ∫_0^∞ θ^r Φ_α(θ) dθ = Γ(1+r)/Γ(1+αr), r > −1.
double wright_moment(double alpha, double r);

struct SubordinationResult {
    double value = 0.0;
    double error_estimate = 0.0;
    /// Bound on the neglected mass beyond theta_max, sup|g| times the missing moment.
    double tail_bound = 0.0;
};

/// ∫_0^{θmax} θ^w Φ_α(θ) g(θ) dθ (times α when w = 1) by adaptive Gauss–Kronrod
/// on a partition graded geometrically toward θ = 0. Throws AccuracyError when
/// the tail bound exceeds `tol`.
SubordinationResult subordinate(const WrightEvaluator& phi, const std::function<double(double)>& g,
                                int weight_power, double tol = 1e-10);
SubordinationResult subordinate(double alpha, const std::function<double(double)>& g, int weight_power,
                                double tol = 1e-10);

/// Fixed composite Gauss–Legendre rule on [0, θmax] with Φ_α folded into the
/// weights. Used where the same Wright density is integrated against many
/// integrands (one per Fourier mode).
class SubordinationRule {
public:
    explicit SubordinationRule(const WrightEvaluator& phi);

    double alpha() const noexcept { return alpha_; }
    const std::vector<double>& nodes() const noexcept { return nodes_; }

    /// Σ_i w_i θ_i^{weight_power} Φ(θ_i) g(θ_i), scaled by α when weight_power = 1.
    template <class F>
    double integrate(F&& g, int weight_power) const {
        const auto& w = weight_power == 0 ? weights0_ : weights1_;
        double s = 0.0;
        double c = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const double term = w[i] * g(nodes_[i]);
            const double t = s + term;
            c += std::abs(s) >= std::abs(term) ? (s - t) + term : (term - t) + s;
            s = t;
        }
        return s + c;
    }

    /// ∫ Φ_α(θ) e^{−λθ} dθ (weight 0) or α∫ θΦ_α(θ) e^{−λθ} dθ (weight 1).
    double laplace(double lambda, int weight_power) const;

private:
    double alpha_;
    std::vector<double> nodes_;
    std::vector<double> weights0_;
    std::vector<double> weights1_;
};

/// Mittag-Leffler function E_{α,β}(x) on the negative real axis.
///
/// Power series for small |x|, the algebraic asymptotic expansion
/// −Σ_k x^{−k}/Γ(β − αk) for large |x|, and in between the positive integral
/// representation along the collapsed Hankel contour (valid for β < 1 + α;
/// larger β is reduced by E_{α,β}(x) = (E_{α,β−α}(x) − 1/Γ(β−α)) / x).
/// α = 1 is admitted for the classical limit.
class MittagLeffler {
public:
    MittagLeffler(double alpha, double beta);

    double alpha() const noexcept { return alpha_; }
    double beta() const noexcept { return beta_; }

    Evaluation evaluate(double x) const;
    double operator()(double x) const { return evaluate(x).value; }

    Evaluation series(double x) const;
    Evaluation asymptotic(double x) const;
    Evaluation integral(double x) const;

private:
    double alpha_;
    double beta_;
    std::vector<double> series_coeffs_;  // 1/Γ(αk + β)
    std::vector<double> asym_coeffs_;    // 1/Γ(β − αk), k >= 1
    std::shared_ptr<const MittagLeffler> lower_;  // E_{α,β−α} when β >= 1 + α
};

double mittag_leffler(double alpha, double beta, double x);

}  // namespace fracheat::specfun
