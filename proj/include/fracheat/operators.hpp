#pragma once

#include "fracheat/norms.hpp"
#include "fracheat/spectral.hpp"
#include "fracheat/specfun.hpp"

#include <cstddef>
#include <string_view>
#include <vector>

namespace fracheat::operators {

using spectral::Field;
using spectral::Grid;

/// Order α ∈ ]0,1], nonlinearity exponent γ > 1 and space dimension N.
/// α = 1 is the classical heat equation.
struct FracParams {
    double alpha = 0.5;
    double gamma = 3.0;
    int dim = 1;

    void validate() const;
};

enum class Backend { MlMultiplier, Subordination };

std::string_view backend_name(Backend b);
/// Accepts "ml_multiplier" and "subordination".
Backend parse_backend(std::string_view name);

struct OperatorBackend {
    Backend variant = Backend::MlMultiplier;
    /// Gauss–Legendre nodes per panel of the subordination rule.
    std::size_t quad_nodes = 16;
};

/// Per-mode multipliers indexed like grid.modes().lambdas:
/// E_α(−λ t^α) for P_α(t) and E_{α,α}(−λ t^α) for S_α(t).
std::vector<double> p_alpha_table(double t, const Grid& grid, double alpha, const OperatorBackend& backend = {});
std::vector<double> s_alpha_table(double t, const Grid& grid, double alpha, const OperatorBackend& backend = {});

Field p_alpha(double t, const Field& mu, const FracParams& fp, const OperatorBackend& backend = {});
Field s_alpha(double t, const Field& f, const FracParams& fp, const OperatorBackend& backend = {});

/// Exact product-integration weight ∫_a^b (t−τ)^{α−1} E_{α,α}(−λ(t−τ)^α) dτ
/// = [E_α(−λ(t−b)^α) − E_α(−λ(t−a)^α)] / λ. Small λ(t−a)^α is summed as a series
/// to avoid the cancellation; λ = 0 gives ((t−a)^α − (t−b)^α)/Γ(1+α).
class DuhamelKernel {
public:
    explicit DuhamelKernel(double alpha);

    double alpha() const noexcept { return alpha_; }
    double weight(double lambda, double t, double a, double b) const;
    /// Σ of the weights over a partition of [0, t]: (1 − E_α(−λ t^α)) / λ.
    double total(double lambda, double t) const;
    /// Weights of [t_k, t_{k+1}] for k < m at the target time t_m, written to out[k].
    /// Neighbouring intervals share their Mittag-Leffler evaluations.
    void row(double lambda, const std::vector<double>& nodes, std::size_t m, double* out) const;

private:
    double series_weight(double lambda, double da, double db) const;

    double alpha_;
    specfun::MittagLeffler e_;
    std::vector<double> rgamma_;  // 1/Γ(αk + 1), k >= 1
};

double duhamel_weights(const FracParams& fp, double lambda, double t, double a, double b);

enum class Smoother { Heat, PAlpha, SAlpha };

std::string_view smoother_name(Smoother op);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // RMS of the log residuals
    double expected = 0.0;
    std::size_t points = 0;
    std::vector<double> times;
    std::vector<double> norms;
};

/// Least-squares slope of log ‖op(t) data | N^σ_{p,q,r}‖ against log t over the
/// entries of t_grid with t <= 1 (where t^{(s−σ)α/2} dominates). `space.s` is
/// replaced by σ; `s` is the smoothness assumed for the data and only enters the
/// hypothesis check s <= σ, σ − s < 2 (heat, P_α) or 4 (S_α), and the expected slope.
SlopeFit smoothing_slope(Smoother op, const Field& data, double s, double sigma, const norms::SpaceParams& space,
                         const std::vector<double>& t_grid, const FracParams& fp,
                         const OperatorBackend& backend = {}, const norms::Sampling& sampling = {});

/// Ordinary least squares y = a + b x; returns {b, a, rms residual}.
struct LineFit {
    double slope;
    double intercept;
    double residual;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fracheat::operators
