#pragma once

#include "fracheat/norms.hpp"
#include "fracheat/operators.hpp"
#include "fracheat/solver.hpp"
#include "fracheat/spectral.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fracheat::experiments {

using operators::FracParams;
using spectral::Field;
using spectral::Grid;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool lo_closed = false;
    bool hi_closed = false;

    bool empty() const noexcept;
    bool contains(double x) const noexcept;
    std::string str() const;
};

struct AdmissibilityReport {
    bool local_ok = false;
    std::vector<std::string> local_reasons;  // violated conditions of the local theorem
    bool global_ok = false;
    std::vector<std::string> global_reasons;
    /// Values of s meeting every local hypothesis for the queried (γ, p, q); empty when
    /// γ ≤ q ≤ p fails.
    Interval s_window;
    /// The displayed window ]N(γ−1)/2, min{...}[ of the global theorem; empty when
    /// γ ≤ γ(α). It does not include the separate requirement γ ≤ q ≤ p.
    Interval p_window;
    double gamma_threshold = 0.0;  // γ(α)
    double gamma_branch_fractional = 0.0;  // 1 + 2α/(Nα + 2(1−α))
    double gamma_branch_quadratic = 0.0;   // (4 − N + √(N² + 16))/4
    double beta = 0.0;
    double q_c = 0.0;
    double critical_s = 0.0;  // N/p − 2/(γ−1)
};

/// Hypothesis text of the local existence window, quoted in reasons and usage errors.
inline constexpr std::string_view kLocalWindowText = "max{−2/αγ,−2} < s < 0";

/// Evaluates every hypothesis of the local and global existence theorems. Never throws.
AdmissibilityReport admissible_params(const FracParams& fp, const norms::SpaceParams& space);

enum class DataKind { Gaussian, L1Bump, Dirac, DiracDerivative, PowerLaw, RandomBand };

std::string_view data_kind_name(DataKind k);
DataKind parse_data_kind(std::string_view name);

struct DataSpec {
    DataKind kind = DataKind::Gaussian;
    double amplitude = 1.0;
    double scale = 1.0;
    std::uint64_t seed = 0;
    /// Decay exponent a of c|x|^{−a} (power_law); the theorems use a = 2/(γ−1).
    double exponent = 1.0;
    /// Littlewood–Paley blocks carrying the random_band spectrum.
    int band_lo = 1;
    int band_hi = 3;
};

using Datum = std::variant<Field, norms::DiscreteMeasure>;

/// gaussian: c e^{−|x|²/(2λ²)}; l1_bump: c λ^{−N} ψ(x/λ) with ψ a smooth bump of unit
/// integral; dirac: atom of weight c at 0; dirac_derivative: atoms ±c/h at 0 and one cell
/// further along the last axis (pairing ≈ −c ∂ψ(0)); power_law: c|x/λ|^{−a} whose
/// singular cell holds the cell average; random_band: band-limited noise of grid L² norm c.
Datum make_data(const DataSpec& spec, const Grid& grid);
/// Measures are binned onto the grid.
Field as_field(const Datum& d);

/// L² grid pairing h^N Σ u ψ.
double pairing(const Field& u, const Field& psi);
double pairing(const norms::DiscreteMeasure& mu, const Field& psi);

/// Rectangular text table written as CSV (header row, '.' decimals, %.17g numbers).
class Table {
public:
    explicit Table(std::vector<std::string> header);

    void add_row(std::vector<std::string> row);
    const std::vector<std::string>& header() const noexcept { return header_; }
    const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }
    /// Numeric value of a cell (throws UsageError for non-numeric cells).
    double number(std::size_t row, std::string_view column) const;

    void write_csv(std::ostream& os) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::string fmt(double x);

struct StudyReport {
    StudyReport(std::string study, std::vector<std::string> header)
        : name(std::move(study)), table(std::move(header)) {}

    std::string name;
    Table table{{}};
    bool passed = false;
    std::map<std::string, double> metrics;
    std::vector<std::string> warnings;
};

struct SmoothingConfig {
    std::size_t n = 4096;
    double half_width = 32.0;
    std::vector<double> alphas{0.5, 0.8};
    double sigma = 0.5;
    /// p, q, r and the bank type of the target space (its s is replaced by σ).
    norms::SpaceParams space{0.0, 2.0, 1.0, 1.0, true};
    std::vector<double> times;  // empty: 9 log-spaced points in [1e−2, 1]
    double tolerance = 0.05;
};

/// Smoothing slopes of heat, P_α and S_α applied to a point mass (which sits at
/// smoothness s = −N + N/p), plus Gaussian data measured at σ = s on times scaled by 1e−2.
StudyReport study_smoothing(const SmoothingConfig& cfg);

/// Slope of log (P_α(t)δ)(0) against log t; theory −Nα/2 for N = 1.
struct DecayConfig {
    std::size_t n = 4096;
    double half_width = 32.0;
    std::vector<double> alphas{0.5, 0.8};
    std::vector<double> times;  // empty: 9 log-spaced points in [1e−2, 1]
    double tolerance = 0.03;
};
StudyReport study_delta_decay(const DecayConfig& cfg);

struct ScalingConfig {
    solver::SolverConfig solver;
    std::size_t n = 256;
    double half_width = 16.0;
    DataSpec data{DataKind::Gaussian, 0.5, 1.0};
    std::vector<double> lambdas{0.5, 2.0};
    double tolerance = 0.02;
};
/// Compares the solution for λ^{2α/(γ−1)}μ(λ^α x) with the rescaled solution, node by node.
StudyReport study_scaling(const ScalingConfig& cfg);

struct WeakConvergenceConfig {
    FracParams fp{0.8, 3.0, 1};
    norms::SpaceParams space{-1.0 / 3.0, 3.0, 3.0};
    operators::OperatorBackend backend;
    /// Log grid from 1e−4·T to T with 16 nodes per decade.
    double horizon = 0.1;
    std::size_t n = 4096;
    double half_width = 8.0;
    /// Smooth datum for the pairing gap; a critical power law c|x|^{−(N/p−s)} for the
    /// Duhamel decay rate.
    double smooth_amplitude = 0.3;
    double power_amplitude = 0.05;
    std::vector<double> psi_widths{0.5, 1.0, 2.0};
    double gap_factor = 10.0;
    double slope_tolerance = 0.1;
};
StudyReport study_weak_convergence(const WeakConvergenceConfig& cfg);

struct ContinuityConfig {
    solver::SolverConfig solver;  // uniform time grid with M a multiple of 64 is used
    std::size_t n = 512;
    double half_width = 32.0;
    DataSpec data{DataKind::Gaussian, 0.5, 1.0};
    double slack = 1.1;
};
/// ‖u(t+h) − u(t) | N^s_{p,q,∞}‖ for h = T/4, T/8, ..., T/64 at t = T/2 and t = T/16,
/// for the nonlinear and the linear run.
StudyReport study_continuity(const ContinuityConfig& cfg);

struct DoublyCriticalConfig {
    solver::SolverConfig solver;
    std::size_t n = 512;
    double half_width = 32.0;
    DataSpec data{DataKind::L1Bump, 2.0, 1.0};
    std::vector<double> lambdas{1.0, 0.5, 0.25, 0.125};
    int j0 = 1;
    double delta = 0.05;
    /// Optional observational run at λ = 1 with this amplitude (0 skips it).
    double large_amplitude = 20.0;
};
StudyReport study_doubly_critical(const DoublyCriticalConfig& cfg);

struct GlobalConfig {
    FracParams fp{0.8, 3.0, 1};
    double p = 3.0;
    double q = 3.0;
    double p_query = 2.0;  // p reported against the displayed window
    std::size_t n = 1024;
    double half_width = 64.0;
    double horizon = 100.0;
    std::size_t M = 64;
    double t_first = 1e-4;
    DataSpec data{DataKind::Gaussian, 1.0, 1.0};
    double delta = 0.05;  // homogeneous critical-norm target for the scaled datum
    double cauchy_tol = 1e-8;
};
StudyReport study_global(const GlobalConfig& cfg);

/// 9 log-spaced points in [lo, hi].
std::vector<double> log_times(double lo, double hi, std::size_t count);

}  // namespace fracheat::experiments
