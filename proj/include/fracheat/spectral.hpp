#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace fracheat::spectral {

/// Distinct values of |ξ|² on a grid and the map from Fourier mode to that value.
/// Radial multipliers are evaluated once per distinct value.
struct ModeTable {
    std::vector<double> lambdas;           // ascending, lambdas[0] = 0
    std::vector<std::uint32_t> mode_to_lambda;
};

/// Periodic grid on [−L, L)^dim with n points per axis.
class Grid {
public:
    Grid(int dim, std::size_t n, double half_width);

    int dim() const noexcept { return dim_; }
    std::size_t n() const noexcept { return n_; }
    double half_width() const noexcept { return L_; }
    double spacing() const noexcept { return 2.0 * L_ / static_cast<double>(n_); }
    double cell_volume() const noexcept;
    std::size_t size() const noexcept { return size_; }

    /// Coordinate −L + i h along one axis.
    double coord(std::size_t i) const noexcept { return -L_ + static_cast<double>(i) * spacing(); }
    /// Signed mode number in [−n/2, n/2) for FFT index i.
    std::ptrdiff_t mode(std::size_t i) const noexcept;
    /// |x| for flat index idx (row-major, last axis fastest).
    double radius(std::size_t idx) const noexcept;
    /// Smallest and largest nonzero |ξ| on the grid.
    double fundamental() const noexcept;
    double max_frequency() const noexcept;
    /// Flat index of the point x = 0.
    std::size_t origin_index() const noexcept;

    const ModeTable& modes() const noexcept { return *modes_; }

    bool operator==(const Grid& other) const noexcept {
        return dim_ == other.dim_ && n_ == other.n_ && L_ == other.L_;
    }
    bool operator!=(const Grid& other) const noexcept { return !(*this == other); }

private:
    int dim_;
    std::size_t n_;
    double L_;
    std::size_t size_;
    std::shared_ptr<const ModeTable> modes_;
};

/// Real samples on a grid; construction rejects NaN/Inf.
class Field {
public:
    explicit Field(Grid grid);
    Field(Grid grid, std::vector<double> values);
    /// Samples f(x) (dim 1) or f(x, y) (dim 2) at the grid points.
    static Field sample(const Grid& grid, const std::function<double(const double* x)>& f);

    const Grid& grid() const noexcept { return grid_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const noexcept { return values_[i]; }

    double max_abs() const noexcept;
    double min() const noexcept;
    /// Riemann sums h^N Σ f and h^N Σ |f|^p.
    double integral() const noexcept;
    double lp_norm(double p) const;

    Field operator+(const Field& o) const;
    Field operator-(const Field& o) const;
    Field operator*(double c) const;

private:
    Grid grid_;
    std::vector<double> values_;
};

/// DFT coefficients c_k = n^{−N} Σ_j f_j e^{−2πi j·k/n}, in FFT order.
class SpectralField {
public:
    SpectralField(Grid grid, std::vector<std::complex<double>> coeffs);

    const Grid& grid() const noexcept { return grid_; }
    const std::vector<std::complex<double>>& coeffs() const noexcept { return coeffs_; }
    std::vector<std::complex<double>>& coeffs() noexcept { return coeffs_; }

private:
    Grid grid_;
    std::vector<std::complex<double>> coeffs_;
};

SpectralField dft(const Field& f);
Field idft(const SpectralField& sf);

/// Multiplies every mode by m(λ_index) where the index refers to grid.modes().lambdas.
SpectralField apply_table(const SpectralField& sf, const std::vector<double>& per_lambda);
Field apply_table(const Field& f, const std::vector<double>& per_lambda);

/// ℱ^{−1}[m(|ξ|) ℱ f]. Throws DomainError if m is not finite at a grid frequency.
Field apply_multiplier(const Field& f, const std::function<double(double)>& m);

/// Evaluates m(|ξ|) once per distinct |ξ|² of the grid.
std::vector<double> tabulate(const Grid& grid, const std::function<double(double)>& m);

/// C^∞ cutoff: 1 on [0, 3/2], 0 on [5/3, ∞), monotone between (exp(−1/x) ramp).
double zeta(double t);

class FilterBank {
public:
    /// Index used for the low-frequency lump φ_(0) of the inhomogeneous bank.
    static constexpr int kLowBlock = -1000;

    const Grid& grid() const noexcept { return grid_; }
    bool homogeneous() const noexcept { return homogeneous_; }
    /// Block labels in ascending order; kLowBlock first when inhomogeneous.
    const std::vector<int>& blocks() const noexcept { return blocks_; }
    /// filters()[b][λ index]
    const std::vector<std::vector<double>>& filters() const noexcept { return filters_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }
    int j_min() const noexcept { return j_min_; }
    int j_max() const noexcept { return j_max_; }

    /// Largest |1 − Σ_b φ_b(ξ)| over the grid frequencies (ξ ≠ 0 for homogeneous banks).
    double partition_deviation() const;

    /// The blocks ℱ^{−1} φ_b ℱ f, in the order of blocks().
    std::vector<Field> decompose(const Field& f) const;
    std::vector<Field> decompose(const SpectralField& sf) const;

private:
    friend FilterBank filter_bank(const Grid&, bool, int, int);
    explicit FilterBank(Grid grid) : grid_(std::move(grid)) {}

    Grid grid_;
    bool homogeneous_ = false;
    int j_min_ = 0;
    int j_max_ = 0;
    std::vector<int> blocks_;
    std::vector<std::vector<double>> filters_;
    std::vector<std::string> warnings_;
};

/// Littlewood–Paley bank. For the inhomogeneous bank j_min is ignored (φ_(0) covers
/// low frequencies). Requested blocks that do not meet the grid's frequency range
/// are dropped with a warning. Passing j_max < j_min selects the full reachable range.
FilterBank filter_bank(const Grid& grid, bool homogeneous, int j_min = 1, int j_max = 0);

/// Reachable block range on a grid: smallest j with 5·2^j/3 > π/L and smallest j
/// with 3·2^j/4 > max |ξ| minus one.
int reachable_j_min(const Grid& grid);
int reachable_j_max(const Grid& grid);

/// e^{tΔ} f. The ξ = 0 multiplier is exactly 1.
Field heat_semigroup(double t, const Field& f);

/// Fraction of Σ|f| carried by cells within 10% of the boundary.
double boundary_mass_fraction(const Field& f);

void write_field(std::ostream& os, const Field& f);
Field read_field(std::istream& is);
void write_field(const std::string& path, const Field& f);
Field read_field(const std::string& path);
void write_field_csv(std::ostream& os, const Field& f);

}  // namespace fracheat::spectral
