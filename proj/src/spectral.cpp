#include "fracheat/spectral.hpp"

#include "fracheat/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <tuple>

namespace fracheat::spectral {

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const ModeTable> build_modes(int dim, std::size_t n, double L) {
    auto table = std::make_shared<ModeTable>();
    const std::size_t size = dim == 1 ? n : n * n;
    std::vector<std::uint64_t> keys(size);
    auto signed_mode = [n](std::size_t i) {
        return static_cast<std::int64_t>(i) - (i < n / 2 ? 0 : static_cast<std::int64_t>(n));
    };
    for (std::size_t idx = 0; idx < size; ++idx) {
        const auto k0 = signed_mode(dim == 1 ? idx : idx / n);
        std::uint64_t key = static_cast<std::uint64_t>(k0 * k0);
        if (dim == 2) {
            const auto k1 = signed_mode(idx % n);
            key += static_cast<std::uint64_t>(k1 * k1);
        }
        keys[idx] = key;
    }
    std::vector<std::uint64_t> distinct = keys;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    const double unit = (kPi / L) * (kPi / L);
    table->lambdas.resize(distinct.size());
    for (std::size_t i = 0; i < distinct.size(); ++i) table->lambdas[i] = unit * static_cast<double>(distinct[i]);
    table->mode_to_lambda.resize(size);
    for (std::size_t idx = 0; idx < size; ++idx) {
        table->mode_to_lambda[idx] = static_cast<std::uint32_t>(
            std::lower_bound(distinct.begin(), distinct.end(), keys[idx]) - distinct.begin());
    }
    return table;
}

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

fftw_plan plan_for(int dim, std::size_t n, int sign) {
    static std::map<std::tuple<int, std::size_t, int>, fftw_plan> plans;
    std::lock_guard lock(plan_mutex());
    const auto key = std::make_tuple(dim, n, sign);
    if (auto it = plans.find(key); it != plans.end()) return it->second;
    const std::size_t size = dim == 1 ? n : n * n;
    auto* in = fftw_alloc_complex(size);
    auto* out = fftw_alloc_complex(size);
    const int dims[2] = {static_cast<int>(n), static_cast<int>(n)};
    fftw_plan p = fftw_plan_dft(dim, dims, in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    if (!p) throw std::runtime_error("fftw: plan creation failed");
    plans.emplace(key, p);
    return p;
}

void execute(int dim, std::size_t n, int sign, std::vector<std::complex<double>>& in,
             std::vector<std::complex<double>>& out) {
    fftw_execute_dft(plan_for(dim, n, sign), reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
}

void write_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
    os.write(reinterpret_cast<const char*>(b), 4);
}

void write_f64(std::ostream& os, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xffu);
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_le(std::istream& is, int bytes) {
    unsigned char b[8] = {};
    if (!is.read(reinterpret_cast<char*>(b), bytes)) throw UsageError("read_field: truncated field file");
    std::uint64_t v = 0;
    for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

}  // namespace

// ------------------------------------------------------------------ Grid ----

Grid::Grid(int dim, std::size_t n, double half_width) : dim_(dim), n_(n), L_(half_width) {
    if (dim != 1 && dim != 2) throw UsageError("grid: dim must be 1 or 2");
    if (n < 16 || (n & (n - 1)) != 0) throw UsageError("grid: points per dimension must be a power of two >= 16");
    if (!(half_width > 0.0) || !std::isfinite(half_width)) throw UsageError("grid: half width must be positive");
    size_ = dim == 1 ? n : n * n;
    modes_ = build_modes(dim, n, half_width);
}

double Grid::cell_volume() const noexcept { return dim_ == 1 ? spacing() : spacing() * spacing(); }

std::ptrdiff_t Grid::mode(std::size_t i) const noexcept {
    return i < n_ / 2 ? static_cast<std::ptrdiff_t>(i) : static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(n_);
}

double Grid::radius(std::size_t idx) const noexcept {
    if (dim_ == 1) return std::abs(coord(idx));
    return std::hypot(coord(idx / n_), coord(idx % n_));
}

double Grid::fundamental() const noexcept { return kPi / L_; }

double Grid::max_frequency() const noexcept {
    return std::sqrt(static_cast<double>(dim_)) * kPi * static_cast<double>(n_ / 2) / L_;
}

std::size_t Grid::origin_index() const noexcept { return dim_ == 1 ? n_ / 2 : (n_ / 2) * n_ + n_ / 2; }

// ----------------------------------------------------------------- Field ----

Field::Field(Grid grid) : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

Field::Field(Grid grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw UsageError("field: sample count does not match the grid");
    for (double v : values_) {
        if (!std::isfinite(v)) throw DomainError("field: non-finite sample");
    }
}

Field Field::sample(const Grid& grid, const std::function<double(const double*)>& f) {
    std::vector<double> v(grid.size());
    const std::size_t n = grid.n();
    double x[2] = {0.0, 0.0};
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        if (grid.dim() == 1) {
            x[0] = grid.coord(idx);
        } else {
            x[0] = grid.coord(idx / n);
            x[1] = grid.coord(idx % n);
        }
        v[idx] = f(x);
    }
    return Field(grid, std::move(v));
}

double Field::max_abs() const noexcept {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double Field::min() const noexcept { return *std::min_element(values_.begin(), values_.end()); }

double Field::integral() const noexcept {
    long double s = 0.0L;
    for (double v : values_) s += v;
    return static_cast<double>(s) * grid_.cell_volume();
}

double Field::lp_norm(double p) const {
    if (!(p >= 1.0)) throw DomainError("lp_norm: p must be >= 1");
    long double s = 0.0L;
    for (double v : values_) s += std::pow(std::abs(v), p);
    return std::pow(static_cast<double>(s) * grid_.cell_volume(), 1.0 / p);
}

Field Field::operator+(const Field& o) const {
    if (grid_ != o.grid_) throw UsageError("field: grid mismatch");
    std::vector<double> v(values_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.values_[i];
    return Field(grid_, std::move(v));
}

Field Field::operator-(const Field& o) const {
    if (grid_ != o.grid_) throw UsageError("field: grid mismatch");
    std::vector<double> v(values_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= o.values_[i];
    return Field(grid_, std::move(v));
}

Field Field::operator*(double c) const {
    std::vector<double> v(values_);
    for (double& x : v) x *= c;
    return Field(grid_, std::move(v));
}

// ------------------------------------------------------------- transforms ---

SpectralField::SpectralField(Grid grid, std::vector<std::complex<double>> coeffs)
    : grid_(std::move(grid)), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != grid_.size()) throw UsageError("spectral field: coefficient count does not match the grid");
}

SpectralField dft(const Field& f) {
    const auto& g = f.grid();
    std::vector<std::complex<double>> in(f.values().begin(), f.values().end());
    std::vector<std::complex<double>> out(g.size());
    execute(g.dim(), g.n(), FFTW_FORWARD, in, out);
    const double scale = 1.0 / static_cast<double>(g.size());
    for (auto& c : out) c *= scale;
    return SpectralField(g, std::move(out));
}

Field idft(const SpectralField& sf) {
    const auto& g = sf.grid();
    std::vector<std::complex<double>> in(sf.coeffs());
    std::vector<std::complex<double>> out(g.size());
    execute(g.dim(), g.n(), FFTW_BACKWARD, in, out);
    std::vector<double> v(g.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = out[i].real();
    return Field(g, std::move(v));
}

SpectralField apply_table(const SpectralField& sf, const std::vector<double>& per_lambda) {
    const auto& modes = sf.grid().modes();
    if (per_lambda.size() != modes.lambdas.size()) throw UsageError("apply_table: table size does not match the grid");
    std::vector<std::complex<double>> c(sf.coeffs());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= per_lambda[modes.mode_to_lambda[i]];
    return SpectralField(sf.grid(), std::move(c));
}

Field apply_table(const Field& f, const std::vector<double>& per_lambda) {
    return idft(apply_table(dft(f), per_lambda));
}

std::vector<double> tabulate(const Grid& grid, const std::function<double(double)>& m) {
    const auto& lambdas = grid.modes().lambdas;
    std::vector<double> out(lambdas.size());
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        out[i] = m(std::sqrt(lambdas[i]));
        if (!std::isfinite(out[i])) {
            std::ostringstream os;
            os << "apply_multiplier: multiplier not finite at |xi| = " << std::sqrt(lambdas[i]);
            throw DomainError(os.str());
        }
    }
    return out;
}

Field apply_multiplier(const Field& f, const std::function<double(double)>& m) {
    return apply_table(f, tabulate(f.grid(), m));
}

// ------------------------------------------------------- Littlewood–Paley ---

double zeta(double t) {
    constexpr double lo = 1.5;
    constexpr double hi = 5.0 / 3.0;
    if (t <= lo) return 1.0;
    if (t >= hi) return 0.0;
    const double u = (hi - t) / (hi - lo);
    auto psi = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
    const double a = psi(u);
    return a / (a + psi(1.0 - u));
}

int reachable_j_min(const Grid& grid) {
    // smallest j with 5·2^j/3 > π/L
    int j = static_cast<int>(std::floor(std::log2(0.6 * grid.fundamental()))) - 1;
    while (5.0 * std::ldexp(1.0, j) / 3.0 <= grid.fundamental()) ++j;
    while (5.0 * std::ldexp(1.0, j - 1) / 3.0 > grid.fundamental()) --j;
    return j;
}

int reachable_j_max(const Grid& grid) {
    // smallest J with 2^{−J} max|ξ| <= 3/2: the inhomogeneous sum then telescopes to 1
    int j = static_cast<int>(std::ceil(std::log2(grid.max_frequency() / 1.5)));
    while (std::ldexp(grid.max_frequency(), -j) > 1.5) ++j;
    while (std::ldexp(grid.max_frequency(), -(j - 1)) <= 1.5) --j;
    return j;
}

FilterBank filter_bank(const Grid& grid, bool homogeneous, int j_min, int j_max) {
    FilterBank bank(grid);
    bank.homogeneous_ = homogeneous;
    const int lo = homogeneous ? reachable_j_min(grid) : 1;
    const int hi = reachable_j_max(grid);
    if (j_max < j_min) {
        j_min = lo;
        j_max = hi;
    }
    if (!homogeneous) j_min = 1;
    for (int j = j_min; j <= j_max; ++j) {
        if (j < lo || j > hi) {
            std::ostringstream os;
            os << "filter bank: block j=" << j << " does not meet the grid frequencies [" << grid.fundamental()
               << ", " << grid.max_frequency() << "]; dropped";
            bank.warnings_.push_back(os.str());
        }
    }
    bank.j_min_ = std::max(j_min, lo);
    bank.j_max_ = std::min(j_max, hi);
    const auto& lambdas = grid.modes().lambdas;
    if (!homogeneous) {
        bank.blocks_.push_back(FilterBank::kLowBlock);
        std::vector<double> f(lambdas.size());
        for (std::size_t i = 0; i < lambdas.size(); ++i) f[i] = zeta(std::sqrt(lambdas[i]));
        bank.filters_.push_back(std::move(f));
    }
    for (int j = bank.j_min_; j <= bank.j_max_; ++j) {
        std::vector<double> f(lambdas.size());
        for (std::size_t i = 0; i < lambdas.size(); ++i) {
            const double xi = std::sqrt(lambdas[i]);
            f[i] = zeta(std::ldexp(xi, -j)) - zeta(std::ldexp(xi, 1 - j));
        }
        bank.blocks_.push_back(j);
        bank.filters_.push_back(std::move(f));
    }
    return bank;
}

double FilterBank::partition_deviation() const {
    const auto& lambdas = grid_.modes().lambdas;
    double dev = 0.0;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (homogeneous_ && lambdas[i] == 0.0) continue;
        double s = 0.0;
        for (const auto& f : filters_) s += f[i];
        dev = std::max(dev, std::abs(1.0 - s));
    }
    return dev;
}

std::vector<Field> FilterBank::decompose(const SpectralField& sf) const {
    if (sf.grid() != grid_) throw UsageError("filter bank: grid mismatch");
    std::vector<Field> out;
    out.reserve(filters_.size());
    for (const auto& f : filters_) out.push_back(idft(apply_table(sf, f)));
    return out;
}

std::vector<Field> FilterBank::decompose(const Field& f) const { return decompose(dft(f)); }

Field heat_semigroup(double t, const Field& f) {
    if (!(t >= 0.0)) throw DomainError("heat_semigroup: t must be nonnegative");
    if (t == 0.0) return f;
    const auto& lambdas = f.grid().modes().lambdas;
    std::vector<double> m(lambdas.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::exp(-t * lambdas[i]);
    return apply_table(f, m);
}

double boundary_mass_fraction(const Field& f) {
    const auto& g = f.grid();
    const double edge = 0.9 * g.half_width();
    double total = 0.0;
    double near = 0.0;
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const double a = std::abs(f[idx]);
        total += a;
        bool outer = std::abs(g.coord(g.dim() == 1 ? idx : idx / g.n())) > edge;
        if (g.dim() == 2) outer = outer || std::abs(g.coord(idx % g.n())) > edge;
        if (outer) near += a;
    }
    return total > 0.0 ? near / total : 0.0;
}

// --------------------------------------------------------- serialization ----

void write_field(std::ostream& os, const Field& f) {
    write_u32(os, static_cast<std::uint32_t>(f.grid().dim()));
    write_u32(os, static_cast<std::uint32_t>(f.grid().n()));
    write_f64(os, f.grid().half_width());
    for (double v : f.values()) write_f64(os, v);
}

Field read_field(std::istream& is) {
    const auto dim = static_cast<int>(read_le(is, 4));
    const auto n = static_cast<std::size_t>(read_le(is, 4));
    const double L = std::bit_cast<double>(read_le(is, 8));
    Grid grid(dim, n, L);
    std::vector<double> v(grid.size());
    for (auto& x : v) x = std::bit_cast<double>(read_le(is, 8));
    return Field(grid, std::move(v));
}

void write_field(const std::string& path, const Field& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw UsageError("write_field: cannot open " + path);
    write_field(os, f);
}

Field read_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw UsageError("read_field: cannot open " + path);
    return read_field(is);
}

void write_field_csv(std::ostream& os, const Field& f) {
    const auto& g = f.grid();
    os << (g.dim() == 1 ? "index,x,value\n" : "index,x,y,value\n");
    char buf[128];
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        if (g.dim() == 1) {
            std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", idx, g.coord(idx), f[idx]);
        } else {
            std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", idx, g.coord(idx / g.n()), g.coord(idx % g.n()),
                          f[idx]);
        }
        os << buf;
    }
}

}  // namespace fracheat::spectral
