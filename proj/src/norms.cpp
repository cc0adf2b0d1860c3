#include "fracheat/norms.hpp"

#include "fracheat/errors.hpp"
#include "fracheat/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

namespace fracheat::norms {

namespace {

// Balls are compared in cell units; the slack keeps R = k·h from losing its boundary cells to rounding.
constexpr double kRadiusSlack = 1e-12;

std::ptrdiff_t min_image(std::ptrdiff_t d, std::size_t n) {
    const auto sn = static_cast<std::ptrdiff_t>(n);
    d %= sn;
    if (d < 0) d += sn;
    if (d > sn / 2) d -= sn;
    return d;
}

struct RadiusPlan {
    std::vector<double> radii;
    std::vector<std::string> warnings;
};

RadiusPlan plan_radii(const Grid& grid, bool local, const Sampling& sampling) {
    RadiusPlan plan;
    const double h = grid.spacing();
    const double cap = local ? 1.0 : grid.half_width();
    if (sampling.stride == 0) throw UsageError("morrey: center stride must be >= 1");
    if (sampling.radii.empty()) {
        plan.radii = dyadic_radii(grid, local);
    } else {
        for (double r : sampling.radii) {
            if (!(r > 0.0) || r > cap * (1.0 + kRadiusSlack)) {
                std::ostringstream os;
                os << "morrey: radius " << r << " outside ]0, " << cap << "]";
                throw UsageError(os.str());
            }
            if (r < h * (1.0 - kRadiusSlack)) {
                std::ostringstream os;
                os << "morrey: radius " << r << " is below the grid spacing " << h << "; skipped";
                plan.warnings.push_back(os.str());
                continue;
            }
            plan.radii.push_back(r);
        }
        std::sort(plan.radii.begin(), plan.radii.end());
    }
    if (plan.radii.empty()) {
        std::ostringstream os;
        os << "morrey: no admissible radius (spacing " << h << ", largest allowed radius " << cap << ")";
        throw UsageError(os.str());
    }
    return plan;
}

/// Sums of nonnegative cell weights over periodic closed balls.
class BallSummer {
public:
    BallSummer(const Grid& grid, const std::vector<double>& w) : grid_(grid), n_(grid.n()) {
        const std::size_t n = n_;
        if (grid.dim() == 1) {
            prefix_.assign(3 * n + 1, 0.0L);
            for (std::size_t i = 0; i < 3 * n; ++i) prefix_[i + 1] = prefix_[i] + w[i % n];
        } else {
            prefix_.assign(n * (3 * n + 1), 0.0L);
            for (std::size_t y = 0; y < n; ++y) {
                long double* row = &prefix_[y * (3 * n + 1)];
                for (std::size_t i = 0; i < 3 * n; ++i) row[i + 1] = row[i] + w[y * n + i % n];
            }
        }
    }

    /// Sum over cells within `rho` cells of the center.
    long double sum(std::size_t center, double rho) const {
        const std::size_t n = n_;
        if (grid_.dim() == 1) return segment(prefix_.data(), center, static_cast<std::ptrdiff_t>(std::floor(rho)));
        const std::size_t cy = center / n;
        const std::size_t cx = center % n;
        const double rho2 = rho * rho;
        const auto ry = static_cast<std::ptrdiff_t>(std::floor(rho));
        const auto half = static_cast<std::ptrdiff_t>(n / 2);
        const std::ptrdiff_t lo = ry >= half ? -(half - 1) : -ry;
        const std::ptrdiff_t hi = ry >= half ? half : ry;
        long double s = 0.0L;
        for (std::ptrdiff_t dy = lo; dy <= hi; ++dy) {
            const double rem = rho2 - static_cast<double>(dy * dy);
            auto w = static_cast<std::ptrdiff_t>(std::floor(std::sqrt(std::max(rem, 0.0))));
            while (static_cast<double>((w + 1) * (w + 1)) <= rem) ++w;
            while (w > 0 && static_cast<double>(w * w) > rem) --w;
            const std::size_t y = static_cast<std::size_t>((static_cast<std::ptrdiff_t>(cy) + dy + 2 * static_cast<std::ptrdiff_t>(n)) %
                                                           static_cast<std::ptrdiff_t>(n));
            s += segment(&prefix_[y * (3 * n + 1)], cx, w);
        }
        return s;
    }

private:
    long double segment(const long double* p, std::size_t c, std::ptrdiff_t r) const {
        const auto n = static_cast<std::ptrdiff_t>(n_);
        if (2 * r + 1 >= n) return p[n];
        const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(c) + n - r;
        return p[start + 2 * r + 1] - p[start];
    }

    const Grid& grid_;
    std::size_t n_;
    std::vector<long double> prefix_;
};

std::vector<std::size_t> sampled_centers(const Grid& grid, std::size_t stride) {
    std::vector<std::size_t> centers;
    const std::size_t n = grid.n();
    if (grid.dim() == 1) {
        for (std::size_t i = 0; i < n; i += stride) centers.push_back(i);
    } else {
        for (std::size_t y = 0; y < n; y += stride)
            for (std::size_t x = 0; x < n; x += stride) centers.push_back(y * n + x);
    }
    return centers;
}

struct Best {
    double value = -1.0;
    std::size_t center = 0;
    std::size_t radius_index = 0;

    void offer(double v, std::size_t c, std::size_t k) {
        if (v > value || (v == value && (c < center || (c == center && k < radius_index)))) {
            value = v;
            center = c;
            radius_index = k;
        }
    }
};

/// Maximizes score(sum, radius index) over sampled centers and radii.
template <class SumFn, class ScoreFn>
MorreyResult maximize(const Grid& grid, const Sampling& sampling, RadiusPlan plan, SumFn&& ball_sum, ScoreFn&& score) {
    const auto centers = sampled_centers(grid, sampling.stride);
    const double h = grid.spacing();
    std::vector<double> rho(plan.radii.size());
    for (std::size_t k = 0; k < rho.size(); ++k) rho[k] = plan.radii[k] / h * (1.0 + kRadiusSlack);

    Best best;
    std::mutex m;
    parallel_for(centers.size(), [&](std::size_t b, std::size_t e) {
        Best local;
        for (std::size_t i = b; i < e; ++i) {
            for (std::size_t k = 0; k < rho.size(); ++k) {
                local.offer(score(ball_sum(centers[i], rho[k]), k), centers[i], k);
            }
        }
        std::lock_guard lock(m);
        best.offer(local.value, local.center, local.radius_index);
    });

    MorreyResult out;
    out.value = std::max(best.value, 0.0);
    out.center = best.center;
    out.radius = plan.radii[best.radius_index];
    out.attained_at_min_radius = best.radius_index == 0 && plan.radii.size() > 1 && out.value > 0.0;
    out.warnings = std::move(plan.warnings);
    return out;
}

std::vector<double> powered(const Field& u, double q) {
    std::vector<double> w(u.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::pow(std::abs(u[i]), q);
    return w;
}

}  // namespace

void MorreyParams::validate() const {
    if (!(q >= 1.0 && q <= p && std::isfinite(p))) {
        std::ostringstream os;
        os << "morrey: indices must satisfy 1 <= q <= p < inf (got p=" << p << ", q=" << q << ")";
        throw UsageError(os.str());
    }
}

void SpaceParams::validate() const {
    MorreyParams{p, q, false}.validate();
    if (!(r >= 1.0)) throw UsageError("besov-morrey: r must lie in [1, inf]");
    if (!std::isfinite(s)) throw UsageError("besov-morrey: s must be finite");
}

std::vector<double> dyadic_radii(const Grid& grid, bool local) {
    const double cap = local ? 1.0 : grid.half_width();
    std::vector<double> r;
    for (double R = grid.spacing(); R <= cap * (1.0 + kRadiusSlack); R *= 2.0) r.push_back(R);
    return r;
}

MorreyResult morrey_norm(const Field& u, const MorreyParams& params, const Sampling& sampling) {
    params.validate();
    const auto& grid = u.grid();
    auto plan = plan_radii(grid, params.local, sampling);
    const double N = grid.dim();
    const double expo = N / params.p - N / params.q;
    std::vector<double> radius_factor(plan.radii.size());
    for (std::size_t k = 0; k < plan.radii.size(); ++k) radius_factor[k] = std::pow(plan.radii[k], expo);
    const double vol = grid.cell_volume();
    const double inv_q = 1.0 / params.q;
    BallSummer summer(grid, powered(u, params.q));
    return maximize(
        grid, sampling, std::move(plan), [&](std::size_t c, double rho) { return summer.sum(c, rho); },
        [&](long double s, std::size_t k) {
            return radius_factor[k] * std::pow(static_cast<double>(s) * vol, inv_q);
        });
}

std::vector<double> morrey_profile(const Field& u, const MorreyParams& params, std::size_t center,
                                   const std::vector<double>& radii) {
    params.validate();
    const auto& grid = u.grid();
    BallSummer summer(grid, powered(u, params.q));
    const double N = grid.dim();
    std::vector<double> out;
    for (double R : radii) {
        const long double s = summer.sum(center, R / grid.spacing() * (1.0 + kRadiusSlack));
        out.push_back(std::pow(R, N / params.p - N / params.q) *
                      std::pow(static_cast<double>(s) * grid.cell_volume(), 1.0 / params.q));
    }
    return out;
}

double DiscreteMeasure::total_variation() const {
    double s = 0.0;
    for (const auto& a : atoms) s += std::abs(a.weight);
    return s;
}

Field DiscreteMeasure::binned() const {
    std::vector<double> v(grid.size(), 0.0);
    const double vol = grid.cell_volume();
    for (const auto& a : atoms) {
        if (a.index >= grid.size()) throw UsageError("measure: atom outside the grid");
        v[a.index] += a.weight / vol;
    }
    return Field(grid, std::move(v));
}

MorreyResult measure_morrey_norm(const DiscreteMeasure& mu, double p, bool local, const Sampling& sampling) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw UsageError("measure morrey: p must lie in [1, inf)");
    const auto& grid = mu.grid;
    auto plan = plan_radii(grid, local, sampling);
    const double N = grid.dim();
    std::vector<double> radius_factor(plan.radii.size());
    for (std::size_t k = 0; k < plan.radii.size(); ++k) radius_factor[k] = std::pow(plan.radii[k], N / p - N);
    const std::size_t n = grid.n();
    auto mass = [&](std::size_t c, double rho) {
        long double s = 0.0L;
        for (const auto& a : mu.atoms) {
            double d2 = 0.0;
            if (grid.dim() == 1) {
                const auto d = min_image(static_cast<std::ptrdiff_t>(a.index) - static_cast<std::ptrdiff_t>(c), n);
                d2 = static_cast<double>(d * d);
            } else {
                const auto dy = min_image(static_cast<std::ptrdiff_t>(a.index / n) - static_cast<std::ptrdiff_t>(c / n), n);
                const auto dx = min_image(static_cast<std::ptrdiff_t>(a.index % n) - static_cast<std::ptrdiff_t>(c % n), n);
                d2 = static_cast<double>(dx * dx + dy * dy);
            }
            if (d2 <= rho * rho) s += std::abs(a.weight);
        }
        return s;
    };
    auto out = maximize(grid, sampling, std::move(plan), mass,
                        [&](long double s, std::size_t k) { return radius_factor[k] * static_cast<double>(s); });
    if (out.attained_at_min_radius) {
        out.warnings.push_back(
            "measure morrey: supremum attained at the smallest radius; the estimate depends on the grid spacing");
    }
    return out;
}

double lr_aggregate(const std::vector<double>& terms, double r) {
    if (terms.empty()) return 0.0;
    if (std::isinf(r)) return *std::max_element(terms.begin(), terms.end());
    const double top = *std::max_element(terms.begin(), terms.end());
    if (top == 0.0) return 0.0;
    long double s = 0.0L;
    for (double t : terms) s += std::pow(t / top, r);
    return top * std::pow(static_cast<double>(s), 1.0 / r);
}

BesovResult besov_morrey_norm(const Field& u, const SpaceParams& space, const FilterBank& bank,
                              const Sampling& sampling) {
    space.validate();
    if (u.grid() != bank.grid()) throw UsageError("besov-morrey: field grid does not match the filter bank");
    if (space.homogeneous != bank.homogeneous()) {
        throw UsageError("besov-morrey: homogeneous space requires a homogeneous filter bank and vice versa");
    }
    const MorreyParams mp{space.p, space.q, !space.homogeneous};
    const auto blocks = bank.decompose(u);
    BesovResult out;
    out.warnings = bank.warnings();
    double low = 0.0;
    std::vector<double> terms;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const int j = bank.blocks()[b];
        auto res = morrey_norm(blocks[b], mp, sampling);
        out.warnings.insert(out.warnings.end(), res.warnings.begin(), res.warnings.end());
        out.blocks.push_back(j);
        out.block_norms.push_back(res.value);
        if (j == FilterBank::kLowBlock) {
            low = res.value;
        } else {
            terms.push_back(std::pow(2.0, space.s * j) * res.value);
        }
    }
    out.value = low + lr_aggregate(terms, space.r);
    return out;
}

BesovResult besov_morrey_norm(const DiscreteMeasure& mu, const SpaceParams& space, const FilterBank& bank,
                              const Sampling& sampling) {
    return besov_morrey_norm(mu.binned(), space, bank, sampling);
}

double besov_l1_norm(const Field& u, double s, const FilterBank& bank) {
    if (u.grid() != bank.grid()) throw UsageError("besov l1: field grid does not match the filter bank");
    const auto blocks = bank.decompose(u);
    double total = 0.0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const int j = bank.blocks()[b];
        const double w = j == FilterBank::kLowBlock ? 1.0 : std::pow(2.0, s * j);
        total += w * blocks[b].lp_norm(1.0);
    }
    return total;
}

double highfreq_limsup(const Field& u, double s, double p, double q, int j0, const FilterBank& bank,
                       const Sampling& sampling) {
    if (u.grid() != bank.grid()) throw UsageError("highfreq: field grid does not match the filter bank");
    if (j0 > bank.j_max()) {
        std::ostringstream os;
        os << "highfreq: j0=" << j0 << " lies beyond the Nyquist block j=" << bank.j_max();
        throw DomainError(os.str());
    }
    const MorreyParams mp{p, q, !bank.homogeneous()};
    mp.validate();
    const auto sf = spectral::dft(u);
    double best = 0.0;
    for (std::size_t b = 0; b < bank.blocks().size(); ++b) {
        const int j = bank.blocks()[b];
        if (j == FilterBank::kLowBlock || j < j0) continue;
        const auto block = spectral::idft(spectral::apply_table(sf, bank.filters()[b]));
        best = std::max(best, std::pow(2.0, s * j) * morrey_norm(block, mp, sampling).value);
    }
    return best;
}

double highfreq_limsup(const DiscreteMeasure& mu, double s, double p, double q, int j0, const FilterBank& bank,
                       const Sampling& sampling) {
    return highfreq_limsup(mu.binned(), s, p, q, j0, bank, sampling);
}

}  // namespace fracheat::norms
