#include "fracheat/operators.hpp"

#include "fracheat/errors.hpp"
#include "fracheat/parallel.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <utility>

namespace fracheat::operators {

namespace {

constexpr std::size_t kSeriesTerms = 400;
/// The Duhamel weight switches from the Mittag-Leffler difference to its power
/// series when λ(t−a)^α falls below this.
constexpr double kSeriesReach = 1.0;

void check_time(double t, const char* who) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        std::ostringstream os;
        os << who << ": time must be positive and finite (got " << t << ")";
        throw DomainError(os.str());
    }
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("operators: alpha must lie in ]0,1]");
}

/// Subordination rules are costly to build (one Wright evaluation per node) and
/// reused across times and fields, so they are cached per (α, nodes).
std::shared_ptr<const specfun::SubordinationRule> subordination_rule(double alpha, std::size_t nodes) {
    static std::mutex mutex;
    static std::map<std::pair<double, std::size_t>, std::shared_ptr<const specfun::SubordinationRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{alpha, nodes}];
    if (!slot) {
        specfun::WrightEvaluator::Options opts;
        opts.quad_nodes = nodes;
        slot = std::make_shared<const specfun::SubordinationRule>(specfun::WrightEvaluator(alpha, opts));
    }
    return slot;
}

std::vector<double> multiplier_table(double t, const Grid& grid, double alpha, const OperatorBackend& backend,
                                     int weight_power) {
    check_alpha(alpha);
    const auto& lambdas = grid.modes().lambdas;
    std::vector<double> out(lambdas.size());
    const double ta = std::pow(t, alpha);
    const double at_zero = weight_power == 0 ? 1.0 : specfun::rgamma(alpha);

    if (alpha == 1.0) {
        // Φ_1 is the point mass at θ = 1; both backends reduce to the heat multiplier.
        for (std::size_t i = 0; i < lambdas.size(); ++i) out[i] = std::exp(-lambdas[i] * t);
        out[0] = 1.0;
        return out;
    }

    if (backend.variant == Backend::MlMultiplier) {
        const specfun::MittagLeffler e(alpha, weight_power == 0 ? 1.0 : alpha);
        parallel_for(lambdas.size(), [&](std::size_t b, std::size_t end) {
            for (std::size_t i = b; i < end; ++i) out[i] = e(-lambdas[i] * ta);
        });
    } else {
        const auto rule = subordination_rule(alpha, backend.quad_nodes);
        parallel_for(lambdas.size(), [&](std::size_t b, std::size_t end) {
            for (std::size_t i = b; i < end; ++i) out[i] = rule->laplace(lambdas[i] * ta, weight_power);
        });
    }
    out[0] = at_zero;
    return out;
}

}  // namespace

void FracParams::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw UsageError("alpha must lie in ]0,1]");
    if (!(gamma > 1.0) || !std::isfinite(gamma)) throw UsageError("gamma must be > 1");
    if (dim != 1 && dim != 2) throw UsageError("dimension must be 1 or 2");
}

std::string_view backend_name(Backend b) {
    return b == Backend::MlMultiplier ? "ml_multiplier" : "subordination";
}

Backend parse_backend(std::string_view name) {
    if (name == "ml_multiplier") return Backend::MlMultiplier;
    if (name == "subordination") return Backend::Subordination;
    throw UsageError("unknown operator backend '" + std::string(name) + "' (expected ml_multiplier or subordination)");
}

std::vector<double> p_alpha_table(double t, const Grid& grid, double alpha, const OperatorBackend& backend) {
    check_time(t, "p_alpha");
    return multiplier_table(t, grid, alpha, backend, 0);
}

std::vector<double> s_alpha_table(double t, const Grid& grid, double alpha, const OperatorBackend& backend) {
    check_time(t, "s_alpha");
    return multiplier_table(t, grid, alpha, backend, 1);
}

Field p_alpha(double t, const Field& mu, const FracParams& fp, const OperatorBackend& backend) {
    return spectral::apply_table(mu, p_alpha_table(t, mu.grid(), fp.alpha, backend));
}

Field s_alpha(double t, const Field& f, const FracParams& fp, const OperatorBackend& backend) {
    return spectral::apply_table(f, s_alpha_table(t, f.grid(), fp.alpha, backend));
}

DuhamelKernel::DuhamelKernel(double alpha) : alpha_(alpha), e_(alpha, 1.0) {
    check_alpha(alpha);
    rgamma_.resize(kSeriesTerms + 1);
    for (std::size_t k = 1; k <= kSeriesTerms; ++k) rgamma_[k] = specfun::rgamma(alpha * static_cast<double>(k) + 1.0);
}

double DuhamelKernel::series_weight(double lambda, double da, double db) const {
    // Σ_{k>=1} (−λ)^{k−1} (da^{αk} − db^{αk}) / Γ(αk+1)
    const double log_ratio = db > 0.0 ? std::log(db / da) : -INFINITY;
    const double xa = std::pow(da, alpha_);
    double sum = 0.0;
    double power = 1.0;  // (−λ)^{k−1} da^{α(k−1)}
    for (std::size_t k = 1; k <= kSeriesTerms; ++k) {
        const double kk = alpha_ * static_cast<double>(k);
        const double gap = db > 0.0 ? -std::expm1(kk * log_ratio) : 1.0;
        const double term = power * xa * gap * rgamma_[k];
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
        power *= -lambda * xa;
    }
    return sum;
}

double DuhamelKernel::weight(double lambda, double t, double a, double b) const {
    if (!(lambda >= 0.0)) throw DomainError("duhamel_weights: eigenvalue must be nonnegative");
    if (!(a >= 0.0 && a < b && b <= t)) {
        std::ostringstream os;
        os << "duhamel_weights: need 0 <= a < b <= t (got a=" << a << ", b=" << b << ", t=" << t << ")";
        throw DomainError(os.str());
    }
    const double da = t - a;
    const double db = t - b;
    if (lambda * std::pow(da, alpha_) <= kSeriesReach) return series_weight(lambda, da, db);
    const double eb = db > 0.0 ? e_(-lambda * std::pow(db, alpha_)) : 1.0;
    return (eb - e_(-lambda * std::pow(da, alpha_))) / lambda;
}

double DuhamelKernel::total(double lambda, double t) const { return weight(lambda, t, 0.0, t); }

void DuhamelKernel::row(double lambda, const std::vector<double>& nodes, std::size_t m, double* out) const {
    if (!(lambda >= 0.0)) throw DomainError("duhamel_weights: eigenvalue must be nonnegative");
    const double tm = nodes.at(m);
    // walk k = m−1, ..., 0 so that E at the near end of each interval is the far end of the previous one
    double e_near = 1.0;
    bool have_near = true;
    for (std::size_t k = m; k-- > 0;) {
        const double da = tm - nodes[k];
        const double db = tm - nodes[k + 1];
        if (!(da > db)) throw DomainError("duhamel_weights: time nodes must increase");
        const double xa = lambda * std::pow(da, alpha_);
        if (xa <= kSeriesReach) {
            out[k] = series_weight(lambda, da, db);
            have_near = false;
            continue;
        }
        const double eb = have_near ? e_near : (db > 0.0 ? e_(-lambda * std::pow(db, alpha_)) : 1.0);
        const double ea = e_(-xa);
        out[k] = (eb - ea) / lambda;
        e_near = ea;
        have_near = true;
    }
}

double duhamel_weights(const FracParams& fp, double lambda, double t, double a, double b) {
    return DuhamelKernel(fp.alpha).weight(lambda, t, a, b);
}

std::string_view smoother_name(Smoother op) {
    switch (op) {
        case Smoother::Heat: return "heat";
        case Smoother::PAlpha: return "p_alpha";
        case Smoother::SAlpha: return "s_alpha";
    }
    return "?";
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw UsageError("fit_line: need at least two points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw UsageError("fit_line: abscissae are all equal");
    LineFit fit{sxy / sxx, 0.0, 0.0};
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

SlopeFit smoothing_slope(Smoother op, const Field& data, double s, double sigma, const norms::SpaceParams& space,
                         const std::vector<double>& t_grid, const FracParams& fp, const OperatorBackend& backend,
                         const norms::Sampling& sampling) {
    const double gap_limit = op == Smoother::SAlpha ? 4.0 : 2.0;
    if (!(s <= sigma && sigma - s < gap_limit)) {
        std::ostringstream os;
        os << "smoothing_slope: need s <= sigma and sigma - s < " << gap_limit << " (got s=" << s
           << ", sigma=" << sigma << ")";
        throw UsageError(os.str());
    }
    norms::SpaceParams target = space;
    target.s = sigma;
    target.validate();

    SlopeFit out;
    for (double t : t_grid) {
        if (t > 0.0 && t <= 1.0) out.times.push_back(t);
    }
    if (out.times.size() < 4) throw UsageError("smoothing_slope: fewer than 4 times in ]0, 1]");

    const auto bank = spectral::filter_bank(data.grid(), space.homogeneous);
    std::vector<double> lx, ly;
    for (double t : out.times) {
        Field u = op == Smoother::Heat     ? spectral::heat_semigroup(t, data)
                  : op == Smoother::PAlpha ? p_alpha(t, data, fp, backend)
                                           : s_alpha(t, data, fp, backend);
        const double norm = norms::besov_morrey_norm(u, target, bank, sampling).value;
        if (!(norm > 0.0)) throw UsageError("smoothing_slope: the norm vanished; the data has no content in the bank");
        out.norms.push_back(norm);
        lx.push_back(std::log(t));
        ly.push_back(std::log(norm));
    }
    const auto fit = fit_line(lx, ly);
    out.slope = fit.slope;
    out.intercept = fit.intercept;
    out.residual = fit.residual;
    out.points = out.times.size();
    out.expected = op == Smoother::Heat ? 0.5 * (s - sigma) : 0.5 * (s - sigma) * fp.alpha;
    return out;
}

}  // namespace fracheat::operators
