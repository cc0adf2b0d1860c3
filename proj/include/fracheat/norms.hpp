#pragma once

#include "fracheat/spectral.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace fracheat::norms {

using spectral::Field;
using spectral::FilterBank;
using spectral::Grid;

/// Morrey indices with 1 <= q <= p < ∞. `local` restricts radii to R <= 1.
struct MorreyParams {
    double p = 2.0;
    double q = 1.0;
    bool local = false;

    void validate() const;
};

/// Besov–Morrey indices N^s_{p,q,r} (inhomogeneous) or 𝒩^s_{p,q,r} (homogeneous).
/// r = +∞ selects the max aggregation.
struct SpaceParams {
    double s = 0.0;
    double p = 2.0;
    double q = 2.0;
    double r = std::numeric_limits<double>::infinity();
    bool homogeneous = false;

    void validate() const;
};

/// Sampling of the (center, radius) supremum: centers are grid points at the
/// given stride; empty `radii` selects the dyadic set h·2^k up to L (or 1 when local).
struct Sampling {
    std::size_t stride = 1;
    std::vector<double> radii;
};

struct MorreyResult {
    double value = 0.0;
    std::size_t center = 0;  // flat grid index of the maximizing ball
    double radius = 0.0;
    /// The maximizing radius is the smallest sampled one: the estimator has not
    /// resolved the supremum (typical for data outside the space).
    bool attained_at_min_radius = false;
    std::vector<std::string> warnings;
};

std::vector<double> dyadic_radii(const Grid& grid, bool local);

/// sup over sampled balls of R^{N/p − N/q} (h^N Σ_{cells in B} |u|^q)^{1/q}.
/// Balls are closed and use the periodic minimum-image distance.
MorreyResult morrey_norm(const Field& u, const MorreyParams& params, const Sampling& sampling = {});

/// Scores R^{N/p − N/q} ‖u‖_{L^q(B(x0, R))} for one center and each radius.
std::vector<double> morrey_profile(const Field& u, const MorreyParams& params, std::size_t center,
                                   const std::vector<double>& radii);

struct Atom {
    std::size_t index;  // flat grid index
    double weight;
};

/// Finite combination of point masses at grid points.
struct DiscreteMeasure {
    Grid grid;
    std::vector<Atom> atoms;

    double total_variation() const;
    /// Density with each atom spread over its cell (weight / h^N).
    Field binned() const;
};

/// sup over sampled balls of R^{N/p − N} |μ|(B), counting atoms exactly.
MorreyResult measure_morrey_norm(const DiscreteMeasure& mu, double p, bool local, const Sampling& sampling = {});

struct BesovResult {
    double value = 0.0;
    std::vector<int> blocks;
    std::vector<double> block_norms;  // unweighted Morrey norm of each block
    std::vector<std::string> warnings;
};

/// l^r aggregation of 2^{sj} ‖φ_j u | M^p_q‖ (plus the φ_(0) term for the inhomogeneous
/// bank). The inhomogeneous norm uses local Morrey balls, the homogeneous one all radii.
BesovResult besov_morrey_norm(const Field& u, const SpaceParams& space, const FilterBank& bank,
                              const Sampling& sampling = {});
BesovResult besov_morrey_norm(const DiscreteMeasure& mu, const SpaceParams& space, const FilterBank& bank,
                              const Sampling& sampling = {});

/// Σ_b w_b ‖block_b‖_{L^1} with w = 1 for φ_(0) and 2^{sj} otherwise.
double besov_l1_norm(const Field& u, double s, const FilterBank& bank);

/// max_{j >= j0} 2^{sj} ‖φ_j μ | M^p_q‖, the finite-grid surrogate of the high-frequency limsup.
double highfreq_limsup(const Field& u, double s, double p, double q, int j0, const FilterBank& bank,
                       const Sampling& sampling = {});
double highfreq_limsup(const DiscreteMeasure& mu, double s, double p, double q, int j0, const FilterBank& bank,
                       const Sampling& sampling = {});

/// l^r norm of a sequence (r = ∞ gives the max).
double lr_aggregate(const std::vector<double>& terms, double r);

}  // namespace fracheat::norms
