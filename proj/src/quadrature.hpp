#pragma once

#include <cstddef>
#include <vector>

namespace fracheat::detail {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

/// n-point Gauss–Legendre rule by Newton iteration on P_n.
GaussRule gauss_legendre(std::size_t n);

}  // namespace fracheat::detail
