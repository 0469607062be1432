#pragma once

#include <span>
#include <vector>

namespace hotelling {

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Rules are computed once per order and cached for the process lifetime.
const GaussRule& gauss_legendre(int order);

}  // namespace hotelling
