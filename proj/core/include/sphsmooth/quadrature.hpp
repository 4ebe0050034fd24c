#pragma once

#include <vector>

namespace sphsmooth {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
QuadratureRule gauss_legendre(int n);

// The same rule mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

}  // namespace sphsmooth
