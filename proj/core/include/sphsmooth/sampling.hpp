#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "sphsmooth/direction.hpp"
#include "sphsmooth/spline.hpp"

namespace sphsmooth {

using Rng = std::mt19937_64;

// Independent stream seeds derived from a master seed (splitmix64 mixing).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

// n points uniform on the sphere (z uniform in [-1, 1], phi uniform).
std::vector<Direction> uniform_sphere(std::size_t n, Rng& rng);

// Standard normal vector.
Eigen::VectorXd normal_vector(Eigen::Index n, Rng& rng);

// f(x) = sum_i coef_i Y_i(x) for a coefficient vector in basis order.
double evaluate_harmonic_series(const Eigen::VectorXd& coef, const Direction& x);

// Data y_i = f(x_i) + sigma * e_i with f a finite harmonic series.
RegressionData synthetic_data(const std::vector<Direction>& points, const Eigen::VectorXd& coef, double sigma,
                              Rng& rng);

}  // namespace sphsmooth
