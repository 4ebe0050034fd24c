#include "sphsmooth/sampling.hpp"

#include <cmath>
#include <numbers>

#include "sphsmooth/error.hpp"
#include "sphsmooth/spectral.hpp"

namespace sphsmooth {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::vector<Direction> uniform_sphere(std::size_t n, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Direction> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = 2.0 * u(rng) - 1.0;
        const double phi = 2.0 * std::numbers::pi * u(rng);
        out.push_back(Direction::from_angles(std::acos(z), phi));
    }
    return out;
}

Eigen::VectorXd normal_vector(Eigen::Index n, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd e(n);
    for (Eigen::Index i = 0; i < n; ++i) e(i) = g(rng);
    return e;
}

double evaluate_harmonic_series(const Eigen::VectorXd& coef, const Direction& x) {
    const int K = static_cast<int>(std::lround(std::sqrt(static_cast<double>(coef.size())))) - 1;
    if (K < 0 || basis_size(K) != coef.size()) throw DomainError("coefficient vector length must be (K+1)^2");
    Eigen::VectorXd phi(coef.size());
    basis_vector(K, x, phi.data());
    return phi.dot(coef);
}

RegressionData synthetic_data(const std::vector<Direction>& points, const Eigen::VectorXd& coef, double sigma,
                              Rng& rng) {
    if (!(sigma >= 0.0)) throw DomainError("noise sd must be >= 0");
    RegressionData data;
    data.points = points;
    data.y.resize(static_cast<Eigen::Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) data.y(i) = evaluate_harmonic_series(coef, points[i]);
    if (sigma > 0.0) data.y += sigma * normal_vector(data.y.size(), rng);
    data.noise_sd = sigma;
    return data;
}

}  // namespace sphsmooth
