#pragma once

#include <cstdint>
#include <vector>

#include "sphsmooth/direction.hpp"

namespace sphsmooth {

struct MinimaxConstants {
    double W = 0.0;
    double phi = 0.0;
};

// W = vol / ((2 sqrt(pi))^dim Gamma(1 + dim/2)),
// phi = (2s/(2s + 2 dim))^{2s/(2s+dim)} ((2s + dim)/dim)^{dim/(2s+dim)}. Needs s > dim/2.
MinimaxConstants minimax_constants(double s, int dim, double vol);

// lambda_k / (sum_{j<=k} dim E_j) on the sphere, k(k+1)/(k+1)^2; tends to W^{-1} = 1.
double weyl_ratio(int k);

struct ZetaResult {
    double partial = 0.0;     // sum_{k=1}^{k_max} (2k+1)/(4 pi) (k(k+1))^{-s}
    double tail_bound = 0.0;  // (k_max(k_max+1))^{1-s} / (4 pi (s-1)), bounds the omitted terms
    double value() const { return partial; }
};

// Zeta function of the Laplacian at s, summed through the addition formula.
ZetaResult zeta_check(double s, int k_max);

// Same series at a point, with harmonics evaluated explicitly up to k_point
// and the addition-formula sum used from k_point + 1 to k_max.
double zeta_at(const Direction& x, double s, int k_point, int k_max);

struct LimitReport {
    double shrinkage_discrepancy = 0.0;         // direct vs shrinkage form
    double diffuse_limit_discrepancy = 0.0;  // diffuse Bayes at nu = 1e8 vs spline
    double hb_limit_discrepancy = 0.0;       // fixed-v hierarchical Bayes at prior scale 1e6 vs spline
    bool shrinkage_pass = false, diffuse_pass = false, hb_pass = false;
    bool pass() const { return shrinkage_pass && diffuse_pass && hb_pass; }
};

LimitReport limit_suite(std::uint64_t seed);

// How the noise enters the per-design squared error.
//   Analytic:  E over the noise in closed form, ||S f - f||^2 + sigma^2 tr(S'WS) for the linear smoother S.
//   Simulated: one Gaussian noise draw per design.
enum class NoiseAverage { Analytic, Simulated };

struct RateOptions {
    double noise_sd = 1.0;
    NoiseAverage noise = NoiseAverage::Analytic;
    int K = 0;             // retained degree of the fitted spline
    int truth_degree = 12;  // truth is a finite series to this degree; <= K puts it in the retained span
    double xi_scale = 1.0;  // xi_n = xi_scale * n^{-2s/(2s+2)}
};

struct RateReport {
    double s = 0.0;
    std::vector<int> n;
    std::vector<double> mise;
    double slope = 0.0;
    double theoretical_slope = 0.0;
    double truth_norm_bound = 0.0;  // M: sum over retained truth of lambda^s gamma^2 (k >= 1)
};

RateReport rate_experiment(double s, const std::vector<int>& n_list, int replicates, std::uint64_t seed,
                           const RateOptions& options = {});

}  // namespace sphsmooth
