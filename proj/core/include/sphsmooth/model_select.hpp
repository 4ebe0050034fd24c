#pragma once

#include <vector>

#include "sphsmooth/bayes.hpp"
#include "sphsmooth/spline.hpp"

namespace sphsmooth {

// Hyperparameters shared by every candidate K; the ladders are rebuilt per K.
struct PriorOptions {
    double epsilon = 0.01;
    double b = 4.0;
    double c_exp = 1.0;
    double series_tolerance = 1e-10;

    PriorSpec make(int K, double p) const { return PriorSpec::defaults(K, p, epsilon, b, c_exp); }
};

std::vector<double> default_p_grid();

struct ModelScore {
    int K = 0;
    double log_marginal = 0.0;      // best over the p grid
    double log_bayes_factor = 0.0;  // relative to K_max
    double schwarz = 0.0;           // versus K_max; positive prefers this K
    double p_best = 0.0;
};

struct SelectionTable {
    std::vector<ModelScore> scores;
    int best_K = 0;
    int K_max = 0;
};

// Largest K with (K+1)^2 < n.
int max_truncation(std::size_t n);

// log(p m0 + (1 - p) m1) under the prior for level K.
double log_marginal(const RegressionData& data, int K, const PriorSpec& prior);

// Per K, the best p on the grid; log B_K = log m_K - log m_{K_max}.
// Ties go to the smaller K.
SelectionTable bayes_factor_table(const RegressionData& data, const std::vector<int>& K_range,
                                  const std::vector<double>& p_grid, const PriorOptions& options = {});

// How the maximum-likelihood fit treats the tail.
//   Gls: Sigma = sigma^2 I + tau^2 Q_K with method-of-moments plug-ins.
//   Ols: Sigma = sigma^2 I with the ML variance.
enum class SchwarzFit { Gls, Ols };

// Maximised Gaussian log-likelihood of level K.
double max_log_likelihood(const RegressionData& data, int K, SchwarzFit fit = SchwarzFit::Gls,
                          double series_tolerance = 1e-10);

// S_ij = l_i - l_j + ((pi_j - pi_i)/2) log n with pi = (K+1)^2. Positive prefers K_i.
double schwarz_criterion(const RegressionData& data, int K_i, int K_j, SchwarzFit fit = SchwarzFit::Gls,
                         double series_tolerance = 1e-10);

}  // namespace sphsmooth
