#pragma once

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "sphsmooth/kernels.hpp"
#include "sphsmooth/spectral.hpp"
#include "sphsmooth/spline.hpp"
#include "sphsmooth/vposterior.hpp"

namespace sphsmooth {

// Mixture prior over an SO(2)-invariant branch (r = 0) and an unrestricted
// branch (r = 1). beta0/beta1 are the first-stage variances of the retained
// coefficients in basis order; the tail beyond K uses iota weights.
struct PriorSpec {
    double p = 0.5;
    Eigen::VectorXd beta0, beta1;
    double b = 4.0;
    double c_exp = 1.0;
    double series_tolerance = 1e-10;

    double a() const { return 8.0 * (b + 2.0) / (b - 2.0); }

    // Zonal entries iota_k^{-2} in both branches; non-zonal entries 0 in
    // branch 0 and epsilon * iota_k^{-2} in branch 1.
    static PriorSpec defaults(int K, double p = 0.5, double epsilon = 0.01, double b = 4.0, double c_exp = 1.0);

    void validate(int K) const;
};

struct BranchCovariances {
    Eigen::VectorXd gamma0, gamma1;  // diagonals of Gamma^0, Gamma^1
    Eigen::MatrixXd tail;            // p * zonal + (1 - p) * full tail kernel matrix
};

BranchCovariances build_branch_covariances(const BasisSpec& spec, const PriorSpec& prior,
                                           const std::vector<Direction>& points);

// Phi Gamma Phi' + Q = H D H', w = H'y.
struct BranchReduction {
    Eigen::MatrixXd H;
    Eigen::VectorXd d;
    Eigen::VectorXd w;
};

BranchReduction spectral_reduce(const Eigen::MatrixXd& Phi, const Eigen::VectorXd& gamma_diag,
                                const Eigen::MatrixXd& tail, const Eigen::VectorXd& y);

VPosterior v_posterior_density(const BranchReduction& reduction, const PriorSpec& prior);

// Gamma Phi' H diag(e) H' y for given weights e_i = E[1/(v + d_i) | y]. Linear in y.
Eigen::VectorXd branch_posterior_mean(const BranchReduction& reduction, const Eigen::VectorXd& expected_inverse,
                                      const Eigen::VectorXd& gamma_diag, const Eigen::MatrixXd& Phi,
                                      const Eigen::VectorXd& y);
Eigen::VectorXd branch_posterior_mean(const BranchReduction& reduction, const VPosterior& post,
                                      const Eigen::VectorXd& gamma_diag, const Eigen::MatrixXd& Phi);

// p m0 / (p m0 + (1 - p) m1) from log marginals.
double posterior_mixture_weight(double p, double log_m0, double log_m1);

// Posterior covariance of gamma within one branch (tau^2 and v integrated out).
Eigen::MatrixXd branch_posterior_variance(const BranchReduction& reduction, const VPosterior& post,
                                          const Eigen::VectorXd& gamma_diag, const Eigen::MatrixXd& Phi);

// Mixture covariance p* V0 + (1 - p*) V1 + p*(1 - p*) (g0 - g1)(g0 - g1)'.
Eigen::MatrixXd posterior_variance(const Eigen::MatrixXd& V0, const Eigen::MatrixXd& V1, const Eigen::VectorXd& g0,
                                   const Eigen::VectorXd& g1, double pstar);

class BayesFit {
public:
    BasisSpec spec;
    PriorSpec prior;
    Eigen::VectorXd gamma0, gamma1;
    double pstar = 0.0;
    double log_m0 = 0.0, log_m1 = 0.0;
    Eigen::MatrixXd variance, variance0, variance1;
    // Present on freshly fitted objects, absent after reload.
    std::optional<std::array<BranchReduction, 2>> reduction;

    Eigen::VectorXd gamma() const { return pstar * gamma0 + (1.0 - pstar) * gamma1; }
    double log_marginal() const;  // log(p m0 + (1 - p) m1)

    double evaluate_branch(int r, const Direction& x) const;
    double evaluate(const Direction& x) const;
    double operator()(const Direction& x) const { return evaluate(x); }
};

BayesFit fit_hierarchical(const RegressionData& data, const BasisSpec& spec, const PriorSpec& prior);

// Same pipeline on precomputed matrices: Phi (n x kappa) and the zonal and
// full tail matrices. Used by the binned-data path.
BayesFit fit_hierarchical(const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& tail_zonal,
                          const Eigen::MatrixXd& tail_full, const Eigen::VectorXd& y, const BasisSpec& spec,
                          const PriorSpec& prior, bool with_variance = true);

// Log marginals of both branches without the means (model selection).
std::array<double, 2> branch_log_marginals(const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& tail_zonal,
                                           const Eigen::MatrixXd& tail_full, const Eigen::VectorXd& y,
                                           const PriorSpec& prior);

// Hierarchical Bayes estimate of psi = (gamma', eta')' with Upsilon = [Phi, I]
// and Xi = blockdiag(Gamma, Q_n), no invariance split. Computed both directly
// and as a shrinkage of the minimum-norm least-squares solution.
struct ShrinkageResult {
    Eigen::VectorXd direct;
    Eigen::VectorXd shrinkage;
    Eigen::VectorXd least_squares;
    double max_discrepancy = 0.0;
};

ShrinkageResult shrinkage_estimate(const RegressionData& data, const BasisSpec& spec, const PriorSpec& prior);

// Prior variances of the unrestricted ladder: iota_k^{-2} on every coefficient.
Eigen::VectorXd full_ladder(int K);

// Hierarchical Bayes fit at a fixed v with retained-coefficient prior
// variances gamma_diag:
//   d = (Gamma^-1 + Phi' Q_v^-1 Phi)^-1 Phi' Q_v^-1 y,  c = Q_v^-1 (y - Phi d),  Q_v = Q + v I.
KernelExpansion hb_fixed_v(const RegressionData& data, const KernelSpec& kernel, const Eigen::VectorXd& gamma_diag,
                           double v);

}  // namespace sphsmooth
