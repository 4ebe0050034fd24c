#pragma once

#include <vector>

#include <Eigen/Core>

#include "sphsmooth/direction.hpp"
#include "sphsmooth/spectral.hpp"

namespace sphsmooth {

// Which tail reproducing kernel. All of them sum degrees k > K only.
//   Full:     iota weights, every order; closed form.
//   Zonal:    iota weights, q = 0 only; depends on the two colatitudes.
//   GenericS: (k(k+1))^{-s} weights, every order; truncated series.
enum class KernelBranch { Full, Zonal, GenericS };

struct KernelSpec {
    BasisSpec basis;
    KernelBranch branch = KernelBranch::Full;
    double series_tolerance = 1e-10;

    KernelSpec() = default;
    KernelSpec(BasisSpec basis, KernelBranch branch, double series_tolerance = 1e-10);

    void validate() const;
};

// Convenience constructors with matching weight schemes.
KernelSpec full_kernel(int K, double tol = 1e-10);
KernelSpec zonal_kernel(int K, double tol = 1e-10);
KernelSpec generic_kernel(int K, double s, double tol = 1e-10);

enum class RidgeScale { N, One };

// q2 of the closed-form kernel; q2(1) = 1/2.
double q2_closed_form(double w);

double tail_kernel_full(const KernelSpec& spec, const Direction& x1, const Direction& x2);
double tail_kernel_zonal(const KernelSpec& spec, const Direction& x1, const Direction& x2);
double tail_kernel_generic(const KernelSpec& spec, const Direction& x1, const Direction& x2);
double tail_kernel(const KernelSpec& spec, const Direction& x1, const Direction& x2);

// Full kernel as a function of t = cos(angle), for callers that already hold t.
double tail_kernel_full_t(int K, double t);

// Throws DuplicatePoints when two points are closer than 1e-9 radians.
void check_distinct(const std::vector<Direction>& points);

// [Q(x_i, x_j)] + ridge * scale * I, scale = n or 1.
Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const std::vector<Direction>& points, double ridge = 0.0,
                              RidgeScale scale = RidgeScale::N);

// Cross-kernel matrix [Q(a_i, b_j)], no distinctness requirement.
Eigen::MatrixXd kernel_cross(const KernelSpec& spec, const std::vector<Direction>& a, const std::vector<Direction>& b);

// q(x) = [Q(x_1, x), ..., Q(x_n, x)]'.
Eigen::VectorXd kernel_vector(const KernelSpec& spec, const std::vector<Direction>& points, const Direction& x);

// p * Zonal + (1 - p) * Full tail covariance.
Eigen::MatrixXd mixture_tail_matrix(const std::vector<Direction>& points, const KernelSpec& zonal,
                                    const KernelSpec& full, double p);
Eigen::MatrixXd mixture_tail_matrix(const Eigen::MatrixXd& zonal, const Eigen::MatrixXd& full, double p);

}  // namespace sphsmooth
