#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace sphsmooth {

// Posterior of the variance ratio v = sigma^2 / tau^2 after tau^2 has been
// integrated out:
//
//   pi(v | y) ∝ v^{a/2-1} (b + a v)^{-(a+b)/2} prod_i (v + d_i)^{-1/2}
//               * (sum_i w_i^2 / (v + d_i))^{-(n + 2c - 2)/2}
//
// with a = 8(b+2)/(b-2). Integrals are taken in u = log v on composite
// Gauss-Legendre panels sized from the curvature at the mode. When w == 0
// the last factor is degenerate and is dropped.
class VPosterior {
public:
    VPosterior(Eigen::VectorXd d, Eigen::VectorXd w, double b, double c_exp);

    double a() const { return a_; }
    double b() const { return b_; }
    double c_exp() const { return c_; }
    bool degenerate() const { return degenerate_; }
    int size() const { return static_cast<int>(d_.size()); }
    const Eigen::VectorXd& d() const { return d_; }
    const Eigen::VectorXd& w() const { return w_; }

    // Log of the unnormalised density in v.
    double log_kernel(double v) const;
    // Log of the integral of the unnormalised density over (0, inf).
    double log_normalizer() const { return log_norm_; }
    // Normalised density.
    double density(double v) const;

    // Quadrature nodes in v and posterior weights (sum to 1).
    const std::vector<double>& nodes() const { return v_; }
    const std::vector<double>& weights() const { return omega_; }
    double mode() const;

    double expect(const std::function<double(double)>& f) const;
    // E[1 / (v + d_i) | y] for every i.
    Eigen::VectorXd expected_inverse() const;
    // S(v) = sum w_i^2 / (v + d_i).
    double S(double v) const;

    // Independent schemes for the same integrals: adaptive Gauss-Kronrod in
    // t = v/(1+v) (each half mapped so both ends keep full precision) and
    // composite Simpson in u. Both return E[f] under the normalised density.
    double expect_gauss_kronrod(const std::function<double(double)>& f) const;
    double expect_simpson(const std::function<double(double)>& f) const;

    struct NormalizerCheck {
        double log_gauss_legendre = 0.0;
        double log_gauss_kronrod = 0.0;
        double log_simpson = 0.0;
        double max_relative_difference = 0.0;
    };
    NormalizerCheck normalizer_check() const;

private:
    double ell(double u) const;  // log density in u, Jacobian included
    double relative_integral_gk(const std::function<double(double)>& f) const;
    double relative_integral_simpson(const std::function<double(double)>& f) const;

    Eigen::VectorXd d_, w_, w2_;
    double a_ = 0.0, b_ = 0.0, c_ = 0.0;
    double expo_ = 0.0;  // (n + 2c - 2) / 2
    bool degenerate_ = false;
    double u_mode_ = 0.0, ell_mode_ = 0.0, sigma_u_ = 1.0;
    double u_lo_ = 0.0, u_hi_ = 0.0;
    double log_norm_ = 0.0;
    std::vector<double> u_, v_, omega_;
};

}  // namespace sphsmooth
