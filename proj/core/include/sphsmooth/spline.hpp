#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "sphsmooth/direction.hpp"
#include "sphsmooth/kernels.hpp"
#include "sphsmooth/spectral.hpp"

namespace sphsmooth {

struct RegressionData {
    std::vector<Direction> points;
    Eigen::VectorXd y;
    std::optional<double> noise_sd;

    void validate() const;
    std::size_t size() const { return points.size(); }
};

// Row i holds basis_vector(spec, points[i]).
Eigen::MatrixXd design_matrix(const BasisSpec& spec, const std::vector<Direction>& points);

// f(x) = phi(x)'d + q(x)'c. Shared by every estimator with that shape.
class KernelExpansion {
public:
    KernelExpansion() = default;
    KernelExpansion(KernelSpec kernel, std::vector<Direction> points, Eigen::VectorXd c, Eigen::VectorXd d);

    double evaluate(const Direction& x) const;
    Eigen::VectorXd evaluate(const std::vector<Direction>& xs) const;
    double operator()(const Direction& x) const { return evaluate(x); }

    const KernelSpec& kernel() const { return kernel_; }
    const BasisSpec& spec() const { return kernel_.basis; }
    const std::vector<Direction>& points() const { return points_; }
    const Eigen::VectorXd& c() const { return c_; }
    const Eigen::VectorXd& d() const { return d_; }

private:
    KernelSpec kernel_;
    std::vector<Direction> points_;
    Eigen::VectorXd c_, d_;
};

class SplineFit : public KernelExpansion {
public:
    SplineFit() = default;
    SplineFit(KernelSpec kernel, std::vector<Direction> points, Eigen::VectorXd c, Eigen::VectorXd d, double xi);

    double xi() const { return xi_; }

private:
    double xi_ = 0.0;
};

struct RepresenterSolution {
    Eigen::VectorXd c, d;
};

// Solves the representer system for a ridged kernel matrix Q:
//   d = (Phi' Q^-1 Phi)^-1 Phi' Q^-1 y,  c = Q^-1 (y - Phi d).
RepresenterSolution solve_representer(const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& Q, const Eigen::VectorXd& y);

// Minimiser of (1/n) sum (u(x_i) - y_i)^2 + xi J(u) in the representer form:
//   d = (Phi' Q^-1 Phi)^-1 Phi' Q^-1 y,  c = Q^-1 (y - Phi d),  Q = [Q(x_i,x_j)] + n xi I.
// Throws RankDeficient when Phi' Q^-1 Phi has condition number above 1e12.
SplineFit fit_spline(const RegressionData& data, const KernelSpec& kernel, double xi);

double evaluate_spline(const SplineFit& fit, const Direction& x);

// Fitted values at the design points (y - n xi c).
Eigen::VectorXd fitted_values(const SplineFit& fit, const Eigen::VectorXd& y);

// Roughness c'Qc of the fitted tail part, Q without ridge.
double spline_penalty(const Eigen::MatrixXd& Q, const Eigen::VectorXd& c);

// (1/n)||y - Phi d - Q c||^2 + xi c'Qc for an arbitrary (c, d) in the representer family.
double penalized_objective(const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& Q, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& c, const Eigen::VectorXd& d, double xi);

// Influence matrix A(xi): y -> fitted values at the design points.
Eigen::MatrixXd influence_matrix(const RegressionData& data, const KernelSpec& kernel, double xi);

struct GcvResult {
    double xi = 0.0;
    std::vector<double> grid;
    std::vector<double> score;   // NaN where the grid point failed
    std::vector<double> failed;  // grid values that could not be scored
};

std::vector<double> default_xi_grid();

// Ordinary GCV, V = n ||(I - A)y||^2 / tr(I - A)^2; ties go to the smallest xi.
GcvResult gcv_select_xi(const RegressionData& data, const KernelSpec& kernel, const std::vector<double>& grid);

// Finite-nu posterior mean under the diffuse prior gamma ~ N(0, nu tau^2 I) on the
// retained coefficients. Evaluated through the Woodbury form, so nu up to ~1e12 is safe.
class DiffuseBayesEstimate : public KernelExpansion {
public:
    DiffuseBayesEstimate() = default;
    DiffuseBayesEstimate(KernelExpansion e, double nu, double xi) : KernelExpansion(std::move(e)), nu_(nu), xi_(xi) {}

    double nu() const { return nu_; }
    double xi() const { return xi_; }

private:
    double nu_ = 0.0, xi_ = 0.0;
};

DiffuseBayesEstimate diffuse_bayes_estimate(const RegressionData& data, const KernelSpec& kernel, double nu,
                                            double xi);

}  // namespace sphsmooth
