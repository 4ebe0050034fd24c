#include "sphsmooth/spline.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "detail/spd_solver.hpp"
#include "sphsmooth/error.hpp"

namespace sphsmooth {

namespace {

constexpr double kMaxCondition = 1e12;

using detail::SpdSolver;

void check_inner_system(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw RankDeficient("eigen-solver failed on Phi' Q^-1 Phi");
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > kMaxCondition)
        throw RankDeficient("Phi' Q^-1 Phi is numerically singular (design too small or degenerate)");
}

void check_fit_inputs(const RegressionData& data, const KernelSpec& kernel, double xi) {
    data.validate();
    kernel.validate();
    if (!(xi > 0.0) || !std::isfinite(xi)) throw DomainError("smoothing parameter xi must be positive");
    if (static_cast<int>(data.size()) < kernel.basis.size())
        throw RankDeficient("fewer design points than retained harmonics (n < (K+1)^2)");
}

// Pieces shared by GCV and the influence matrix: Phi = [F1 F2] R,
// F2' Q F2 = U diag(lambda) U'.
struct NullSpaceSpectrum {
    Eigen::MatrixXd F2U;
    Eigen::VectorXd lambda;
};

NullSpaceSpectrum null_space_spectrum(const RegressionData& data, const KernelSpec& kernel) {
    const Eigen::MatrixXd Phi = design_matrix(kernel.basis, data.points);
    const int n = static_cast<int>(Phi.rows()), kappa = static_cast<int>(Phi.cols());
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Phi);
    if (qr.rank() < kappa) throw RankDeficient("design matrix Phi is rank deficient");
    const Eigen::MatrixXd F = qr.householderQ();
    const Eigen::MatrixXd F2 = F.rightCols(n - kappa);
    const Eigen::MatrixXd Q = kernel_matrix(kernel, data.points, 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(F2.transpose() * Q * F2);
    if (es.info() != Eigen::Success) throw NumericalError("eigen-solver failed in the GCV reduction");
    return {F2 * es.eigenvectors(), es.eigenvalues()};
}

}  // namespace

void RegressionData::validate() const {
    if (points.empty()) throw EmptyInput("regression data needs at least one point");
    if (static_cast<std::size_t>(y.size()) != points.size())
        throw DomainError("response length does not match the number of points");
    if (!y.allFinite()) throw DomainError("responses must be finite");
    if (noise_sd && !(*noise_sd > 0.0)) throw DomainError("noise_sd must be positive");
}

Eigen::MatrixXd design_matrix(const BasisSpec& spec, const std::vector<Direction>& points) {
    spec.validate();
    const int n = static_cast<int>(points.size()), kappa = spec.size();
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> Phi(n, kappa);
    for (int i = 0; i < n; ++i) basis_vector(spec.K, points[i], Phi.row(i).data());
    return Phi;
}

KernelExpansion::KernelExpansion(KernelSpec kernel, std::vector<Direction> points, Eigen::VectorXd c,
                                 Eigen::VectorXd d)
    : kernel_(std::move(kernel)), points_(std::move(points)), c_(std::move(c)), d_(std::move(d)) {
    if (static_cast<std::size_t>(c_.size()) != points_.size()) throw DomainError("c must have one entry per point");
    if (d_.size() != kernel_.basis.size()) throw DomainError("d must have (K+1)^2 entries");
}

double KernelExpansion::evaluate(const Direction& x) const {
    double v = basis_vector(kernel_.basis, x).dot(d_);
    if (!points_.empty()) v += kernel_vector(kernel_, points_, x).dot(c_);
    return v;
}

Eigen::VectorXd KernelExpansion::evaluate(const std::vector<Direction>& xs) const {
    Eigen::VectorXd v = design_matrix(kernel_.basis, xs) * d_;
    if (!points_.empty() && !xs.empty()) v += kernel_cross(kernel_, xs, points_) * c_;
    return v;
}

SplineFit::SplineFit(KernelSpec kernel, std::vector<Direction> points, Eigen::VectorXd c, Eigen::VectorXd d,
                     double xi)
    : KernelExpansion(std::move(kernel), std::move(points), std::move(c), std::move(d)), xi_(xi) {}

RepresenterSolution solve_representer(const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& Q, const Eigen::VectorXd& y) {
    if (Q.rows() != Phi.rows() || Q.cols() != Phi.rows() || y.size() != Phi.rows())
        throw DomainError("representer system: non-conformable inputs");
    if (Phi.rows() < Phi.cols()) throw RankDeficient("fewer observations than retained harmonics");
    const SpdSolver Qs(Q);
    const Eigen::MatrixXd QiPhi = Qs.solve(Phi);
    const Eigen::VectorXd Qiy = Qs.solve(y);
    Eigen::MatrixXd M = Phi.transpose() * QiPhi;
    M = 0.5 * (M + M.transpose()).eval();
    check_inner_system(M);
    RepresenterSolution out;
    out.d = M.ldlt().solve(Phi.transpose() * Qiy);
    out.c = Qs.solve(y - Phi * out.d);
    return out;
}

SplineFit fit_spline(const RegressionData& data, const KernelSpec& kernel, double xi) {
    check_fit_inputs(data, kernel, xi);
    const Eigen::MatrixXd Phi = design_matrix(kernel.basis, data.points);
    auto sol = solve_representer(Phi, kernel_matrix(kernel, data.points, xi, RidgeScale::N), data.y);
    return SplineFit(kernel, data.points, std::move(sol.c), std::move(sol.d), xi);
}

double evaluate_spline(const SplineFit& fit, const Direction& x) { return fit.evaluate(x); }

Eigen::VectorXd fitted_values(const SplineFit& fit, const Eigen::VectorXd& y) {
    return y - static_cast<double>(fit.points().size()) * fit.xi() * fit.c();
}

double spline_penalty(const Eigen::MatrixXd& Q, const Eigen::VectorXd& c) { return c.dot(Q * c); }

double penalized_objective(const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& Q, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& c, const Eigen::VectorXd& d, double xi) {
    const Eigen::VectorXd r = y - Phi * d - Q * c;
    return r.squaredNorm() / static_cast<double>(y.size()) + xi * spline_penalty(Q, c);
}

Eigen::MatrixXd influence_matrix(const RegressionData& data, const KernelSpec& kernel, double xi) {
    check_fit_inputs(data, kernel, xi);
    const auto ns = null_space_spectrum(data, kernel);
    const double nxi = static_cast<double>(data.size()) * xi;
    const Eigen::VectorXd w = (nxi / (ns.lambda.array() + nxi)).matrix();
    // I - A = n xi F2 (F2'Q_xi F2)^-1 F2'
    Eigen::MatrixXd A = -(ns.F2U * w.asDiagonal() * ns.F2U.transpose());
    A.diagonal().array() += 1.0;
    return A;
}

std::vector<double> default_xi_grid() {
    std::vector<double> g(25);
    for (int i = 0; i < 25; ++i) g[i] = std::pow(10.0, -8.0 + 10.0 * i / 24.0);
    return g;
}

GcvResult gcv_select_xi(const RegressionData& data, const KernelSpec& kernel, const std::vector<double>& grid) {
    if (grid.empty()) throw DomainError("GCV grid is empty");
    for (double xi : grid)
        if (!(xi > 0.0) || !std::isfinite(xi)) throw DomainError("GCV grid values must be positive");
    check_fit_inputs(data, kernel, grid.front());
    const double n = static_cast<double>(data.size());
    if (static_cast<int>(data.size()) <= kernel.basis.size())
        throw RankDeficient("GCV needs more design points than retained harmonics");
    const auto ns = null_space_spectrum(data, kernel);
    const Eigen::VectorXd z = ns.F2U.transpose() * data.y;

    GcvResult out;
    out.grid = grid;
    out.score.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double nxi = n * grid[g];
        double rss = 0.0, tr = 0.0;
        bool ok = true;
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            const double den = ns.lambda(i) + nxi;
            if (!(den > 0.0)) {
                ok = false;
                break;
            }
            const double r = nxi / den;
            rss += r * r * z(i) * z(i);
            tr += r;
        }
        const double v = n * rss / (tr * tr);
        if (!ok || !std::isfinite(v)) {
            out.failed.push_back(grid[g]);
            continue;
        }
        out.score[g] = v;
    }
    double vmin = std::numeric_limits<double>::infinity();
    for (double v : out.score)
        if (std::isfinite(v)) vmin = std::min(vmin, v);
    if (!std::isfinite(vmin)) throw NumericalError("GCV failed at every grid value");
    const double slack = 1e-12 * std::max(vmin, data.y.squaredNorm() / n);
    bool found = false;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (!std::isfinite(out.score[g]) || out.score[g] > vmin + slack) continue;
        if (!found || grid[g] < out.xi) out.xi = grid[g];
        found = true;
    }
    return out;
}

DiffuseBayesEstimate diffuse_bayes_estimate(const RegressionData& data, const KernelSpec& kernel, double nu,
                                            double xi) {
    check_fit_inputs(data, kernel, xi);
    if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("nu must be positive and finite");
    const Eigen::MatrixXd Phi = design_matrix(kernel.basis, data.points);
    const SpdSolver Q(kernel_matrix(kernel, data.points, xi, RidgeScale::N));
    const Eigen::MatrixXd QiPhi = Q.solve(Phi);
    Eigen::MatrixXd M = Phi.transpose() * QiPhi;
    M = 0.5 * (M + M.transpose()).eval();
    M.diagonal().array() += 1.0 / nu;
    // (nu Phi Phi' + Q)^-1 = Q^-1 - Q^-1 Phi (M + I/nu)^-1 Phi' Q^-1, and nu Phi' c = d
    Eigen::LLT<Eigen::MatrixXd> inner(M);
    if (inner.info() != Eigen::Success) throw SingularSystem("nu Phi Phi' + Q is numerically singular");
    const Eigen::VectorXd d = inner.solve(QiPhi.transpose() * data.y);
    const Eigen::VectorXd c = Q.solve(data.y - Phi * d);
    return DiffuseBayesEstimate(KernelExpansion(kernel, data.points, c, d), nu, xi);
}

}  // namespace sphsmooth
