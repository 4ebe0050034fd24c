#include "sphsmooth/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "detail/spd_solver.hpp"
#include "sphsmooth/error.hpp"

namespace sphsmooth {

namespace {

constexpr double kEigenFloor = 1e-12;

double log_add_exp(double p, double q) {
    if (p == -std::numeric_limits<double>::infinity()) return q;
    if (q == -std::numeric_limits<double>::infinity()) return p;
    const double m = std::max(p, q);
    return m + std::log1p(std::exp(-std::abs(p - q)));
}

Eigen::MatrixXd symmetric_part(const Eigen::MatrixXd& A) { return 0.5 * (A + A.transpose()); }

}  // namespace

PriorSpec PriorSpec::defaults(int K, double p, double epsilon, double b, double c_exp) {
    if (K < 0) throw DomainError("K must be >= 0");
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw DomainError("non-zonal shrink factor epsilon must lie in (0, 1]");
    PriorSpec prior;
    prior.p = p;
    prior.b = b;
    prior.c_exp = c_exp;
    const int kappa = basis_size(K);
    prior.beta0.resize(kappa);
    prior.beta1.resize(kappa);
    for (int i = 0; i < kappa; ++i) {
        const HarmonicIndex idx = basis_index(i);
        const double w = iota_weight(idx.k);
        prior.beta0(i) = idx.q == 0 ? w : 0.0;
        prior.beta1(i) = idx.q == 0 ? w : epsilon * w;
    }
    prior.validate(K);
    return prior;
}

void PriorSpec::validate(int K) const {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("prior weight p must lie in [0, 1]");
    if (!(b > 2.0 && b <= 4.0)) throw DomainError("hyperprior degrees b must lie in (2, 4]");
    if (!(c_exp < b / 2.0)) throw DomainError("tau^2 exponent c must satisfy c < b/2");
    if (!(series_tolerance > 0.0 && series_tolerance <= 1e-4))
        throw DomainError("series_tolerance must lie in (0, 1e-4]");
    const int kappa = basis_size(K);
    if (beta0.size() != kappa || beta1.size() != kappa)
        throw DomainError("variance ladders must have (K+1)^2 entries");
    for (int i = 0; i < kappa; ++i) {
        const HarmonicIndex idx = basis_index(i);
        const int z = basis_position(idx.k, 0);
        if (!std::isfinite(beta0(i)) || !std::isfinite(beta1(i)) || beta0(i) < 0.0 || beta1(i) < 0.0)
            throw DomainError("variance ladders must be finite and non-negative");
        if (idx.q == 0 && !(beta0(i) > 0.0 && beta1(i) > 0.0))
            throw DomainError("zonal prior variances must be positive in both branches");
        if (idx.q != 0 && beta0(i) != 0.0)
            throw DomainError("the invariant branch must give non-zonal coefficients zero variance");
        if (idx.q != 0 && beta1(i) > beta1(z))
            throw DomainError("non-zonal variances may not exceed the zonal variance of the same degree");
    }
}

BranchCovariances build_branch_covariances(const BasisSpec& spec, const PriorSpec& prior,
                                           const std::vector<Direction>& points) {
    prior.validate(spec.K);
    BranchCovariances out;
    out.gamma0 = prior.beta0;
    out.gamma1 = prior.beta1;
    out.tail = mixture_tail_matrix(points, zonal_kernel(spec.K, prior.series_tolerance),
                                   full_kernel(spec.K, prior.series_tolerance), prior.p);
    return out;
}

BranchReduction spectral_reduce(const Eigen::MatrixXd& Phi, const Eigen::VectorXd& gamma_diag,
                                const Eigen::MatrixXd& tail, const Eigen::VectorXd& y) {
    const Eigen::Index n = Phi.rows();
    if (tail.rows() != n || tail.cols() != n || y.size() != n || gamma_diag.size() != Phi.cols())
        throw DomainError("spectral_reduce: non-conformable inputs");
    const Eigen::MatrixXd A = symmetric_part(Phi * gamma_diag.asDiagonal() * Phi.transpose() + tail);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    if (es.info() != Eigen::Success) throw NumericalError("symmetric eigen-solver failed to converge");
    BranchReduction r;
    r.H = es.eigenvectors();
    r.d = es.eigenvalues();
    for (Eigen::Index i = 0; i < n; ++i)
        if (r.d(i) < kEigenFloor) r.d(i) = 0.0;
    r.w = r.H.transpose() * y;
    return r;
}

VPosterior v_posterior_density(const BranchReduction& reduction, const PriorSpec& prior) {
    return VPosterior(reduction.d, reduction.w, prior.b, prior.c_exp);
}

Eigen::VectorXd branch_posterior_mean(const BranchReduction& reduction, const Eigen::VectorXd& expected_inverse,
                                      const Eigen::VectorXd& gamma_diag, const Eigen::MatrixXd& Phi,
                                      const Eigen::VectorXd& y) {
    const Eigen::VectorXd t = reduction.H * (expected_inverse.asDiagonal() * (reduction.H.transpose() * y));
    return gamma_diag.asDiagonal() * (Phi.transpose() * t);
}

Eigen::VectorXd branch_posterior_mean(const BranchReduction& reduction, const VPosterior& post,
                                      const Eigen::VectorXd& gamma_diag, const Eigen::MatrixXd& Phi) {
    const Eigen::VectorXd t = reduction.H * (post.expected_inverse().asDiagonal() * reduction.w);
    return gamma_diag.asDiagonal() * (Phi.transpose() * t);
}

double posterior_mixture_weight(double p, double log_m0, double log_m1) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("prior weight p must lie in [0, 1]");
    if (p == 0.0) return 0.0;
    if (p == 1.0) return 1.0;
    const double l0 = std::log(p) + log_m0, l1 = std::log1p(-p) + log_m1;
    const double out = std::exp(l0 - log_add_exp(l0, l1));
    return std::clamp(out, 0.0, 1.0);
}

Eigen::MatrixXd branch_posterior_variance(const BranchReduction& reduction, const VPosterior& post,
                                          const Eigen::VectorXd& gamma_diag, const Eigen::MatrixXd& Phi) {
    const Eigen::Index n = Phi.rows(), kappa = Phi.cols();
    const double dof = static_cast<double>(n) + 2.0 * post.c_exp() - 4.0;
    if (!(dof > 0.0)) throw DomainError("posterior variance needs n + 2c - 4 > 0");
    if (post.degenerate()) return Eigen::MatrixXd::Zero(kappa, kappa);

    const Eigen::MatrixXd B = gamma_diag.asDiagonal() * (Phi.transpose() * reduction.H);  // kappa x n
    const auto& v = post.nodes();
    const auto& om = post.weights();
    const Eigen::Index J = static_cast<Eigen::Index>(v.size());
    const Eigen::ArrayXd& d = reduction.d.array();

    // E[tau^2 | v, y] = S(v) / (n + 2c - 4) scales the conditional covariance.
    double ES = 0.0;
    Eigen::ArrayXd ES_over = Eigen::ArrayXd::Zero(n);
    Eigen::MatrixXd W(n, J);
    for (Eigen::Index j = 0; j < J; ++j) {
        const Eigen::ArrayXd inv = 1.0 / (v[j] + d);
        const double S = (reduction.w.array().square() * inv).sum();
        ES += om[j] * S;
        ES_over += om[j] * S * inv;
        W.col(j) = (reduction.w.array() * inv).matrix();
    }
    Eigen::MatrixXd V = (ES * Eigen::MatrixXd(gamma_diag.asDiagonal()) -
                         B * ES_over.matrix().asDiagonal() * B.transpose()) / dof;

    // Spread of the conditional means across v.
    const Eigen::MatrixXd G = B * W;  // kappa x J
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(kappa);
    for (Eigen::Index j = 0; j < J; ++j) mean += om[j] * G.col(j);
    Eigen::MatrixXd Gc = G.colwise() - mean;
    for (Eigen::Index j = 0; j < J; ++j) Gc.col(j) *= std::sqrt(om[j]);
    V += Gc * Gc.transpose();
    return symmetric_part(V);
}

Eigen::MatrixXd posterior_variance(const Eigen::MatrixXd& V0, const Eigen::MatrixXd& V1, const Eigen::VectorXd& g0,
                                   const Eigen::VectorXd& g1, double pstar) {
    const Eigen::VectorXd delta = g0 - g1;
    return pstar * V0 + (1.0 - pstar) * V1 + pstar * (1.0 - pstar) * delta * delta.transpose();
}

double BayesFit::log_marginal() const {
    const double ninf = -std::numeric_limits<double>::infinity();
    const double l0 = prior.p > 0.0 ? std::log(prior.p) + log_m0 : ninf;
    const double l1 = prior.p < 1.0 ? std::log1p(-prior.p) + log_m1 : ninf;
    return log_add_exp(l0, l1);
}

double BayesFit::evaluate_branch(int r, const Direction& x) const {
    if (r != 0 && r != 1) throw DomainError("branch must be 0 or 1");
    return basis_vector(spec, x).dot(r == 0 ? gamma0 : gamma1);
}

double BayesFit::evaluate(const Direction& x) const { return basis_vector(spec, x).dot(gamma()); }

BayesFit fit_hierarchical(const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& tail_zonal,
                          const Eigen::MatrixXd& tail_full, const Eigen::VectorXd& y, const BasisSpec& spec,
                          const PriorSpec& prior, bool with_variance) {
    prior.validate(spec.K);
    if (Phi.cols() != spec.size()) throw DomainError("design matrix width does not match (K+1)^2");
    if (y.size() == 0) throw EmptyInput("hierarchical fit needs at least one observation");
    if (!y.allFinite()) throw DomainError("responses must be finite");
    const Eigen::MatrixXd tail = mixture_tail_matrix(tail_zonal, tail_full, prior.p);

    BayesFit fit;
    fit.spec = spec;
    fit.prior = prior;
    std::array<BranchReduction, 2> red{spectral_reduce(Phi, prior.beta0, tail, y),
                                       spectral_reduce(Phi, prior.beta1, tail, y)};
    const VPosterior post0 = v_posterior_density(red[0], prior);
    const VPosterior post1 = v_posterior_density(red[1], prior);
    fit.log_m0 = post0.log_normalizer();
    fit.log_m1 = post1.log_normalizer();
    // with y = 0 both evidences are degenerate and carry no information about p
    fit.pstar = post0.degenerate() && post1.degenerate() ? prior.p
                                                          : posterior_mixture_weight(prior.p, fit.log_m0, fit.log_m1);
    fit.gamma0 = branch_posterior_mean(red[0], post0, prior.beta0, Phi);
    fit.gamma1 = branch_posterior_mean(red[1], post1, prior.beta1, Phi);
    if (with_variance) {
        fit.variance0 = branch_posterior_variance(red[0], post0, prior.beta0, Phi);
        fit.variance1 = branch_posterior_variance(red[1], post1, prior.beta1, Phi);
        fit.variance = posterior_variance(fit.variance0, fit.variance1, fit.gamma0, fit.gamma1, fit.pstar);
    }
    fit.reduction = std::move(red);
    return fit;
}

BayesFit fit_hierarchical(const RegressionData& data, const BasisSpec& spec, const PriorSpec& prior) {
    data.validate();
    prior.validate(spec.K);
    const Eigen::MatrixXd Phi = design_matrix(spec, data.points);
    const Eigen::Index n = Phi.rows();
    const Eigen::MatrixXd Qz = prior.p > 0.0 ? kernel_matrix(zonal_kernel(spec.K, prior.series_tolerance), data.points)
                                             : Eigen::MatrixXd::Zero(n, n);
    const Eigen::MatrixXd Qf = prior.p < 1.0 ? kernel_matrix(full_kernel(spec.K, prior.series_tolerance), data.points)
                                             : Eigen::MatrixXd::Zero(n, n);
    return fit_hierarchical(Phi, Qz, Qf, data.y, spec, prior, true);
}

std::array<double, 2> branch_log_marginals(const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& tail_zonal,
                                           const Eigen::MatrixXd& tail_full, const Eigen::VectorXd& y,
                                           const PriorSpec& prior) {
    const Eigen::MatrixXd tail = mixture_tail_matrix(tail_zonal, tail_full, prior.p);
    std::array<double, 2> out{};
    for (int r = 0; r < 2; ++r) {
        const auto red = spectral_reduce(Phi, r == 0 ? prior.beta0 : prior.beta1, tail, y);
        out[r] = v_posterior_density(red, prior).log_normalizer();
    }
    return out;
}

Eigen::VectorXd full_ladder(int K) {
    Eigen::VectorXd g(basis_size(K));
    for (int i = 0; i < g.size(); ++i) g(i) = iota_weight(basis_index(i).k);
    return g;
}

ShrinkageResult shrinkage_estimate(const RegressionData& data, const BasisSpec& spec, const PriorSpec& prior) {
    data.validate();
    prior.validate(spec.K);
    const Eigen::VectorXd& gam = prior.beta1;
    if (!(gam.minCoeff() > 0.0)) throw DomainError("shrinkage estimate needs a positive definite Gamma");
    const Eigen::MatrixXd Phi = design_matrix(spec, data.points);
    const Eigen::MatrixXd Q = kernel_matrix(full_kernel(spec.K, prior.series_tolerance), data.points);
    const Eigen::Index n = Phi.rows(), kappa = Phi.cols();
    const Eigen::VectorXd& y = data.y;

    // Direct: Xi Upsilon' H E[(v + D)^-1] H' y with Upsilon Xi Upsilon' = Phi Gamma Phi' + Q.
    const BranchReduction red = spectral_reduce(Phi, gam, Q, y);
    const VPosterior post = v_posterior_density(red, prior);
    const Eigen::VectorXd t = red.H * (post.expected_inverse().asDiagonal() * red.w);
    ShrinkageResult out;
    out.direct.resize(kappa + n);
    out.direct.head(kappa) = gam.asDiagonal() * (Phi.transpose() * t);
    out.direct.tail(n) = Q * t;

    // Minimum-norm least squares: psi = Upsilon' (Upsilon Upsilon')^-1 y.
    Eigen::MatrixXd UU = Phi * Phi.transpose();
    UU.diagonal().array() += 1.0;
    const Eigen::VectorXd z = UU.llt().solve(y);
    out.least_squares.resize(kappa + n);
    out.least_squares.head(kappa) = Phi.transpose() * z;
    out.least_squares.tail(n) = z;

    // psi = psi_ls - (v Xi^-1 + Upsilon'Upsilon)^-1 v Xi^-1 psi_ls, with
    // (v Xi^-1 + Upsilon'Upsilon)^-1 = Xi^{1/2} (v I + Xi^{1/2} Upsilon'Upsilon Xi^{1/2})^-1 Xi^{1/2}
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qe(symmetric_part(Q));
    const Eigen::VectorXd qs = qe.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd Qh = qe.eigenvectors() * qs.asDiagonal() * qe.eigenvectors().transpose();
    Eigen::MatrixXd UX(n, kappa + n);  // Upsilon Xi^{1/2}
    UX.leftCols(kappa) = Phi * gam.cwiseSqrt().asDiagonal();
    UX.rightCols(n) = Qh;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ge(symmetric_part(UX.transpose() * UX));
    const Eigen::VectorXd lam = ge.eigenvalues().cwiseMax(0.0);
    Eigen::VectorXd shrink = Eigen::VectorXd::Zero(kappa + n);
    const auto& v = post.nodes();
    const auto& om = post.weights();
    for (std::size_t j = 0; j < v.size(); ++j) shrink.array() += om[j] * v[j] / (v[j] + lam.array());

    auto xi_half = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd r(kappa + n);
        r.head(kappa) = gam.cwiseSqrt().asDiagonal() * x.head(kappa);
        r.tail(n) = Qh * x.tail(n);
        return r;
    };
    // Q is positive definite for the full tail kernel, so Xi^{-1/2} exists
    if (!(qe.eigenvalues().minCoeff() > 0.0)) throw NumericalError("tail matrix is not positive definite");
    const Eigen::MatrixXd Qih = qe.eigenvectors() * qs.cwiseInverse().asDiagonal() * qe.eigenvectors().transpose();
    Eigen::VectorXd scaled(kappa + n);  // Xi^{-1/2} psi_ls
    scaled.head(kappa) = gam.cwiseSqrt().cwiseInverse().asDiagonal() * out.least_squares.head(kappa);
    scaled.tail(n) = Qih * out.least_squares.tail(n);
    const Eigen::VectorXd inner =
        ge.eigenvectors() * (shrink.asDiagonal() * (ge.eigenvectors().transpose() * scaled));
    out.shrinkage = out.least_squares - xi_half(inner);
    out.max_discrepancy = (out.direct - out.shrinkage).cwiseAbs().maxCoeff();
    return out;
}

KernelExpansion hb_fixed_v(const RegressionData& data, const KernelSpec& kernel, const Eigen::VectorXd& gamma_diag,
                           double v) {
    data.validate();
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("v must be positive");
    if (gamma_diag.size() != kernel.basis.size() || !(gamma_diag.minCoeff() > 0.0))
        throw DomainError("Gamma must be positive with (K+1)^2 entries");
    const Eigen::MatrixXd Phi = design_matrix(kernel.basis, data.points);
    const detail::SpdSolver Qv(kernel_matrix(kernel, data.points, v, RidgeScale::One));
    const Eigen::MatrixXd QiPhi = Qv.solve(Phi);
    Eigen::MatrixXd M = symmetric_part(Phi.transpose() * QiPhi);
    M.diagonal() += gamma_diag.cwiseInverse();
    const Eigen::VectorXd d = M.ldlt().solve(QiPhi.transpose() * data.y);
    const Eigen::VectorXd c = Qv.solve(data.y - Phi * d);
    return KernelExpansion(kernel, data.points, c, d);
}

}  // namespace sphsmooth
