#include "sphsmooth/model_select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "sphsmooth/error.hpp"

namespace sphsmooth {

namespace {

double log_mix(double p, double lm0, double lm1) {
    if (p == 1.0) return lm0;
    if (p == 0.0) return lm1;
    const double a = std::log(p) + lm0, b = std::log1p(-p) + lm1;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

void check_level(const RegressionData& data, int K) {
    if (K < 0) throw DomainError("truncation level must be >= 0");
    if (!(static_cast<std::size_t>(basis_size(K)) < data.size()))
        throw DomainError("truncation level K needs (K+1)^2 < n");
}

struct LevelMatrices {
    Eigen::MatrixXd Phi, Qz, Qf;
};

LevelMatrices level_matrices(const RegressionData& data, int K, double tol) {
    return {design_matrix(BasisSpec(K, 2.0, WeightScheme::Iota), data.points),
            kernel_matrix(zonal_kernel(K, tol), data.points), kernel_matrix(full_kernel(K, tol), data.points)};
}

}  // namespace

std::vector<double> default_p_grid() { return {0.5, 0.8, 0.9, 0.95, 0.995}; }

int max_truncation(std::size_t n) {
    int K = -1;
    while (static_cast<std::size_t>(basis_size(K + 1)) < n) ++K;
    return K;
}

double log_marginal(const RegressionData& data, int K, const PriorSpec& prior) {
    data.validate();
    check_level(data, K);
    prior.validate(K);
    const auto m = level_matrices(data, K, prior.series_tolerance);
    const auto lm = branch_log_marginals(m.Phi, m.Qz, m.Qf, data.y, prior);
    return log_mix(prior.p, lm[0], lm[1]);
}

SelectionTable bayes_factor_table(const RegressionData& data, const std::vector<int>& K_range,
                                  const std::vector<double>& p_grid, const PriorOptions& options) {
    data.validate();
    if (K_range.empty()) throw DomainError("K range is empty");
    if (p_grid.empty()) throw DomainError("p grid is empty");
    std::vector<int> Ks = K_range;
    std::sort(Ks.begin(), Ks.end());
    Ks.erase(std::unique(Ks.begin(), Ks.end()), Ks.end());
    for (int K : Ks) check_level(data, K);
    for (double p : p_grid)
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p grid values must lie in [0, 1]");

    SelectionTable table;
    table.K_max = Ks.back();
    std::vector<double> loglik;
    for (int K : Ks) {
        const auto m = level_matrices(data, K, options.series_tolerance);
        ModelScore s;
        s.K = K;
        s.log_marginal = -std::numeric_limits<double>::infinity();
        for (double p : p_grid) {
            PriorSpec prior = options.make(K, p);
            prior.series_tolerance = options.series_tolerance;
            const auto lm = branch_log_marginals(m.Phi, m.Qz, m.Qf, data.y, prior);
            const double l = log_mix(p, lm[0], lm[1]);
            if (l > s.log_marginal) {
                s.log_marginal = l;
                s.p_best = p;
            }
        }
        table.scores.push_back(s);
        loglik.push_back(max_log_likelihood(data, K, SchwarzFit::Gls, options.series_tolerance));
    }
    const double ref = table.scores.back().log_marginal;
    const double lref = loglik.back();
    const double logn = std::log(static_cast<double>(data.size()));
    const double pimax = basis_size(table.K_max);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < table.scores.size(); ++i) {
        auto& s = table.scores[i];
        s.log_bayes_factor = s.log_marginal - ref;
        s.schwarz = s.K == table.K_max ? 0.0 : loglik[i] - lref + 0.5 * (pimax - basis_size(s.K)) * logn;
        if (s.log_bayes_factor > best) {  // strict: ties keep the smaller K
            best = s.log_bayes_factor;
            table.best_K = s.K;
        }
    }
    return table;
}

double max_log_likelihood(const RegressionData& data, int K, SchwarzFit fit, double series_tolerance) {
    data.validate();
    check_level(data, K);
    const BasisSpec spec(K, 2.0, WeightScheme::Iota);
    const Eigen::MatrixXd Phi = design_matrix(spec, data.points);
    const Eigen::VectorXd& y = data.y;
    const Eigen::Index n = Phi.rows(), kappa = Phi.cols();
    const double dn = static_cast<double>(n);
    constexpr double kLog2Pi = 1.8378770664093454836;

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Phi);
    const Eigen::MatrixXd F1 = qr.householderQ() * Eigen::MatrixXd::Identity(n, kappa);
    const Eigen::VectorXd r = y - F1 * (F1.transpose() * y);
    const double rr = r.squaredNorm();
    if (!(rr > 0.0)) throw RankDeficient("data are reproduced exactly; likelihood is unbounded");
    if (fit == SchwarzFit::Ols) {
        const double s2 = rr / dn;
        return -0.5 * dn * (kLog2Pi + std::log(s2) + 1.0);
    }

    // Method of moments on the OLS residuals:
    //   E r'r  = s2 tr(M)  + t2 tr(MQ)
    //   E r'Qr = s2 tr(MQ) + t2 tr(MQMQ)
    const Eigen::MatrixXd Q = kernel_matrix(full_kernel(K, series_tolerance), data.points);
    const Eigen::MatrixXd MQ = Q - F1 * (F1.transpose() * Q);
    const double trM = dn - static_cast<double>(kappa);
    const double trMQ = MQ.trace();
    const double trMQMQ = MQ.cwiseProduct(MQ.transpose()).sum();
    const double rQr = r.dot(Q * r);
    const double det = trM * trMQMQ - trMQ * trMQ;
    double s2 = det != 0.0 ? (rr * trMQMQ - rQr * trMQ) / det : rr / trM;
    double t2 = det != 0.0 ? (trM * rQr - trMQ * rr) / det : 0.0;
    const double floor = 1e-10 * rr / dn;
    if (!(t2 >= 0.0)) {
        t2 = 0.0;
        s2 = rr / trM;
    }
    if (!(s2 >= floor)) {
        s2 = floor;
        t2 = std::max(0.0, (rr - s2 * trM) / trMQ);
    }

    Eigen::MatrixXd Sigma = t2 * Q;
    Sigma.diagonal().array() += s2;
    Eigen::LLT<Eigen::MatrixXd> L(Sigma);
    if (L.info() != Eigen::Success) throw NumericalError("plug-in covariance is not positive definite");
    const Eigen::MatrixXd LiPhi = L.matrixL().solve(Phi);
    const Eigen::VectorXd Liy = L.matrixL().solve(y);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> gls(LiPhi);
    if (gls.rank() < kappa) throw RankDeficient("GLS design is rank deficient");
    const Eigen::VectorXd g = gls.solve(Liy);
    const Eigen::VectorXd e = Liy - LiPhi * g;
    const double logdet = 2.0 * L.matrixLLT().diagonal().array().log().sum();
    return -0.5 * (dn * kLog2Pi + logdet + e.squaredNorm());
}

double schwarz_criterion(const RegressionData& data, int K_i, int K_j, SchwarzFit fit, double series_tolerance) {
    if (K_i > K_j) throw DomainError("Schwarz criterion expects nested models with K_i <= K_j");
    if (K_i == K_j) {
        check_level(data, K_j);
        return 0.0;
    }
    const double li = max_log_likelihood(data, K_i, fit, series_tolerance);
    const double lj = max_log_likelihood(data, K_j, fit, series_tolerance);
    const double dpi = basis_size(K_j) - basis_size(K_i);
    return li - lj + 0.5 * dpi * std::log(static_cast<double>(data.size()));
}

}  // namespace sphsmooth
