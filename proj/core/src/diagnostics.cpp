#include "sphsmooth/diagnostics.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "sphsmooth/bayes.hpp"
#include "sphsmooth/error.hpp"
#include "sphsmooth/kernels.hpp"
#include "sphsmooth/quadrature.hpp"
#include "sphsmooth/sampling.hpp"
#include "sphsmooth/spectral.hpp"
#include "sphsmooth/spline.hpp"

namespace sphsmooth {

namespace {

constexpr double kPi = std::numbers::pi;

double zeta_term(int k, double s) { return (2.0 * k + 1.0) / (4.0 * kPi) * std::pow(double(k) * (k + 1), -s); }

// Sum of zeta terms for k in [k0, k1], smallest terms first.
double zeta_range(double s, int k0, int k1) {
    double sum = 0.0, comp = 0.0;
    for (int k = k1; k >= k0; --k) {
        const double t = zeta_term(k, s) - comp;
        const double u = sum + t;
        comp = (u - sum) - t;
        sum = u;
    }
    return sum;
}

double sup_distance(const KernelExpansion& a, const KernelExpansion& b, const std::vector<Direction>& xs) {
    return (a.evaluate(xs) - b.evaluate(xs)).cwiseAbs().maxCoeff();
}

RegressionData smooth_instance(std::size_t n, double sigma, Rng& rng) {
    RegressionData data;
    data.points = uniform_sphere(n, rng);
    data.y.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector3d u = data.points[i].unit();
        data.y(i) = std::exp(u.z()) + 0.5 * u.x() * u.y();
    }
    data.y += sigma * normal_vector(data.y.size(), rng);
    return data;
}

// Gauss-Legendre in cos(theta) times the trapezoid rule in phi.
struct SphereRule {
    std::vector<Direction> nodes;
    Eigen::VectorXd weights;
};

SphereRule sphere_rule(int n_theta, int n_phi) {
    const QuadratureRule gl = gauss_legendre(n_theta);
    SphereRule r;
    r.weights.resize(n_theta * n_phi);
    for (int i = 0; i < n_theta; ++i)
        for (int j = 0; j < n_phi; ++j) {
            r.nodes.push_back(Direction::from_angles(std::acos(gl.nodes[i]), 2.0 * kPi * j / n_phi));
            r.weights(i * n_phi + j) = gl.weights[i] * 2.0 * kPi / n_phi;
        }
    return r;
}

}  // namespace

MinimaxConstants minimax_constants(double s, int dim, double vol) {
    if (dim < 1) throw DomainError("dimension must be >= 1");
    if (!(s > 0.5 * dim)) throw DomainError("minimax constants need s > dim/2");
    if (!(vol > 0.0)) throw DomainError("volume must be positive");
    MinimaxConstants c;
    c.W = vol / (std::pow(2.0 * std::sqrt(kPi), dim) * std::tgamma(1.0 + 0.5 * dim));
    const double e = 2.0 * s + dim;
    c.phi = std::pow(2.0 * s / (2.0 * s + 2.0 * dim), 2.0 * s / e) * std::pow(e / dim, dim / e);
    return c;
}

double weyl_ratio(int k) {
    if (k < 1) throw DomainError("weyl_ratio needs k >= 1");
    return double(k) * (k + 1) / ((k + 1.0) * (k + 1.0));
}

ZetaResult zeta_check(double s, int k_max) {
    if (!(s > 1.0)) throw DomainError("zeta series needs s > 1");
    if (k_max < 1) throw DomainError("k_max must be >= 1");
    ZetaResult r;
    r.partial = zeta_range(s, 1, k_max);
    r.tail_bound = std::pow(double(k_max) * (k_max + 1), 1.0 - s) / (4.0 * kPi * (s - 1.0));
    return r;
}

double zeta_at(const Direction& x, double s, int k_point, int k_max) {
    if (!(s > 1.0)) throw DomainError("zeta series needs s > 1");
    if (k_point < 1 || k_max < k_point) throw DomainError("need 1 <= k_point <= k_max");
    Eigen::VectorXd y(basis_size(k_point));
    basis_vector(k_point, x, y.data());
    double head = 0.0;
    for (int k = k_point; k >= 1; --k)
        head += std::pow(double(k) * (k + 1), -s) * y.segment(k * k, 2 * k + 1).squaredNorm();
    return (k_max > k_point ? zeta_range(s, k_point + 1, k_max) : 0.0) + head;
}

LimitReport limit_suite(std::uint64_t seed) {
    LimitReport rep;
    Rng rng(derive_seed(seed, 0));
    {
        const RegressionData data = smooth_instance(30, 0.1, rng);
        const KernelSpec kernel = full_kernel(2);
        const double xi = 1e-3;
        const SplineFit spline = fit_spline(data, kernel, xi);
        const std::vector<Direction> query = uniform_sphere(50, rng);
        rep.diffuse_limit_discrepancy = sup_distance(diffuse_bayes_estimate(data, kernel, 1e8, xi), spline, query);
        const double v = static_cast<double>(data.size()) * xi;
        const Eigen::VectorXd gamma = Eigen::VectorXd::Constant(kernel.basis.size(), 1e6);
        rep.hb_limit_discrepancy = sup_distance(hb_fixed_v(data, kernel, gamma, v), spline, query);
    }
    for (int rep_i = 0; rep_i < 10; ++rep_i) {
        Rng r(derive_seed(seed, 1 + rep_i));
        const RegressionData data = smooth_instance(10, 0.1, r);
        const BasisSpec spec(1, 2.0, WeightScheme::Iota);
        const ShrinkageResult s = shrinkage_estimate(data, spec, PriorSpec::defaults(spec.K));
        rep.shrinkage_discrepancy = std::max(rep.shrinkage_discrepancy, s.max_discrepancy);
    }
    rep.shrinkage_pass = rep.shrinkage_discrepancy < 1e-9;
    rep.diffuse_pass = rep.diffuse_limit_discrepancy < 1e-5;
    rep.hb_pass = rep.hb_limit_discrepancy < 1e-4;
    return rep;
}

RateReport rate_experiment(double s, const std::vector<int>& n_list, int replicates, std::uint64_t seed,
                           const RateOptions& options) {
    if (!(s > 1.0)) throw DomainError("rate experiment needs s > 1");
    if (n_list.size() < 2) throw DomainError("rate experiment needs at least two sample sizes");
    for (std::size_t i = 0; i < n_list.size(); ++i)
        if (n_list[i] <= basis_size(options.K) || (i > 0 && n_list[i] <= n_list[i - 1]))
            throw DomainError("sample sizes must increase and exceed (K+1)^2");
    if (replicates < 1) throw DomainError("need at least one replicate");
    if (options.truth_degree < 0 || options.K < 0) throw DomainError("degrees must be >= 0");

    RateReport rep;
    rep.s = s;
    rep.n = n_list;
    rep.theoretical_slope = -2.0 * s / (2.0 * s + 2.0);

    // truth: (1 + k)^{-(s+1)} with a seeded sign pattern
    Rng sign_rng(derive_seed(seed, 0));
    std::bernoulli_distribution coin(0.5);
    Eigen::VectorXd truth(basis_size(options.truth_degree));
    for (int i = 0; i < truth.size(); ++i) {
        const int k = basis_index(i).k;
        truth(i) = (coin(sign_rng) ? 1.0 : -1.0) * std::pow(1.0 + k, -(s + 1.0));
        if (k >= 1) rep.truth_norm_bound += std::pow(double(k) * (k + 1), s) * truth(i) * truth(i);
    }

    const SphereRule rule = sphere_rule(40, 50);
    Eigen::VectorXd f_true(rule.weights.size());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) f_true(i) = evaluate_harmonic_series(truth, rule.nodes[i]);

    // Nested designs: replicate r draws one design of the largest size and
    // each n uses its first n points (and noise values), so the per-n errors
    // are positively correlated and the fitted slope is less noisy.
    const KernelSpec kernel = generic_kernel(options.K, s);
    const std::size_t n_big = static_cast<std::size_t>(n_list.back());
    const Eigen::MatrixXd Phi_nodes = design_matrix(kernel.basis, rule.nodes);
    std::vector<double> acc(n_list.size(), 0.0);
    for (int r = 0; r < replicates; ++r) {
        Rng rng(derive_seed(seed, 1 + static_cast<std::uint64_t>(r)));
        const std::vector<Direction> pts = uniform_sphere(n_big, rng);
        const bool simulate = options.noise == NoiseAverage::Simulated;
        const RegressionData full = synthetic_data(pts, truth, simulate ? options.noise_sd : 0.0, rng);
        for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
            const int n = n_list[ni];
            const double xi = options.xi_scale * std::pow(double(n), rep.theoretical_slope);
            RegressionData data;
            data.points.assign(full.points.begin(), full.points.begin() + n);
            data.y = full.y.head(n);
            const SplineFit fit = fit_spline(data, kernel, xi);
            const Eigen::VectorXd err = fit.evaluate(rule.nodes) - f_true;
            acc[ni] += rule.weights.dot(err.cwiseAbs2());
            if (simulate || options.noise_sd == 0.0) continue;
            // sigma^2 sum_j w_j ||S_j||^2 with S = Phi_nodes D + Q_cross C the node-value smoother
            const Eigen::LLT<Eigen::MatrixXd> llt(kernel_matrix(kernel, data.points, xi));
            if (llt.info() != Eigen::Success) throw NumericalError("rate experiment: kernel system not positive definite");
            const Eigen::MatrixXd Phi = design_matrix(kernel.basis, data.points);
            const Eigen::MatrixXd X = llt.solve(Phi);
            const Eigen::MatrixXd D = (Phi.transpose() * X).ldlt().solve(X.transpose());
            const Eigen::MatrixXd C = llt.solve(Eigen::MatrixXd::Identity(n, n)) - X * D;
            const Eigen::MatrixXd S = Phi_nodes * D + kernel_cross(kernel, rule.nodes, data.points) * C;
            acc[ni] += options.noise_sd * options.noise_sd * rule.weights.dot(S.rowwise().squaredNorm());
        }
    }
    for (double a : acc) rep.mise.push_back(a / replicates);

    // least squares slope of log MISE on log n
    const Eigen::Index m = static_cast<Eigen::Index>(n_list.size());
    Eigen::VectorXd lx(m), ly(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        lx(i) = std::log(double(n_list[i]));
        ly(i) = std::log(rep.mise[i]);
    }
    const Eigen::VectorXd cx = lx.array() - lx.mean();
    rep.slope = cx.dot(ly.array().matrix() - Eigen::VectorXd::Constant(m, ly.mean())) / cx.squaredNorm();
    return rep;
}

}  // namespace sphsmooth
