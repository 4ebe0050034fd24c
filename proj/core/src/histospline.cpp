#include "sphsmooth/histospline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sphsmooth/error.hpp"
#include "sphsmooth/kernels.hpp"
#include "sphsmooth/quadrature.hpp"

namespace sphsmooth {

namespace {

constexpr double kPi = std::numbers::pi;

void check_m(int m) {
    if (m < 1) throw DomainError("cells per axis m must be >= 1");
}

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

// Sector averages of cos(q phi) and sin(q phi).
void sector_averages(int m, int q, int b, double& cavg, double& savg) {
    const double delta = 2.0 * kPi / m;
    const double mid = (b + 0.5) * delta;
    const double f = sinc(0.5 * q * delta);
    cavg = f * std::cos(q * mid);
    savg = f * std::sin(q * mid);
}

// Columns for degrees k0..k1 in basis order, offset by k0^2.
Eigen::MatrixXd functionals(const BandTable& table, int k0, int k1) {
    const int m = table.m();
    const int cols = basis_size(k1) - (k0 > 0 ? basis_size(k0 - 1) : 0);
    const int off = k0 * k0;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m) * m, cols);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            const Eigen::Index row = static_cast<Eigen::Index>(a) * m + b;
            for (int k = k0; k <= k1; ++k) out(row, k * k - off) = table(a, k, 0);
            for (int q = 1; q <= k1; ++q) {
                double cavg = 0.0, savg = 0.0;
                sector_averages(m, q, b, cavg, savg);
                for (int k = std::max(q, k0); k <= k1; ++k) {
                    const double t = std::numbers::sqrt2 * table(a, k, q);
                    out(row, k * k + 2 * q - 1 - off) = t * cavg;
                    out(row, k * k + 2 * q - off) = t * savg;
                }
            }
        }
    return out;
}

Eigen::MatrixXd kernel_from_table(const BandTable& table, int K, KernelBranch branch) {
    const int m = table.m(), N = table.kmax();
    const int qmax = branch == KernelBranch::Zonal ? 0 : N;
    // R[delta](a, a') = sum_q eps_q sinc^2(q pi/m) cos(2 pi q delta/m) T_q(a, a')
    std::vector<Eigen::MatrixXd> R(m, Eigen::MatrixXd::Zero(m, m));
    for (int q = 0; q <= qmax; ++q) {
        const int k0 = std::max(q, K + 1);
        if (k0 > N) continue;
        const double f = sinc(q * kPi / m);
        const double scale = (q == 0 ? 1.0 : 2.0) * f * f;
        if (scale == 0.0) continue;
        Eigen::MatrixXd theta(m, N - k0 + 1);
        for (int a = 0; a < m; ++a)
            for (int k = k0; k <= N; ++k) theta(a, k - k0) = table(a, k, q) * std::sqrt(iota_weight(k));
        const Eigen::MatrixXd T = theta * theta.transpose();
        for (int delta = 0; delta < m; ++delta) R[delta] += (scale * std::cos(2.0 * kPi * q * delta / m)) * T;
    }
    const Eigen::Index n = static_cast<Eigen::Index>(m) * m;
    Eigen::MatrixXd Q(n, n);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            for (int a2 = 0; a2 < m; ++a2)
                for (int b2 = 0; b2 < m; ++b2) Q(a * m + b, a2 * m + b2) = R[((b - b2) % m + m) % m](a, a2);
    return 0.5 * (Q + Q.transpose());
}

}  // namespace

double CellGrid::theta_lo(int j1) const { return kPi * j1 / m; }
double CellGrid::theta_hi(int j1) const { return kPi * (j1 + 1) / m; }
double CellGrid::phi_lo(int j2) const { return 2.0 * kPi * j2 / m; }
double CellGrid::phi_hi(int j2) const { return 2.0 * kPi * (j2 + 1) / m; }

double CellGrid::volume(int j1, int /*j2*/) const {
    // cos(lo) - cos(hi) = 2 sin(mid) sin(half-width), no cancellation near the poles
    const double mid = 0.5 * (theta_lo(j1) + theta_hi(j1)), half = 0.5 * kPi / m;
    return 2.0 * std::sin(mid) * std::sin(half) * (2.0 * kPi / m);
}

Direction CellGrid::center(int j1, int j2) const {
    return Direction::from_angles(0.5 * (theta_lo(j1) + theta_hi(j1)), 0.5 * (phi_lo(j2) + phi_hi(j2)));
}

Eigen::VectorXd CellGrid::volumes() const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(m) * m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) v(a * m + b) = volume(a, b);
    return v;
}

Eigen::VectorXd CellGrid::densities() const {
    if (frequencies.rows() != m || frequencies.cols() != m) throw DomainError("frequency matrix must be m x m");
    Eigen::VectorXd y(static_cast<Eigen::Index>(m) * m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) y(a * m + b) = frequencies(a, b) / volume(a, b);
    return y;
}

std::vector<Direction> CellGrid::centers() const {
    std::vector<Direction> out;
    out.reserve(static_cast<std::size_t>(m) * m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) out.push_back(center(a, b));
    return out;
}

CellGrid CellGrid::uniform(int m) {
    check_m(m);
    CellGrid g;
    g.m = m;
    g.frequencies.resize(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) g.frequencies(a, b) = g.volume(a, b) / (4.0 * kPi);
    return g;
}

CellGrid bin_directions(const std::vector<Direction>& directions, int m) {
    if (m < 2) throw DomainError("bin_directions: m must be >= 2");
    if (directions.empty()) throw EmptyInput("bin_directions: no directions");
    CellGrid g;
    g.m = m;
    g.frequencies = Eigen::MatrixXd::Zero(m, m);
    for (const auto& d : directions) {
        // half-open cells; theta = pi (south pole) lands in the last band
        const int a = std::clamp(static_cast<int>(std::floor(d.theta * m / kPi)), 0, m - 1);
        const int b = std::clamp(static_cast<int>(std::floor(d.phi * m / (2.0 * kPi))), 0, m - 1);
        g.frequencies(a, b) += 1.0;
    }
    g.frequencies /= static_cast<double>(directions.size());
    return g;
}

BandTable::BandTable(int m, int kmax, int node_scale) : m_(m), kmax_(kmax) {
    check_m(m);
    if (kmax < 0) throw DomainError("BandTable: kmax must be >= 0");
    if (node_scale < 1) throw DomainError("BandTable: node_scale must be >= 1");
    stride_ = offset(kmax + 1);
    data_.assign(stride_ * m, 0.0);
    const int nodes = node_scale * std::max(20, 2 * kmax);
    std::vector<double> col(kmax + 1);
    for (int a = 0; a < m; ++a) {
        const double lo = kPi * a / m, hi = kPi * (a + 1) / m;
        const double half = 0.5 * kPi / m;
        const double measure = 2.0 * std::sin(lo + half) * std::sin(half);
        const QuadratureRule rule = gauss_legendre(nodes, lo, hi);
        double* row = data_.data() + a * stride_;
        for (int j = 0; j < nodes; ++j) {
            const double t = rule.nodes[j];
            const double c = std::cos(t), s = std::sin(t);
            const double w = rule.weights[j] * s / measure;
            for (int q = 0; q <= kmax; ++q) {
                normalized_legendre_column(q, kmax, c, s, col.data());
                double* dst = row + offset(q);
                for (int k = q; k <= kmax; ++k) dst[k - q] += w * col[k - q];
            }
        }
    }
}

Eigen::MatrixXd cell_functionals(const BasisSpec& spec, int m, int node_scale) {
    spec.validate();
    return functionals(BandTable(m, spec.K, node_scale), 0, spec.K);
}

Eigen::MatrixXd cell_kernel_matrix(int K, int m, int series_degree, KernelBranch branch, int node_scale) {
    if (K < 0) throw DomainError("K must be >= 0");
    if (branch == KernelBranch::GenericS) throw DomainError("cell-averaged kernel needs the Full or Zonal branch");
    if (series_degree <= K) throw DomainError("series degree must exceed K");
    return kernel_from_table(BandTable(m, series_degree, node_scale), K, branch);
}

int default_series_degree(int m) { return std::max(96, 12 * m); }

HistosplineFit::HistosplineFit(int K, int m, double xi, int series_degree, Eigen::VectorXd c_check,
                               Eigen::VectorXd d_check, double roughness)
    : K_(K), m_(m), N_(series_degree), xi_(xi), roughness_(roughness), c_(std::move(c_check)), d_(std::move(d_check)) {
    check_m(m);
    if (K < 0 || N_ <= K) throw DomainError("histospline: need 0 <= K < series degree");
    if (c_.size() != static_cast<Eigen::Index>(m) * m) throw DomainError("histospline: c has wrong length");
    if (d_.size() != basis_size(K)) throw DomainError("histospline: d has wrong length");
    const Eigen::MatrixXd ext = functionals(BandTable(m, N_), K + 1, N_);
    Eigen::VectorXd g = ext.transpose() * c_;
    for (int k = K + 1, pos = 0; k <= N_; ++k)
        for (int j = 0; j < 2 * k + 1; ++j, ++pos) g(pos) *= iota_weight(k);
    tail_.resize(basis_size(N_));
    tail_ << d_, g;
}

double HistosplineFit::evaluate(const Direction& x) const {
    Eigen::VectorXd phi(tail_.size());
    basis_vector(N_, x, phi.data());
    return phi.dot(tail_);
}

double HistosplineFit::normalizing_constant() const { return std::sqrt(4.0 * kPi) * d_(0); }

HistosplineFit fit_histospline(const CellGrid& grid, int K, double xi, int series_degree) {
    check_m(grid.m);
    if (K < 0) throw DomainError("K must be >= 0");
    if (!(xi > 0.0) || !std::isfinite(xi)) throw DomainError("xi must be positive");
    const Eigen::Index n = static_cast<Eigen::Index>(grid.m) * grid.m;
    if (basis_size(K) > n) throw DomainError("histospline: (K+1)^2 exceeds the number of cells");
    const int N = series_degree > 0 ? series_degree : std::max(default_series_degree(grid.m), K + 1);
    if (N <= K) throw DomainError("series degree must exceed K");
    const Eigen::VectorXd y = grid.densities();
    const BandTable table(grid.m, N);
    const Eigen::MatrixXd Phi = functionals(table, 0, K);
    const Eigen::MatrixXd Q = kernel_from_table(table, K, KernelBranch::Full);
    Eigen::MatrixXd Qr = Q;
    Qr.diagonal().array() += static_cast<double>(n) * xi;
    RepresenterSolution sol = solve_representer(Phi, Qr, y);
    const double rough = sol.c.dot(Q * sol.c);
    return HistosplineFit(K, grid.m, xi, N, std::move(sol.c), std::move(sol.d), rough);
}

RegressionData binned_regression_data(const CellGrid& grid) {
    RegressionData data;
    data.points = grid.centers();
    data.y = grid.densities();
    return data;
}

BayesFit fit_hierarchical_binned(const CellGrid& grid, const BasisSpec& spec, const PriorSpec& prior,
                                 BinnedMode mode, int series_degree) {
    spec.validate();
    if (mode == BinnedMode::CellCenters) return fit_hierarchical(binned_regression_data(grid), spec, prior);
    prior.validate(spec.K);
    const Eigen::Index n = static_cast<Eigen::Index>(grid.m) * grid.m;
    if (basis_size(spec.K) > n) throw DomainError("binned fit: (K+1)^2 exceeds the number of cells");
    const int N = series_degree > 0 ? series_degree : std::max(default_series_degree(grid.m), spec.K + 1);
    const BandTable table(grid.m, N);
    const Eigen::MatrixXd Phi = functionals(table, 0, spec.K);
    const Eigen::MatrixXd Qz = kernel_from_table(table, spec.K, KernelBranch::Zonal);
    const Eigen::MatrixXd Qf = kernel_from_table(table, spec.K, KernelBranch::Full);
    return fit_hierarchical(Phi, Qz, Qf, grid.densities(), spec, prior, true);
}

}  // namespace sphsmooth
