#include "sphsmooth/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "sphsmooth/error.hpp"

namespace sphsmooth {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDuplicateTol = 1e-9;

// Per-degree zonal coefficient: (2k+1)/(4 pi) * iota_k^{-2} = 1 / (2 pi (k+1)(k+2)(k+3)).
inline double zonal_coeff(int k) { return 1.0 / (2.0 * kPi * (k + 1.0) * (k + 2.0) * (k + 3.0)); }

// Smallest N >= K such that the zonal tail beyond N is provably below tol.
// |P_k| <= 1 gives 1/(4 pi (N+2)(N+3)); Bernstein's |P_k(cos t)| <= sqrt(2/(pi k sin t))
// sharpens it when the colatitudes stay away from the poles.
int zonal_terms(int K, double s1, double s2, double tol) {
    double n = std::ceil(std::sqrt(1.0 / (4.0 * kPi * tol) + 0.25) - 2.5);
    const double smax = std::max(s1, s2), sprod = s1 * s2;
    if (smax > 0.0)
        n = std::min(n, std::ceil(std::pow(std::sqrt(2.0 / (kPi * smax)) / (2.0 * kPi * 2.5 * tol), 0.4)));
    if (sprod > 0.0) n = std::min(n, std::ceil(std::cbrt(1.0 / (3.0 * kPi * kPi * tol * std::sqrt(sprod)))));
    return std::max(K, std::max(1, static_cast<int>(n)));
}

// Tail bound of sum_{k>N} (k(k+1))^{-s} (2k+1)/(4 pi) |P_k(t)|, sin_g = sin of the angle.
double generic_bound(int N, double s, double sin_g) {
    const double nn = double(N) * (N + 1.0);
    double b = std::pow(nn, 1.0 - s) / ((s - 1.0) * 4.0 * kPi);
    if (sin_g > 0.0) {
        const double C = std::sqrt(2.0 / (kPi * sin_g));
        b = std::min(b, 3.0 * C * std::pow(double(N), 1.5 - 2.0 * s) / (4.0 * kPi * (2.0 * s - 1.5)));
    }
    return b;
}

int generic_terms(int K, double s, double sin_g, double tol) {
    int lo = std::max(K, 1);
    if (generic_bound(lo, s, sin_g) <= tol) return lo;
    int hi = lo;
    while (generic_bound(hi, s, sin_g) > tol) {
        lo = hi;
        if (hi > (1 << 26)) throw NumericalError("generic tail kernel: series tolerance unreachable");
        hi *= 2;
    }
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        (generic_bound(mid, s, sin_g) <= tol ? hi : lo) = mid;
    }
    return hi;
}

// Coefficients (k(k+1))^{-s} (2k+1)/(4 pi), grown on demand.
class GenericCoeffs {
public:
    explicit GenericCoeffs(double s) : s_(s) {}
    void ensure(int N) {
        for (int k = static_cast<int>(c_.size()); k <= N; ++k)
            c_.push_back(k == 0 ? 0.0 : std::pow(double(k) * (k + 1.0), -s_) * (2.0 * k + 1.0) / (4.0 * kPi));
    }
    double operator[](int k) const { return c_[k]; }

private:
    double s_;
    std::vector<double> c_;
};

double generic_sum(int K, int N, double t, const GenericCoeffs& c) {
    double p0 = 1.0, p1 = t, acc = 0.0;
    if (K < 1 && N >= 1) acc += c[1] * t;
    for (int k = 2; k <= N; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
        if (k > K) acc += c[k] * p2;
    }
    return acc;
}

struct PointCache {
    std::vector<Eigen::Vector3d> unit;
    std::vector<double> cos_t, sin_t;

    explicit PointCache(const std::vector<Direction>& pts) {
        unit.reserve(pts.size());
        for (const auto& p : pts) {
            unit.push_back(p.unit());
            cos_t.push_back(std::cos(p.theta));
            sin_t.push_back(std::sin(p.theta));
        }
    }
};

double clamp_dot(const Eigen::Vector3d& a, const Eigen::Vector3d& b) { return std::clamp(a.dot(b), -1.0, 1.0); }

double sin_between(const Eigen::Vector3d& a, const Eigen::Vector3d& b) { return a.cross(b).norm(); }

// Legendre tables P_k(cos theta_i), k <= len_i, for the zonal kernel.
std::vector<std::vector<double>> zonal_tables(const PointCache& pc, const std::vector<int>& len) {
    std::vector<std::vector<double>> t(len.size());
    for (std::size_t i = 0; i < len.size(); ++i) {
        t[i].resize(len[i] + 1);
        legendre_p_table(len[i], pc.cos_t[i], t[i].data());
    }
    return t;
}

double zonal_dot(int K, int N, const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (int k = K + 1; k <= N; ++k) acc += zonal_coeff(k) * a[k] * b[k];
    return acc;
}

Eigen::MatrixXd zonal_cross(const KernelSpec& spec, const PointCache& A, const PointCache& B, bool symmetric) {
    const int K = spec.basis.K;
    const std::size_t na = A.cos_t.size(), nb = B.cos_t.size();
    Eigen::MatrixXi terms(na, nb);
    std::vector<int> la(na, K), lb(nb, K);
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = 0; j < nb; ++j) {
            const int N = zonal_terms(K, A.sin_t[i], B.sin_t[j], spec.series_tolerance);
            terms(i, j) = N;
            la[i] = std::max(la[i], N);
            lb[j] = std::max(lb[j], N);
        }
    const auto ta = zonal_tables(A, la);
    const auto tb = symmetric ? ta : zonal_tables(B, lb);
    Eigen::MatrixXd out(na, nb);
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = symmetric ? i : 0; j < nb; ++j) {
            out(i, j) = zonal_dot(K, terms(i, j), ta[i], tb[j]);
            if (symmetric) out(j, i) = out(i, j);
        }
    return out;
}

Eigen::MatrixXd generic_cross(const KernelSpec& spec, const PointCache& A, const PointCache& B, bool symmetric) {
    const int K = spec.basis.K;
    const double s = spec.basis.s, tol = spec.series_tolerance;
    const std::size_t na = A.unit.size(), nb = B.unit.size();
    Eigen::MatrixXi terms(na, nb);
    int nmax = K;
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = symmetric ? i : 0; j < nb; ++j) {
            const bool diag = symmetric && i == j;
            terms(i, j) = generic_terms(K, s, diag ? 0.0 : sin_between(A.unit[i], B.unit[j]), tol);
            nmax = std::max(nmax, terms(i, j));
        }
    GenericCoeffs c(s);
    c.ensure(nmax);
    Eigen::MatrixXd out(na, nb);
    double diag_value = 0.0;
    if (symmetric && na > 0) diag_value = generic_sum(K, terms(0, 0), 1.0, c);
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = symmetric ? i : 0; j < nb; ++j) {
            if (symmetric && i == j) {
                out(i, i) = diag_value;  // t = 1 for every point
                continue;
            }
            out(i, j) = generic_sum(K, terms(i, j), clamp_dot(A.unit[i], B.unit[j]), c);
            if (symmetric) out(j, i) = out(i, j);
        }
    return out;
}

Eigen::MatrixXd full_cross(const KernelSpec& spec, const PointCache& A, const PointCache& B, bool symmetric) {
    const int K = spec.basis.K;
    const std::size_t na = A.unit.size(), nb = B.unit.size();
    Eigen::MatrixXd out(na, nb);
    const double diag_value = tail_kernel_full_t(K, 1.0);
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = symmetric ? i : 0; j < nb; ++j) {
            if (symmetric && i == j) {
                out(i, i) = diag_value;
                continue;
            }
            out(i, j) = tail_kernel_full_t(K, clamp_dot(A.unit[i], B.unit[j]));
            if (symmetric) out(j, i) = out(i, j);
        }
    return out;
}

Eigen::MatrixXd cross_impl(const KernelSpec& spec, const std::vector<Direction>& a, const std::vector<Direction>& b,
                           bool symmetric) {
    spec.validate();
    const PointCache A(a);
    const PointCache B = symmetric ? A : PointCache(b);
    switch (spec.branch) {
        case KernelBranch::Full: return full_cross(spec, A, B, symmetric);
        case KernelBranch::Zonal: return zonal_cross(spec, A, B, symmetric);
        case KernelBranch::GenericS: return generic_cross(spec, A, B, symmetric);
    }
    throw DomainError("unknown kernel branch");
}

}  // namespace

KernelSpec::KernelSpec(BasisSpec b, KernelBranch br, double tol) : basis(b), branch(br), series_tolerance(tol) {
    validate();
}

void KernelSpec::validate() const {
    basis.validate();
    if (!(series_tolerance > 0.0 && series_tolerance <= 1e-4))
        throw DomainError("series_tolerance must lie in (0, 1e-4]");
    const bool iota = basis.weights == WeightScheme::Iota;
    if (branch == KernelBranch::GenericS ? iota : !iota)
        throw DomainError("kernel branch and weight scheme disagree (Full/Zonal need Iota, GenericS needs Lambda)");
}

KernelSpec full_kernel(int K, double tol) { return KernelSpec(BasisSpec(K, 2.0, WeightScheme::Iota), KernelBranch::Full, tol); }

KernelSpec zonal_kernel(int K, double tol) {
    return KernelSpec(BasisSpec(K, 2.0, WeightScheme::Iota), KernelBranch::Zonal, tol);
}

KernelSpec generic_kernel(int K, double s, double tol) {
    return KernelSpec(BasisSpec(K, s, WeightScheme::Lambda), KernelBranch::GenericS, tol);
}

double q2_closed_form(double w) {
    if (!(std::abs(w) <= 1.0)) throw DomainError("q2_closed_form: argument outside [-1, 1]");
    const double z = 0.5 * (1.0 - w);
    if (z <= 0.0) return 0.5;  // log term times a vanishing bracket -> 0
    const double rz = std::sqrt(z);
    return 0.5 * (std::log1p(1.0 / rz) * (12.0 * z * z - 4.0 * z) - 12.0 * z * rz + 6.0 * z + 1.0);
}

double tail_kernel_full_t(int K, double t) {
    t = std::clamp(t, -1.0, 1.0);
    double partial = 0.0;
    if (K >= 1) {
        double p0 = 1.0, p1 = t;
        partial = t / 24.0;
        for (int k = 2; k <= K; ++k) {
            const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
            partial += p2 / ((k + 1.0) * (k + 2.0) * (k + 3.0));
        }
    }
    return ((0.5 * q2_closed_form(t) - 1.0 / 6.0) - partial) / (2.0 * kPi);
}

double tail_kernel_full(const KernelSpec& spec, const Direction& x1, const Direction& x2) {
    if (spec.branch != KernelBranch::Full) throw DomainError("tail_kernel_full needs a Full kernel spec");
    return tail_kernel_full_t(spec.basis.K, clamp_dot(x1.unit(), x2.unit()));
}

double tail_kernel_zonal(const KernelSpec& spec, const Direction& x1, const Direction& x2) {
    if (spec.branch != KernelBranch::Zonal) throw DomainError("tail_kernel_zonal needs a Zonal kernel spec");
    return cross_impl(spec, {x1}, {x2}, false)(0, 0);
}

double tail_kernel_generic(const KernelSpec& spec, const Direction& x1, const Direction& x2) {
    if (spec.branch != KernelBranch::GenericS) throw DomainError("tail_kernel_generic needs a GenericS kernel spec");
    return cross_impl(spec, {x1}, {x2}, false)(0, 0);
}

double tail_kernel(const KernelSpec& spec, const Direction& x1, const Direction& x2) {
    return cross_impl(spec, {x1}, {x2}, false)(0, 0);
}

void check_distinct(const std::vector<Direction>& points) {
    std::vector<Eigen::Vector3d> u;
    u.reserve(points.size());
    for (const auto& p : points) u.push_back(p.unit());
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = i + 1; j < u.size(); ++j) {
            if (std::atan2(u[i].cross(u[j]).norm(), u[i].dot(u[j])) < kDuplicateTol)
                throw DuplicatePoints("design points " + std::to_string(i) + " and " + std::to_string(j) +
                                      " coincide");
        }
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const std::vector<Direction>& points, double ridge,
                              RidgeScale scale) {
    if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw DomainError("ridge must be finite and >= 0");
    check_distinct(points);
    Eigen::MatrixXd Q = cross_impl(spec, points, points, true);
    const double n = static_cast<double>(points.size());
    Q.diagonal().array() += ridge * (scale == RidgeScale::N ? n : 1.0);
    return Q;
}

Eigen::MatrixXd kernel_cross(const KernelSpec& spec, const std::vector<Direction>& a,
                             const std::vector<Direction>& b) {
    return cross_impl(spec, a, b, false);
}

Eigen::VectorXd kernel_vector(const KernelSpec& spec, const std::vector<Direction>& points, const Direction& x) {
    return cross_impl(spec, points, {x}, false).col(0);
}

Eigen::MatrixXd mixture_tail_matrix(const std::vector<Direction>& points, const KernelSpec& zonal,
                                    const KernelSpec& full, double p) {
    if (zonal.branch != KernelBranch::Zonal || full.branch != KernelBranch::Full)
        throw DomainError("mixture_tail_matrix expects a Zonal and a Full kernel spec");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("mixture weight p must lie in [0, 1]");
    if (p == 1.0) return kernel_matrix(zonal, points, 0.0);
    if (p == 0.0) return kernel_matrix(full, points, 0.0);
    return mixture_tail_matrix(kernel_matrix(zonal, points, 0.0), kernel_matrix(full, points, 0.0), p);
}

Eigen::MatrixXd mixture_tail_matrix(const Eigen::MatrixXd& zonal, const Eigen::MatrixXd& full, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("mixture weight p must lie in [0, 1]");
    if (zonal.rows() != full.rows() || zonal.cols() != full.cols())
        throw DomainError("mixture_tail_matrix: branch matrices differ in shape");
    if (p == 1.0) return zonal;
    if (p == 0.0) return full;
    return p * zonal + (1.0 - p) * full;
}

}  // namespace sphsmooth
