#include "sphsmooth/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "sphsmooth/error.hpp"

namespace sphsmooth {

namespace {

constexpr double kInvSqrt4Pi = 0.28209479177387814347;  // 1/sqrt(4 pi)

double checked_cosine(double w, const char* what) {
    if (!(std::abs(w) <= 1.0 + 1e-12)) throw DomainError(std::string(what) + ": argument outside [-1, 1]");
    return std::clamp(w, -1.0, 1.0);
}

// Column of P-bar_k^q for k = q..kmax given cos and sin of the colatitude.
void column(int q, int kmax, double c, double s, double* out) {
    double pqq = kInvSqrt4Pi;
    for (int m = 1; m <= q; ++m) pqq *= std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
    out[0] = pqq;
    if (kmax == q) return;
    out[1] = std::sqrt(2.0 * q + 3.0) * c * pqq;
    const double q2 = double(q) * q;
    for (int k = q + 2; k <= kmax; ++k) {
        const double kk = double(k) * k;
        const double km1 = double(k - 1) * (k - 1);
        const double a = std::sqrt((4.0 * kk - 1.0) / (kk - q2));
        const double b = std::sqrt((km1 - q2) / (4.0 * km1 - 1.0));
        out[k - q] = a * (c * out[k - q - 1] - b * out[k - q - 2]);
    }
}

}  // namespace

int basis_position(int k, int q) {
    if (k < 0 || std::abs(q) > k) throw DomainError("harmonic index requires |q| <= k");
    return k * k + (q == 0 ? 0 : (q > 0 ? 2 * q - 1 : -2 * q));
}

HarmonicIndex basis_index(int position) {
    if (position < 0) throw DomainError("negative basis position");
    int k = static_cast<int>(std::sqrt(static_cast<double>(position)));
    while (k * k > position) --k;
    while ((k + 1) * (k + 1) <= position) ++k;
    const int r = position - k * k;
    HarmonicIndex idx;
    idx.k = k;
    idx.q = r == 0 ? 0 : (r % 2 == 1 ? (r + 1) / 2 : -r / 2);
    return idx;
}

BasisSpec::BasisSpec(int K_, double s_, WeightScheme w) : K(K_), s(s_), weights(w) { validate(); }

void BasisSpec::validate() const {
    if (K < 0) throw DomainError("truncation level K must be >= 0");
    if (!(s > 1.0) || !std::isfinite(s)) throw DomainError("smoothness s must exceed dim/2 = 1");
}

double degree_weight(WeightScheme scheme, double s, int k) {
    if (k < 0) throw DomainError("degree must be >= 0");
    if (scheme == WeightScheme::Lambda) {
        if (k == 0) return std::numeric_limits<double>::infinity();
        return std::pow(double(k) * (k + 1), -s);
    }
    return 1.0 / ((k + 0.5) * (k + 1.0) * (k + 2.0) * (k + 3.0));
}

EigenInfo eigen_info(const BasisSpec& spec, int k) {
    if (k < 0) throw DomainError("degree must be >= 0");
    EigenInfo e;
    e.lambda = double(k) * (k + 1);
    e.weight = degree_weight(spec.weights, spec.s, k);
    e.dim_zonal = 1;
    e.dim_nonzonal = 2 * k;
    return e;
}

double legendre_p(int k, double w) {
    if (k < 0) throw DomainError("legendre_p: negative degree");
    w = checked_cosine(w, "legendre_p");
    if (k == 0) return 1.0;
    double p0 = 1.0, p1 = w;
    for (int j = 2; j <= k; ++j) {
        const double p2 = ((2.0 * j - 1.0) * w * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

void legendre_p_table(int kmax, double w, double* out) {
    if (kmax < 0) throw DomainError("legendre_p_table: negative degree");
    w = checked_cosine(w, "legendre_p_table");
    out[0] = 1.0;
    if (kmax == 0) return;
    out[1] = w;
    for (int j = 2; j <= kmax; ++j) out[j] = ((2.0 * j - 1.0) * w * out[j - 1] - (j - 1.0) * out[j - 2]) / j;
}

void normalized_legendre_column(int q, int kmax, double x, double* out) {
    if (q < 0 || kmax < q) throw DomainError("normalized_legendre_column: need 0 <= q <= kmax");
    x = checked_cosine(x, "normalized_legendre_column");
    column(q, kmax, x, std::sqrt((1.0 - x) * (1.0 + x)), out);
}

void normalized_legendre_column(int q, int kmax, double cos_t, double sin_t, double* out) {
    if (q < 0 || kmax < q) throw DomainError("normalized_legendre_column: need 0 <= q <= kmax");
    column(q, kmax, cos_t, sin_t, out);
}

double legendre_assoc(int k, int q, double x) {
    if (q < 0 || q > k) throw DomainError("legendre_assoc: need 0 <= q <= k");
    x = checked_cosine(x, "legendre_assoc");
    if (q == 0) return legendre_p(k, x);
    std::vector<double> col(k - q + 1);
    column(q, k, x, std::sqrt((1.0 - x) * (1.0 + x)), col.data());
    const double pbar = col.back();
    if (pbar == 0.0) return 0.0;
    // undo the normalisation in log space; the factorial ratio overflows early
    const double logscale = 0.5 * (std::log(4.0 * std::numbers::pi / (2.0 * k + 1.0)) + std::lgamma(k + q + 1.0) -
                                   std::lgamma(k - q + 1.0));
    return std::copysign(std::exp(std::log(std::abs(pbar)) + logscale), pbar);
}

double spherical_harmonic(const HarmonicIndex& idx, const Direction& x) {
    const int k = idx.k, aq = std::abs(idx.q);
    if (k < 0 || aq > k) throw DomainError("spherical_harmonic: need |q| <= k");
    std::vector<double> col(k - aq + 1);
    column(aq, k, std::cos(x.theta), std::sin(x.theta), col.data());
    const double p = col.back();
    if (idx.q == 0) return p;
    return std::numbers::sqrt2 * p * (idx.q > 0 ? std::cos(aq * x.phi) : std::sin(aq * x.phi));
}

void basis_vector(int K, const Direction& x, double* out) {
    if (K < 0) throw DomainError("basis_vector: K must be >= 0");
    const double c = std::cos(x.theta), s = std::sin(x.theta);
    std::vector<double> col(K + 1);
    for (int q = 0; q <= K; ++q) {
        column(q, K, c, s, col.data());
        if (q == 0) {
            for (int k = 0; k <= K; ++k) out[k * k] = col[k];
            continue;
        }
        const double cq = std::numbers::sqrt2 * std::cos(q * x.phi);
        const double sq = std::numbers::sqrt2 * std::sin(q * x.phi);
        for (int k = q; k <= K; ++k) {
            out[k * k + 2 * q - 1] = cq * col[k - q];
            out[k * k + 2 * q] = sq * col[k - q];
        }
    }
}

Eigen::VectorXd basis_vector(const BasisSpec& spec, const Direction& x) {
    Eigen::VectorXd v(spec.size());
    basis_vector(spec.K, x, v.data());
    return v;
}

}  // namespace sphsmooth
