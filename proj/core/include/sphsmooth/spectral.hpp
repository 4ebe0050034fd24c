#pragma once

#include <vector>

#include <Eigen/Core>

#include "sphsmooth/direction.hpp"

namespace sphsmooth {

// Prior/penalty weight ladder over degrees.
//   Lambda: (k(k+1))^{-s}
//   Iota:   ((k+1/2)(k+1)(k+2)(k+3))^{-1}, which admits a closed-form kernel
enum class WeightScheme { Lambda, Iota };

struct HarmonicIndex {
    int k = 0;
    int q = 0;

    // 0 for the zonal harmonic (q == 0), 1 otherwise.
    int invariance_class() const { return q == 0 ? 0 : 1; }
};

// Position of (k, q) in the basis enumeration. Within each degree the zonal
// entry comes first, then (k, 1), (k, -1), (k, 2), (k, -2), ...
int basis_position(int k, int q);
HarmonicIndex basis_index(int position);
inline int basis_size(int K) { return (K + 1) * (K + 1); }

struct BasisSpec {
    int K = 0;
    double s = 2.0;
    WeightScheme weights = WeightScheme::Iota;

    BasisSpec() = default;
    BasisSpec(int K, double s, WeightScheme weights);

    int size() const { return basis_size(K); }
    HarmonicIndex index(int position) const { return basis_index(position); }
    void validate() const;
};

struct EigenInfo {
    double lambda = 0.0;  // k(k+1)
    double weight = 0.0;  // per-coefficient variance/penalty scale
    int dim_zonal = 1;
    int dim_nonzonal = 0;
};

EigenInfo eigen_info(const BasisSpec& spec, int k);

// Per-coefficient weight of degree k under a scheme; Lambda at k = 0 is +inf.
double degree_weight(WeightScheme scheme, double s, int k);
inline double iota_weight(int k) { return degree_weight(WeightScheme::Iota, 0.0, k); }

// Legendre polynomial P_k(w) by the three-term recurrence.
double legendre_p(int k, double w);

// P_0(w) .. P_kmax(w).
void legendre_p_table(int kmax, double w, double* out);

// Associated Legendre function P_k^q(x), 0 <= q <= k, without the
// Condon-Shortley phase (so P_1^1(x) = +sqrt(1 - x^2)).
double legendre_assoc(int k, int q, double x);

// Fully normalised P-bar_k^q(x) = sqrt((2k+1)/(4 pi) (k-q)!/(k+q)!) P_k^q(x)
// for k = q .. kmax, written to out[0 .. kmax - q]. Stable for large k.
void normalized_legendre_column(int q, int kmax, double x, double* out);
// Same, from cos and sin of the colatitude (keeps precision near the poles).
void normalized_legendre_column(int q, int kmax, double cos_t, double sin_t, double* out);

// Real harmonic of the (k, q) index: cosine branch for q > 0, zonal for
// q == 0, sine branch for q < 0. Orthonormal on the unit sphere with total
// surface measure 4 pi.
double spherical_harmonic(const HarmonicIndex& idx, const Direction& x);

// All harmonics of degree <= K in basis order.
Eigen::VectorXd basis_vector(const BasisSpec& spec, const Direction& x);
void basis_vector(int K, const Direction& x, double* out);

}  // namespace sphsmooth
