#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>

#include "sphsmooth/bayes.hpp"
#include "sphsmooth/direction.hpp"
#include "sphsmooth/spectral.hpp"
#include "sphsmooth/spline.hpp"

namespace sphsmooth {

// m x m equiangular cells: band j1 covers theta in [pi j1/m, pi (j1+1)/m),
// sector j2 covers phi in [2 pi j2/m, 2 pi (j2+1)/m). Cells are numbered
// j1 * m + j2 wherever a flat vector is used.
struct CellGrid {
    int m = 0;
    Eigen::MatrixXd frequencies;  // relative frequencies, rows = bands, cols = sectors

    double theta_lo(int j1) const;
    double theta_hi(int j1) const;
    double phi_lo(int j2) const;
    double phi_hi(int j2) const;
    double volume(int j1, int j2) const;
    Direction center(int j1, int j2) const;

    Eigen::VectorXd volumes() const;        // flat, length m^2
    Eigen::VectorXd densities() const;      // frequency / volume, flat
    std::vector<Direction> centers() const;

    // Frequencies proportional to cell volume (the uniform distribution).
    static CellGrid uniform(int m);
};

CellGrid bin_directions(const std::vector<Direction>& directions, int m);

// Band averages of normalised Legendre functions, shared by the cell
// functionals and the cell-averaged kernels.
class BandTable {
public:
    // node_scale multiplies the Gauss-Legendre node count per band, max(20, 2 kmax).
    BandTable(int m, int kmax, int node_scale = 1);

    int m() const { return m_; }
    int kmax() const { return kmax_; }
    // Average over band a of P-bar_k^q(cos theta) w.r.t. sin(theta) d theta.
    double operator()(int a, int k, int q) const { return data_[a * stride_ + offset(q) + (k - q)]; }

private:
    std::size_t offset(int q) const {
        return static_cast<std::size_t>(q) * (kmax_ + 1) - static_cast<std::size_t>(q) * (q - 1) / 2;
    }
    int m_, kmax_;
    std::size_t stride_;
    std::vector<double> data_;
};

// m^2 x (K+1)^2 matrix of cell averages of the retained harmonics.
Eigen::MatrixXd cell_functionals(const BasisSpec& spec, int m, int node_scale = 1);

// Doubly cell-averaged tail kernel [L_i L_j Q], summed spectrally to degree
// series_degree. branch is Full or Zonal.
Eigen::MatrixXd cell_kernel_matrix(int K, int m, int series_degree, KernelBranch branch = KernelBranch::Full,
                                   int node_scale = 1);

// Default series degree for an m-cell grid.
int default_series_degree(int m);

class HistosplineFit {
public:
    HistosplineFit() = default;
    HistosplineFit(int K, int m, double xi, int series_degree, Eigen::VectorXd c_check, Eigen::VectorXd d_check,
                   double roughness = 0.0);

    int K() const { return K_; }
    int m() const { return m_; }
    double xi() const { return xi_; }
    int series_degree() const { return N_; }
    const Eigen::VectorXd& c_check() const { return c_; }
    const Eigen::VectorXd& d_check() const { return d_; }
    double roughness() const { return roughness_; }  // c' Q c

    double evaluate(const Direction& x) const;
    double operator()(const Direction& x) const { return evaluate(x); }
    // Integral of the fit over the sphere; divide by it for a unit-mass density.
    double normalizing_constant() const;

private:
    int K_ = 0, m_ = 0, N_ = 0;
    double xi_ = 0.0, roughness_ = 0.0;
    Eigen::VectorXd c_, d_;
    Eigen::VectorXd tail_;  // iota-weighted harmonic coefficients of the kernel part, degrees K+1..N
};

// Regression of cell densities on cell-average functionals; ridge m^2 xi.
HistosplineFit fit_histospline(const CellGrid& grid, int K, double xi, int series_degree = 0);

enum class BinnedMode { CellCenters, CellAverages };

// Cell centres paired with cell densities.
RegressionData binned_regression_data(const CellGrid& grid);

// Hierarchical Bayes on binned data, either treating cell centres as design
// points or using exact cell-average functionals for Phi and both tails.
BayesFit fit_hierarchical_binned(const CellGrid& grid, const BasisSpec& spec, const PriorSpec& prior,
                                 BinnedMode mode, int series_degree = 0);

}  // namespace sphsmooth
