#pragma once

#include <array>
#include <complex>
#include <memory>
#include <numbers>

#include <Eigen/Dense>

namespace randsource {

/// Side length of the source cube [-pi/sqrt(3), pi/sqrt(3)]^3.
inline constexpr double kDefaultSide = 2.0 * std::numbers::pi / std::numbers::sqrt3;

/// Cell-centred uniform grid over the cube (dim 3) or its midplane x3 = 0
/// (dim 2). Point j has flat index (i0*n + i1)*n + i2 in 3D and i0*n + i1 in
/// 2D, i0 running along x1. Points are always stored as 3-vectors.
struct Grid {
  int dim = 3;
  int n = 0;
  double side = kDefaultSide;
  Eigen::Matrix3Xd points;  // 3 x J
  double weight = 0.0;      // cell volume (dim 3) or area (dim 2)

  [[nodiscard]] Eigen::Index size() const noexcept { return points.cols(); }
  [[nodiscard]] double spacing() const noexcept { return side / n; }
  /// Cell-centre coordinate of index i along any axis. Written through the
  /// exact fraction (2i+1)/(2n) so that nested grids (n and 3n, ...) produce
  /// bit-identical shared points.
  [[nodiscard]] double coord(int i) const noexcept {
    return side * ((2.0 * i + 1.0) / (2.0 * n) - 0.5);
  }
  /// Discrete Fourier frequency 2 pi k / side for DFT index i in [0, n).
  [[nodiscard]] double frequency(int i) const noexcept {
    const int k = i < n / 2 ? i : i - n;
    return 2.0 * std::numbers::pi * k / side;
  }
  /// Largest |z_j|.
  [[nodiscard]] double max_radius() const;
  [[nodiscard]] bool same_layout(const Grid& other) const noexcept {
    return dim == other.dim && n == other.n && side == other.side;
  }
};

using GridPtr = std::shared_ptr<const Grid>;

/// Builds a cell-centred grid; n must be even and >= 4.
GridPtr make_grid(int dim, int n, double side = kDefaultSide);

/// Real field sampled on the points of a grid.
struct SourceField {
  GridPtr grid;
  Eigen::VectorXd values;

  SourceField() = default;
  SourceField(GridPtr g, Eigen::VectorXd v);
  static SourceField zeros(GridPtr g);
  static SourceField constant(GridPtr g, double c);
};

/// Weighted inner product sum_j w_j p_j q_j.
double inner_w(const Grid& g, const Eigen::VectorXd& p, const Eigen::VectorXd& q);
/// Weighted L2 norm.
double norm_w(const Grid& g, const Eigen::VectorXd& q);

/// Quadrature approximation of the unitary Fourier transform,
/// (2 pi)^{-dim/2} sum_j w_j q_j exp(-i gamma . z_j).
std::complex<double> fourier_coeff(const SourceField& q, const std::array<double, 3>& gamma);

}  // namespace randsource
