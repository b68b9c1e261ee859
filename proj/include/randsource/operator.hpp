#pragma once

#include <memory>

#include <Eigen/Dense>

#include "randsource/grid.hpp"

namespace randsource {

/// Truncated spherical-harmonics basis e_lm = Y_lm / R of L2(S_R), which is
/// orthonormal for the surface measure.
struct MeasurementBasis {
  double R = 4.0;
  double kappa = 6.0;
  int L = 0;

  /// Default truncation ceil(kappa R) + extra.
  static MeasurementBasis with_default_degree(double R, double kappa, int extra = 15);

  [[nodiscard]] Eigen::Index size() const noexcept {
    return static_cast<Eigen::Index>(L + 1) * (L + 1);
  }
  /// Throws std::invalid_argument unless R > 0, kappa > 0 and L >= 0.
  void validate() const;
};

/// Matrix of an operator between L2(S_R) coefficient vectors: CovMatrix
/// entries are in the e_lm basis (or in the reduced basis of a compressed
/// potential). The HS norm is the Frobenius norm.
using CovMatrix = Eigen::MatrixXcd;
using HarmonicCoeffs = Eigen::VectorXcd;

/// Discrete volume potential: row (l, m), column j holds a_lm(z_j).
///
/// A compressed potential replaces the rows by the coordinates of the
/// numerical range of A in an orthonormal basis U (A_r = U^H A); every
/// operation below is unchanged because HS norms and inner products are
/// invariant under that change of basis.
struct PotentialMatrix {
  MeasurementBasis basis;
  GridPtr grid;
  Eigen::MatrixXcd A;          // rows x J
  Eigen::MatrixXcd range;      // M x r orthonormal columns when compressed, empty otherwise

  [[nodiscard]] Eigen::Index rows() const noexcept { return A.rows(); }
  [[nodiscard]] Eigen::Index cols() const noexcept { return A.cols(); }
  [[nodiscard]] bool compressed() const noexcept { return range.size() != 0; }
  [[nodiscard]] double weight() const noexcept { return grid->weight; }
};

using PotentialPtr = std::shared_ptr<const PotentialMatrix>;

/// Assembles A on the grid. Fails if some |z_j| >= R.
PotentialPtr build_potential(const GridPtr& grid, const MeasurementBasis& basis);

/// Restricts the data space to the span of the left singular vectors of A
/// with singular value above rel_tol * sigma_max.
PotentialPtr compress(const PotentialMatrix& P, double rel_tol = 1e-7);

/// c = A diag(w) psi.
HarmonicCoeffs apply_G(const PotentialMatrix& P, const Eigen::VectorXcd& psi);

/// (G* phi)(z_j) = sum_lm conj(a_lm(z_j)) phi_lm, the adjoint of apply_G for
/// the weighted grid inner product.
Eigen::VectorXcd apply_Gstar(const PotentialMatrix& P, const HarmonicCoeffs& phi);

/// T q = A diag(w q) A^H, Hermitian by construction.
CovMatrix forward_cov(const PotentialMatrix& P, const Eigen::VectorXd& q);
CovMatrix forward_cov(const PotentialMatrix& P, const SourceField& q);

struct AdjointResult {
  Eigen::VectorXd values;
  bool hermitianized = false;  // input was not Hermitian and was replaced by (M + M^H)/2
};

/// (T* M)_j = a_j^H M a_j, the adjoint of forward_cov for the HS inner
/// product on matrices and the weighted inner product on the grid.
AdjointResult adjoint_cov(const PotentialMatrix& P, const CovMatrix& M);

/// HS inner product <X, Y> = trace(Y^H X).
std::complex<double> hs_inner(const CovMatrix& X, const CovMatrix& Y);
double hs_norm(const CovMatrix& X);
double hs_dist(const CovMatrix& X, const CovMatrix& Y);

/// Evaluates sum_lm c_lm e_lm(x) at a point x of the measurement sphere.
std::complex<double> eval_on_sphere(const MeasurementBasis& basis, const HarmonicCoeffs& c,
                                    const std::array<double, 3>& x);

/// Closed-form Helmholtz fundamental solution exp(i kappa r) / (4 pi r).
std::complex<double> helmholtz_green(double kappa, const std::array<double, 3>& x,
                                     const std::array<double, 3>& z);

}  // namespace randsource
