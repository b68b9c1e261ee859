#pragma once

// Dense kernels behind the measurement-side operators.
//
// `parallel` holds the production versions: blocked Eigen products with
// OpenMP over grid points or column blocks. `serial` holds direct loop
// transcriptions of the defining formulas; they are slow and exist so the
// parallel versions can be checked against them and benchmarked.
//
// Conventions: A is the M x J potential matrix (column j = a(z_j)),
// wq = w .* q the quadrature-weighted source.

#include <cstdint>

#include <Eigen/Dense>

#include "randsource/grid.hpp"

namespace randsource {
struct MeasurementBasis;
}

namespace randsource::kernels {

namespace serial {

/// a_lm(z_j) = R i kappa h_l(kappa R) j_l(kappa |z_j|) conj(Y_lm(z_j / |z_j|)).
Eigen::MatrixXcd assemble_potential(const Grid& grid, const MeasurementBasis& basis);

/// C = sum_j wq_j a_j a_j^H.
Eigen::MatrixXcd forward_cov(const Eigen::MatrixXcd& A, const Eigen::VectorXd& wq);

/// out_j = Re(a_j^H M a_j).
Eigen::VectorXd adjoint_cov(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& M);

/// S_jk = |a_j^H a_k|^2 (full matrix).
Eigen::MatrixXd normal_matrix(const Eigen::MatrixXcd& A);

}  // namespace serial

namespace parallel {

Eigen::MatrixXcd assemble_potential(const Grid& grid, const MeasurementBasis& basis);

/// Hermitian by construction: the lower triangle is computed and mirrored.
Eigen::MatrixXcd forward_cov(const Eigen::MatrixXcd& A, const Eigen::VectorXd& wq);

Eigen::VectorXd adjoint_cov(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& M);

/// Lower triangle of S_jk = |a_j^H a_k|^2, filled in column blocks from the
/// diagonal down. Entries above the diagonal are unspecified; read it through
/// selfadjointView<Eigen::Lower>().
Eigen::MatrixXd normal_matrix_lower(const Eigen::MatrixXcd& A);

}  // namespace parallel

/// Mirrors the lower triangle of a square matrix into the upper one and
/// zeroes the imaginary part of the diagonal.
void hermitian_from_lower(Eigen::MatrixXcd& C);

}  // namespace randsource::kernels
