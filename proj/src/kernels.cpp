#include "randsource/kernels.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include <omp.h>

#include "randsource/operator.hpp"
#include "randsource/specfun.hpp"

namespace randsource::kernels {

namespace {

// Block sizes are fixed, independent of the thread count, so that every
// output entry is produced by the same sequence of floating-point operations
// whatever the parallel schedule.
constexpr Eigen::Index kRowBlock = 64;
constexpr Eigen::Index kColBlock = 256;

std::vector<std::complex<double>> radial_prefactor(const MeasurementBasis& basis) {
  const auto h = specfun::sph_hankel1(basis.L, basis.kappa * basis.R);
  const std::complex<double> ik{0.0, basis.kappa};
  std::vector<std::complex<double>> f(h.size());
  for (std::size_t l = 0; l < h.size(); ++l) f[l] = basis.R * ik * h[l];
  return f;
}

void assemble_column(const Grid& grid, const MeasurementBasis& basis,
                     const std::vector<std::complex<double>>& pref, Eigen::Index j,
                     std::complex<double>* ybuf, std::complex<double>* out) {
  const std::array<double, 3> z{grid.points(0, j), grid.points(1, j), grid.points(2, j)};
  const double r = std::sqrt(z[0] * z[0] + z[1] * z[1] + z[2] * z[2]);
  const auto jl = specfun::sph_bessel_j(basis.L, basis.kappa * r);
  specfun::sph_harmonics_dir(basis.L, z, ybuf);
  for (int l = 0; l <= basis.L; ++l) {
    const std::complex<double> radial = pref[l] * jl[l];
    for (int m = -l; m <= l; ++m) {
      const auto idx = specfun::DegreeOrder{l, m}.index();
      out[idx] = radial * std::conj(ybuf[idx]);
    }
  }
}

}  // namespace

void hermitian_from_lower(Eigen::MatrixXcd& C) {
  const Eigen::Index n = C.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    C(k, k) = {C(k, k).real(), 0.0};
    for (Eigen::Index i = k + 1; i < n; ++i) C(k, i) = std::conj(C(i, k));
  }
}

namespace serial {

Eigen::MatrixXcd assemble_potential(const Grid& grid, const MeasurementBasis& basis) {
  const auto pref = radial_prefactor(basis);
  Eigen::MatrixXcd A(basis.size(), grid.size());
  std::vector<std::complex<double>> ybuf(static_cast<std::size_t>(basis.size()));
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    assemble_column(grid, basis, pref, j, ybuf.data(), A.col(j).data());
  }
  return A;
}

Eigen::MatrixXcd forward_cov(const Eigen::MatrixXcd& A, const Eigen::VectorXd& wq) {
  const Eigen::Index M = A.rows();
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(M, M);
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    for (Eigen::Index k = 0; k < M; ++k)
      for (Eigen::Index i = 0; i < M; ++i) C(i, k) += wq[j] * A(i, j) * std::conj(A(k, j));
  return C;
}

Eigen::VectorXd adjoint_cov(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& M) {
  Eigen::VectorXd out(A.cols());
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    std::complex<double> acc{0.0, 0.0};
    for (Eigen::Index i = 0; i < A.rows(); ++i)
      for (Eigen::Index k = 0; k < A.rows(); ++k) acc += std::conj(A(i, j)) * M(i, k) * A(k, j);
    out[j] = acc.real();
  }
  return out;
}

Eigen::MatrixXd normal_matrix(const Eigen::MatrixXcd& A) {
  const Eigen::Index J = A.cols();
  Eigen::MatrixXd S(J, J);
  for (Eigen::Index k = 0; k < J; ++k)
    for (Eigen::Index j = 0; j < J; ++j) {
      std::complex<double> acc{0.0, 0.0};
      for (Eigen::Index i = 0; i < A.rows(); ++i) acc += std::conj(A(i, j)) * A(i, k);
      S(j, k) = std::norm(acc);
    }
  return S;
}

}  // namespace serial

namespace parallel {

Eigen::MatrixXcd assemble_potential(const Grid& grid, const MeasurementBasis& basis) {
  const auto pref = radial_prefactor(basis);
  Eigen::MatrixXcd A(basis.size(), grid.size());
  const Eigen::Index J = grid.size();
#pragma omp parallel
  {
    std::vector<std::complex<double>> ybuf(static_cast<std::size_t>(basis.size()));
#pragma omp for schedule(static)
    for (Eigen::Index j = 0; j < J; ++j) {
      assemble_column(grid, basis, pref, j, ybuf.data(), A.col(j).data());
    }
  }
  return A;
}

Eigen::MatrixXcd forward_cov(const Eigen::MatrixXcd& A, const Eigen::VectorXd& wq) {
  if (wq.size() != A.cols()) throw std::invalid_argument("forward_cov: size mismatch");
  const Eigen::Index M = A.rows();
  const Eigen::MatrixXcd X = A * wq.asDiagonal();
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(M, M);
  const Eigen::Index nblocks = (M + kRowBlock - 1) / kRowBlock;
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index b = 0; b < nblocks; ++b) {
    const Eigen::Index i0 = b * kRowBlock;
    const Eigen::Index rows = std::min(kRowBlock, M - i0);
    C.block(i0, 0, rows, i0 + rows).noalias() =
        X.middleRows(i0, rows) * A.topRows(i0 + rows).adjoint();
  }
  hermitian_from_lower(C);
  return C;
}

Eigen::VectorXd adjoint_cov(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& M) {
  if (M.rows() != A.rows() || M.cols() != A.rows()) {
    throw std::invalid_argument("adjoint_cov: matrix does not match the data space");
  }
  const Eigen::Index J = A.cols();
  Eigen::VectorXd out(J);
  const Eigen::Index nblocks = (J + kColBlock - 1) / kColBlock;
#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < nblocks; ++b) {
    const Eigen::Index j0 = b * kColBlock;
    const Eigen::Index cols = std::min(kColBlock, J - j0);
    const Eigen::MatrixXcd Y = M * A.middleCols(j0, cols);
    out.segment(j0, cols) = (A.middleCols(j0, cols).conjugate().cwiseProduct(Y)).colwise().sum().real().transpose();
  }
  return out;
}

Eigen::MatrixXd normal_matrix_lower(const Eigen::MatrixXcd& A) {
  const Eigen::Index J = A.cols();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(J, J);
  const Eigen::Index nblocks = (J + kColBlock - 1) / kColBlock;
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index b = 0; b < nblocks; ++b) {
    const Eigen::Index k0 = b * kColBlock;
    const Eigen::Index cols = std::min(kColBlock, J - k0);
    const Eigen::MatrixXcd K = A.rightCols(J - k0).adjoint() * A.middleCols(k0, cols);
    S.block(k0, k0, J - k0, cols) = K.cwiseAbs2();
  }
  return S;
}

}  // namespace parallel

}  // namespace randsource::kernels
