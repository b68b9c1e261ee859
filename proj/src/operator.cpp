#include "randsource/operator.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "randsource/kernels.hpp"
#include "randsource/specfun.hpp"

namespace randsource {

MeasurementBasis MeasurementBasis::with_default_degree(double R, double kappa, int extra) {
  MeasurementBasis b{R, kappa, static_cast<int>(std::ceil(kappa * R)) + extra};
  b.validate();
  return b;
}

void MeasurementBasis::validate() const {
  if (!(R > 0.0) || !(kappa > 0.0) || L < 0) {
    throw std::invalid_argument("measurement basis needs R > 0, kappa > 0, L >= 0");
  }
}

PotentialPtr build_potential(const GridPtr& grid, const MeasurementBasis& basis) {
  basis.validate();
  const double rmax = grid->max_radius();
  if (rmax >= basis.R) {
    throw std::invalid_argument("build_potential: grid reaches |z| = " + std::to_string(rmax) +
                                " >= R = " + std::to_string(basis.R));
  }
  auto P = std::make_shared<PotentialMatrix>();
  P->basis = basis;
  P->grid = grid;
  P->A = kernels::parallel::assemble_potential(*grid, basis);
  return P;
}

PotentialPtr compress(const PotentialMatrix& P, double rel_tol) {
  if (P.compressed()) throw std::invalid_argument("compress: potential is already compressed");
  const Eigen::MatrixXcd gram = P.A * P.A.adjoint();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram);
  const Eigen::VectorXd& ev = eig.eigenvalues();  // ascending
  const double cutoff = rel_tol * rel_tol * ev.maxCoeff();
  Eigen::Index keep = 0;
  while (keep < ev.size() && ev[ev.size() - 1 - keep] > cutoff) ++keep;
  auto out = std::make_shared<PotentialMatrix>();
  out->basis = P.basis;
  out->grid = P.grid;
  out->range = eig.eigenvectors().rightCols(keep).rowwise().reverse();
  out->A = out->range.adjoint() * P.A;
  return out;
}

HarmonicCoeffs apply_G(const PotentialMatrix& P, const Eigen::VectorXcd& psi) {
  if (psi.size() != P.cols()) throw std::invalid_argument("apply_G: field size mismatch");
  return P.A * (P.weight() * psi);
}

Eigen::VectorXcd apply_Gstar(const PotentialMatrix& P, const HarmonicCoeffs& phi) {
  if (phi.size() != P.rows()) throw std::invalid_argument("apply_Gstar: coefficient size mismatch");
  return P.A.adjoint() * phi;
}

CovMatrix forward_cov(const PotentialMatrix& P, const Eigen::VectorXd& q) {
  if (q.size() != P.cols()) throw std::invalid_argument("forward_cov: field size mismatch");
  return kernels::parallel::forward_cov(P.A, P.weight() * q);
}

CovMatrix forward_cov(const PotentialMatrix& P, const SourceField& q) {
  return forward_cov(P, q.values);
}

AdjointResult adjoint_cov(const PotentialMatrix& P, const CovMatrix& M) {
  AdjointResult res;
  const double scale = std::max(M.cwiseAbs().maxCoeff(), 1e-300);
  const double asym = (M - M.adjoint()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    res.hermitianized = true;
    const CovMatrix H = 0.5 * (M + M.adjoint());
    res.values = kernels::parallel::adjoint_cov(P.A, H);
  } else {
    res.values = kernels::parallel::adjoint_cov(P.A, M);
  }
  return res;
}

std::complex<double> hs_inner(const CovMatrix& X, const CovMatrix& Y) {
  if (X.rows() != Y.rows() || X.cols() != Y.cols()) {
    throw std::invalid_argument("hs_inner: shape mismatch");
  }
  return (Y.conjugate().cwiseProduct(X)).sum();
}

double hs_norm(const CovMatrix& X) { return X.norm(); }

double hs_dist(const CovMatrix& X, const CovMatrix& Y) {
  if (X.rows() != Y.rows() || X.cols() != Y.cols()) {
    throw std::invalid_argument("hs_dist: shape mismatch");
  }
  return (X - Y).norm();
}

std::complex<double> eval_on_sphere(const MeasurementBasis& basis, const HarmonicCoeffs& c,
                                    const std::array<double, 3>& x) {
  if (c.size() != basis.size()) throw std::invalid_argument("eval_on_sphere: size mismatch");
  const auto Y = specfun::sph_harmonics_dir(basis.L, x);
  std::complex<double> acc{0.0, 0.0};
  for (Eigen::Index i = 0; i < c.size(); ++i) acc += c[i] * Y[static_cast<std::size_t>(i)];
  return acc / basis.R;
}

std::complex<double> helmholtz_green(double kappa, const std::array<double, 3>& x,
                                     const std::array<double, 3>& z) {
  const double r = std::sqrt((x[0] - z[0]) * (x[0] - z[0]) + (x[1] - z[1]) * (x[1] - z[1]) +
                             (x[2] - z[2]) * (x[2] - z[2]));
  return std::polar(1.0, kappa * r) / (4.0 * std::numbers::pi * r);
}

}  // namespace randsource
