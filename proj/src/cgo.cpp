#include "randsource/cgo.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "randsource/specfun.hpp"

namespace randsource {

namespace {

using cplx = std::complex<double>;

double norm3(const rvec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

void check_degree(const MeasurementBasis& basis, double t) {
  const int need = static_cast<int>(std::ceil((basis.kappa + t) * basis.R)) + 15;
  if (basis.L < need) {
    throw std::invalid_argument("CGO check needs L >= ceil((kappa + t) R) + 15 = " + std::to_string(need) +
                                ", got " + std::to_string(basis.L));
  }
}

// Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  Eigen::MatrixXd Jm = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    Jm(k, k - 1) = b;
    Jm(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Jm);
  x.resize(n);
  w.resize(n);
  for (int k = 0; k < n; ++k) {
    x[k] = es.eigenvalues()[k];
    const double v = es.eigenvectors()(0, k);
    w[k] = 2.0 * v * v;
  }
}

}  // namespace

CgoVector make_cgo_vector(const rvec3& d1, const rvec3& d2, double t, double kappa) {
  if (!(t > 0.0)) throw std::invalid_argument("CGO vector needs t > 0");
  const double s = std::sqrt(kappa * kappa + t * t);
  CgoVector v;
  v.t = t;
  v.kappa = kappa;
  for (int i = 0; i < 3; ++i) v.xi[i] = {s * d2[i], t * d1[i]};
  return v;
}

CgoPair build_cgo_pair(const rvec3& gamma, double t, double kappa) {
  if (!(t > 0.0)) throw std::invalid_argument("build_cgo_pair: t must be > 0");
  if (!(kappa > 0.0)) throw std::invalid_argument("build_cgo_pair: kappa must be > 0");
  const double g = norm3(gamma);
  const double bound = 2.0 * std::sqrt(kappa * kappa + t * t);
  if (g > bound * (1.0 + 1e-14)) {
    throw std::invalid_argument("build_cgo_pair: |gamma| = " + std::to_string(g) +
                                " exceeds 2 sqrt(kappa^2 + t^2) = " + std::to_string(bound));
  }
  CgoPair p;
  p.gamma = gamma;
  p.d1 = {1.0, 0.0, 0.0};
  p.d2 = {0.0, 1.0, 0.0};
  if (g > 0.0) {
    // Householder reflection H = I - 2 v v^T / v^T v with v = e3 - gamma/|gamma|
    const rvec3 v{-gamma[0] / g, -gamma[1] / g, 1.0 - gamma[2] / g};
    const double vv = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    if (vv > 1e-28) {
      for (int i = 0; i < 3; ++i) {
        p.d1[i] = (i == 0 ? 1.0 : 0.0) - 2.0 * v[i] * v[0] / vv;
        p.d2[i] = (i == 1 ? 1.0 : 0.0) - 2.0 * v[i] * v[1] / vv;
      }
    }
  }
  const double s = std::sqrt(std::max(0.0, kappa * kappa + t * t - 0.25 * g * g));
  p.a.t = p.b.t = t;
  p.a.kappa = p.b.kappa = kappa;
  for (int i = 0; i < 3; ++i) {
    p.a.xi[i] = {-0.5 * gamma[i] + s * p.d2[i], t * p.d1[i]};
    p.b.xi[i] = {0.5 * gamma[i] + s * p.d2[i], -t * p.d1[i]};
  }
  return p;
}

cplx bilinear_dot(const cvec3& a, const cvec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

cplx cgo_eval(const cvec3& xi, const rvec3& x) {
  const cplx phase = xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2];
  return std::exp(cplx{0.0, 1.0} * phase);
}

std::vector<cplx> single_layer_eigenvalues(const MeasurementBasis& basis) {
  basis.validate();
  const double x = basis.kappa * basis.R;
  const auto j = specfun::sph_bessel_j(basis.L, x);
  const auto h = specfun::sph_hankel1(basis.L, x);
  std::vector<cplx> sigma(static_cast<std::size_t>(basis.L) + 1);
  for (int l = 0; l <= basis.L; ++l) {
    // j_l has no zeros below l + 1/2; past that it only decays (evanescent
    // degrees), and sigma_l ~ R / (2l + 1) stays well away from zero.
    if (x > l + 0.5 && std::abs(j[l]) < 1e-12) {
      throw std::domain_error("single-layer operator is nearly singular: |j_" + std::to_string(l) +
                              "(kappa R)| = " + std::to_string(std::abs(j[l])) +
                              " (kappa^2 close to a Dirichlet eigenvalue of the ball)");
    }
    sigma[l] = cplx{0.0, basis.kappa} * basis.R * basis.R * j[l] * h[l];
  }
  return sigma;
}

HarmonicCoeffs single_layer_apply(const MeasurementBasis& basis, const HarmonicCoeffs& phi) {
  if (phi.size() != basis.size()) throw std::invalid_argument("single_layer_apply: size mismatch");
  const auto sigma = single_layer_eigenvalues(basis);
  HarmonicCoeffs out(phi.size());
  for (Eigen::Index i = 0; i < phi.size(); ++i) out[i] = sigma[specfun::DegreeOrder::from_index(i).l] * phi[i];
  return out;
}

HarmonicCoeffs single_layer_solve(const MeasurementBasis& basis, const HarmonicCoeffs& g) {
  if (g.size() != basis.size()) throw std::invalid_argument("single_layer_solve: size mismatch");
  const auto sigma = single_layer_eigenvalues(basis);
  HarmonicCoeffs out(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) out[i] = g[i] / sigma[specfun::DegreeOrder::from_index(i).l];
  return out;
}

SphereQuadrature sphere_quadrature(double R, int n_theta, int n_phi) {
  if (n_theta < 1 || n_phi < 1) throw std::invalid_argument("sphere_quadrature: empty rule");
  std::vector<double> x, w;
  gauss_legendre(n_theta, x, w);
  SphereQuadrature q;
  q.points.reserve(static_cast<std::size_t>(n_theta) * n_phi);
  q.weights.reserve(q.points.capacity());
  for (int a = 0; a < n_theta; ++a) {
    const double ct = x[a], st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    for (int b = 0; b < n_phi; ++b) {
      const double ph = 2.0 * std::numbers::pi * b / n_phi;
      q.points.push_back({R * st * std::cos(ph), R * st * std::sin(ph), R * ct});
      q.weights.push_back(R * R * w[a] * 2.0 * std::numbers::pi / n_phi);
    }
  }
  return q;
}

HarmonicCoeffs project_on_sphere(const MeasurementBasis& basis,
                                 const std::function<cplx(const rvec3&)>& g) {
  basis.validate();
  const auto quad = sphere_quadrature(basis.R, 2 * basis.L + 2, 4 * basis.L + 4);
  const Eigen::Index M = basis.size();
  const auto np = static_cast<Eigen::Index>(quad.points.size());
  HarmonicCoeffs out = HarmonicCoeffs::Zero(M);
#pragma omp parallel
  {
    HarmonicCoeffs local = HarmonicCoeffs::Zero(M);
    std::vector<cplx> y(static_cast<std::size_t>(M));
#pragma omp for schedule(static) nowait
    for (Eigen::Index k = 0; k < np; ++k) {
      const auto& x = quad.points[k];
      const cplx gv = g(x) * quad.weights[k] / basis.R;  // conj(e_lm) = conj(Y_lm) / R
      specfun::sph_harmonics_dir(basis.L, x, y.data());
      for (Eigen::Index i = 0; i < M; ++i) local[i] += gv * std::conj(y[i]);
    }
#pragma omp critical
    out += local;
  }
  return out;
}

HarmonicCoeffs conjugate_function(const HarmonicCoeffs& c) {
  HarmonicCoeffs out(c.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const auto d = specfun::DegreeOrder::from_index(i);
    const auto k = specfun::DegreeOrder{d.l, -d.m}.index();
    out[i] = (d.m % 2 == 0 ? 1.0 : -1.0) * std::conj(c[static_cast<Eigen::Index>(k)]);
  }
  return out;
}

HarmonicCoeffs cgo_density(const MeasurementBasis& basis, const CgoVector& xi) {
  const HarmonicCoeffs g = project_on_sphere(basis, [&](const rvec3& x) { return std::conj(cgo_eval(xi.xi, x)); });
  return conjugate_function(single_layer_solve(basis, g));
}

RepresentationReport verify_cgo_representation(const MeasurementBasis& basis, const GridPtr& grid, const CgoVector& xi) {
  if (!(xi.t > 0.0)) throw std::invalid_argument("verify_cgo_representation: t must be > 0");
  if (std::abs(xi.kappa - basis.kappa) > 1e-12 * basis.kappa) {
    throw std::invalid_argument("verify_cgo_representation: CGO wave number differs from the basis");
  }
  check_degree(basis, xi.t);
  const HarmonicCoeffs phi = cgo_density(basis, xi);
  const auto P = build_potential(grid, basis);
  const Eigen::VectorXcd rep = apply_Gstar(*P, phi);
  double err = 0.0, umax = 0.0;
  for (Eigen::Index j = 0; j < grid->size(); ++j) {
    const cplx u = cgo_eval(xi.xi, {grid->points(0, j), grid->points(1, j), grid->points(2, j)});
    err = std::max(err, std::abs(rep[j] - u));
    umax = std::max(umax, std::abs(u));
  }
  RepresentationReport r;
  r.rel_error = err / umax;
  r.phi_norm = phi.norm();
  r.bound_rhs = std::sqrt(1.0 + xi.t * xi.t + xi.kappa * xi.kappa) * std::exp(basis.R * xi.t);
  return r;
}

FourierReport verify_fourier_identity(const PotentialMatrix& P, const SourceField& q1,
                                      const SourceField& q2, const rvec3& gamma, double t) {
  if (q1.values.size() != P.cols() || q2.values.size() != P.cols()) {
    throw std::invalid_argument("verify_fourier_identity: fields do not match the potential");
  }
  if (P.grid->dim != 3) throw std::invalid_argument("verify_fourier_identity: needs a 3D grid");
  check_degree(P.basis, t);
  const CgoPair pair = build_cgo_pair(gamma, t, P.basis.kappa);
  const SourceField dq{P.grid, q1.values - q2.values};
  FourierReport r;
  r.lhs = std::pow(2.0 * std::numbers::pi, 1.5) * fourier_coeff(dq, gamma);
  HarmonicCoeffs phi_a = cgo_density(P.basis, pair.a);
  HarmonicCoeffs phi_b = cgo_density(P.basis, pair.b);
  r.phi_a_norm = phi_a.norm();
  r.phi_b_norm = phi_b.norm();
  if (P.compressed()) {
    phi_a = P.range.adjoint() * phi_a;
    phi_b = P.range.adjoint() * phi_b;
  }
  const CovMatrix C = forward_cov(P, dq);
  r.rhs = phi_b.dot(C * phi_a);  // phi_b^H C phi_a
  const double scale = std::abs(r.lhs);
  r.rel_error = scale > 0.0 ? std::abs(r.lhs - r.rhs) / scale : std::abs(r.lhs - r.rhs);
  return r;
}

}  // namespace randsource
