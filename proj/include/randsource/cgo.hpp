#pragma once

// Complex geometrical optics (CGO) solutions u(x) = exp(i xi . x) with
// xi . xi = kappa^2 (bilinear product) and their representation through the
// adjoint volume potential, verified numerically on the sphere S_R.

#include <array>
#include <complex>
#include <functional>

#include "randsource/operator.hpp"

namespace randsource {

using cvec3 = std::array<std::complex<double>, 3>;
using rvec3 = std::array<double, 3>;

struct CgoVector {
  cvec3 xi{};
  double t = 0.0;  // |Im xi|
  double kappa = 0.0;
};

/// xi = i t d1 + sqrt(kappa^2 + t^2) d2 for orthonormal d1, d2.
CgoVector make_cgo_vector(const rvec3& d1, const rvec3& d2, double t, double kappa);

struct CgoPair {
  CgoVector a;
  CgoVector b;
  rvec3 gamma{};
  rvec3 d1{};
  rvec3 d2{};
};

/// a = -gamma/2 + i t d1 + s d2, b = gamma/2 - i t d1 + s d2 with
/// s = sqrt(kappa^2 + t^2 - |gamma|^2/4). d1, d2 are the images of e1, e2
/// under the Householder reflection taking e3 to gamma/|gamma| (e1, e2 for
/// gamma = 0 or gamma parallel to e3), hence orthonormal and orthogonal to
/// gamma. Requires t > 0 and |gamma| <= 2 sqrt(kappa^2 + t^2).
CgoPair build_cgo_pair(const rvec3& gamma, double t, double kappa);

std::complex<double> bilinear_dot(const cvec3& a, const cvec3& b);
/// exp(i xi . x).
std::complex<double> cgo_eval(const cvec3& xi, const rvec3& x);

/// Eigenvalues sigma_l = i kappa R^2 j_l(kappa R) h_l(kappa R) of the
/// single-layer operator on S_R in the e_lm basis. Throws std::domain_error
/// naming the degree when |j_l(kappa R)| < 1e-12 for some l < kappa R - 1/2
/// (kappa^2 is then close to a Dirichlet eigenvalue of the ball).
std::vector<std::complex<double>> single_layer_eigenvalues(const MeasurementBasis& basis);

/// S phi by the diagonal representation.
HarmonicCoeffs single_layer_apply(const MeasurementBasis& basis, const HarmonicCoeffs& phi);
/// Solves S phi = g.
HarmonicCoeffs single_layer_solve(const MeasurementBasis& basis, const HarmonicCoeffs& g);

/// Tensor quadrature on S_R: Gauss-Legendre in cos(theta), uniform in phi.
struct SphereQuadrature {
  std::vector<rvec3> points;  // on S_R
  std::vector<double> weights;  // surface measure
};
SphereQuadrature sphere_quadrature(double R, int n_theta, int n_phi);

/// g_lm = <g, e_lm>_{L2(S_R)} by quadrature with n_theta = 2L + 2,
/// n_phi = 4L + 4.
HarmonicCoeffs project_on_sphere(const MeasurementBasis& basis,
                                 const std::function<std::complex<double>(const rvec3&)>& g);

/// Coefficients of the function conj(f) given those of f:
/// out_{l,m} = (-1)^m conj(c_{l,-m}).
HarmonicCoeffs conjugate_function(const HarmonicCoeffs& c);

/// phi with G* phi = u_xi on the ball: phi = conj(S^{-1} (conj u_xi |_{S_R})).
HarmonicCoeffs cgo_density(const MeasurementBasis& basis, const CgoVector& xi);

struct RepresentationReport {
  double rel_error = 0.0;  // max_j |G*phi(z_j) - u(z_j)| / max_j |u(z_j)|
  double phi_norm = 0.0;   // ||phi||_{L2(S_R)}
  double bound_rhs = 0.0;  // sqrt(1 + t^2 + kappa^2) exp(R t)
};

/// Requires basis.L >= ceil((kappa + t) R) + 15 and basis.kappa == xi.kappa.
RepresentationReport verify_cgo_representation(const MeasurementBasis& basis, const GridPtr& grid, const CgoVector& xi);

struct FourierReport {
  std::complex<double> lhs;  // (2 pi)^{3/2} F(q1 - q2)(gamma)
  std::complex<double> rhs;  // <T(q1 - q2) phi_a, phi_b>
  double rel_error = 0.0;
  double phi_a_norm = 0.0;
  double phi_b_norm = 0.0;
};

/// Works with full and compressed potentials.
FourierReport verify_fourier_identity(const PotentialMatrix& P, const SourceField& q1,
                                      const SourceField& q2, const rvec3& gamma, double t);

}  // namespace randsource
