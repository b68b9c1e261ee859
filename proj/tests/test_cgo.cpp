#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "randsource/cgo.hpp"
#include "randsource/phantom.hpp"
#include "randsource/rng.hpp"
#include "randsource/specfun.hpp"

using namespace randsource;
using cplx = std::complex<double>;
using std::numbers::pi;

namespace {

double cnorm(const cvec3& v) {
  return std::sqrt(std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]));
}
double im_norm(const cvec3& v) {
  return std::sqrt(v[0].imag() * v[0].imag() + v[1].imag() * v[1].imag() + v[2].imag() * v[2].imag());
}

}  // namespace

TEST_CASE("CGO pair at gamma = 0") {
  const auto p = build_cgo_pair({0, 0, 0}, 1.0, 6.0);
  CHECK(std::abs(bilinear_dot(p.a.xi, p.a.xi) - 36.0) < 1e-12 * 36);
  CHECK(std::abs(bilinear_dot(p.b.xi, p.b.xi) - 36.0) < 1e-12 * 36);
  CHECK(im_norm(p.a.xi) == doctest::Approx(1.0).epsilon(1e-14));
  for (int i = 0; i < 3; ++i) CHECK(std::abs(p.a.xi[i] - std::conj(p.b.xi[i])) < 1e-15);
}

TEST_CASE("CGO pair on the constraint boundary and beyond") {
  const double k = 6.0, t = 1.0, g = 2 * std::sqrt(k * k + t * t);
  const auto p = build_cgo_pair({0, g, 0}, t, k);
  CHECK(std::abs(bilinear_dot(p.a.xi, p.a.xi) - k * k) < 1e-12 * k * k);
  CHECK(std::abs(p.a.xi[1].real() + 0.5 * g) < 1e-14);
  CHECK_THROWS_AS(build_cgo_pair({0, 1.01 * g, 0}, t, k), std::invalid_argument);
  CHECK_THROWS_AS(build_cgo_pair({0, 0, 0}, 0.0, k), std::invalid_argument);
}

TEST_CASE("CGO pair invariants on 100 random parameter sets") {
  const CounterRng rng(77);
  for (std::uint64_t i = 0; i < 100; ++i) {
    const double kappa = 1.0 + 11.0 * rng.uniform(0, i);
    const double t = 0.05 + 2.45 * rng.uniform(1, i);
    const auto [g0, g1] = rng.normal_pair(2, i);
    const auto [g2, unused] = rng.normal_pair(3, i);
    (void)unused;
    const double gn = std::sqrt(g0 * g0 + g1 * g1 + g2 * g2);
    const double rho = 2 * std::sqrt(kappa * kappa + t * t) * rng.uniform(4, i);
    const rvec3 gamma{rho * g0 / gn, rho * g1 / gn, rho * g2 / gn};
    const auto p = build_cgo_pair(gamma, t, kappa);
    const double k2 = kappa * kappa;
    CAPTURE(i);
    CHECK(std::abs(bilinear_dot(p.a.xi, p.a.xi) - k2) < 1e-12 * (k2 + cnorm(p.a.xi) * cnorm(p.a.xi)));
    CHECK(std::abs(bilinear_dot(p.b.xi, p.b.xi) - k2) < 1e-12 * (k2 + cnorm(p.b.xi) * cnorm(p.b.xi)));
    CHECK(std::abs(im_norm(p.a.xi) - t) < 1e-12 * t);
    CHECK(std::abs(im_norm(p.b.xi) - t) < 1e-12 * t);
    for (int c = 0; c < 3; ++c) {
      CHECK(std::abs(p.a.xi[c] - std::conj(p.b.xi[c]) + gamma[c]) < 1e-12 * (1 + rho));
    }
    const double d12 = p.d1[0] * p.d2[0] + p.d1[1] * p.d2[1] + p.d1[2] * p.d2[2];
    const double d1g = p.d1[0] * gamma[0] + p.d1[1] * gamma[1] + p.d1[2] * gamma[2];
    CHECK(std::abs(d12) < 1e-14);
    CHECK(std::abs(d1g) < 1e-13 * (1 + rho));
  }
}

TEST_CASE("u_a conj(u_b) = exp(-i gamma . x)") {
  const rvec3 gamma{1.0, -0.5, 2.0};
  const auto p = build_cgo_pair(gamma, 1.0, 6.0);
  const CounterRng rng(3);
  for (std::uint64_t k = 0; k < 20; ++k) {
    const auto [x0, x1] = rng.normal_pair(0, k);
    const auto [x2, unused] = rng.normal_pair(1, k);
    (void)unused;
    const rvec3 x{x0, x1, x2};
    const cplx lhs = cgo_eval(p.a.xi, x) * std::conj(cgo_eval(p.b.xi, x));
    const cplx rhs = std::exp(cplx{0, -1} * (gamma[0] * x0 + gamma[1] * x1 + gamma[2] * x2));
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
}

TEST_CASE("CGO solutions satisfy the Helmholtz equation (finite differences)") {
  const auto v = make_cgo_vector({0, 0, 1}, {1, 0, 0}, 0.7, 6.0);
  CHECK(std::abs(bilinear_dot(v.xi, v.xi) - 36.0) < 1e-12 * 36);
  const double h = 1e-3;
  const double xi2 = cnorm(v.xi) * cnorm(v.xi);
  const CounterRng rng(8);
  for (std::uint64_t k = 0; k < 10; ++k) {
    const auto [a, b] = rng.normal_pair(0, k);
    const auto [c, unused] = rng.normal_pair(1, k);
    (void)unused;
    const rvec3 x{a, b, c};
    cplx lap = 0.0;
    for (int d = 0; d < 3; ++d) {
      auto at = [&](double s) {
        rvec3 y = x;
        y[d] += s;
        return cgo_eval(v.xi, y);
      };
      lap += (-at(2 * h) + 16.0 * at(h) - 30.0 * at(0) + 16.0 * at(-h) - at(-2 * h)) / (12 * h * h);
    }
    const cplx u = cgo_eval(v.xi, x);
    CHECK(std::abs(lap + 36.0 * u) <= 1e-6 * std::abs(u) * (1 + xi2));
  }
}

TEST_CASE("single-layer eigenvalues") {
  const MeasurementBasis basis{4.0, 6.0, 30};
  const auto s = single_layer_eigenvalues(basis);
  const double x = 24.0;
  const cplx s0 = cplx{0, 6.0} * 16.0 * (std::sin(x) / x) * (cplx{0, -1} * std::exp(cplx{0, x}) / x);
  CHECK(std::abs(s[0] - s0) < 1e-14 * std::abs(s0));

  HarmonicCoeffs e = HarmonicCoeffs::Zero(basis.size());
  const auto idx = static_cast<Eigen::Index>(specfun::DegreeOrder{5, -2}.index());
  e[idx] = 1.0;
  const HarmonicCoeffs Se = single_layer_apply(basis, e);
  CHECK(std::abs(Se[idx] - s[5]) < 1e-15 * std::abs(s[5]));
  CHECK((Se - Se[idx] * e).norm() == 0.0);

  const CounterRng rng(1);
  HarmonicCoeffs phi(basis.size());
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    const auto [a, b] = rng.normal_pair(0, i);
    phi[i] = {a, b};
  }
  CHECK((single_layer_solve(basis, single_layer_apply(basis, phi)) - phi).norm() < 1e-12 * phi.norm());

  // kappa R at the first zero of j_0
  CHECK_THROWS_WITH_AS(single_layer_eigenvalues({4.0, pi / 4.0, 5}), doctest::Contains("j_0"),
                       std::domain_error);
}

TEST_CASE("single-layer potential by direct quadrature matches the diagonal form") {
  // Off the surface the integrand of int_S Phi(z, y) phi(y) ds(y) is smooth,
  // so plain tensor quadrature is an independent oracle; the diagonal form is
  // i kappa R sum phi_lm h_l(kappa R) j_l(kappa |z|) Y_lm(z^), which tends to
  // sigma_l phi_lm e_lm as |z| -> R.
  const MeasurementBasis basis{4.0, 6.0, 8};
  const CounterRng rng(2);
  HarmonicCoeffs phi(basis.size());
  for (Eigen::Index i = 0; i < phi.size(); ++i) {
    const auto [a, b] = rng.normal_pair(0, i);
    phi[i] = {a, b};
  }
  const auto quad = sphere_quadrature(basis.R, 80, 160);
  const auto h = specfun::sph_hankel1(basis.L, basis.kappa * basis.R);
  for (double rz : {0.5, 1.5, 2.5}) {
    const rvec3 z{0.3 * rz, -0.4 * rz, std::sqrt(0.75) * rz};
    cplx direct = 0.0;
    for (std::size_t k = 0; k < quad.points.size(); ++k) {
      const auto& y = quad.points[k];
      direct += quad.weights[k] * helmholtz_green(basis.kappa, z, y) * eval_on_sphere(basis, phi, y);
    }
    const auto jl = specfun::sph_bessel_j(basis.L, basis.kappa * rz);
    const auto Y = specfun::sph_harmonics_dir(basis.L, z);
    cplx series = 0.0;
    for (Eigen::Index i = 0; i < phi.size(); ++i) {
      const int l = specfun::DegreeOrder::from_index(i).l;
      series += cplx{0, basis.kappa} * basis.R * h[l] * jl[l] * phi[i] * Y[i];
    }
    CHECK(std::abs(direct - series) < 1e-8 * std::abs(series));
  }
}

TEST_CASE("projection on the sphere inverts eval_on_sphere") {
  const MeasurementBasis basis{4.0, 3.0, 10};
  const CounterRng rng(4);
  HarmonicCoeffs c(basis.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const auto [a, b] = rng.normal_pair(0, i);
    c[i] = {a, b};
  }
  const auto back = project_on_sphere(basis, [&](const rvec3& x) { return eval_on_sphere(basis, c, x); });
  CHECK((back - c).norm() < 1e-12 * c.norm());
  const auto cc = project_on_sphere(basis, [&](const rvec3& x) { return std::conj(eval_on_sphere(basis, c, x)); });
  CHECK((cc - conjugate_function(c)).norm() < 1e-12 * c.norm());
}

TEST_CASE("CGO representation u = G* phi on the source grid") {
  auto g = make_grid(3, 8);
  const double kappa = 6.0, R = 4.0;
  std::vector<double> ratios, norms;
  for (double t : {0.25, 0.5, 1.0, 2.0}) {
    const MeasurementBasis basis{R, kappa, static_cast<int>(std::ceil(kappa * R + t * R)) + 20};
    const auto v = make_cgo_vector({1, 0, 0}, {0, 0, 1}, t, kappa);
    const auto rep = verify_cgo_representation(basis, g, v);
    CAPTURE(t);
    CHECK(rep.rel_error <= 1e-6);
    ratios.push_back(rep.phi_norm / rep.bound_rhs);
    norms.push_back(rep.phi_norm);
  }
  for (std::size_t i = 1; i < norms.size(); ++i) CHECK(norms[i] > norms[i - 1]);
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  CHECK(*hi / *lo <= 10.0);
  CHECK_THROWS_AS(verify_cgo_representation({R, kappa, 30}, g, make_cgo_vector({1, 0, 0}, {0, 0, 1}, 0.5, kappa)),
                  std::invalid_argument);
}

TEST_CASE("Fourier pairing identity for CGO densities") {
  auto g = make_grid(3, 12);
  const double kappa = 6.0, t = 1.0;
  const MeasurementBasis basis{4.0, kappa, static_cast<int>(std::ceil((kappa + t) * 4.0)) + 20};
  const auto P = build_potential(g, basis);
  const auto q1 = eval_phantom(phantom_random(3, 11), g);
  const auto q2 = eval_phantom(phantom_random(3, 12), g);
  const auto same = verify_fourier_identity(*P, q1, q1, {1, 0, 0}, t);
  CHECK(std::abs(same.lhs) == 0.0);
  CHECK(std::abs(same.rhs) == 0.0);
  for (const rvec3& gamma : {rvec3{0, 0, 0}, rvec3{1, 0, 0}, rvec3{0, 2, 0}}) {
    const auto r = verify_fourier_identity(*P, q1, q2, gamma, t);
    CAPTURE(gamma[0]);
    CAPTURE(gamma[1]);
    CHECK(r.rel_error <= 1e-5);
    // uniqueness bound: |lhs| <= ||T(q1 - q2)||_HS ||phi_a|| ||phi_b|| + gap
    const double hs = hs_dist(forward_cov(*P, q1), forward_cov(*P, q2));
    CHECK(std::abs(r.rhs) <= hs * r.phi_a_norm * r.phi_b_norm * (1 + 1e-12));
  }
  // the compressed data space gives the same pairing
  const auto Pr = compress(*P, 1e-10);
  const auto rc = verify_fourier_identity(*Pr, q1, q2, {1, 0, 0}, t);
  CHECK(rc.rel_error <= 1e-5);
}
