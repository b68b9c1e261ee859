#include "randsource/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace randsource::specfun {

namespace {

void check_degree(int l_max) {
  if (l_max < 0) {
    throw std::invalid_argument("spherical function degree must be >= 0, got " +
                                std::to_string(l_max));
  }
}

// Normalized associated Legendre recurrence; writes Y_lm for all l <= l_max.
void harmonics_core(int l_max, double cos_t, double sin_t, cplx eiphi, cplx* out) {
  const double inv_sqrt_4pi = 0.5 / std::sqrt(std::numbers::pi);
  double pmm = inv_sqrt_4pi;  // normalized P_mm including Condon-Shortley
  cplx eimphi{1.0, 0.0};
  for (int m = 0; m <= l_max; ++m) {
    if (m > 0) {
      pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * sin_t;
      eimphi *= eiphi;
    }
    double p_lm2 = 0.0;
    double p_lm1 = pmm;
    for (int l = m; l <= l_max; ++l) {
      double p = 0.0;
      if (l == m) {
        p = pmm;
      } else if (l == m + 1) {
        p = std::sqrt(2.0 * m + 3.0) * cos_t * pmm;
      } else {
        const double ll = l;
        const double mm = m;
        const double a = std::sqrt((4.0 * ll * ll - 1.0) / (ll * ll - mm * mm));
        const double b = std::sqrt(((ll - 1.0) * (ll - 1.0) - mm * mm) /
                                   (4.0 * (ll - 1.0) * (ll - 1.0) - 1.0));
        p = a * (cos_t * p_lm1 - b * p_lm2);
      }
      if (l > m) {
        p_lm2 = p_lm1;
        p_lm1 = p;
      }
      const cplx y = p * eimphi;
      out[DegreeOrder{l, m}.index()] = y;
      if (m > 0) {
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        out[DegreeOrder{l, -m}.index()] = sign * std::conj(y);
      }
    }
  }
}

}  // namespace

DegreeOrder DegreeOrder::from_index(std::size_t idx) noexcept {
  const int l = static_cast<int>(std::sqrt(static_cast<double>(idx)));
  int ll = l;
  // guard against rounding of the square root
  while (static_cast<std::size_t>((ll + 1) * (ll + 1)) <= idx) ++ll;
  while (static_cast<std::size_t>(ll * ll) > idx) --ll;
  return {ll, static_cast<int>(idx) - ll * ll - ll};
}

std::vector<double> sph_bessel_j(int l_max, double x) {
  check_degree(l_max);
  if (!std::isfinite(x) || x < 0.0) {
    throw std::domain_error("sph_bessel_j: argument must be finite and >= 0");
  }
  std::vector<double> j(static_cast<std::size_t>(l_max) + 1, 0.0);
  if (x == 0.0) {
    j[0] = 1.0;
    return j;
  }
  const double j0 = std::sin(x) / x;
  if (l_max == 0) {
    j[0] = j0;
    return j;
  }
  const double j1 = std::sin(x) / (x * x) - std::cos(x) / x;

  // ratio[l] = j_l / j_{l-1}, from the continued fraction run downward. The
  // margin is counted from max(l_max, x): below the turning point l ~ x the
  // truncation error of the fraction is not damped.
  const int top = std::max(l_max, static_cast<int>(std::ceil(x)));
  const int start = top + std::max(20, static_cast<int>(std::ceil(10.0 + x)));
  std::vector<double> ratio(static_cast<std::size_t>(l_max) + 1, 0.0);
  double r = 0.0;
  for (int l = start; l >= 1; --l) {
    double denom = (2.0 * l + 1.0) - x * r;
    if (denom == 0.0) denom = 1e-300;
    r = x / denom;
    if (l <= l_max) ratio[static_cast<std::size_t>(l)] = r;
  }

  if (std::abs(j0) >= std::abs(j1) || x < 1.0) {
    j[0] = j0;
    for (int l = 1; l <= l_max; ++l) j[l] = j[l - 1] * ratio[l];
  } else {
    j[0] = j0;
    j[1] = j1;
    for (int l = 2; l <= l_max; ++l) j[l] = j[l - 1] * ratio[l];
  }
  return j;
}

std::vector<double> sph_bessel_y(int l_max, double x) {
  check_degree(l_max);
  if (!std::isfinite(x) || x <= 0.0) {
    throw std::domain_error("sph_bessel_y: argument must be finite and > 0");
  }
  std::vector<double> y(static_cast<std::size_t>(l_max) + 1, 0.0);
  const double c = std::cos(x);
  const double s = std::sin(x);
  y[0] = -c / x;
  if (l_max == 0) return y;
  y[1] = -c / (x * x) - s / x;
  for (int l = 1; l < l_max; ++l) {
    y[l + 1] = (2.0 * l + 1.0) / x * y[l] - y[l - 1];
  }
  return y;
}

std::vector<cplx> sph_hankel1(int l_max, double x) {
  check_degree(l_max);
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw std::domain_error("sph_hankel1: argument must be > 0, got " + std::to_string(x));
  }
  const auto j = sph_bessel_j(l_max, x);
  const auto y = sph_bessel_y(l_max, x);
  std::vector<cplx> h(j.size());
  for (std::size_t l = 0; l < h.size(); ++l) h[l] = {j[l], y[l]};
  return h;
}

std::vector<cplx> sph_harmonics(int l_max, double theta, double phi) {
  check_degree(l_max);
  std::vector<cplx> out(harmonic_count(l_max));
  harmonics_core(l_max, std::cos(theta), std::sin(theta), std::polar(1.0, phi), out.data());
  return out;
}

void sph_harmonics_dir(int l_max, const std::array<double, 3>& dir, cplx* out) {
  check_degree(l_max);
  const double rho = std::hypot(dir[0], dir[1]);
  const double r = std::hypot(rho, dir[2]);
  if (r == 0.0) throw std::domain_error("sph_harmonics_dir: zero direction vector");
  const cplx eiphi = rho > 0.0 ? cplx{dir[0] / rho, dir[1] / rho} : cplx{1.0, 0.0};
  harmonics_core(l_max, dir[2] / r, rho / r, eiphi, out);
}

std::vector<cplx> sph_harmonics_dir(int l_max, const std::array<double, 3>& dir) {
  check_degree(l_max);
  std::vector<cplx> out(harmonic_count(l_max));
  sph_harmonics_dir(l_max, dir, out.data());
  return out;
}

}  // namespace randsource::specfun
