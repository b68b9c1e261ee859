#pragma once

// Spherical Bessel/Hankel functions and complex spherical harmonics.
//
// Phase convention: Y_lm includes the Condon-Shortley factor (-1)^m, so
//   Y_lm(theta, phi) = (-1)^m sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!) P_l^m(cos theta) e^{i m phi}
// for m >= 0 (P_l^m without the phase), and Y_{l,-m} = (-1)^m conj(Y_lm).
// The volume potential and its adjoint are only phase consistent when both
// are assembled from these functions.
//
// All functions are pure and thread-safe.

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

namespace randsource::specfun {

using cplx = std::complex<double>;

/// (l, m) pair with |m| <= l.
struct DegreeOrder {
  int l = 0;
  int m = 0;

  /// Position in the flat (l, m) ordering used throughout: l*l + l + m.
  [[nodiscard]] constexpr std::size_t index() const noexcept {
    return static_cast<std::size_t>(l * l + l + m);
  }
  [[nodiscard]] static DegreeOrder from_index(std::size_t idx) noexcept;
};

/// Number of harmonics up to and including degree l_max.
[[nodiscard]] constexpr std::size_t harmonic_count(int l_max) noexcept {
  return static_cast<std::size_t>((l_max + 1) * (l_max + 1));
}

/// j_0..j_{l_max} at x >= 0 by downward (Miller) recurrence of the ratios
/// j_l / j_{l-1}, anchored on the closed form of j_0 or j_1, whichever is
/// larger in magnitude at x.
std::vector<double> sph_bessel_j(int l_max, double x);

/// y_0..y_{l_max} at x > 0 by upward recurrence.
std::vector<double> sph_bessel_y(int l_max, double x);

/// h^(1)_l = j_l + i y_l for l = 0..l_max. Throws std::domain_error for x <= 0.
std::vector<cplx> sph_hankel1(int l_max, double x);

/// Y_lm(theta, phi) for l <= l_max in flat (l, m) order.
std::vector<cplx> sph_harmonics(int l_max, double theta, double phi);

/// Same as sph_harmonics, with the angles taken from a nonzero direction
/// vector. On the polar axis the azimuth is taken as 0.
std::vector<cplx> sph_harmonics_dir(int l_max, const std::array<double, 3>& dir);

/// In-place variant writing (l_max+1)^2 values into out; avoids allocation in
/// assembly loops.
void sph_harmonics_dir(int l_max, const std::array<double, 3>& dir, cplx* out);

}  // namespace randsource::specfun
