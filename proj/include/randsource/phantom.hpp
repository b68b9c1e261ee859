#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "randsource/grid.hpp"

namespace randsource {

/// Tensor-product B-spline on [-side/2, side/2]^dim.
///
/// Knots are equidistant and divide each axis into `intervals` cells. Only the
/// uniform B-splines whose support lies inside the interval are used
/// (intervals - degree per axis), so the zero extension of the phantom keeps
/// the H^{degree + 1/2 - eps} smoothness of a single B-spline.
struct SplinePhantom {
  int dim = 3;
  int degree = 1;
  int intervals = 12;
  double side = kDefaultSide;
  std::vector<double> coeffs;  // flat, last axis fastest

  static constexpr double kSmoothnessEpsilon = 0.01;

  [[nodiscard]] int basis_count() const noexcept { return intervals - degree; }
  [[nodiscard]] double knot_spacing() const noexcept { return side / intervals; }
  [[nodiscard]] std::vector<double> knots() const;
  /// Centre of the support of basis function k (its Greville abscissa).
  [[nodiscard]] double greville(int k) const noexcept;
  /// Sobolev index s = degree + 1/2 - eps.
  [[nodiscard]] double smoothness() const noexcept { return degree + 0.5 - kSmoothnessEpsilon; }
  /// Sobolev index rounded to degree + 1/2, used for reference exponents.
  [[nodiscard]] double nominal_smoothness() const noexcept { return degree + 0.5; }
  [[nodiscard]] std::size_t coeff_count() const noexcept;
};

/// Uniform (cardinal) B-spline of the given degree with support [0, degree+1].
double cardinal_bspline(int degree, double u);

/// Coefficients |X|, X ~ N(0,1) iid, deterministic in seed.
SplinePhantom phantom_random(int degree, std::uint64_t seed, int dim = 3);

/// Indicator-like target sampled at the Greville abscissae.
/// 3D: lower hemispherical shell 0.65 <= |x| <= 0.95, x3 <= 0, plus a ball of
/// radius 0.33 around (0.55, 0, 0.55).
/// 2D: ring 0.65 <= |x| <= 0.95 with a gap for x1 > 0, |x2| < 0.35, plus a
/// disc of radius 0.33 around (0, -1.25).
SplinePhantom phantom_shapes(int degree, int dim = 3);

/// Pointwise evaluation on the grid points.
SourceField eval_phantom(const SplinePhantom& p, const GridPtr& grid);

/// Evaluation at a single point (first `dim` coordinates are used).
double eval_phantom_at(const SplinePhantom& p, const std::array<double, 3>& x);

void to_json(nlohmann::json& j, const SplinePhantom& p);
void from_json(const nlohmann::json& j, SplinePhantom& p);

}  // namespace randsource
