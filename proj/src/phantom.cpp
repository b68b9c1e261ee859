#include "randsource/phantom.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "randsource/rng.hpp"

namespace randsource {

namespace {

void check_degree(int degree) {
  if (degree != 1 && degree != 3) {
    throw std::invalid_argument("spline degree must be 1 or 3, got " + std::to_string(degree));
  }
}

// Per-axis nonzero basis values at one coordinate: first index and up to
// degree+1 values.
struct AxisStencil {
  int first = 0;
  int count = 0;
  double values[4] = {0.0, 0.0, 0.0, 0.0};
};

AxisStencil axis_stencil(const SplinePhantom& p, double x) {
  AxisStencil s;
  const double u = (x + 0.5 * p.side) / p.knot_spacing();
  const int nb = p.basis_count();
  // basis k is nonzero for u in (k, k + degree + 1)
  const int kmin = std::max(0, static_cast<int>(std::floor(u)) - p.degree);
  const int kmax = std::min(nb - 1, static_cast<int>(std::floor(u)));
  s.first = kmin;
  for (int k = kmin; k <= kmax && s.count < 4; ++k) {
    s.values[s.count++] = cardinal_bspline(p.degree, u - k);
  }
  return s;
}

}  // namespace

std::vector<double> SplinePhantom::knots() const {
  std::vector<double> t(static_cast<std::size_t>(intervals) + 1);
  for (int i = 0; i <= intervals; ++i) t[i] = -0.5 * side + i * knot_spacing();
  return t;
}

double SplinePhantom::greville(int k) const noexcept {
  return -0.5 * side + (k + 0.5 * (degree + 1)) * knot_spacing();
}

std::size_t SplinePhantom::coeff_count() const noexcept {
  std::size_t c = 1;
  for (int d = 0; d < dim; ++d) c *= static_cast<std::size_t>(basis_count());
  return c;
}

double cardinal_bspline(int degree, double u) {
  if (u < 0.0 || u >= degree + 1.0) return 0.0;
  if (degree == 0) return 1.0;
  return (u * cardinal_bspline(degree - 1, u) +
          (degree + 1.0 - u) * cardinal_bspline(degree - 1, u - 1.0)) /
         degree;
}

SplinePhantom phantom_random(int degree, std::uint64_t seed, int dim) {
  check_degree(degree);
  SplinePhantom p;
  p.dim = dim;
  p.degree = degree;
  p.coeffs.resize(p.coeff_count());
  const CounterRng rng(seed);
  for (std::size_t i = 0; i < p.coeffs.size(); ++i) {
    p.coeffs[i] = std::abs(rng.normal_pair(0, i).first);
  }
  return p;
}

SplinePhantom phantom_shapes(int degree, int dim) {
  check_degree(degree);
  SplinePhantom p;
  p.dim = dim;
  p.degree = degree;
  p.coeffs.assign(p.coeff_count(), 0.0);
  const int nb = p.basis_count();
  auto shell = [](double r) { return r >= 0.65 && r <= 0.95; };
  if (dim == 3) {
    std::size_t idx = 0;
    for (int a = 0; a < nb; ++a)
      for (int b = 0; b < nb; ++b)
        for (int c = 0; c < nb; ++c, ++idx) {
          const double x = p.greville(a), y = p.greville(b), z = p.greville(c);
          const double r = std::sqrt(x * x + y * y + z * z);
          const bool in_shell = shell(r) && z <= 1e-12;
          const double dx = x - 0.55, dz = z - 0.55;
          const bool in_ball = dx * dx + y * y + dz * dz <= 0.33 * 0.33;
          p.coeffs[idx] = (in_shell || in_ball) ? 1.0 : 0.0;
        }
  } else {
    std::size_t idx = 0;
    for (int a = 0; a < nb; ++a)
      for (int b = 0; b < nb; ++b, ++idx) {
        const double x = p.greville(a), y = p.greville(b);
        const bool gap = x > 0.0 && std::abs(y) < 0.35;
        const bool in_ring = shell(std::hypot(x, y)) && !gap;
        const bool in_dot = x * x + (y + 1.25) * (y + 1.25) <= 0.33 * 0.33;
        p.coeffs[idx] = (in_ring || in_dot) ? 1.0 : 0.0;
      }
  }
  return p;
}

double eval_phantom_at(const SplinePhantom& p, const std::array<double, 3>& x) {
  const int nb = p.basis_count();
  const AxisStencil s0 = axis_stencil(p, x[0]);
  const AxisStencil s1 = axis_stencil(p, x[1]);
  double acc = 0.0;
  if (p.dim == 3) {
    const AxisStencil s2 = axis_stencil(p, x[2]);
    for (int a = 0; a < s0.count; ++a)
      for (int b = 0; b < s1.count; ++b) {
        const double ab = s0.values[a] * s1.values[b];
        const std::size_t base =
            (static_cast<std::size_t>(s0.first + a) * nb + (s1.first + b)) * nb + s2.first;
        for (int c = 0; c < s2.count; ++c) acc += ab * s2.values[c] * p.coeffs[base + c];
      }
  } else {
    for (int a = 0; a < s0.count; ++a) {
      const std::size_t base = static_cast<std::size_t>(s0.first + a) * nb + s1.first;
      for (int b = 0; b < s1.count; ++b) acc += s0.values[a] * s1.values[b] * p.coeffs[base + b];
    }
  }
  return acc;
}

SourceField eval_phantom(const SplinePhantom& p, const GridPtr& grid) {
  if (p.dim != grid->dim || std::abs(p.side - grid->side) > 1e-12 * grid->side) {
    throw std::invalid_argument("eval_phantom: phantom and grid axes differ");
  }
  if (p.coeffs.size() != p.coeff_count()) {
    throw std::invalid_argument("eval_phantom: coefficient count does not match basis");
  }
  Eigen::VectorXd v(grid->size());
  for (Eigen::Index j = 0; j < grid->size(); ++j) {
    v[j] = eval_phantom_at(p, {grid->points(0, j), grid->points(1, j), grid->points(2, j)});
  }
  return {grid, std::move(v)};
}

void to_json(nlohmann::json& j, const SplinePhantom& p) {
  j = nlohmann::json{{"dim", p.dim},         {"degree", p.degree}, {"intervals", p.intervals},
                     {"side", p.side},       {"knots", p.knots()}, {"coeffs", p.coeffs}};
}

void from_json(const nlohmann::json& j, SplinePhantom& p) {
  p.dim = j.value("dim", 3);
  p.degree = j.at("degree").get<int>();
  check_degree(p.degree);
  p.intervals = j.value("intervals", 12);
  p.side = j.value("side", kDefaultSide);
  if (j.contains("knots")) {
    const auto k = j.at("knots").get<std::vector<double>>();
    if (static_cast<int>(k.size()) != p.intervals + 1) {
      throw std::invalid_argument("phantom JSON: knot count does not match intervals");
    }
    p.side = k.back() - k.front();
  }
  p.coeffs = j.at("coeffs").get<std::vector<double>>();
  if (p.coeffs.size() != p.coeff_count()) {
    throw std::invalid_argument("phantom JSON: coefficient count does not match basis");
  }
}

}  // namespace randsource
