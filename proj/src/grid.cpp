#include "randsource/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace randsource {

double Grid::max_radius() const {
  return points.size() == 0 ? 0.0 : points.colwise().norm().maxCoeff();
}

GridPtr make_grid(int dim, int n, double side) {
  if (dim != 2 && dim != 3) {
    throw std::invalid_argument("grid dimension must be 2 or 3, got " + std::to_string(dim));
  }
  if (n < 4 || n % 2 != 0) {
    throw std::invalid_argument("grid size must be even and >= 4 (cell-centred grid keeps the "
                                "origin off the grid), got " + std::to_string(n));
  }
  if (!(side > 0.0) || !std::isfinite(side)) {
    throw std::invalid_argument("grid side must be positive and finite");
  }
  auto g = std::make_shared<Grid>();
  g->dim = dim;
  g->n = n;
  g->side = side;
  const double h = side / n;
  g->weight = std::pow(h, dim);
  if (dim == 3) {
    g->points.resize(3, static_cast<Eigen::Index>(n) * n * n);
    Eigen::Index j = 0;
    for (int i0 = 0; i0 < n; ++i0)
      for (int i1 = 0; i1 < n; ++i1)
        for (int i2 = 0; i2 < n; ++i2, ++j)
          g->points.col(j) << g->coord(i0), g->coord(i1), g->coord(i2);
  } else {
    g->points.resize(3, static_cast<Eigen::Index>(n) * n);
    Eigen::Index j = 0;
    for (int i0 = 0; i0 < n; ++i0)
      for (int i1 = 0; i1 < n; ++i1, ++j) g->points.col(j) << g->coord(i0), g->coord(i1), 0.0;
  }
  return g;
}

SourceField::SourceField(GridPtr g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
  if (!grid) throw std::invalid_argument("SourceField: null grid");
  if (values.size() != grid->size()) {
    throw std::invalid_argument("SourceField: value count does not match grid size");
  }
}

SourceField SourceField::zeros(GridPtr g) {
  const auto n = g->size();
  return {std::move(g), Eigen::VectorXd::Zero(n)};
}

SourceField SourceField::constant(GridPtr g, double c) {
  const auto n = g->size();
  return {std::move(g), Eigen::VectorXd::Constant(n, c)};
}

double inner_w(const Grid& g, const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  return g.weight * p.dot(q);
}

double norm_w(const Grid& g, const Eigen::VectorXd& q) { return std::sqrt(inner_w(g, q, q)); }

std::complex<double> fourier_coeff(const SourceField& q, const std::array<double, 3>& gamma) {
  const Grid& g = *q.grid;
  std::complex<double> acc{0.0, 0.0};
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    const double phase = gamma[0] * g.points(0, j) + gamma[1] * g.points(1, j) +
                         gamma[2] * g.points(2, j);
    acc += q.values[j] * std::polar(1.0, -phase);
  }
  return acc * g.weight * std::pow(2.0 * std::numbers::pi, -0.5 * g.dim);
}

}  // namespace randsource
