#include "randsource/sobolev.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace randsource {

namespace {
// FFTW planning is not thread-safe; execution with new-array calls is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct SobolevOperator::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  Eigen::Index real_size = 0;
  Eigen::Index half_size = 0;

  Plans(int dim, int n) {
    std::vector<int> dims(static_cast<std::size_t>(dim), n);
    real_size = 1;
    for (int d = 0; d < dim; ++d) real_size *= n;
    half_size = real_size / n * (n / 2 + 1);
    double* rbuf = fftw_alloc_real(static_cast<std::size_t>(real_size));
    fftw_complex* cbuf = fftw_alloc_complex(static_cast<std::size_t>(half_size));
    {
      std::lock_guard lock(planner_mutex());
      forward = fftw_plan_dft_r2c(dim, dims.data(), rbuf, cbuf, FFTW_ESTIMATE | FFTW_UNALIGNED);
      backward = fftw_plan_dft_c2r(dim, dims.data(), cbuf, rbuf, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    fftw_free(rbuf);
    fftw_free(cbuf);
    if (!forward || !backward) throw std::runtime_error("FFTW planning failed");
  }
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
};

SobolevOperator::SobolevOperator(GridPtr grid) : grid_(std::move(grid)) {
  if (!grid_) throw std::invalid_argument("SobolevOperator: null grid");
  const int n = grid_->n;
  const int dim = grid_->dim;
  plans_ = std::make_unique<Plans>(dim, n);
  symbol_.resize(plans_->half_size);
  const int nh = n / 2 + 1;
  Eigen::Index idx = 0;
  if (dim == 3) {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < nh; ++c, ++idx) {
          const double g0 = grid_->frequency(a), g1 = grid_->frequency(b), g2 = grid_->frequency(c);
          symbol_[idx] = 1.0 + g0 * g0 + g1 * g1 + g2 * g2;
        }
  } else {
    for (int a = 0; a < n; ++a)
      for (int c = 0; c < nh; ++c, ++idx) {
        const double g0 = grid_->frequency(a), g1 = grid_->frequency(c);
        symbol_[idx] = 1.0 + g0 * g0 + g1 * g1;
      }
  }
}

SobolevOperator::~SobolevOperator() = default;

Eigen::VectorXd SobolevOperator::apply(const Eigen::VectorXd& q, double power) const {
  if (q.size() != plans_->real_size) {
    throw std::invalid_argument("SobolevOperator::apply: field size does not match grid");
  }
  if (power == 0.0) return q;
  Eigen::VectorXd in = q;
  Eigen::VectorXcd spec(plans_->half_size);
  auto* cptr = reinterpret_cast<fftw_complex*>(spec.data());
  fftw_execute_dft_r2c(plans_->forward, in.data(), cptr);
  for (Eigen::Index k = 0; k < spec.size(); ++k) spec[k] *= std::pow(symbol_[k], power);
  Eigen::VectorXd out(plans_->real_size);
  fftw_execute_dft_c2r(plans_->backward, cptr, out.data());
  out /= static_cast<double>(plans_->real_size);
  return out;
}

SourceField sobolev_apply(const SourceField& q, double m) {
  if (!(m >= 0.0)) throw std::invalid_argument("sobolev_apply: smoothness index m must be >= 0");
  SobolevOperator op(q.grid);
  return {q.grid, op.apply(q.values, m)};
}

double sobolev_norm(const SobolevOperator& op, const Eigen::VectorXd& q, double m) {
  if (!(m >= 0.0)) throw std::invalid_argument("sobolev_norm: smoothness index m must be >= 0");
  const double v = inner_w(op.grid(), q, op.apply(q, m));
  return std::sqrt(std::max(v, 0.0));
}

double sobolev_norm(const SourceField& q, double m) {
  SobolevOperator op(q.grid);
  return sobolev_norm(op, q.values, m);
}

}  // namespace randsource
