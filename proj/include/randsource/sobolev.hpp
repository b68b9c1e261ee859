#pragma once

#include <memory>

#include <Eigen/Dense>

#include "randsource/grid.hpp"

namespace randsource {

/// Periodic-DFT Sobolev operator B = F^{-1} diag(1 + |gamma_k|^2) F on a grid.
///
/// B^m is self-adjoint and positive in the weighted inner product and maps
/// real fields to real fields; ||q||_{H^m}^2 := <q, B^m q>_w. Fractional and
/// negative powers are available for preconditioning. Instances are
/// immutable and safe to share between threads; work buffers are per call.
class SobolevOperator {
 public:
  explicit SobolevOperator(GridPtr grid);
  ~SobolevOperator();
  SobolevOperator(const SobolevOperator&) = delete;
  SobolevOperator& operator=(const SobolevOperator&) = delete;

  /// Returns B^power q. Any real power is accepted.
  [[nodiscard]] Eigen::VectorXd apply(const Eigen::VectorXd& q, double power) const;

  [[nodiscard]] const Grid& grid() const noexcept { return *grid_; }

 private:
  struct Plans;
  GridPtr grid_;
  Eigen::VectorXd symbol_;  // 1 + |gamma|^2 on the half spectrum
  std::unique_ptr<Plans> plans_;
};

/// B_m q; throws std::invalid_argument for m < 0.
SourceField sobolev_apply(const SourceField& q, double m);

/// ||q||_{H^m} = sqrt(<q, B_m q>_w).
double sobolev_norm(const SourceField& q, double m);
double sobolev_norm(const SobolevOperator& op, const Eigen::VectorXd& q, double m);

}  // namespace randsource
