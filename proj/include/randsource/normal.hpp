#pragma once

#include <memory>

#include <Eigen/Dense>

#include "randsource/operator.hpp"

namespace randsource {

/// The normal operator q -> T*T q of the covariance forward map, as a
/// self-adjoint map in the weighted grid inner product.
class NormalOperator {
 public:
  virtual ~NormalOperator() = default;
  [[nodiscard]] virtual Eigen::VectorXd apply(const Eigen::VectorXd& q) const = 0;
  [[nodiscard]] virtual const PotentialMatrix& potential() const = 0;
};

/// adjoint_cov(forward_cov(q)): two dense M^2 J passes per application, no
/// J x J storage.
class MatrixFreeNormal final : public NormalOperator {
 public:
  explicit MatrixFreeNormal(PotentialPtr P);
  [[nodiscard]] Eigen::VectorXd apply(const Eigen::VectorXd& q) const override;
  [[nodiscard]] const PotentialMatrix& potential() const override { return *P_; }

 private:
  PotentialPtr P_;
};

/// Stores S_jk = |a_j^H a_k|^2 (8 J^2 bytes) so that T*T q = S (w q) costs one
/// J x J matrix-vector product. Worth it when many solves share one potential.
class AssembledNormal final : public NormalOperator {
 public:
  explicit AssembledNormal(PotentialPtr P);
  [[nodiscard]] Eigen::VectorXd apply(const Eigen::VectorXd& q) const override;
  [[nodiscard]] const PotentialMatrix& potential() const override { return *P_; }
  [[nodiscard]] const Eigen::MatrixXd& matrix() const noexcept { return S_; }

 private:
  PotentialPtr P_;
  Eigen::MatrixXd S_;  // symmetric, both triangles filled
};

}  // namespace randsource
