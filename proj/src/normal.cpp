#include "randsource/normal.hpp"

#include <algorithm>
#include <stdexcept>

#include "randsource/kernels.hpp"

namespace randsource {

namespace {
constexpr Eigen::Index kColBlock = 256;
}

MatrixFreeNormal::MatrixFreeNormal(PotentialPtr P) : P_(std::move(P)) {
  if (!P_) throw std::invalid_argument("MatrixFreeNormal: null potential");
}

Eigen::VectorXd MatrixFreeNormal::apply(const Eigen::VectorXd& q) const {
  return adjoint_cov(*P_, forward_cov(*P_, q)).values;
}

AssembledNormal::AssembledNormal(PotentialPtr P) : P_(std::move(P)) {
  if (!P_) throw std::invalid_argument("AssembledNormal: null potential");
  S_ = kernels::parallel::normal_matrix_lower(P_->A);
  const Eigen::Index J = S_.rows();
#pragma omp parallel for schedule(dynamic, 64)
  for (Eigen::Index k = 0; k < J; ++k)
    for (Eigen::Index i = 0; i < k; ++i) S_(i, k) = S_(k, i);
}

Eigen::VectorXd AssembledNormal::apply(const Eigen::VectorXd& q) const {
  if (q.size() != S_.cols()) throw std::invalid_argument("AssembledNormal: field size mismatch");
  const Eigen::VectorXd wq = P_->weight() * q;
  const Eigen::Index J = S_.cols();
  Eigen::VectorXd out(J);
  const Eigen::Index nblocks = (J + kColBlock - 1) / kColBlock;
  // S is symmetric, so column blocks give contiguous reads.
#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < nblocks; ++b) {
    const Eigen::Index j0 = b * kColBlock;
    const Eigen::Index cols = std::min(kColBlock, J - j0);
    out.segment(j0, cols).noalias() = S_.middleCols(j0, cols).transpose() * wq;
  }
  return out;
}

}  // namespace randsource
