#include "randsource/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "randsource/rng.hpp"

namespace randsource {

namespace {

// Samples are processed in blocks of fixed width; the block layout, not the
// thread count, fixes the floating-point summation order.
constexpr int kSampleBlock = 64;
constexpr Eigen::Index kRowBlock = 64;
constexpr std::uint64_t kAdditiveStream = 0xA0D1'7100'0000'0000ULL;

void check_source(const Eigen::VectorXd& q) {
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    if (!(q[j] >= 0.0)) {
      throw std::invalid_argument("source strength must be >= 0 (entry " + std::to_string(j) +
                                  " is " + std::to_string(q[j]) + ")");
    }
  }
}

// Columns i0 .. i0+count-1 of the white-noise matrix, scaled by sqrt(w q / 2)
// so that A * X gives u_i = G(xi_i / sqrt(w)).
Eigen::MatrixXcd noise_block(const Eigen::VectorXd& scale, const CounterRng& rng, std::uint64_t i0,
                             int count) {
  const Eigen::Index J = scale.size();
  Eigen::MatrixXcd X(J, count);
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < J; ++j) {
    for (int c = 0; c < count; ++c) {
      const auto [a, b] = rng.normal_pair(i0 + c, static_cast<std::uint64_t>(j));
      X(j, c) = {scale[j] * a, scale[j] * b};
    }
  }
  return X;
}

// out (lower triangle) = U U^H, computed in fixed row blocks.
void gram_lower(const Eigen::MatrixXcd& U, Eigen::MatrixXcd& out) {
  const Eigen::Index M = U.rows();
  out.setZero(M, M);
  const Eigen::Index nblocks = (M + kRowBlock - 1) / kRowBlock;
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index b = 0; b < nblocks; ++b) {
    const Eigen::Index i0 = b * kRowBlock;
    const Eigen::Index rows = std::min(kRowBlock, M - i0);
    out.block(i0, 0, rows, i0 + rows).noalias() = U.middleRows(i0, rows) * U.topRows(i0 + rows).adjoint();
  }
}

Eigen::MatrixXcd apply_rows(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& X) {
  const Eigen::Index M = A.rows();
  Eigen::MatrixXcd U(M, X.cols());
  const Eigen::Index nblocks = (M + kRowBlock - 1) / kRowBlock;
#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < nblocks; ++b) {
    const Eigen::Index i0 = b * kRowBlock;
    const Eigen::Index rows = std::min(kRowBlock, M - i0);
    U.middleRows(i0, rows).noalias() = A.middleRows(i0, rows) * X;
  }
  return U;
}

NoisyData finish(const Eigen::MatrixXcd& lower_sum, int N, const CovMatrix& C_true) {
  NoisyData d;
  d.C_obs = lower_sum / static_cast<double>(N);
  for (Eigen::Index k = 0; k < d.C_obs.rows(); ++k) {
    d.C_obs(k, k) = {d.C_obs(k, k).real(), 0.0};
    for (Eigen::Index i = k + 1; i < d.C_obs.rows(); ++i) d.C_obs(k, i) = std::conj(d.C_obs(i, k));
  }
  d.delta = hs_dist(d.C_obs, C_true);
  return d;
}

}  // namespace

void NoiseSpec::validate() const {
  if (mode == Mode::sample && N < 1) throw std::invalid_argument("sample mode needs N >= 1");
  if (mode == Mode::additive && !(delta_target > 0.0)) {
    throw std::invalid_argument("additive mode needs delta_target > 0");
  }
}

Eigen::VectorXcd sample_source(const SourceField& q, std::uint64_t seed, std::uint64_t sample) {
  check_source(q.values);
  const CounterRng rng(seed);
  Eigen::VectorXcd xi(q.values.size());
  for (Eigen::Index j = 0; j < xi.size(); ++j) {
    const auto [a, b] = rng.normal_pair(sample, static_cast<std::uint64_t>(j));
    const double s = std::sqrt(0.5 * q.values[j]);
    xi[j] = {s * a, s * b};
  }
  return xi;
}

std::vector<NoisyData> sample_covariance_nested(const PotentialMatrix& P, const SourceField& q,
                                                const std::vector<int>& Ns, std::uint64_t seed) {
  if (q.values.size() != P.cols()) throw std::invalid_argument("sample_covariance: field size mismatch");
  check_source(q.values);
  if (Ns.empty()) return {};
  for (std::size_t k = 0; k < Ns.size(); ++k) {
    if (Ns[k] < 1) throw std::invalid_argument("sample_covariance: N must be >= 1");
    if (k > 0 && Ns[k] < Ns[k - 1]) throw std::invalid_argument("sample_covariance: N list must be sorted");
  }
  const CovMatrix C_true = forward_cov(P, q);
  const Eigen::VectorXd scale = (0.5 * P.weight() * q.values.array()).sqrt().matrix();
  const CounterRng rng(seed);
  const Eigen::Index M = P.rows();

  std::vector<NoisyData> out;
  out.reserve(Ns.size());
  Eigen::MatrixXcd running = Eigen::MatrixXcd::Zero(M, M);  // sum over completed blocks
  Eigen::MatrixXcd blk;
  std::size_t next = 0;
  for (int b = 0; next < Ns.size(); ++b) {
    const std::uint64_t i0 = static_cast<std::uint64_t>(b) * kSampleBlock;
    const Eigen::MatrixXcd U = apply_rows(P.A, noise_block(scale, rng, i0, kSampleBlock));
    // requested counts ending inside this block use a partial update
    while (next < Ns.size() && static_cast<std::uint64_t>(Ns[next]) < i0 + kSampleBlock) {
      const int used = Ns[next] - static_cast<int>(i0);
      if (used == 0) {
        out.push_back(finish(running, Ns[next], C_true));
      } else {
        gram_lower(U.leftCols(used), blk);
        out.push_back(finish(running + blk, Ns[next], C_true));
      }
      ++next;
    }
    gram_lower(U, blk);
    running += blk;
    while (next < Ns.size() && static_cast<std::uint64_t>(Ns[next]) == i0 + kSampleBlock) {
      out.push_back(finish(running, Ns[next], C_true));
      ++next;
    }
  }
  return out;
}

NoisyData sample_covariance(const PotentialMatrix& P, const SourceField& q, int N, std::uint64_t seed) {
  return sample_covariance_nested(P, q, {N}, seed).front();
}

NoisyData additive_noise(const CovMatrix& C, double delta_target, std::uint64_t seed) {
  if (!(delta_target > 0.0)) throw std::invalid_argument("additive_noise: delta_target must be > 0");
  if (C.rows() != C.cols()) throw std::invalid_argument("additive_noise: matrix must be square");
  const Eigen::Index M = C.rows();
  const CounterRng rng(seed);
  CovMatrix E(M, M);
  for (Eigen::Index i = 0; i < M; ++i)
    for (Eigen::Index k = 0; k < M; ++k) {
      const auto [a, b] = rng.normal_pair(kAdditiveStream, static_cast<std::uint64_t>(i * M + k));
      E(i, k) = {a, b};
    }
  E = (0.5 * (E + E.adjoint())).eval();
  NoisyData d;
  d.C_obs = C + (delta_target / E.norm()) * E;
  d.delta = delta_target;
  return d;
}

}  // namespace randsource
