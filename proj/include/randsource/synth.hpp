#pragma once

#include <cstdint>
#include <vector>

#include "randsource/operator.hpp"

namespace randsource {

struct NoiseSpec {
  enum class Mode { sample, additive };
  Mode mode = Mode::sample;
  int N = 0;                  // sample mode
  double delta_target = 0.0;  // additive mode
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument unless N >= 1 (sample) or delta_target > 0 (additive).
  void validate() const;
};

struct NoisyData {
  CovMatrix C_obs;
  double delta = 0.0;  // exact HS distance to the noiseless covariance
};

/// One draw xi ~ N_C(0, diag(q)): xi_j = sqrt(q_j / 2) (zeta_j + i eta_j).
/// Sample index i selects an independent draw for the same seed.
Eigen::VectorXcd sample_source(const SourceField& q, std::uint64_t seed, std::uint64_t sample = 0);

/// C_obs = (1/N) sum_i u_i u_i^H with u_i = G(xi_i / sqrt(w)), i.e. the
/// measurement of a discretized white-noise source of strength q, so that
/// E[C_obs] = forward_cov(q). delta = hs_dist(C_obs, forward_cov(q)).
NoisyData sample_covariance(const PotentialMatrix& P, const SourceField& q, int N, std::uint64_t seed);

/// The same, for an increasing list of sample counts drawn from one stream:
/// entry k uses the first Ns[k] samples and is bit-identical to
/// sample_covariance(P, q, Ns[k], seed).
std::vector<NoisyData> sample_covariance_nested(const PotentialMatrix& P, const SourceField& q,
                                                const std::vector<int>& Ns, std::uint64_t seed);

/// C_obs = C + delta_target E / ||E||_HS with E a Hermitian Gaussian matrix.
NoisyData additive_noise(const CovMatrix& C, double delta_target, std::uint64_t seed);

}  // namespace randsource
