#pragma once

#include <memory>
#include <vector>

#include <nlohmann/json.hpp>

#include "randsource/normal.hpp"
#include "randsource/operator.hpp"
#include "randsource/sobolev.hpp"

namespace randsource {

struct TikhonovConfig {
  double m = 0.0;           // penalty smoothness
  double alpha0 = 0.0;      // <= 0 selects ||T 1||^2 / ||1||^2_{H^m}
  double ratio = 2.0;       // alpha_{k+1} = alpha_k / ratio
  double tau = 1.5;         // discrepancy factor
  double cg_tol = 1e-8;     // relative normal-equation residual
  int cg_maxit = 2000;
  double alpha_min = 1e-14;

  void validate() const;
};

void to_json(nlohmann::json& j, const TikhonovConfig& c);
void from_json(const nlohmann::json& j, TikhonovConfig& c);

struct CgStats {
  int iterations = 0;
  bool converged = false;
  double rel_residual = 0.0;
  // Tikhonov functional after each iteration (index 0 = start value).
  std::vector<double> functional;
};

/// min 1/2 ||T q - C_obs||_HS^2 + alpha/2 ||q||_{H^m}^2 for a fixed data set.
///
/// Solves (T*T + alpha B_m) q = T* C_obs by conjugate gradients in the
/// weighted inner product, preconditioned with B_m^{-1} (the same iterates
/// as plain CG on the variable B_m^{1/2} q).
class TikhonovProblem {
 public:
  TikhonovProblem(std::shared_ptr<const NormalOperator> normal, const CovMatrix& C_obs, double m);

  /// Throws std::invalid_argument for alpha <= 0 and std::runtime_error when
  /// the iteration produces a non-finite value. Non-convergence within
  /// cg_maxit is reported through stats, not thrown.
  [[nodiscard]] Eigen::VectorXd solve(double alpha, const Eigen::VectorXd& start,
                                      const TikhonovConfig& cfg, CgStats* stats = nullptr) const;

  /// ||T q - C_obs||_HS from <q, T*T q> - 2 <q, T*C> + ||C||^2 (one normal
  /// application, no covariance assembly).
  [[nodiscard]] double residual(const Eigen::VectorXd& q) const;
  /// hs_dist(forward_cov(q), C_obs).
  [[nodiscard]] double residual_exact(const Eigen::VectorXd& q) const;
  [[nodiscard]] double functional(const Eigen::VectorXd& q, double alpha) const;
  [[nodiscard]] double default_alpha0() const;

  [[nodiscard]] const Eigen::VectorXd& rhs() const noexcept { return rhs_; }
  [[nodiscard]] double m() const noexcept { return m_; }
  [[nodiscard]] const Grid& grid() const noexcept { return *grid_; }
  [[nodiscard]] const NormalOperator& normal() const noexcept { return *normal_; }
  [[nodiscard]] const SobolevOperator& sobolev() const noexcept { return *sobolev_; }

 private:
  std::shared_ptr<const NormalOperator> normal_;
  GridPtr grid_;
  std::shared_ptr<const SobolevOperator> sobolev_;
  CovMatrix C_obs_;
  Eigen::VectorXd rhs_;
  double data_norm2_ = 0.0;
  double m_ = 0.0;
};

/// One Tikhonov solve with a matrix-free normal operator.
SourceField tikhonov_solve(const PotentialPtr& P, const CovMatrix& C_obs, double alpha,
                           const TikhonovConfig& cfg, const SourceField* warm_start = nullptr,
                           CgStats* stats = nullptr);

struct ReconResult {
  SourceField q_alpha;
  double alpha_final = 0.0;
  double residual = 0.0;           // recomputed as hs_dist(forward_cov(q_alpha), C_obs)
  double residual_internal = 0.0;  // value the stopping rule saw
  std::vector<double> alphas;
  std::vector<double> residuals;
  std::vector<int> iterations;
  bool discrepancy_satisfied = false;
  bool cg_converged = true;        // every stage reached cg_tol
  bool residuals_monotone = true;  // non-increasing along the sweep
};

/// alpha_k = alpha0 / ratio^k with warm starts until the residual drops to
/// tau * delta; stops with discrepancy_satisfied = false below alpha_min.
ReconResult discrepancy_sweep(const TikhonovProblem& problem, double delta, const TikhonovConfig& cfg);
ReconResult discrepancy_sweep(const PotentialPtr& P, const CovMatrix& C_obs, double delta,
                              const TikhonovConfig& cfg);

/// ||q_alpha - q_dagger||_{H^{m_err}}.
double recon_error(const SourceField& q_alpha, const SourceField& q_dagger, double m_err);

}  // namespace randsource
