#include "randsource/solver.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace randsource {

void TikhonovConfig::validate() const {
  if (!(m >= 0.0)) throw std::invalid_argument("solver: penalty index m must be >= 0");
  if (!(ratio > 1.0)) throw std::invalid_argument("solver: ratio must be > 1");
  if (!(tau > 1.0)) throw std::invalid_argument("solver: tau must be > 1");
  if (!(cg_tol > 0.0 && cg_tol < 1.0)) throw std::invalid_argument("solver: cg_tol must lie in (0, 1)");
  if (cg_maxit < 1) throw std::invalid_argument("solver: cg_maxit must be >= 1");
  if (!(alpha_min > 0.0)) throw std::invalid_argument("solver: alpha_min must be > 0");
}

void to_json(nlohmann::json& j, const TikhonovConfig& c) {
  j = {{"m", c.m},           {"alpha0", c.alpha0},   {"ratio", c.ratio},         {"tau", c.tau},
       {"cg_tol", c.cg_tol}, {"cg_maxit", c.cg_maxit}, {"alpha_min", c.alpha_min}};
}

void from_json(const nlohmann::json& j, TikhonovConfig& c) {
  const TikhonovConfig d;
  c.m = j.value("m", d.m);
  c.alpha0 = j.value("alpha0", d.alpha0);
  c.ratio = j.value("ratio", d.ratio);
  c.tau = j.value("tau", d.tau);
  c.cg_tol = j.value("cg_tol", d.cg_tol);
  c.cg_maxit = j.value("cg_maxit", d.cg_maxit);
  c.alpha_min = j.value("alpha_min", d.alpha_min);
  c.validate();
}

TikhonovProblem::TikhonovProblem(std::shared_ptr<const NormalOperator> normal, const CovMatrix& C_obs,
                                 double m)
    : normal_(std::move(normal)), C_obs_(C_obs), m_(m) {
  if (!normal_) throw std::invalid_argument("TikhonovProblem: null normal operator");
  if (!(m >= 0.0)) throw std::invalid_argument("TikhonovProblem: m must be >= 0");
  const PotentialMatrix& P = normal_->potential();
  if (C_obs.rows() != P.rows() || C_obs.cols() != P.rows()) {
    throw std::invalid_argument("TikhonovProblem: data matrix does not match the potential");
  }
  grid_ = P.grid;
  sobolev_ = std::make_shared<SobolevOperator>(grid_);
  rhs_ = adjoint_cov(P, C_obs_).values;
  data_norm2_ = C_obs_.squaredNorm();
}

double TikhonovProblem::residual(const Eigen::VectorXd& q) const {
  const Eigen::VectorXd Nq = normal_->apply(q);
  const double r2 = inner_w(*grid_, q, Nq) - 2.0 * inner_w(*grid_, q, rhs_) + data_norm2_;
  return std::sqrt(std::max(r2, 0.0));
}

double TikhonovProblem::residual_exact(const Eigen::VectorXd& q) const {
  return hs_dist(forward_cov(normal_->potential(), q), C_obs_);
}

double TikhonovProblem::functional(const Eigen::VectorXd& q, double alpha) const {
  const double r = residual(q);
  return 0.5 * r * r + 0.5 * alpha * inner_w(*grid_, q, sobolev_->apply(q, m_));
}

double TikhonovProblem::default_alpha0() const {
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(grid_->size());
  const double t1 = inner_w(*grid_, one, normal_->apply(one));  // ||T 1||^2
  return t1 / inner_w(*grid_, one, sobolev_->apply(one, m_));
}

Eigen::VectorXd TikhonovProblem::solve(double alpha, const Eigen::VectorXd& start,
                                       const TikhonovConfig& cfg, CgStats* stats) const {
  if (!(alpha > 0.0)) throw std::invalid_argument("tikhonov_solve: alpha must be > 0");
  const Eigen::Index J = grid_->size();
  if (start.size() != J) throw std::invalid_argument("tikhonov_solve: start vector size mismatch");
  const Grid& g = *grid_;
  auto K = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    Eigen::VectorXd out = normal_->apply(v);
    out.noalias() += alpha * sobolev_->apply(v, m_);
    return out;
  };
  auto precond = [&](const Eigen::VectorXd& v) { return sobolev_->apply(v, -m_); };
  // value of the functional from the current residual: F = -1/2 <q, b + r> + 1/2 ||C||^2
  auto func = [&](const Eigen::VectorXd& q, const Eigen::VectorXd& r) {
    return -0.5 * inner_w(g, q, rhs_ + r) + 0.5 * data_norm2_;
  };

  CgStats local;
  CgStats& st = stats ? *stats : local;
  st = CgStats{};

  Eigen::VectorXd q = start;
  const double bnorm = std::sqrt(inner_w(g, rhs_, rhs_));
  if (bnorm == 0.0 && q.isZero(0.0)) {
    st.converged = true;
    st.functional.push_back(0.5 * data_norm2_);
    return q;
  }
  Eigen::VectorXd r = q.isZero(0.0) ? Eigen::VectorXd(rhs_) : Eigen::VectorXd(rhs_ - K(q));
  st.functional.push_back(func(q, r));
  const double scale = bnorm > 0.0 ? bnorm : std::sqrt(inner_w(g, r, r));
  double rnorm = std::sqrt(inner_w(g, r, r));
  st.rel_residual = rnorm / scale;
  if (st.rel_residual <= cfg.cg_tol) {
    st.converged = true;
    return q;
  }
  Eigen::VectorXd z = precond(r);
  Eigen::VectorXd p = z;
  double rz = inner_w(g, r, z);
  for (int it = 1; it <= cfg.cg_maxit; ++it) {
    const Eigen::VectorXd Kp = K(p);
    const double pKp = inner_w(g, p, Kp);
    if (!std::isfinite(pKp) || !std::isfinite(rz)) {
      throw std::runtime_error("tikhonov_solve: non-finite value at CG iteration " + std::to_string(it) +
                               " (alpha = " + std::to_string(alpha) + ")");
    }
    if (pKp <= 0.0) {
      throw std::runtime_error("tikhonov_solve: operator lost positivity at CG iteration " +
                               std::to_string(it) + " (alpha = " + std::to_string(alpha) + ")");
    }
    const double step = rz / pKp;
    q.noalias() += step * p;
    r.noalias() -= step * Kp;
    st.iterations = it;
    st.functional.push_back(func(q, r));
    rnorm = std::sqrt(inner_w(g, r, r));
    st.rel_residual = rnorm / scale;
    if (!std::isfinite(rnorm)) {
      throw std::runtime_error("tikhonov_solve: non-finite residual at CG iteration " + std::to_string(it));
    }
    if (st.rel_residual <= cfg.cg_tol) {
      st.converged = true;
      break;
    }
    z = precond(r);
    const double rz_new = inner_w(g, r, z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  return q;
}

SourceField tikhonov_solve(const PotentialPtr& P, const CovMatrix& C_obs, double alpha,
                           const TikhonovConfig& cfg, const SourceField* warm_start, CgStats* stats) {
  cfg.validate();
  TikhonovProblem problem(std::make_shared<MatrixFreeNormal>(P), C_obs, cfg.m);
  const Eigen::VectorXd start = warm_start ? warm_start->values : Eigen::VectorXd::Zero(P->cols());
  return {P->grid, problem.solve(alpha, start, cfg, stats)};
}

ReconResult discrepancy_sweep(const TikhonovProblem& problem, double delta, const TikhonovConfig& cfg) {
  cfg.validate();
  if (!(delta > 0.0)) throw std::invalid_argument("discrepancy_sweep: delta must be > 0");
  if (std::abs(cfg.m - problem.m()) > 0.0) {
    throw std::invalid_argument("discrepancy_sweep: config penalty differs from the problem's");
  }
  ReconResult res;
  const double alpha0 = cfg.alpha0 > 0.0 ? cfg.alpha0 : problem.default_alpha0();
  Eigen::VectorXd q = Eigen::VectorXd::Zero(problem.grid().size());
  double alpha = alpha0;
  for (int k = 0; alpha >= cfg.alpha_min; ++k, alpha = alpha0 / std::pow(cfg.ratio, k)) {
    CgStats st;
    q = problem.solve(alpha, q, cfg, &st);
    const double r = problem.residual(q);
    if (!res.residuals.empty() && r > res.residuals.back() * (1.0 + 1e-6)) res.residuals_monotone = false;
    res.alphas.push_back(alpha);
    res.residuals.push_back(r);
    res.iterations.push_back(st.iterations);
    res.cg_converged = res.cg_converged && st.converged;
    res.alpha_final = alpha;
    res.residual_internal = r;
    if (r <= cfg.tau * delta) {
      res.discrepancy_satisfied = true;
      break;
    }
  }
  res.q_alpha = SourceField{problem.normal().potential().grid, q};
  res.residual = problem.residual_exact(q);
  return res;
}

ReconResult discrepancy_sweep(const PotentialPtr& P, const CovMatrix& C_obs, double delta,
                              const TikhonovConfig& cfg) {
  TikhonovProblem problem(std::make_shared<MatrixFreeNormal>(P), C_obs, cfg.m);
  return discrepancy_sweep(problem, delta, cfg);
}

double recon_error(const SourceField& q_alpha, const SourceField& q_dagger, double m_err) {
  if (!q_alpha.grid || !q_dagger.grid || !q_alpha.grid->same_layout(*q_dagger.grid)) {
    throw std::invalid_argument("recon_error: fields live on different grids");
  }
  const SourceField diff{q_alpha.grid, q_alpha.values - q_dagger.values};
  return sobolev_norm(diff, m_err);
}

}  // namespace randsource
