#pragma once

// Noise-vs-error experiments and logarithmic rate fits.
//
// For each wave number the potential (and its normal operator) is built once
// and shared by all rows. Each phantom gets one data stream: in sample mode
// the covariances for all N come from nested prefixes of the same draws, and
// every penalty index is reconstructed from the same data.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "randsource/solver.hpp"
#include "randsource/synth.hpp"

namespace randsource {

enum class PhantomKind { random, shapes };

struct ExperimentConfig {
  int dim = 3;  // "3d" or "2d-slice"
  double R = 4.0;
  std::vector<double> kappas{3.0, 6.0};
  int n = 24;
  double side = kDefaultSide;
  std::vector<PhantomKind> phantoms{PhantomKind::random, PhantomKind::shapes};
  std::vector<int> degrees{1, 3};
  std::vector<double> penalties{0.0, 1.0};
  std::vector<double> error_norms{0.0, 1.0};
  // true: error measured in the penalty norm only (pairs (m, m));
  // false: every penalty against every error norm.
  bool couple_norms = true;
  NoiseSpec::Mode noise = NoiseSpec::Mode::sample;
  std::vector<int> Ns{50, 90, 160, 290, 510, 920, 1600, 2900, 5100, 8000};
  std::vector<double> deltas;  // additive mode
  std::uint64_t seed = 1;
  // independent data streams per noise level; the fits pool all of them
  int replicates = 1;
  TikhonovConfig solver;       // solver.m is overridden per row
  int basis_extra = 15;        // L = ceil(kappa R) + basis_extra
  double compress_tol = 1e-7;  // <= 0 disables compression
  bool assembled_normal = true;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  /// (m_penalty, m_err) pairs in row order.
  [[nodiscard]] std::vector<std::pair<double, double>> norm_pairs() const;
};

/// Unknown keys are rejected. "kappa" may be a number or a list.
void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

std::string phantom_name(PhantomKind k);
/// "L2", "H1", or "H<m>" for other indices.
std::string norm_name(double m);

struct ExperimentRecord {
  int dim = 3;
  double R = 0.0;
  double kappa = 0.0;
  int lambda = 1;
  PhantomKind phantom = PhantomKind::shapes;
  double m_penalty = 0.0;
  double m_err = 0.0;
  int N = 0;  // 0 in additive mode
  double delta = 0.0;
  double error = 0.0;      // NaN when the row failed
  double rel_error = 0.0;  // error / ||q_dagger||_{H^{m_err}}
  double alpha_final = 0.0;
  bool disc_ok = false;
  std::uint64_t seed = 0;  // data seed
  double wallclock_s = 0.0;
  std::string failure;     // empty on success

  [[nodiscard]] bool failed() const noexcept { return !failure.empty(); }
};

/// -(s - m_err) with s = lambda + 1/2.
double p_theory(int lambda, double m_err);

/// Seed of the random phantom of a given degree, and of the data stream of a
/// (kappa, phantom, degree, replicate) cell.
std::uint64_t phantom_seed(std::uint64_t base, int degree);
std::uint64_t data_seed(std::uint64_t base, double kappa, PhantomKind kind, int degree, int replicate = 0);

/// Data for every noise level: nested sample covariances for Ns, or additive
/// perturbations of forward_cov(q) at each delta.
std::vector<NoisyData> synthesize_levels(const PotentialMatrix& P, const SourceField& q, NoiseSpec::Mode mode,
                                         const std::vector<int>& Ns, const std::vector<double>& deltas,
                                         std::uint64_t seed);

struct RunOptions {
  // Called after every finished row (for logging); may be empty.
  std::function<void(const ExperimentRecord&)> on_record;
};

std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

struct RateFit {
  double c = 0.0;
  double p = 0.0;
  double r2 = 0.0;
  int n_points = 0;
};

/// Least squares fit of log(err) = c + p log(log(3 + delta^-2)).
/// Throws std::invalid_argument for fewer than 4 points, non-positive values
/// or coincident abscissae.
RateFit fit_rate(const std::vector<double>& deltas, const std::vector<double>& errors);

struct RateRow {
  std::string norm;     // error norm, e.g. "L2"; "L2_penH1" when uncoupled
  std::string phantom;  // e.g. "shapes_l3"
  double kappa = 0.0;
  double m_penalty = 0.0;
  double m_err = 0.0;
  int lambda = 1;
  RateFit fit;          // p = NaN when fewer than 4 usable rows
  double p_theory = 0.0;
  int excluded = 0;     // rows dropped for failure or disc_ok = false
};

/// Groups records by (m_penalty, m_err, phantom, lambda, kappa) and fits
/// rel_error against delta over the rows with disc_ok.
std::vector<RateRow> summarize(const std::vector<ExperimentRecord>& records);

void write_records_csv(const std::filesystem::path& path, const std::vector<ExperimentRecord>& records);
void write_rates_csv(const std::filesystem::path& path, const std::vector<RateRow>& rows);
/// Failed rows as a JSON array (empty array when all succeeded).
nlohmann::json failures_json(const std::vector<ExperimentRecord>& records);

}  // namespace randsource
