#include "randsource/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

#include "randsource/normal.hpp"
#include "randsource/phantom.hpp"
#include "randsource/rng.hpp"
#include "randsource/sobolev.hpp"

namespace randsource {

namespace {

constexpr std::uint64_t kPhantomStream = 0x9A47;
constexpr std::uint64_t kDataStream = 0xDA7A;

using nlohmann::json;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("experiment config: " + what);
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    require(known, "unknown key \"" + key + "\" in " + where);
  }
}

template <class T>
std::vector<T> scalar_or_list(const json& j) {
  if (j.is_array()) return j.get<std::vector<T>>();
  return {j.get<T>()};
}

std::vector<int> parse_counts(const json& j) {
  if (!j.is_object()) return scalar_or_list<int>(j);
  reject_unknown(j, {"min", "max", "count"}, "noise.N");
  const double lo = j.at("min").get<double>();
  const double hi = j.at("max").get<double>();
  const int count = j.at("count").get<int>();
  require(lo >= 1 && hi >= lo && count >= 2, "noise.N range needs 1 <= min <= max and count >= 2");
  std::vector<int> out;
  for (int k = 0; k < count; ++k) {
    const double v = lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1));
    const int N = static_cast<int>(std::lround(v));
    if (out.empty() || N > out.back()) out.push_back(N);
  }
  return out;
}

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

// CSV fields never contain separators except failure messages, which are not
// written to CSV.
std::string mode_name(int dim) { return dim == 3 ? "3d" : "2d-slice"; }

}  // namespace

void ExperimentConfig::validate() const {
  require(dim == 2 || dim == 3, "mode must be 3d or 2d-slice");
  require(R > 0.0, "R must be > 0");
  require(!kappas.empty(), "kappa list is empty");
  for (double k : kappas) require(k > 0.0, "kappa values must be > 0");
  require(n >= 4 && n % 2 == 0, "n must be even and >= 4");
  require(side > 0.0, "side must be > 0");
  require(0.5 * side * std::sqrt(static_cast<double>(dim)) < R, "the source box must lie inside the sphere of radius R");
  require(!phantoms.empty(), "phantom list is empty");
  require(!degrees.empty(), "degree list is empty");
  for (int d : degrees) require(d == 1 || d == 3, "degrees must be 1 or 3");
  require(!penalties.empty(), "penalty list is empty");
  for (double m : penalties) require(m >= 0.0, "penalties must be >= 0");
  if (!couple_norms) {
    require(!error_norms.empty(), "error norm list is empty");
    for (double m : error_norms) require(m >= 0.0, "error norms must be >= 0");
  }
  if (noise == NoiseSpec::Mode::sample) {
    require(!Ns.empty(), "noise.N is empty");
    for (std::size_t k = 0; k < Ns.size(); ++k) {
      require(Ns[k] >= 1, "noise.N entries must be >= 1");
      require(k == 0 || Ns[k] > Ns[k - 1], "noise.N must be strictly increasing");
    }
  } else {
    require(!deltas.empty(), "noise.delta is empty");
    for (double d : deltas) require(d > 0.0, "noise.delta entries must be > 0");
  }
  require(replicates >= 1, "replicates must be >= 1");
  require(basis_extra >= 0, "basis_extra must be >= 0");
  solver.validate();
}

std::vector<std::pair<double, double>> ExperimentConfig::norm_pairs() const {
  std::vector<std::pair<double, double>> out;
  for (double m : penalties) {
    if (couple_norms) {
      out.emplace_back(m, m);
    } else {
      for (double e : error_norms) out.emplace_back(m, e);
    }
  }
  return out;
}

std::string phantom_name(PhantomKind k) { return k == PhantomKind::random ? "random" : "shapes"; }

std::string norm_name(double m) {
  if (m == 0.0) return "L2";
  return "H" + fmt_double(m);
}

void to_json(json& j, const ExperimentConfig& c) {
  std::vector<std::string> ph;
  for (auto k : c.phantoms) ph.push_back(phantom_name(k));
  json noise{{"mode", c.noise == NoiseSpec::Mode::sample ? "sample" : "additive"}};
  if (c.noise == NoiseSpec::Mode::sample) {
    noise["N"] = c.Ns;
  } else {
    noise["delta"] = c.deltas;
  }
  json solver = c.solver;
  solver.erase("m");
  j = json{{"mode", mode_name(c.dim)},
           {"R", c.R},
           {"kappa", c.kappas},
           {"n", c.n},
           {"side", c.side},
           {"phantoms", ph},
           {"degrees", c.degrees},
           {"penalties", c.penalties},
           {"error_norms", c.error_norms},
           {"couple_norms", c.couple_norms},
           {"noise", noise},
           {"seed", c.seed},
           {"replicates", c.replicates},
           {"solver", solver},
           {"basis_extra", c.basis_extra},
           {"compress_tol", c.compress_tol},
           {"normal", c.assembled_normal ? "assembled" : "matrix-free"}};
}

void from_json(const json& j, ExperimentConfig& c) {
  require(j.is_object(), "top level must be an object");
  reject_unknown(j,
                 {"mode", "R", "kappa", "n", "side", "phantoms", "degrees", "penalties", "error_norms",
                  "couple_norms", "noise", "seed", "replicates", "solver", "basis_extra", "compress_tol", "normal"},
                 "config");
  c = ExperimentConfig{};
  try {
    if (j.contains("mode")) {
      const auto mode = j.at("mode").get<std::string>();
      require(mode == "3d" || mode == "2d-slice", "mode must be \"3d\" or \"2d-slice\", got \"" + mode + "\"");
      c.dim = mode == "3d" ? 3 : 2;
    }
    c.R = j.value("R", c.R);
    if (j.contains("kappa")) c.kappas = scalar_or_list<double>(j.at("kappa"));
    c.n = j.value("n", c.n);
    c.side = j.value("side", c.side);
    if (j.contains("phantoms")) {
      c.phantoms.clear();
      for (const auto& name : scalar_or_list<std::string>(j.at("phantoms"))) {
        require(name == "random" || name == "shapes", "unknown phantom \"" + name + "\"");
        c.phantoms.push_back(name == "random" ? PhantomKind::random : PhantomKind::shapes);
      }
    }
    if (j.contains("degrees")) c.degrees = scalar_or_list<int>(j.at("degrees"));
    if (j.contains("penalties")) c.penalties = scalar_or_list<double>(j.at("penalties"));
    if (j.contains("error_norms")) c.error_norms = scalar_or_list<double>(j.at("error_norms"));
    c.couple_norms = j.value("couple_norms", c.couple_norms);
    if (j.contains("noise")) {
      const auto& nz = j.at("noise");
      reject_unknown(nz, {"mode", "N", "delta"}, "noise");
      const auto mode = nz.value("mode", std::string("sample"));
      require(mode == "sample" || mode == "additive", "noise.mode must be \"sample\" or \"additive\"");
      c.noise = mode == "sample" ? NoiseSpec::Mode::sample : NoiseSpec::Mode::additive;
      if (nz.contains("N")) c.Ns = parse_counts(nz.at("N"));
      if (nz.contains("delta")) c.deltas = scalar_or_list<double>(nz.at("delta"));
    }
    c.seed = j.value("seed", c.seed);
    c.replicates = j.value("replicates", c.replicates);
    if (j.contains("solver")) {
      json s = j.at("solver");
      require(!s.contains("m"), "solver.m is set per row; use \"penalties\"");
      c.solver = s.get<TikhonovConfig>();
    }
    c.basis_extra = j.value("basis_extra", c.basis_extra);
    c.compress_tol = j.value("compress_tol", c.compress_tol);
    if (j.contains("normal")) {
      const auto nm = j.at("normal").get<std::string>();
      require(nm == "assembled" || nm == "matrix-free", "normal must be \"assembled\" or \"matrix-free\"");
      c.assembled_normal = nm == "assembled";
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("experiment config: ") + e.what());
  }
  c.validate();
}

double p_theory(int lambda, double m_err) { return -(lambda + 0.5 - m_err); }

std::uint64_t phantom_seed(std::uint64_t base, int degree) {
  return CounterRng(base).bits(kPhantomStream, static_cast<std::uint64_t>(degree));
}

std::uint64_t data_seed(std::uint64_t base, double kappa, PhantomKind kind, int degree, int replicate) {
  const auto k = static_cast<std::uint64_t>(std::llround(kappa * 1e6));
  const std::uint64_t cell = (k * 2 + (kind == PhantomKind::random ? 0 : 1)) * 8 + static_cast<std::uint64_t>(degree) +
                             (static_cast<std::uint64_t>(replicate) << 40);
  return CounterRng(base).bits(kDataStream, cell);
}

std::vector<NoisyData> synthesize_levels(const PotentialMatrix& P, const SourceField& q, NoiseSpec::Mode mode,
                                         const std::vector<int>& Ns, const std::vector<double>& deltas,
                                         std::uint64_t seed) {
  if (mode == NoiseSpec::Mode::sample) return sample_covariance_nested(P, q, Ns, seed);
  const CovMatrix C = forward_cov(P, q);
  const CounterRng rng(seed);
  std::vector<NoisyData> out;
  for (std::size_t k = 0; k < deltas.size(); ++k) out.push_back(additive_noise(C, deltas[k], rng.bits(0, k)));
  return out;
}

std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  using clock = std::chrono::steady_clock;
  const auto grid = make_grid(cfg.dim, cfg.n, cfg.side);
  const auto pairs = cfg.norm_pairs();
  std::vector<double> penalties;
  for (const auto& [m, e] : pairs)
    if (std::find(penalties.begin(), penalties.end(), m) == penalties.end()) penalties.push_back(m);

  struct Truth {
    PhantomKind kind;
    int degree;
    SourceField q;
    std::map<double, double> norms;  // by m_err
  };
  std::vector<Truth> truths;
  for (auto kind : cfg.phantoms)
    for (int degree : cfg.degrees) {
      const auto ph = kind == PhantomKind::random
                          ? phantom_random(degree, phantom_seed(cfg.seed, degree), cfg.dim)
                          : phantom_shapes(degree, cfg.dim);
      Truth t{kind, degree, eval_phantom(ph, grid), {}};
      for (const auto& [m, e] : pairs) t.norms[e] = sobolev_norm(t.q, e);
      truths.push_back(std::move(t));
    }

  const std::size_t levels = cfg.noise == NoiseSpec::Mode::sample ? cfg.Ns.size() : cfg.deltas.size();
  std::vector<ExperimentRecord> records;
  auto emit = [&](ExperimentRecord r) {
    if (opts.on_record) opts.on_record(r);
    records.push_back(std::move(r));
  };

  for (double kappa : cfg.kappas) {
    const auto basis = MeasurementBasis::with_default_degree(cfg.R, kappa, cfg.basis_extra);
    PotentialPtr P;
    std::shared_ptr<const NormalOperator> normal;
    std::string setup_error;
    try {
      P = build_potential(grid, basis);
      if (cfg.compress_tol > 0.0) P = compress(*P, cfg.compress_tol);
      if (cfg.assembled_normal) {
        normal = std::make_shared<AssembledNormal>(P);
      } else {
        normal = std::make_shared<MatrixFreeNormal>(P);
      }
    } catch (const std::exception& e) {
      setup_error = std::string("potential setup: ") + e.what();
    }

    const auto reps = static_cast<std::size_t>(cfg.replicates);
    for (std::size_t cell = 0; cell < truths.size() * reps; ++cell) {
      const auto& truth = truths[cell / reps];
      const int rep = static_cast<int>(cell % reps);
      const std::uint64_t dseed = data_seed(cfg.seed, kappa, truth.kind, truth.degree, rep);
      std::vector<NoisyData> data;
      std::string data_error = setup_error;
      if (data_error.empty()) {
        try {
          data = synthesize_levels(*P, truth.q, cfg.noise, cfg.Ns, cfg.deltas, dseed);
        } catch (const std::exception& e) {
          data_error = std::string("data synthesis: ") + e.what();
        }
      }

      for (std::size_t k = 0; k < levels; ++k) {
        for (double m : penalties) {
          ExperimentRecord base;
          base.dim = cfg.dim;
          base.R = cfg.R;
          base.kappa = kappa;
          base.lambda = truth.degree;
          base.phantom = truth.kind;
          base.m_penalty = m;
          base.N = cfg.noise == NoiseSpec::Mode::sample ? cfg.Ns[k] : 0;
          base.delta = data_error.empty() ? data[k].delta
                                          : (cfg.noise == NoiseSpec::Mode::additive ? cfg.deltas[k] : 0.0);
          base.seed = dseed;
          base.error = base.rel_error = base.alpha_final = std::numeric_limits<double>::quiet_NaN();

          const auto t0 = clock::now();
          ReconResult res;
          std::string failure = data_error;
          if (failure.empty()) {
            try {
              TikhonovConfig scfg = cfg.solver;
              scfg.m = m;
              const TikhonovProblem problem(normal, data[k].C_obs, m);
              res = discrepancy_sweep(problem, data[k].delta, scfg);
            } catch (const std::exception& e) {
              failure = std::string("reconstruction: ") + e.what();
            }
          }
          const double elapsed = std::chrono::duration<double>(clock::now() - t0).count();

          for (const auto& [pm, e] : pairs) {
            if (pm != m) continue;
            ExperimentRecord r = base;
            r.m_err = e;
            r.wallclock_s = elapsed;
            r.failure = failure;
            if (failure.empty()) {
              r.error = recon_error(res.q_alpha, truth.q, e);
              r.rel_error = r.error / truth.norms.at(e);
              r.alpha_final = res.alpha_final;
              r.disc_ok = res.discrepancy_satisfied;
            }
            emit(std::move(r));
          }
        }
      }
    }
  }
  return records;
}

RateFit fit_rate(const std::vector<double>& deltas, const std::vector<double>& errors) {
  if (deltas.size() != errors.size()) throw std::invalid_argument("fit_rate: size mismatch");
  const std::size_t n = deltas.size();
  if (n < 4) throw std::invalid_argument("fit_rate: needs at least 4 points, got " + std::to_string(n));
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(deltas[i] > 0.0) || !(errors[i] > 0.0)) {
      throw std::invalid_argument("fit_rate: delta and error must be positive");
    }
    x[i] = std::log(std::log(3.0 + 1.0 / (deltas[i] * deltas[i])));
    y[i] = std::log(errors[i]);
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 1e-24 * std::max(1.0, mx * mx))) {
    throw std::invalid_argument("fit_rate: abscissae log(log(3 + delta^-2)) are all equal");
  }
  RateFit f;
  f.p = sxy / sxx;
  f.c = my - f.p * mx;
  double sse = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.c + f.p * x[i]);
    sse += r * r;
  }
  f.r2 = syy > 0 ? 1.0 - sse / syy : 1.0;
  f.n_points = static_cast<int>(n);
  return f;
}

std::vector<RateRow> summarize(const std::vector<ExperimentRecord>& records) {
  // Rows appear in order of first occurrence of their group.
  using Key = std::tuple<double, double, int, int, double>;
  std::vector<Key> order;
  std::map<Key, std::vector<const ExperimentRecord*>> groups;
  std::set<std::pair<double, double>> pair_set;
  for (const auto& r : records) {
    const Key key{r.m_penalty, r.m_err, static_cast<int>(r.phantom), r.lambda, r.kappa};
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&r);
    pair_set.emplace(r.m_penalty, r.m_err);
  }
  std::vector<RateRow> rows;
  for (const auto& key : order) {
    const auto& rs = groups.at(key);
    const auto* first = rs.front();
    RateRow row;
    row.m_penalty = first->m_penalty;
    row.m_err = first->m_err;
    row.norm = norm_name(row.m_err);
    if (row.m_penalty != row.m_err) row.norm += "_pen" + norm_name(row.m_penalty);
    row.lambda = first->lambda;
    row.phantom = phantom_name(first->phantom) + "_l" + std::to_string(first->lambda);
    row.kappa = first->kappa;
    row.p_theory = p_theory(row.lambda, row.m_err);
    std::vector<double> d, e;
    for (const auto* r : rs) {
      if (r->failed() || !r->disc_ok || !(r->rel_error > 0.0) || !(r->delta > 0.0)) {
        ++row.excluded;
        continue;
      }
      d.push_back(r->delta);
      e.push_back(r->rel_error);
    }
    try {
      row.fit = fit_rate(d, e);
    } catch (const std::invalid_argument&) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.fit = RateFit{nan, nan, nan, static_cast<int>(d.size())};
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_records_csv(const std::filesystem::path& path, const std::vector<ExperimentRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "mode,R,kappa,lambda,phantom,m_penalty,m_err,N,delta,error,rel_error,alpha_final,disc_ok,seed,wallclock_s\n";
  for (const auto& r : records) {
    out << mode_name(r.dim) << ',' << fmt_double(r.R) << ',' << fmt_double(r.kappa) << ',' << r.lambda << ','
        << phantom_name(r.phantom) << ',' << fmt_double(r.m_penalty) << ',' << fmt_double(r.m_err) << ','
        << r.N << ',' << fmt_double(r.delta) << ',' << fmt_double(r.error) << ',' << fmt_double(r.rel_error)
        << ',' << fmt_double(r.alpha_final) << ',' << (r.disc_ok ? "true" : "false") << ',' << r.seed << ','
        << fmt_double(r.wallclock_s) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_rates_csv(const std::filesystem::path& path, const std::vector<RateRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "norm,phantom,kappa,p,c,r2,p_theory\n";
  for (const auto& r : rows) {
    out << r.norm << ',' << r.phantom << ',' << fmt_double(r.kappa) << ',' << fmt_double(r.fit.p) << ','
        << fmt_double(r.fit.c) << ',' << fmt_double(r.fit.r2) << ',' << fmt_double(r.p_theory) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

json failures_json(const std::vector<ExperimentRecord>& records) {
  json out = json::array();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!r.failed()) continue;
    out.push_back({{"row", i},
                   {"kappa", r.kappa},
                   {"phantom", phantom_name(r.phantom)},
                   {"lambda", r.lambda},
                   {"m_penalty", r.m_penalty},
                   {"m_err", r.m_err},
                   {"N", r.N},
                   {"message", r.failure}});
  }
  return out;
}

}  // namespace randsource
