#include "commands.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "randsource/cgo.hpp"
#include "randsource/experiments.hpp"
#include "randsource/io.hpp"
#include "randsource/normal.hpp"
#include "randsource/phantom.hpp"
#include "randsource/solver.hpp"
#include "randsource/synth.hpp"

namespace randsource::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError("unknown key \"" + key + "\" in " + where);
  }
}

template <class T>
std::vector<T> scalar_or_list(const json& j) {
  if (j.is_array()) return j.get<std::vector<T>>();
  return {j.get<T>()};
}

// Parsing helpers turn every json/validation error into a ConfigError so that
// nothing is computed from a half-read config.
template <class F>
auto parse(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

struct Problem {
  int dim = 3;
  double R = 4.0;
  std::vector<double> kappas{6.0};
  int n = 24;
  double side = kDefaultSide;
  int basis_extra = 15;
  double compress_tol = 1e-7;
  bool assembled = true;
  std::uint64_t seed = 1;
};

Problem parse_problem(const json& c, const Context& ctx) {
  Problem p;
  if (c.contains("mode")) {
    const auto mode = c.at("mode").get<std::string>();
    if (mode != "3d" && mode != "2d-slice") throw ConfigError("mode must be \"3d\" or \"2d-slice\"");
    p.dim = mode == "3d" ? 3 : 2;
  }
  p.R = c.value("R", p.R);
  if (c.contains("kappa")) p.kappas = scalar_or_list<double>(c.at("kappa"));
  p.n = c.value("n", p.n);
  p.side = c.value("side", p.side);
  p.basis_extra = c.value("basis_extra", p.basis_extra);
  p.compress_tol = c.value("compress_tol", p.compress_tol);
  if (c.contains("normal")) {
    const auto nm = c.at("normal").get<std::string>();
    if (nm != "assembled" && nm != "matrix-free") throw ConfigError("normal must be \"assembled\" or \"matrix-free\"");
    p.assembled = nm == "assembled";
  }
  p.seed = ctx.seed ? *ctx.seed : c.value("seed", p.seed);
  if (!(p.R > 0)) throw ConfigError("R must be > 0");
  if (p.kappas.empty()) throw ConfigError("kappa list is empty");
  for (double k : p.kappas)
    if (!(k > 0)) throw ConfigError("kappa values must be > 0");
  if (p.n < 4 || p.n % 2 != 0) throw ConfigError("n must be even and >= 4");
  if (!(0.5 * p.side * std::sqrt(static_cast<double>(p.dim)) < p.R)) {
    throw ConfigError("the source box must lie inside the sphere of radius R");
  }
  if (p.basis_extra < 0) throw ConfigError("basis_extra must be >= 0");
  return p;
}

// {"type": "shapes"|"random", "degree": 1|3, "seed": u64} or {"file": path}
SplinePhantom parse_phantom(const json& j, const Problem& p, const Context& ctx) {
  check_keys(j, {"type", "degree", "seed", "file"}, "phantom");
  SplinePhantom ph;
  if (j.contains("file")) {
    fs::path path = j.at("file").get<std::string>();
    if (path.is_relative()) path = ctx.config_dir / path;
    ph = io::read_json(path).get<SplinePhantom>();
  } else {
    const auto type = j.value("type", std::string("shapes"));
    const int degree = j.value("degree", 3);
    if (type == "shapes") {
      ph = phantom_shapes(degree, p.dim);
    } else if (type == "random") {
      ph = phantom_random(degree, j.value("seed", phantom_seed(p.seed, degree)), p.dim);
    } else {
      throw ConfigError("phantom type must be \"shapes\" or \"random\"");
    }
  }
  if (ph.dim != p.dim) throw ConfigError("phantom dimension does not match mode");
  if (std::abs(ph.side - p.side) > 1e-12 * p.side) throw ConfigError("phantom side does not match the grid");
  return ph;
}

std::string phantom_type(const json& j) {
  return j.contains("file") ? "file" : j.value("type", std::string("shapes"));
}

PotentialPtr potential_for(const GridPtr& grid, const MeasurementBasis& basis, double compress_tol) {
  auto P = build_potential(grid, basis);
  if (compress_tol > 0.0) P = compress(*P, compress_tol);
  spdlog::debug("potential kappa={} L={} rows={}", basis.kappa, basis.L, P->rows());
  return P;
}

std::string hex(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

void write_phantom_files(const Context& ctx, const SplinePhantom& ph, const SourceField& q) {
  io::write_json(ctx.out / "phantom.json", ph);
  const auto crc = io::write_field(ctx.out / "q_true.bin", q);
  spdlog::info("q_true.bin crc32 {}", hex(crc));
}

}  // namespace

int run_forward(const Context& ctx) {
  const auto& c = ctx.config;
  const auto [p, ph] = parse([&] {
    check_keys(c, {"mode", "R", "kappa", "n", "side", "basis_extra", "phantom", "seed"}, "forward config");
    const auto prob = parse_problem(c, ctx);
    return std::pair{prob, parse_phantom(c.value("phantom", json::object()), prob, ctx)};
  });
  const auto grid = make_grid(p.dim, p.n, p.side);
  const auto q = eval_phantom(ph, grid);
  write_phantom_files(ctx, ph, q);
  json manifest = json::array();
  for (double kappa : p.kappas) {
    const auto basis = MeasurementBasis::with_default_degree(p.R, kappa, p.basis_extra);
    const auto P = build_potential(grid, basis);
    const CovMatrix C = forward_cov(*P, q);
    const std::string name = "cov_true_k" + num(kappa) + ".bin";
    const auto crc = io::write_cov(ctx.out / name, C, basis, {{"kind", "exact"}});
    spdlog::info("{}: M={} ||C||_HS={:.6e} crc32 {}", name, C.rows(), hs_norm(C), hex(crc));
    manifest.push_back({{"kappa", kappa}, {"file", name}, {"hs_norm", hs_norm(C)}, {"crc32", hex(crc)}});
  }
  io::write_json(ctx.out / "forward.json", manifest);
  return 0;
}

int run_simulate(const Context& ctx) {
  const auto& c = ctx.config;
  struct Parsed {
    Problem p;
    SplinePhantom ph;
    std::string type;
    NoiseSpec::Mode mode;
    std::vector<int> Ns;
    std::vector<double> deltas;
  };
  const Parsed s = parse([&] {
    check_keys(c, {"mode", "R", "kappa", "n", "side", "basis_extra", "compress_tol", "phantom", "seed", "noise"},
               "simulate config");
    Parsed out;
    out.p = parse_problem(c, ctx);
    const json phj = c.value("phantom", json::object());
    out.ph = parse_phantom(phj, out.p, ctx);
    out.type = phantom_type(phj);
    // reuse the experiment parser for the noise block
    json exp{{"noise", c.at("noise")}};
    const auto ec = exp.get<ExperimentConfig>();
    out.mode = ec.noise;
    out.Ns = ec.Ns;
    out.deltas = ec.deltas;
    return out;
  });
  const auto& p = s.p;
  const auto grid = make_grid(p.dim, p.n, p.side);
  const auto q = eval_phantom(s.ph, grid);
  write_phantom_files(ctx, s.ph, q);
  const PhantomKind kind = s.type == "random" ? PhantomKind::random : PhantomKind::shapes;

  json manifest = json::array();
  for (double kappa : p.kappas) {
    const auto basis = MeasurementBasis::with_default_degree(p.R, kappa, p.basis_extra);
    const auto P = potential_for(grid, basis, p.compress_tol);
    const std::uint64_t dseed = data_seed(p.seed, kappa, kind, s.ph.degree);
    const auto data = synthesize_levels(*P, q, s.mode, s.Ns, s.deltas, dseed);
    std::vector<std::string> tags;
    if (s.mode == NoiseSpec::Mode::sample) {
      for (int N : s.Ns) tags.push_back("N" + std::to_string(N));
    } else {
      for (std::size_t k = 0; k < s.deltas.size(); ++k) tags.push_back("d" + std::to_string(k));
    }
    for (std::size_t k = 0; k < data.size(); ++k) {
      const std::string name = "cov_obs_k" + num(kappa) + "_" + tags[k] + ".bin";
      json extra{{"kind", "observed"}, {"delta", data[k].delta}, {"seed", dseed}};
      if (s.mode == NoiseSpec::Mode::sample) extra["N"] = s.Ns[k];
      const auto crc = io::write_cov(ctx.out / name, io::expand_cov(*P, data[k].C_obs), basis, extra);
      spdlog::info("{}: delta={:.6e} crc32 {}", name, data[k].delta, hex(crc));
      json row{{"kappa", kappa}, {"delta", data[k].delta}, {"seed", dseed}, {"file", name}, {"crc32", hex(crc)}};
      if (s.mode == NoiseSpec::Mode::sample) row["N"] = s.Ns[k];
      manifest.push_back(row);
    }
  }
  io::write_json(ctx.out / "simulate.json", manifest);
  return 0;
}

int run_reconstruct(const Context& ctx) {
  const auto& c = ctx.config;
  struct Parsed {
    Problem p;
    fs::path data;
    std::optional<double> delta;
    double m = 0.0;
    TikhonovConfig solver;
    std::optional<SplinePhantom> truth;
  };
  const Parsed s = parse([&] {
    check_keys(c, {"mode", "n", "side", "compress_tol", "normal", "data", "delta", "m", "solver", "truth"},
               "reconstruct config");
    Parsed out;
    out.data = c.at("data").get<std::string>();
    if (out.data.is_relative()) out.data = ctx.config_dir / out.data;
    // R and kappa come from the data sidecar
    const auto side = io::read_json(io::sidecar_path(out.data));
    json pc = c;
    pc["R"] = side.at("R");
    pc["kappa"] = side.at("kappa");
    out.p = parse_problem(pc, ctx);
    if (c.contains("delta")) {
      out.delta = c.at("delta").get<double>();
    } else if (side.contains("delta")) {
      out.delta = side.at("delta").get<double>();
    }
    if (!out.delta || !(*out.delta > 0.0)) throw ConfigError("delta must be given (config or data sidecar) and > 0");
    out.m = c.value("m", 0.0);
    json sj = c.value("solver", json::object());
    sj["m"] = out.m;
    out.solver = sj.get<TikhonovConfig>();
    if (c.contains("truth")) out.truth = parse_phantom(c.at("truth"), out.p, ctx);
    return out;
  });
  const auto& p = s.p;
  const auto file = io::read_cov(s.data);
  const auto grid = make_grid(p.dim, p.n, p.side);
  const auto P = potential_for(grid, file.basis, p.compress_tol);
  std::shared_ptr<const NormalOperator> normal;
  if (p.assembled) {
    normal = std::make_shared<AssembledNormal>(P);
  } else {
    normal = std::make_shared<MatrixFreeNormal>(P);
  }
  const auto t0 = std::chrono::steady_clock::now();
  const TikhonovProblem problem(normal, io::restrict_cov(*P, file.C), s.m);
  const ReconResult res = discrepancy_sweep(problem, *s.delta, s.solver);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const auto crc = io::write_field(ctx.out / "q_alpha.bin", res.q_alpha, {{"alpha", res.alpha_final}});
  json report{{"data", s.data.filename().string()},
              {"delta", *s.delta},
              {"m", s.m},
              {"alpha_final", res.alpha_final},
              {"residual", res.residual},
              {"residual_internal", res.residual_internal},
              {"alphas", res.alphas},
              {"residuals", res.residuals},
              {"iterations", res.iterations},
              {"discrepancy_satisfied", res.discrepancy_satisfied},
              {"cg_converged", res.cg_converged},
              {"residuals_monotone", res.residuals_monotone},
              {"solver", s.solver},
              {"q_alpha_crc32", hex(crc)},
              {"wallclock_s", elapsed}};
  if (s.truth) {
    const auto qd = eval_phantom(*s.truth, grid);
    for (double me : {0.0, 1.0}) {
      const double e = recon_error(res.q_alpha, qd, me);
      report["error"][norm_name(me)] = e;
      report["rel_error"][norm_name(me)] = e / sobolev_norm(qd, me);
    }
  }
  io::write_json(ctx.out / "recon.json", report);
  spdlog::info("alpha={:.3e} residual={:.3e} (tau delta={:.3e}) stages={} satisfied={}", res.alpha_final,
               res.residual, s.solver.tau * *s.delta, res.alphas.size(), res.discrepancy_satisfied);
  if (!res.discrepancy_satisfied) spdlog::warn("alpha floor reached before the discrepancy rule held");
  return 0;
}

int run_rates(const Context& ctx) {
  ExperimentConfig cfg = parse([&] { return ctx.config.get<ExperimentConfig>(); });
  if (ctx.seed) cfg.seed = *ctx.seed;
  io::write_json(ctx.out / "config.json", cfg);
  RunOptions opts;
  opts.on_record = [](const ExperimentRecord& r) {
    if (r.failed()) {
      spdlog::error("kappa={} {}_l{} m={} N={}: {}", r.kappa, phantom_name(r.phantom), r.lambda, r.m_penalty, r.N,
                    r.failure);
    } else {
      spdlog::info("kappa={} {}_l{} m={}/{} N={} delta={:.3e} rel_error={:.4f} alpha={:.3e}{} ({:.1f}s)", r.kappa,
                   phantom_name(r.phantom), r.lambda, r.m_penalty, r.m_err, r.N, r.delta, r.rel_error,
                   r.alpha_final, r.disc_ok ? "" : " [alpha floor]", r.wallclock_s);
    }
  };
  const auto records = run_experiment(cfg, opts);
  write_records_csv(ctx.out / "records.csv", records);
  const auto rows = summarize(records);
  write_rates_csv(ctx.out / "rates.csv", rows);
  json summary = json::array();
  for (const auto& r : rows) {
    summary.push_back({{"norm", r.norm},
                       {"phantom", r.phantom},
                       {"kappa", r.kappa},
                       {"p", r.fit.p},
                       {"c", r.fit.c},
                       {"r2", r.fit.r2},
                       {"n_points", r.fit.n_points},
                       {"excluded", r.excluded},
                       {"p_theory", r.p_theory}});
    if (r.excluded > 0) spdlog::warn("{} {} kappa={}: {} rows excluded from the fit", r.norm, r.phantom, r.kappa, r.excluded);
    spdlog::info("{:<4} {:<10} kappa={:<4} p={:8.4f} (theory {:5.2f}) r2={:.3f}", r.norm, r.phantom, r.kappa, r.fit.p,
                 r.p_theory, r.fit.r2);
  }
  io::write_json(ctx.out / "rates.json", summary);
  const auto failures = failures_json(records);
  io::write_json(ctx.out / "failures.json", failures);
  if (!failures.empty()) {
    spdlog::error("{} of {} rows failed; see failures.json", failures.size(), records.size());
    return 1;
  }
  return 0;
}

int run_cgo_check(const Context& ctx) {
  const auto& c = ctx.config;
  struct Parsed {
    double kappa = 6.0, R = 4.0;
    std::vector<double> ts{0.25, 0.5, 1.0, 2.0};
    int n = 8;
    int basis_extra = 20;
    std::vector<rvec3> gammas{{0, 0, 0}, {1, 0, 0}, {0, 2, 0}};
    double fourier_t = 1.0;
    int fourier_n = 12;
    std::uint64_t seed = 1;
  };
  const Parsed s = parse([&] {
    check_keys(c, {"kappa", "R", "t", "n", "basis_extra", "gamma", "fourier_t", "fourier_n", "seed"},
               "cgo-check config");
    Parsed out;
    out.kappa = c.value("kappa", out.kappa);
    out.R = c.value("R", out.R);
    if (c.contains("t")) out.ts = scalar_or_list<double>(c.at("t"));
    out.n = c.value("n", out.n);
    out.basis_extra = c.value("basis_extra", out.basis_extra);
    if (c.contains("gamma")) out.gammas = c.at("gamma").get<std::vector<rvec3>>();
    out.fourier_t = c.value("fourier_t", out.fourier_t);
    out.fourier_n = c.value("fourier_n", out.fourier_n);
    out.seed = ctx.seed ? *ctx.seed : c.value("seed", out.seed);
    if (!(out.kappa > 0 && out.R > 0)) throw ConfigError("kappa and R must be > 0");
    for (double t : out.ts)
      if (!(t > 0)) throw ConfigError("t values must be > 0");
    if (!(out.fourier_t > 0)) throw ConfigError("fourier_t must be > 0");
    if (out.basis_extra < 15) throw ConfigError("basis_extra must be >= 15");
    return out;
  });

  json report{{"params", c}};
  report["params"]["seed"] = s.seed;
  int failures = 0;
  const auto grid = make_grid(3, s.n);
  report["representation"] = json::array();
  for (double t : s.ts) {
    json row{{"t", t}};
    try {
      const MeasurementBasis basis{s.R, s.kappa, static_cast<int>(std::ceil((s.kappa + t) * s.R)) + s.basis_extra};
      const auto rep = verify_cgo_representation(basis, grid, make_cgo_vector({1, 0, 0}, {0, 0, 1}, t, s.kappa));
      row["L"] = basis.L;
      row["rel_error"] = rep.rel_error;
      row["phi_norm"] = rep.phi_norm;
      row["bound_rhs"] = rep.bound_rhs;
      row["ratio"] = rep.phi_norm / rep.bound_rhs;
    } catch (const std::exception& e) {
      row["error"] = e.what();
      ++failures;
    }
    report["representation"].push_back(row);
  }

  report["fourier"] = json::array();
  try {
    const auto fgrid = make_grid(3, s.fourier_n);
    const MeasurementBasis basis{s.R, s.kappa,
                                 static_cast<int>(std::ceil((s.kappa + s.fourier_t) * s.R)) + s.basis_extra};
    const auto P = build_potential(fgrid, basis);
    const auto q1 = eval_phantom(phantom_random(3, s.seed), fgrid);
    const auto q2 = eval_phantom(phantom_random(3, s.seed + 1), fgrid);
    for (const auto& gamma : s.gammas) {
      json row{{"gamma", gamma}};
      try {
        const auto r = verify_fourier_identity(*P, q1, q2, gamma, s.fourier_t);
        row["lhs"] = {r.lhs.real(), r.lhs.imag()};
        row["rhs"] = {r.rhs.real(), r.rhs.imag()};
        row["rel_error"] = r.rel_error;
        row["phi_a_norm"] = r.phi_a_norm;
        row["phi_b_norm"] = r.phi_b_norm;
      } catch (const std::exception& e) {
        row["error"] = e.what();
        ++failures;
      }
      report["fourier"].push_back(row);
    }
  } catch (const std::exception& e) {
    report["fourier_error"] = e.what();
    ++failures;
  }
  io::write_json(ctx.out / "cgo_report.json", report);
  std::cout << report.dump(2) << '\n';
  return failures == 0 ? 0 : 1;
}

}  // namespace randsource::cli
