#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "randsource/experiments.hpp"
#include "randsource/io.hpp"
#include "randsource/phantom.hpp"

using namespace randsource;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("randsource_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& cmd, const fs::path& config, const fs::path& out, const std::string& extra = "") {
  const std::string line = std::string(RANDSOURCE_CLI) + " " + cmd + " --config " + config.string() + " --out " +
                           out.string() + " " + extra + " 2>" + (out.parent_path() / "stderr.txt").string() +
                           " >" + (out.parent_path() / "stdout.txt").string();
  const int status = std::system(line.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const fs::path& dir, const std::string& name, const json& j) {
  io::write_json(dir / name, j);
  return dir / name;
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// records.csv without the wallclock column
std::string strip_wallclock(const std::string& csv) {
  std::string out, line;
  std::istringstream in(csv);
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

const json kForward{{"mode", "3d"}, {"kappa", {2.0, 3.0}}, {"n", 6}, {"basis_extra", 6},
                    {"phantom", {{"type", "shapes"}, {"degree", 3}}}};

}  // namespace

TEST_CASE("forward: one file per kappa, bit-exact reload") {
  const auto dir = scratch("forward");
  const auto cfg = write_config(dir, "forward.json", kForward);
  REQUIRE(run("forward", cfg, dir / "out") == 0);
  const auto grid = make_grid(3, 6);
  const auto q = eval_phantom(phantom_shapes(3), grid);
  for (double kappa : {2.0, 3.0}) {
    const auto path = dir / "out" / ("cov_true_k" + std::to_string(static_cast<int>(kappa)) + ".bin");
    REQUIRE(fs::exists(path));
    const auto f = io::read_cov(path);
    const auto P = build_potential(grid, MeasurementBasis::with_default_degree(4.0, kappa, 6));
    const CovMatrix C = forward_cov(*P, q);
    CHECK(f.C == C);
    CHECK(hs_norm(f.C) == hs_norm(C));
  }
  CHECK(io::read_field(dir / "out" / "q_true.bin").values == q.values);
  CHECK(io::read_json(dir / "out" / "phantom.json").get<SplinePhantom>().coeffs == phantom_shapes(3).coeffs);
  CHECK(io::read_json(dir / "out" / "forward.json").size() == 2);
}

TEST_CASE("invalid configs exit with code 2 before writing results") {
  const auto dir = scratch("invalid");
  json bad = kForward;
  bad["kapa"] = 3;
  CHECK(run("forward", write_config(dir, "a.json", bad), dir / "a") == 2);
  CHECK_FALSE(fs::exists(dir / "a" / "phantom.json"));
  bad = kForward;
  bad["n"] = 5;
  CHECK(run("forward", write_config(dir, "b.json", bad), dir / "b") == 2);
  CHECK(run("rates", write_config(dir, "c.json", json{{"mode", "4d"}}), dir / "c") == 2);
  CHECK_FALSE(fs::exists(dir / "c" / "records.csv"));
  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK(run("rates", dir / "broken.json", dir / "d") == 2);
}

TEST_CASE("simulate writes data that reloads with its recorded delta") {
  const auto dir = scratch("simulate");
  json c = kForward;
  c["kappa"] = 3.0;
  c["phantom"]["degree"] = 1;
  c["noise"] = {{"mode", "sample"}, {"N", {20, 200}}};
  c["seed"] = 5;
  REQUIRE(run("simulate", write_config(dir, "sim.json", c), dir / "out") == 0);
  const auto grid = make_grid(3, 6);
  const auto P = build_potential(grid, MeasurementBasis::with_default_degree(4.0, 3.0, 6));
  const CovMatrix C = forward_cov(*P, eval_phantom(phantom_shapes(1), grid));
  const auto manifest = io::read_json(dir / "out" / "simulate.json");
  REQUIRE(manifest.size() == 2);
  for (const auto& row : manifest) {
    const auto f = io::read_cov(dir / "out" / row.at("file").get<std::string>());
    const double delta = f.sidecar.at("delta").get<double>();
    CHECK(delta == row.at("delta").get<double>());
    // full-space distance agrees with the delta computed in the reduced space
    CHECK(hs_dist(f.C, C) == doctest::Approx(delta).epsilon(1e-6));
  }
  // --seed overrides the config
  REQUIRE(run("simulate", dir / "sim.json", dir / "out2", "--seed 6") == 0);
  CHECK(io::read_json(dir / "out2" / "simulate.json")[0].at("seed") != manifest[0].at("seed"));
}

TEST_CASE("reconstruct: zero data gives the zero field; re-runs are identical") {
  const auto dir = scratch("recon_zero");
  const MeasurementBasis basis = MeasurementBasis::with_default_degree(4.0, 3.0, 6);
  io::write_cov(dir / "zero.bin", CovMatrix::Zero(basis.size(), basis.size()), basis);
  const json c{{"n", 6}, {"data", "zero.bin"}, {"delta", 1e-3}, {"m", 1}};
  const auto cfg = write_config(dir, "rec.json", c);
  REQUIRE(run("reconstruct", cfg, dir / "a") == 0);
  const auto q = io::read_field(dir / "a" / "q_alpha.bin");
  CHECK(q.values.cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(run("reconstruct", cfg, dir / "b") == 0);
  CHECK(read_all(dir / "a" / "q_alpha.bin") == read_all(dir / "b" / "q_alpha.bin"));
  // missing delta
  CHECK(run("reconstruct", write_config(dir, "nodelta.json", json{{"n", 6}, {"data", "zero.bin"}}), dir / "c") == 2);
}

TEST_CASE("reconstruct error matches the experiment harness") {
  const auto dir = scratch("recon_match");
  json sim = kForward;
  sim["n"] = 8;
  sim["kappa"] = 3.0;
  sim["basis_extra"] = 15;
  sim["phantom"] = {{"type", "shapes"}, {"degree", 1}};
  sim["noise"] = {{"mode", "sample"}, {"N", {1000}}};
  sim["seed"] = 3;
  REQUIRE(run("simulate", write_config(dir, "sim.json", sim), dir / "sim") == 0);
  const json rec{{"n", 8}, {"data", "sim/cov_obs_k3_N1000.bin"}, {"m", 0}, {"truth", {{"type", "shapes"}, {"degree", 1}}}};
  REQUIRE(run("reconstruct", write_config(dir, "rec.json", rec), dir / "rec") == 0);
  const auto report = io::read_json(dir / "rec" / "recon.json");

  ExperimentConfig cfg;
  cfg.n = 8;
  cfg.kappas = {3.0};
  cfg.phantoms = {PhantomKind::shapes};
  cfg.degrees = {1};
  cfg.penalties = {0.0};
  cfg.Ns = {1000};
  cfg.seed = 3;
  const auto recs = run_experiment(cfg);
  REQUIRE(recs.size() == 1);
  CHECK(report.at("delta").get<double>() == doctest::Approx(recs[0].delta).epsilon(1e-9));
  CHECK(report.at("alpha_final").get<double>() == doctest::Approx(recs[0].alpha_final).epsilon(1e-9));
  CHECK(report.at("error").at("L2").get<double>() == doctest::Approx(recs[0].error).epsilon(1e-6));
  CHECK(report.at("discrepancy_satisfied").get<bool>());
}

TEST_CASE("rates: smoke matrix, fixed headers, byte-identical re-run") {
  const auto dir = scratch("rates");
  const json c{{"mode", "2d-slice"}, {"kappa", 7.0},          {"n", 16},
               {"phantoms", {"shapes"}}, {"degrees", {1}}, {"penalties", {0}},
               {"noise", {{"mode", "additive"}, {"delta", {1e-1, 3e-2, 1e-2, 3e-3}}}}};
  const auto cfg = write_config(dir, "rates.json", c);
  REQUIRE(run("rates", cfg, dir / "a") == 0);
  const auto records = read_all(dir / "a" / "records.csv");
  const auto rates = read_all(dir / "a" / "rates.csv");
  CHECK(records.rfind("mode,R,kappa,lambda,phantom,m_penalty,m_err,N,delta,error,rel_error,alpha_final,disc_ok,seed,wallclock_s\n", 0) == 0);
  CHECK(rates.rfind("norm,phantom,kappa,p,c,r2,p_theory\n", 0) == 0);
  CHECK(rates.find("L2,shapes_l1,7,") != std::string::npos);
  CHECK(io::read_json(dir / "a" / "failures.json").empty());
  REQUIRE(run("rates", cfg, dir / "b", "--threads 1") == 0);
  CHECK(strip_wallclock(read_all(dir / "b" / "records.csv")) == strip_wallclock(records));
  CHECK(read_all(dir / "b" / "rates.csv") == rates);
}

TEST_CASE("cgo-check prints a JSON report") {
  const auto dir = scratch("cgo");
  const json c{{"t", {0.5}}, {"n", 4}, {"gamma", {{1, 0, 0}}}, {"fourier_n", 6}};
  REQUIRE(run("cgo-check", write_config(dir, "cgo.json", c), dir / "out") == 0);
  const auto report = json::parse(read_all(dir / "stdout.txt"));
  CHECK(report == io::read_json(dir / "out" / "cgo_report.json"));
  REQUIRE(report.at("representation").size() == 1);
  CHECK(report["representation"][0].at("rel_error").get<double>() <= 1e-6);
  CHECK(report["representation"][0].contains("phi_norm"));
  CHECK(report["representation"][0].contains("bound_rhs"));
  CHECK(report["fourier"][0].at("rel_error").get<double>() <= 1e-5);
  CHECK(report.at("params").at("seed") == 1);
}
