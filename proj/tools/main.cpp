#include <cstdlib>
#include <exception>
#include <string>

#include <CLI11.hpp>
#include <omp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "randsource/io.hpp"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("randsource");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("RANDSOURCE_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"
    if (level != spdlog::level::off || std::string(env) == "off") {
      spdlog::set_level(level);
    } else {
      spdlog::warn("RANDSOURCE_LOG={} is not a log level; keeping info", env);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Random source reconstruction from covariance data on a sphere"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  int threads = 0;
  std::uint64_t seed = 0;

  using Runner = int (*)(const randsource::cli::Context&);
  Runner runner = nullptr;
  const std::pair<const char*, std::pair<const char*, Runner>> commands[] = {
      {"forward", {"Write the exact covariance of a phantom for each wave number", randsource::cli::run_forward}},
      {"simulate", {"Write sampled or perturbed covariance data", randsource::cli::run_simulate}},
      {"reconstruct", {"Tikhonov reconstruction with the discrepancy sweep", randsource::cli::run_reconstruct}},
      {"rates", {"Run an experiment matrix and fit convergence exponents", randsource::cli::run_rates}},
      {"cgo-check", {"Check the CGO representation and Fourier pairing numerically", randsource::cli::run_cgo_check}},
  };
  CLI::Option* seed_opt = nullptr;
  for (const auto& [name, entry] : commands) {
    auto* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (created if missing)");
    sub->add_option("--threads", threads, "OpenMP threads (default: all available)")->check(CLI::NonNegativeNumber);
    auto* opt = sub->add_option("--seed", seed, "Overrides the config seed");
    const Runner fn = entry.second;
    sub->callback([&runner, &seed_opt, fn, opt] {
      runner = fn;
      seed_opt = opt;
    });
  }
  CLI11_PARSE(app, argc, argv);

  if (threads > 0) omp_set_num_threads(threads);
  try {
    randsource::cli::Context ctx;
    try {
      ctx.config = randsource::io::read_json(config_path);
    } catch (const std::exception& e) {
      throw randsource::cli::ConfigError(e.what());
    }
    ctx.config_dir = std::filesystem::absolute(config_path).parent_path();
    ctx.out = out_dir;
    if (seed_opt != nullptr && seed_opt->count() > 0) ctx.seed = seed;
    std::filesystem::create_directories(ctx.out);
    spdlog::info("{} threads, output in {}", omp_get_max_threads(), std::filesystem::absolute(ctx.out).string());
    return runner(ctx);
  } catch (const randsource::cli::ConfigError& e) {
    spdlog::error("invalid config: {}", e.what());
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 3;
  }
}
