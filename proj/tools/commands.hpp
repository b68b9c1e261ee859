#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include <nlohmann/json.hpp>

namespace randsource::cli {

struct Context {
  nlohmann::json config;
  std::filesystem::path config_dir;  // relative paths inside the config resolve here
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
};

// Each command returns the process exit code: 0 when everything succeeded,
// 1 when some rows failed (details in the output directory).
int run_forward(const Context& ctx);
int run_simulate(const Context& ctx);
int run_reconstruct(const Context& ctx);
int run_rates(const Context& ctx);
int run_cgo_check(const Context& ctx);

// Thrown for configs that fail validation (exit code 2).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace randsource::cli
