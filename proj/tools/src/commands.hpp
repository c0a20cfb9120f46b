#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace advprobe::cli {

namespace fs = std::filesystem;

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kInputError = 3,
  kStageFailure = 4,
};

inline constexpr const char* kOutRootEnv = "ADVPROBE_OUT_ROOT";

/// Explicit --out, else $ADVPROBE_OUT_ROOT/<stage>, else ./advprobe-out/<stage>.
fs::path resolve_out_dir(const std::optional<fs::path>& out, const std::string& stage);

struct TrainParams {
  fs::path scenario;
  std::string algo = "dqn";
  std::string curriculum = "deterministic";
  bool suite = false;
  std::uint64_t seed = 0;
  std::optional<std::size_t> budget;
  std::string tag;
  fs::path out;
  bool quiet = false;
};

struct CollectParams {
  fs::path policy;
  fs::path scenario;
  std::size_t n = 10000;
  double random_frac = 0.05;
  double stdev = 0.0;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  fs::path out;
};

struct AttackParams {
  fs::path config;
  std::optional<fs::path> dataset;
  std::optional<fs::path> policy;
  fs::path scenario;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  fs::path out;
};

struct AnalyzeParams {
  fs::path impact;
  fs::path scenario;
  std::string group_by = "index";
  std::string property = "red_count";
  std::optional<std::string> metric;
  double d_star = 0.0;
  std::optional<std::size_t> index;
  bool top_index = false;
  bool key_order = false;
  fs::path out;
};

struct TransferParams {
  std::vector<fs::path> policies;
  std::vector<fs::path> datasets;
  fs::path scenario;
  double epsilon = 1.0;
  std::size_t workers = 1;
  fs::path out;
};

struct EmbedParams {
  fs::path dataset;
  std::optional<fs::path> impact;
  double perplexity = 132.0;
  double critical_distance = 15.0;
  int iterations = 1000;
  std::size_t max_points = 5000;
  std::string property = "red_count";
  std::optional<std::string> metric;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  fs::path out;
};

struct PlayParams {
  fs::path scenario;
  std::optional<fs::path> policy;
  std::size_t episodes = 1;
  double stdev = 0.0;
  std::uint64_t seed = 0;
  fs::path out;
};

// Each command writes its artifacts plus manifest.json into params.out and
// returns the primary artifact path. Errors surface as ConfigError,
// InputError or other exceptions (stage failure).
fs::path cmd_train(const TrainParams& p);
fs::path cmd_collect(const CollectParams& p);
fs::path cmd_attack(const AttackParams& p);
fs::path cmd_analyze(const AnalyzeParams& p);
fs::path cmd_transfer(const TransferParams& p);
fs::path cmd_embed(const EmbedParams& p);
fs::path cmd_play(const PlayParams& p);

}  // namespace advprobe::cli
