#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "nfsar/scenes.hpp"

namespace nfsar {

using json = nlohmann::json;

struct SolverConfig {
  double beta = 3e-3;                ///< L1 weight
  /// Non-empty: `evaluate` picks beta from these by mean MSE on the training split.
  std::vector<double> beta_candidates;
  std::optional<double> step_mu;     ///< empty: 0.9 / power_iteration_norm
  bool backtracking = true;
  double backtracking_shrink = 0.5;
  /// With backtracking, each iteration first tries mu / shrink.
  bool step_growth = true;
  std::size_t max_iterations = 300;
  double stop_tolerance = 1e-5;      ///< relative change of X between iterations
  double clean_loop_gain = 0.25;
  double clean_stop_db = 40.0;       ///< stop once the residual peak is this far below the start
  std::size_t clean_max_iterations = 2000;
  double sva_weight_max = 0.5;
  std::size_t power_iterations = 200;

  void validate() const;
};

enum class Activation { relu, linear };

struct NetworkArch {
  std::size_t n_blocks = 4;
  std::size_t unet_levels = 3;
  std::size_t base_channels = 16;
  std::size_t kernel_size = 3;
  bool shared_theta = true;
  Activation activation = Activation::relu;
  /// Adds W_k to the proximal sub-network output.
  bool residual = false;

  void validate() const;
  bool operator==(const NetworkArch&) const = default;
};

struct TrainConfig {
  std::size_t epochs = 100;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 4;
  std::uint64_t seed = 7;
  bool deterministic = true;
  /// Optional cap on the number of training pairs taken from the manifest.
  std::optional<std::size_t> max_train_pairs;

  void validate() const;
};

/// Whole-run configuration. Every field has a default; parsing rejects
/// unknown keys at any level.
struct RunConfig {
  std::uint64_t seed = 20240601;
  bool deterministic = true;
  DatasetConfig dataset;  ///< geometry, grid, bank, noise and dataset sections
  SolverConfig solver;
  NetworkArch network;
  TrainConfig training;

  void validate() const;
  static RunConfig paper_scale();
};

RunConfig parse_run_config(const json& j);
RunConfig load_run_config(const std::filesystem::path& path);
json to_json(const RunConfig& c);

/// Dataset-relevant subset of a RunConfig (a valid RunConfig document).
json to_json(const DatasetConfig& c);
DatasetConfig parse_dataset_config(const json& j);

json to_json(const NetworkArch& a);
NetworkArch parse_network_arch(const json& j);

}  // namespace nfsar
