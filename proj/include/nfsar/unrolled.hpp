#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nfsar/config.hpp"
#include "nfsar/degradation.hpp"
#include "nfsar/image.hpp"
#include "nfsar/nn/unet.hpp"
#include "nfsar/scenes.hpp"

namespace nfsar::unrolled {

struct ParamArray {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> values;
};

/// Learnable state: one step size per block and one (shared) or N
/// (per-block) parameter vectors for the proximal sub-network.
struct NetworkParams {
  NetworkArch arch;
  std::vector<double> mu;
  std::vector<std::vector<double>> theta;

  std::size_t count() const;
  /// Theta used by block k.
  std::span<const double> theta_for(std::size_t k) const;
  std::span<double> theta_for(std::size_t k);

  /// "mu" plus "[block<k>.]<layer>.weight|bias" arrays.
  std::vector<ParamArray> named() const;
  static NetworkParams from_named(const NetworkArch& arch, const std::vector<ParamArray>& arrays);

  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
  /// Throws NonFinite if any parameter is NaN or infinite.
  void check_finite() const;
};

/// He-uniform kernels, zero biases, every mu_k = 0.9 / ||f^H f||. With a
/// residual architecture the final 1x1 layer starts at zero, so every block
/// begins as a plain gradient step.
NetworkParams init_network(const NetworkArch& arch, const BlockMaskBank& bank, std::uint64_t seed,
                           std::size_t power_iterations = 200);

/// W = X_prev + mu f^H (Y - f(X_prev))
ComplexImage w_module(const ComplexImage& x_prev, const ComplexImage& y, double mu,
                      const BlockMaskBank& bank);

nn::Tensor to_tensor(const ComplexImage& img);
ComplexImage from_tensor(const nn::Tensor& t, const ImageGrid& grid);

/// Learned proximal step on the (real, imag) channel pair.
ComplexImage x_module(const ComplexImage& w, const nn::UNet& net, std::span<const double> theta);

struct ForwardResult {
  ComplexImage x;
  std::vector<ComplexImage> w;         ///< W_1..W_N
  std::vector<ComplexImage> x_blocks;  ///< X_1..X_N
};

/// X_0 = Y, then N blocks of w_module and x_module.
ForwardResult forward_network(const ComplexImage& y, const NetworkParams& params,
                              const BlockMaskBank& bank);

struct Sample {
  const ComplexImage* degraded = nullptr;
  const ComplexImage* clean = nullptr;
};

struct LossGrad {
  double loss = 0.0;
  NetworkParams grad;
};

/// Mean over the batch of the mean squared error on the 2-channel
/// representation, and its gradient. Samples are reduced in index order.
LossGrad loss_and_gradients(std::span<const Sample> batch, const NetworkParams& params,
                            const BlockMaskBank& bank);
/// Loss only.
double loss(std::span<const Sample> batch, const NetworkParams& params, const BlockMaskBank& bank);

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;  ///< mean of the batch losses seen during the epoch
  std::optional<double> test_loss;
  std::size_t steps = 0;
  std::vector<double> mu;

  json to_json() const;
};

struct TrainResult {
  NetworkParams params;  ///< best test loss, or the final state without a test split
  NetworkParams final_params;
  double initial_train_loss = 0.0;
  std::size_t best_epoch = 0;
  std::vector<EpochLog> log;
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// Adam over all parameters; batches follow a seeded permutation per epoch.
TrainResult train(std::span<const ImagePair> train_set, std::span<const ImagePair> test_set,
                  const NetworkArch& arch, const TrainConfig& cfg, const BlockMaskBank& bank,
                  const EpochCallback& on_epoch = {});
TrainResult train(const DatasetManifest& manifest, const NetworkArch& arch, const TrainConfig& cfg,
                  const BlockMaskBank& bank, const EpochCallback& on_epoch = {});

/// "NFSC" container: u16 version, u32 header length, JSON header with the
/// architecture and array descriptors, then little-endian f64 values.
std::vector<std::uint8_t> encode_checkpoint(const NetworkParams& params, const json& extra = {});
NetworkParams decode_checkpoint(const std::vector<std::uint8_t>& bytes, json* header = nullptr);
void save_checkpoint(const std::filesystem::path& path, const NetworkParams& params,
                     const json& extra = {});
NetworkParams load_checkpoint(const std::filesystem::path& path, json* header = nullptr);

}  // namespace nfsar::unrolled
