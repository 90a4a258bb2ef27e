#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nfsar/config.hpp"
#include "nfsar/nn/layers.hpp"

namespace nfsar::nn {

enum class LayerKind { conv, upconv };

struct LayerSpec {
  std::string name;  ///< e.g. "enc0.conv1"
  LayerKind kind = LayerKind::conv;
  std::size_t cin = 0;
  std::size_t cout = 0;
  std::size_t k = 0;  ///< 2 for upconv
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;

  std::size_t weight_size() const { return kind == LayerKind::conv ? cout * cin * k * k : 4 * cout * cin; }
  std::vector<std::size_t> weight_shape() const;
};

/// Encoder-decoder with skip connections operating on 2-channel images.
/// Per level: two convolutions then 2x2 max-pool; a two-convolution
/// bottleneck; per level on the way up: 2x2 transposed convolution,
/// concatenation with the skip, two convolutions; a final 1x1 convolution.
class UNet {
 public:
  explicit UNet(const NetworkArch& arch);

  const NetworkArch& arch() const { return arch_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  std::size_t parameter_count() const { return count_; }

  /// Activations kept for the backward pass.
  struct Tape {
    std::vector<Mat> cols;        ///< per conv layer, in layer order
    std::vector<Tensor> outputs;  ///< per conv layer, post-activation
    std::vector<std::vector<std::uint32_t>> argmax;
    std::vector<Tensor> up_inputs;
  };

  /// Throws ShapeError unless h and w are divisible by 2^levels.
  void check_shape(std::size_t h, std::size_t w) const;
  Tensor forward(const Tensor& x, std::span<const double> theta, Tape* tape) const;
  /// Accumulates parameter gradients into `dtheta` and returns d(loss)/d(x).
  Tensor backward(const Tensor& dy, std::span<const double> theta, const Tape& tape,
                  std::span<double> dtheta) const;

 private:
  Tensor conv(const Tensor& in, std::size_t layer, std::span<const double> theta, bool act,
              Tape* tape) const;

  NetworkArch arch_;
  std::vector<LayerSpec> layers_;
  std::size_t count_ = 0;
};

}  // namespace nfsar::nn
