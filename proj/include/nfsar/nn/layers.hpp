#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace nfsar::nn {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatMap = Eigen::Map<const Mat>;
using MatMap = Eigen::Map<Mat>;

/// Feature maps: one row per channel, h*w samples per row.
struct Tensor {
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;
  Mat data;

  Tensor() = default;
  Tensor(std::size_t channels, std::size_t height, std::size_t width)
      : c(channels), h(height), w(width), data(Mat::Zero(channels, height * width)) {}
};

/// Weights are [cout][cin][k][k], zero padding keeps the spatial size.
Tensor conv2d(const Tensor& in, std::span<const double> weight, std::span<const double> bias,
              std::size_t cout, std::size_t k, Mat* cols_out);
/// Accumulates into dweight/dbias and returns the input gradient.
Tensor conv2d_backward(const Tensor& dout, const Mat& cols, std::span<const double> weight,
                       std::size_t cin, std::size_t k, std::size_t h, std::size_t w,
                       std::span<double> dweight, std::span<double> dbias);

Mat im2col(const Tensor& in, std::size_t k);
Tensor col2im(const Mat& cols, std::size_t c, std::size_t h, std::size_t w, std::size_t k);

/// 2x2 max pooling, stride 2. `argmax` receives the winning input index per output sample.
Tensor maxpool2(const Tensor& in, std::vector<std::uint32_t>* argmax);
Tensor maxpool2_backward(const Tensor& dout, const std::vector<std::uint32_t>& argmax,
                         std::size_t h, std::size_t w);

/// 2x2 stride-2 transposed convolution; weights are [2][2][cout][cin].
Tensor upconv2(const Tensor& in, std::span<const double> weight, std::span<const double> bias,
               std::size_t cout);
Tensor upconv2_backward(const Tensor& dout, const Tensor& in, std::span<const double> weight,
                        std::span<double> dweight, std::span<double> dbias);

void relu_inplace(Tensor& t);
/// Zeroes gradient entries where the forward output was not positive.
void relu_backward_inplace(Tensor& grad, const Tensor& out);

/// Stacks channels of `a` above those of `b`.
Tensor concat(const Tensor& a, const Tensor& b);

}  // namespace nfsar::nn
