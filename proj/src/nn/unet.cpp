#include "nfsar/nn/unet.hpp"

#include "nfsar/errors.hpp"

namespace nfsar::nn {

std::vector<std::size_t> LayerSpec::weight_shape() const {
  if (kind == LayerKind::conv) return {cout, cin, k, k};
  return {2, 2, cout, cin};
}

UNet::UNet(const NetworkArch& arch) : arch_(arch) {
  arch.validate();
  const std::size_t L = arch.unet_levels, c = arch.base_channels, k = arch.kernel_size;
  auto add = [&](std::string name, LayerKind kind, std::size_t cin, std::size_t cout, std::size_t kk) {
    LayerSpec s{std::move(name), kind, cin, cout, kk, count_, 0};
    s.bias_offset = count_ + s.weight_size();
    count_ = s.bias_offset + cout;
    layers_.push_back(std::move(s));
  };
  std::size_t ch = 2;
  for (std::size_t l = 0; l < L; ++l) {
    const std::size_t cl = c << l;
    add("enc" + std::to_string(l) + ".conv0", LayerKind::conv, ch, cl, k);
    add("enc" + std::to_string(l) + ".conv1", LayerKind::conv, cl, cl, k);
    ch = cl;
  }
  const std::size_t cb = c << L;
  add("bottleneck.conv0", LayerKind::conv, ch, cb, k);
  add("bottleneck.conv1", LayerKind::conv, cb, cb, k);
  ch = cb;
  for (std::size_t l = L; l-- > 0;) {
    const std::size_t cl = c << l;
    add("dec" + std::to_string(l) + ".up", LayerKind::upconv, ch, cl, 2);
    add("dec" + std::to_string(l) + ".conv0", LayerKind::conv, 2 * cl, cl, k);
    add("dec" + std::to_string(l) + ".conv1", LayerKind::conv, cl, cl, k);
    ch = cl;
  }
  add("final", LayerKind::conv, ch, 2, 1);
}

void UNet::check_shape(std::size_t h, std::size_t w) const {
  const std::size_t m = std::size_t{1} << arch_.unet_levels;
  if (h == 0 || w == 0 || h % m != 0 || w % m != 0)
    throw ShapeError("image " + std::to_string(w) + "x" + std::to_string(h) +
                     " is not divisible by 2^levels = " + std::to_string(m));
}

Tensor UNet::conv(const Tensor& in, std::size_t layer, std::span<const double> theta, bool act,
                  Tape* tape) const {
  const auto& s = layers_[layer];
  Mat cols;
  Tensor out = conv2d(in, theta.subspan(s.weight_offset, s.weight_size()),
                      theta.subspan(s.bias_offset, s.cout), s.cout, s.k, tape ? &cols : nullptr);
  if (act && arch_.activation == Activation::relu) relu_inplace(out);
  if (tape) {
    tape->cols.push_back(std::move(cols));
    tape->outputs.push_back(out);
  }
  return out;
}

Tensor UNet::forward(const Tensor& x, std::span<const double> theta, Tape* tape) const {
  check_shape(x.h, x.w);
  if (x.c != 2) throw ShapeError("network input must have 2 channels");
  if (theta.size() != count_) throw ShapeError("parameter vector has the wrong length");
  if (tape) *tape = {};
  const std::size_t L = arch_.unet_levels;
  std::size_t li = 0;
  std::vector<Tensor> skips;
  Tensor h = x;
  for (std::size_t l = 0; l < L; ++l) {
    h = conv(h, li++, theta, true, tape);
    h = conv(h, li++, theta, true, tape);
    skips.push_back(h);
    std::vector<std::uint32_t> am;
    h = maxpool2(h, tape ? &am : nullptr);
    if (tape) tape->argmax.push_back(std::move(am));
  }
  h = conv(h, li++, theta, true, tape);
  h = conv(h, li++, theta, true, tape);
  for (std::size_t l = L; l-- > 0;) {
    const auto& up = layers_[li++];
    if (tape) tape->up_inputs.push_back(h);
    h = upconv2(h, theta.subspan(up.weight_offset, up.weight_size()),
                theta.subspan(up.bias_offset, up.cout), up.cout);
    h = concat(h, skips[l]);
    h = conv(h, li++, theta, true, tape);
    h = conv(h, li++, theta, true, tape);
  }
  Tensor out = conv(h, li++, theta, false, tape);
  if (arch_.residual) out.data += x.data;
  return out;
}

Tensor UNet::backward(const Tensor& dy, std::span<const double> theta, const Tape& tape,
                      std::span<double> dtheta) const {
  const std::size_t L = arch_.unet_levels;
  const bool relu = arch_.activation == Activation::relu;
  // Conv layers appear in the tape in forward order; walk them backwards.
  std::size_t ci = tape.cols.size();
  std::size_t li = layers_.size();
  auto conv_back = [&](Tensor g, bool act, std::size_t h, std::size_t w) {
    --ci;
    --li;
    const auto& s = layers_[li];
    if (act && relu) relu_backward_inplace(g, tape.outputs[ci]);
    return conv2d_backward(g, tape.cols[ci], theta.subspan(s.weight_offset, s.weight_size()), s.cin,
                           s.k, h, w, dtheta.subspan(s.weight_offset, s.weight_size()),
                           dtheta.subspan(s.bias_offset, s.cout));
  };

  const std::size_t H = dy.h, W = dy.w;
  Tensor g = conv_back(dy, false, H, W);
  std::vector<Tensor> dskips(L);
  std::size_t ui = tape.up_inputs.size();
  for (std::size_t l = 0; l < L; ++l) {
    const std::size_t h = H >> l, w = W >> l;
    g = conv_back(std::move(g), true, h, w);
    g = conv_back(std::move(g), true, h, w);
    const std::size_t cl = arch_.base_channels << l;
    dskips[l].c = cl;
    dskips[l].h = h;
    dskips[l].w = w;
    dskips[l].data = g.data.bottomRows(static_cast<Eigen::Index>(cl));
    Tensor dup;
    dup.c = cl;
    dup.h = h;
    dup.w = w;
    dup.data = g.data.topRows(static_cast<Eigen::Index>(cl));
    --li;
    const auto& up = layers_[li];
    g = upconv2_backward(dup, tape.up_inputs[--ui], theta.subspan(up.weight_offset, up.weight_size()),
                         dtheta.subspan(up.weight_offset, up.weight_size()),
                         dtheta.subspan(up.bias_offset, up.cout));
  }
  g = conv_back(std::move(g), true, H >> L, W >> L);
  g = conv_back(std::move(g), true, H >> L, W >> L);
  for (std::size_t l = L; l-- > 0;) {
    const std::size_t h = H >> l, w = W >> l;
    g = maxpool2_backward(g, tape.argmax[l], h, w);
    g.data += dskips[l].data;
    g = conv_back(std::move(g), true, h, w);
    g = conv_back(std::move(g), true, h, w);
  }
  if (arch_.residual) g.data += dy.data;
  return g;
}

}  // namespace nfsar::nn
