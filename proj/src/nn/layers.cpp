#include "nfsar/nn/layers.hpp"

#include <algorithm>
#include <cassert>

namespace nfsar::nn {

Mat im2col(const Tensor& in, std::size_t k) {
  const std::size_t hw = in.h * in.w;
  const auto r = static_cast<std::ptrdiff_t>(k / 2);
  const auto H = static_cast<std::ptrdiff_t>(in.h), W = static_cast<std::ptrdiff_t>(in.w);
  Mat cols = Mat::Zero(static_cast<Eigen::Index>(in.c * k * k), static_cast<Eigen::Index>(hw));
  for (std::size_t ci = 0; ci < in.c; ++ci) {
    const double* src = in.data.row(ci).data();
    for (std::size_t ky = 0; ky < k; ++ky)
      for (std::size_t kx = 0; kx < k; ++kx) {
        double* dst = cols.row((ci * k + ky) * k + kx).data();
        const std::ptrdiff_t oy = static_cast<std::ptrdiff_t>(ky) - r;
        const std::ptrdiff_t ox = static_cast<std::ptrdiff_t>(kx) - r;
        for (std::ptrdiff_t y = std::max<std::ptrdiff_t>(0, -oy); y < std::min(H, H - oy); ++y) {
          const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(0, -ox);
          const std::ptrdiff_t x1 = std::min(W, W - ox);
          std::copy(src + (y + oy) * W + x0 + ox, src + (y + oy) * W + x1 + ox, dst + y * W + x0);
        }
      }
  }
  return cols;
}

Tensor col2im(const Mat& cols, std::size_t c, std::size_t h, std::size_t w, std::size_t k) {
  Tensor out(c, h, w);
  const auto r = static_cast<std::ptrdiff_t>(k / 2);
  const auto H = static_cast<std::ptrdiff_t>(h), W = static_cast<std::ptrdiff_t>(w);
  for (std::size_t ci = 0; ci < c; ++ci) {
    double* dst = out.data.row(ci).data();
    for (std::size_t ky = 0; ky < k; ++ky)
      for (std::size_t kx = 0; kx < k; ++kx) {
        const double* src = cols.row((ci * k + ky) * k + kx).data();
        const std::ptrdiff_t oy = static_cast<std::ptrdiff_t>(ky) - r;
        const std::ptrdiff_t ox = static_cast<std::ptrdiff_t>(kx) - r;
        for (std::ptrdiff_t y = std::max<std::ptrdiff_t>(0, -oy); y < std::min(H, H - oy); ++y) {
          const std::ptrdiff_t x0 = std::max<std::ptrdiff_t>(0, -ox);
          const std::ptrdiff_t x1 = std::min(W, W - ox);
          for (std::ptrdiff_t x = x0; x < x1; ++x) dst[(y + oy) * W + x + ox] += src[y * W + x];
        }
      }
  }
  return out;
}

Tensor conv2d(const Tensor& in, std::span<const double> weight, std::span<const double> bias,
              std::size_t cout, std::size_t k, Mat* cols_out) {
  const auto ck = static_cast<Eigen::Index>(in.c * k * k);
  assert(weight.size() == cout * in.c * k * k && bias.size() == cout);
  ConstMatMap wm(weight.data(), static_cast<Eigen::Index>(cout), ck);
  Tensor out;
  out.c = cout;
  out.h = in.h;
  out.w = in.w;
  if (k == 1) {
    out.data.noalias() = wm * in.data;
    if (cols_out) *cols_out = in.data;
  } else {
    Mat cols = im2col(in, k);
    out.data.noalias() = wm * cols;
    if (cols_out) *cols_out = std::move(cols);
  }
  for (std::size_t co = 0; co < cout; ++co) out.data.row(co).array() += bias[co];
  return out;
}

Tensor conv2d_backward(const Tensor& dout, const Mat& cols, std::span<const double> weight,
                       std::size_t cin, std::size_t k, std::size_t h, std::size_t w,
                       std::span<double> dweight, std::span<double> dbias) {
  const auto cout = static_cast<Eigen::Index>(dout.c);
  const auto ck = static_cast<Eigen::Index>(cin * k * k);
  ConstMatMap wm(weight.data(), cout, ck);
  MatMap dw(dweight.data(), cout, ck);
  dw.noalias() += dout.data * cols.transpose();
  for (Eigen::Index co = 0; co < cout; ++co) dbias[co] += dout.data.row(co).sum();
  Mat dcols = wm.transpose() * dout.data;
  if (k == 1) {
    Tensor din;
    din.c = cin;
    din.h = h;
    din.w = w;
    din.data = std::move(dcols);
    return din;
  }
  return col2im(dcols, cin, h, w, k);
}

Tensor maxpool2(const Tensor& in, std::vector<std::uint32_t>* argmax) {
  const std::size_t oh = in.h / 2, ow = in.w / 2;
  Tensor out(in.c, oh, ow);
  if (argmax) argmax->assign(in.c * oh * ow, 0);
  for (std::size_t c = 0; c < in.c; ++c) {
    const double* src = in.data.row(c).data();
    double* dst = out.data.row(c).data();
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x) {
        std::size_t best = (2 * y) * in.w + 2 * x;
        for (std::size_t d : {best + 1, best + in.w, best + in.w + 1})
          if (src[d] > src[best]) best = d;
        dst[y * ow + x] = src[best];
        if (argmax) (*argmax)[(c * oh + y) * ow + x] = static_cast<std::uint32_t>(best);
      }
  }
  return out;
}

Tensor maxpool2_backward(const Tensor& dout, const std::vector<std::uint32_t>& argmax,
                         std::size_t h, std::size_t w) {
  Tensor din(dout.c, h, w);
  const std::size_t n = dout.h * dout.w;
  for (std::size_t c = 0; c < dout.c; ++c) {
    const double* g = dout.data.row(c).data();
    double* dst = din.data.row(c).data();
    for (std::size_t i = 0; i < n; ++i) dst[argmax[c * n + i]] += g[i];
  }
  return din;
}

Tensor upconv2(const Tensor& in, std::span<const double> weight, std::span<const double> bias,
               std::size_t cout) {
  const auto co = static_cast<Eigen::Index>(cout), ci = static_cast<Eigen::Index>(in.c);
  assert(weight.size() == 4 * cout * in.c && bias.size() == cout);
  Tensor out(cout, 2 * in.h, 2 * in.w);
  Mat part;
  for (std::size_t d = 0; d < 4; ++d) {
    const std::size_t dy = d / 2, dx = d % 2;
    ConstMatMap wd(weight.data() + d * cout * in.c, co, ci);
    part.noalias() = wd * in.data;
    for (std::size_t c = 0; c < cout; ++c) {
      const double* src = part.row(c).data();
      double* dst = out.data.row(c).data();
      for (std::size_t y = 0; y < in.h; ++y)
        for (std::size_t x = 0; x < in.w; ++x)
          dst[(2 * y + dy) * out.w + 2 * x + dx] = src[y * in.w + x] + bias[c];
    }
  }
  return out;
}

Tensor upconv2_backward(const Tensor& dout, const Tensor& in, std::span<const double> weight,
                        std::span<double> dweight, std::span<double> dbias) {
  const std::size_t cout = dout.c;
  const auto co = static_cast<Eigen::Index>(cout), ci = static_cast<Eigen::Index>(in.c);
  Tensor din(in.c, in.h, in.w);
  Mat g(co, static_cast<Eigen::Index>(in.h * in.w));
  for (std::size_t d = 0; d < 4; ++d) {
    const std::size_t dy = d / 2, dx = d % 2;
    for (std::size_t c = 0; c < cout; ++c) {
      const double* src = dout.data.row(c).data();
      double* dst = g.row(c).data();
      for (std::size_t y = 0; y < in.h; ++y)
        for (std::size_t x = 0; x < in.w; ++x)
          dst[y * in.w + x] = src[(2 * y + dy) * dout.w + 2 * x + dx];
    }
    ConstMatMap wd(weight.data() + d * cout * in.c, co, ci);
    MatMap dwd(dweight.data() + d * cout * in.c, co, ci);
    dwd.noalias() += g * in.data.transpose();
    din.data.noalias() += wd.transpose() * g;
  }
  for (std::size_t c = 0; c < cout; ++c) dbias[c] += dout.data.row(c).sum();
  return din;
}

void relu_inplace(Tensor& t) { t.data = t.data.cwiseMax(0.0); }

void relu_backward_inplace(Tensor& grad, const Tensor& out) {
  grad.data = (out.data.array() > 0.0).select(grad.data, 0.0);
}

Tensor concat(const Tensor& a, const Tensor& b) {
  Tensor out;
  out.c = a.c + b.c;
  out.h = a.h;
  out.w = a.w;
  out.data.resize(static_cast<Eigen::Index>(out.c), static_cast<Eigen::Index>(a.h * a.w));
  out.data.topRows(static_cast<Eigen::Index>(a.c)) = a.data;
  out.data.bottomRows(static_cast<Eigen::Index>(b.c)) = b.data;
  return out;
}

}  // namespace nfsar::nn
