#include "nfsar/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "nfsar/errors.hpp"
#include "nfsar/fft.hpp"

namespace nfsar::solvers {

namespace {

double l1_norm(const ComplexImage& x) {
  double s = 0.0;
  for (const auto& v : x.vector()) s += std::abs(v);
  return s;
}

double relative_change(const ComplexImage& a, const ComplexImage& b) {
  double num = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) num += std::norm(a[i] - b[i]);
  const double den = b.norm_squared();
  if (num == 0.0) return 0.0;
  if (den == 0.0) return std::sqrt(num / a.norm_squared());
  return std::sqrt(num / den);
}

constexpr std::size_t kDivergenceStreak = 10;

}  // namespace

double l1_objective(const ComplexImage& y, const ComplexImage& x, const BlockMaskBank& bank,
                    double beta) {
  const auto r = y - forward(x, bank);
  return 0.5 * r.norm_squared() + beta * l1_norm(x);
}

ComplexImage soft_threshold(const ComplexImage& w, double t) {
  ComplexImage out(w.grid());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double a = std::abs(w[i]);
    if (a > t) out[i] = w[i] * ((a - t) / a);
  }
  return out;
}

ProxGradResult prox_grad_l1(const ComplexImage& y, const BlockMaskBank& bank,
                            const SolverConfig& cfg, const std::optional<ComplexImage>& x0) {
  cfg.validate();
  require_same_grid(y.grid(), bank.grid(), "prox_grad_l1");
  if (!y.all_finite()) throw NonFinite("prox_grad_l1: input has non-finite samples");
  if (x0) require_same_grid(x0->grid(), y.grid(), "prox_grad_l1 start");

  double mu = cfg.step_mu ? *cfg.step_mu : 0.9 / power_iteration_norm(bank, cfg.power_iterations);
  ProxGradResult res;
  ComplexImage x = x0 ? *x0 : ComplexImage(y.grid());
  ComplexImage r = y - forward(x, bank);
  double data = 0.5 * r.norm_squared();
  double obj = data + cfg.beta * l1_norm(x);
  res.objective.push_back(obj);

  std::size_t growing = 0;
  for (std::size_t k = 0; k < cfg.max_iterations; ++k) {
    const ComplexImage g = adjoint(r, bank);
    if (cfg.backtracking && cfg.step_growth) mu /= cfg.backtracking_shrink;
    ComplexImage xn, rn;
    double data_n = 0.0;
    for (;;) {
      ComplexImage w = x;
      for (std::size_t i = 0; i < w.size(); ++i) w[i] += mu * g[i];
      xn = soft_threshold(w, mu * cfg.beta);
      rn = y - forward(xn, bank);
      data_n = 0.5 * rn.norm_squared();
      if (!cfg.backtracking) break;
      double lin = 0.0, dist = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const cplx d = xn[i] - x[i];
        lin += (std::conj(g[i]) * d).real();
        dist += std::norm(d);
      }
      const double bound = data - lin + dist / (2.0 * mu);
      if (data_n <= bound + 1e-12 * std::max(1.0, data)) break;
      mu *= cfg.backtracking_shrink;
      if (mu < 1e-300) throw Divergence("prox_grad_l1: step size underflow");
    }
    const double obj_n = data_n + cfg.beta * l1_norm(xn);
    if (!std::isfinite(obj_n) || !xn.all_finite())
      throw NonFinite("prox_grad_l1: non-finite iterate at iteration " + std::to_string(k + 1));
    if (cfg.backtracking && obj_n > obj) {
      // Sufficient decrease held, so any rise is rounding at the fixed point.
      res.converged = true;
      res.last_change = 0.0;
      break;
    }
    growing = obj_n > obj ? growing + 1 : 0;
    if (growing >= kDivergenceStreak)
      throw Divergence("prox_grad_l1: objective grew for " + std::to_string(growing) +
                       " consecutive iterations (step " + std::to_string(mu) + ")");
    const double change = relative_change(xn, x);
    x = std::move(xn);
    r = std::move(rn);
    data = data_n;
    obj = obj_n;
    res.objective.push_back(obj);
    res.iterations = k + 1;
    res.last_change = change;
    if (change < cfg.stop_tolerance) {
      res.converged = true;
      break;
    }
  }
  res.x = std::move(x);
  res.final_mu = mu;
  return res;
}

BlockMaskBank global_bank(const BlockMaskBank& bank) {
  const auto& grid = bank.grid();
  const auto& blk = bank.block(bank.block_of(grid.nx / 2, grid.ny / 2));
  return bank_from_mask(bank.geometry(), grid, blk.dense_mask(grid.size()));
}

ProxGradResult global_deconv_l1(const ComplexImage& y, const SceneGeometry& geom,
                                const SpectralMask& center_mask, const SolverConfig& cfg) {
  return prox_grad_l1(y, bank_from_mask(geom, y.grid(), center_mask), cfg);
}

CleanResult clean(const ComplexImage& y, const BlockMaskBank& bank, const SolverConfig& cfg) {
  cfg.validate();
  require_same_grid(y.grid(), bank.grid(), "clean");
  if (!y.all_finite()) throw NonFinite("clean: input has non-finite samples");
  const auto& grid = y.grid();
  CleanResult res;
  res.residual = y;
  res.restored = ComplexImage(grid);

  // Unit-peak impulse response of each block, anchored at pixel (0, 0).
  std::map<std::size_t, ComplexImage> psf;
  auto block_psf = [&](std::size_t b) -> const ComplexImage& {
    auto it = psf.find(b);
    if (it != psf.end()) return it->second;
    const auto& blk = bank.block(b);
    ComplexImage h(grid);
    for (std::size_t j = 0; j < blk.support.size(); ++j) h[blk.support[j]] = blk.weights[j];
    fft::inverse(h);
    h *= 1.0 / blk.gain;
    return psf.emplace(b, std::move(h)).first->second;
  };

  const double start_peak = y.max_abs();
  if (start_peak == 0.0) return res;
  const double stop_level = start_peak * std::pow(10.0, -cfg.clean_stop_db / 20.0);
  const auto nx = static_cast<std::ptrdiff_t>(grid.nx);
  const auto ny = static_cast<std::ptrdiff_t>(grid.ny);

  for (std::size_t it = 0; it < cfg.clean_max_iterations; ++it) {
    const std::size_t p = res.residual.argmax_abs();
    const cplx peak = res.residual[p];
    if (std::abs(peak) <= stop_level) break;
    const std::size_t px = p % grid.nx, py = p / grid.nx;
    const std::size_t b = bank.block_of(px, py);
    const cplx step = cfg.clean_loop_gain * peak;
    const cplx amp = step / bank.block(b).gain;
    res.model.push_back({px, py, amp});
    res.restored(px, py) += amp;
    const auto& h = block_psf(b);
    for (std::ptrdiff_t iy = 0; iy < ny; ++iy) {
      const std::ptrdiff_t sy = ((iy - static_cast<std::ptrdiff_t>(py)) % ny + ny) % ny;
      for (std::ptrdiff_t ix = 0; ix < nx; ++ix) {
        const std::ptrdiff_t sx = ((ix - static_cast<std::ptrdiff_t>(px)) % nx + nx) % nx;
        res.residual(ix, iy) -= step * h(sx, sy);
      }
    }
    res.iterations = it + 1;
  }
  return res;
}

ComplexImage sva_pass(const ComplexImage& y, double weight_max, bool along_x) {
  const auto& grid = y.grid();
  ComplexImage out(grid);
  const std::size_t n = along_x ? grid.nx : grid.ny;
  const std::size_t lines = along_x ? grid.ny : grid.nx;
  auto at = [&](std::size_t line, std::size_t i) -> cplx {
    return along_x ? y(i, line) : y(line, i);
  };
  auto apodize = [weight_max](double v, double s) {
    if (s == 0.0) return v;
    const double w = -v / s;
    if (w <= 0.0) return v;
    if (w <= weight_max) return 0.0;
    return v + weight_max * s;
  };
  for (std::size_t line = 0; line < lines; ++line) {
    for (std::size_t i = 0; i < n; ++i) {
      const cplx v = at(line, i);
      const cplx s = (i > 0 ? at(line, i - 1) : cplx{}) + (i + 1 < n ? at(line, i + 1) : cplx{});
      const cplx q{apodize(v.real(), s.real()), apodize(v.imag(), s.imag())};
      if (along_x)
        out(i, line) = q;
      else
        out(line, i) = q;
    }
  }
  return out;
}

ComplexImage sva(const ComplexImage& y, const SolverConfig& cfg) {
  cfg.validate();
  return sva_pass(sva_pass(y, cfg.sva_weight_max, true), cfg.sva_weight_max, false);
}

std::string to_string(Method m) {
  switch (m) {
    case Method::sparsity: return "sparsity";
    case Method::deconv: return "deconv";
    case Method::clean: return "clean";
    case Method::sva: return "sva";
    case Method::network: return "network";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (auto m : all_methods())
    if (to_string(m) == name) return m;
  throw ConfigError("unknown method '" + name + "' (expected sparsity, deconv, clean, sva or network)");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> m{Method::sparsity, Method::deconv, Method::clean, Method::sva,
                                     Method::network};
  return m;
}

ComplexImage restore_classical(Method m, const ComplexImage& y, const BlockMaskBank& bank,
                               const SolverConfig& cfg) {
  switch (m) {
    case Method::sparsity: return prox_grad_l1(y, global_bank(bank), cfg).x;
    case Method::deconv: return prox_grad_l1(y, bank, cfg).x;
    case Method::clean: return clean(y, bank, cfg).restored;
    case Method::sva: return sva(y, cfg);
    case Method::network: break;
  }
  throw InvalidArgument("restore_classical: the network method needs a checkpoint");
}

}  // namespace nfsar::solvers
