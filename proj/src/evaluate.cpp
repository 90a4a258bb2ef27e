#include "nfsar/evaluate.hpp"

#include <chrono>
#include <limits>
#include <cstdio>
#include <sstream>

#include "nfsar/errors.hpp"
#include "nfsar/metrics.hpp"

namespace nfsar::eval {

ComplexImage calibrate_gain(const ComplexImage& img, const BlockMaskBank& bank) {
  require_same_grid(img.grid(), bank.grid(), "calibrate_gain");
  ComplexImage out = img;
  for (std::size_t iy = 0; iy < img.ny(); ++iy)
    for (std::size_t ix = 0; ix < img.nx(); ++ix)
      out(ix, iy) /= bank.block(bank.block_of(ix, iy)).gain;
  return out;
}

ComplexImage restore(solvers::Method m, const ComplexImage& y, const BlockMaskBank& bank,
                     const SolverConfig& cfg, const unrolled::NetworkParams* network) {
  switch (m) {
    case solvers::Method::sva: return calibrate_gain(solvers::sva(y, cfg), bank);
    case solvers::Method::network:
      if (!network) throw MissingCheckpoint("the network method needs a checkpoint");
      return unrolled::forward_network(y, *network, bank).x;
    default: return solvers::restore_classical(m, y, bank, cfg);
  }
}

const MethodScore& Report::at(solvers::Method m) const {
  for (const auto& s : scores)
    if (s.method == m) return s;
  throw InvalidArgument("method " + solvers::to_string(m) + " was not evaluated");
}

json Report::to_json() const {
  json methods = json::object();
  for (const auto& s : scores)
    methods[solvers::to_string(s.method)] = {{"mse", s.mse},
                                             {"ssim", s.ssim},
                                             {"mse_per_image", s.mse_per_image},
                                             {"ssim_per_image", s.ssim_per_image},
                                             {"seconds", s.seconds}};
  return {{"images", images}, {"methods", methods}, {"settings", settings}};
}

std::string Report::table() const {
  std::ostringstream os;
  char buf[64];
  os << "metric";
  for (const auto& s : scores) {
    std::snprintf(buf, sizeof buf, " %10s", solvers::to_string(s.method).c_str());
    os << buf;
  }
  os << "\nMSE   ";
  for (const auto& s : scores) {
    std::snprintf(buf, sizeof buf, " %10.5f", s.mse);
    os << buf;
  }
  os << "\nSSIM  ";
  for (const auto& s : scores) {
    std::snprintf(buf, sizeof buf, " %10.4f", s.ssim);
    os << buf;
  }
  os << "\n";
  return os.str();
}

Report evaluate(std::span<const ImagePair> pairs, const BlockMaskBank& bank, const SolverConfig& cfg,
                std::span<const solvers::Method> methods, const unrolled::NetworkParams* network) {
  if (pairs.empty()) throw InvalidArgument("no images to evaluate");
  Report r;
  r.images = pairs.size();
  for (auto m : methods) {
    MethodScore s;
    s.method = m;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      ComplexImage est;
      try {
        est = restore(m, pairs[i].degraded, bank, cfg, network);
      } catch (const Error& e) {
        throw e.with_context(solvers::to_string(m) + " on image " + std::to_string(i) + ": ");
      }
      s.mse_per_image.push_back(metrics::mse(pairs[i].clean, est));
      s.ssim_per_image.push_back(metrics::ssim(pairs[i].clean, est));
    }
    s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double n = static_cast<double>(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      s.mse += s.mse_per_image[i] / n;
      s.ssim += s.ssim_per_image[i] / n;
    }
    r.scores.push_back(std::move(s));
  }
  return r;
}

BetaSweep tune_beta(std::span<const ImagePair> pairs, const BlockMaskBank& bank, SolverConfig cfg,
                    solvers::Method m, std::span<const double> candidates) {
  if (m != solvers::Method::sparsity && m != solvers::Method::deconv)
    throw InvalidArgument("beta only applies to the L1 methods");
  if (pairs.empty() || candidates.empty()) throw InvalidArgument("empty beta sweep");
  BetaSweep out;
  double best = std::numeric_limits<double>::infinity();
  for (double beta : candidates) {
    cfg.beta = beta;
    double total = 0.0;
    for (const auto& p : pairs) total += metrics::mse(p.clean, restore(m, p.degraded, bank, cfg));
    total /= static_cast<double>(pairs.size());
    out.mse_by_beta.emplace_back(beta, total);
    if (total < best) {
      best = total;
      out.best = beta;
    }
  }
  return out;
}

}  // namespace nfsar::eval
