#include "nfsar/unrolled.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "nfsar/errors.hpp"
#include "nfsar/io.hpp"

namespace nfsar::unrolled {

namespace {

std::size_t theta_sets(const NetworkArch& a) { return a.shared_theta ? 1 : a.n_blocks; }

std::string prefix(const NetworkArch& a, std::size_t set) {
  return a.shared_theta ? "" : "block" + std::to_string(set) + ".";
}

double mse_2ch(const ComplexImage& est, const ComplexImage& truth) {
  double s = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) s += std::norm(est[i] - truth[i]);
  return s / (2.0 * static_cast<double>(est.size()));
}

void require_pair(const Sample& s, const BlockMaskBank& bank) {
  if (!s.degraded || !s.clean) throw InvalidArgument("sample without images");
  require_same_grid(s.degraded->grid(), bank.grid(), "network input");
  require_same_grid(s.clean->grid(), bank.grid(), "network target");
}

constexpr char kMagic[4] = {'N', 'F', 'S', 'C'};
constexpr std::uint16_t kVersion = 1;

}  // namespace

std::size_t NetworkParams::count() const {
  std::size_t n = mu.size();
  for (const auto& t : theta) n += t.size();
  return n;
}

std::span<const double> NetworkParams::theta_for(std::size_t k) const {
  return theta[arch.shared_theta ? 0 : k];
}

std::span<double> NetworkParams::theta_for(std::size_t k) { return theta[arch.shared_theta ? 0 : k]; }

std::vector<ParamArray> NetworkParams::named() const {
  const nn::UNet net(arch);
  std::vector<ParamArray> out;
  out.push_back({"mu", {mu.size()}, mu});
  for (std::size_t s = 0; s < theta.size(); ++s)
    for (const auto& l : net.layers()) {
      const auto& t = theta[s];
      out.push_back({prefix(arch, s) + l.name + ".weight", l.weight_shape(),
                     {t.begin() + static_cast<std::ptrdiff_t>(l.weight_offset),
                      t.begin() + static_cast<std::ptrdiff_t>(l.weight_offset + l.weight_size())}});
      out.push_back({prefix(arch, s) + l.name + ".bias", {l.cout},
                     {t.begin() + static_cast<std::ptrdiff_t>(l.bias_offset),
                      t.begin() + static_cast<std::ptrdiff_t>(l.bias_offset + l.cout)}});
    }
  return out;
}

NetworkParams NetworkParams::from_named(const NetworkArch& arch,
                                        const std::vector<ParamArray>& arrays) {
  const nn::UNet net(arch);
  std::map<std::string, const ParamArray*> by_name;
  for (const auto& a : arrays) {
    if (!by_name.emplace(a.name, &a).second) throw IoError("duplicate parameter array '" + a.name + "'");
  }
  auto take = [&](const std::string& name, const std::vector<std::size_t>& shape) -> const ParamArray& {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw IoError("missing parameter array '" + name + "'");
    if (it->second->shape != shape) throw IoError("parameter array '" + name + "' has the wrong shape");
    const std::size_t n = std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
    if (it->second->values.size() != n) throw IoError("parameter array '" + name + "' has the wrong size");
    const auto& ref = *it->second;
    by_name.erase(it);
    return ref;
  };
  NetworkParams p;
  p.arch = arch;
  p.mu = take("mu", {arch.n_blocks}).values;
  p.theta.assign(theta_sets(arch), std::vector<double>(net.parameter_count()));
  for (std::size_t s = 0; s < p.theta.size(); ++s)
    for (const auto& l : net.layers()) {
      const auto& w = take(prefix(arch, s) + l.name + ".weight", l.weight_shape());
      std::copy(w.values.begin(), w.values.end(), p.theta[s].begin() + static_cast<std::ptrdiff_t>(l.weight_offset));
      const auto& b = take(prefix(arch, s) + l.name + ".bias", {l.cout});
      std::copy(b.values.begin(), b.values.end(), p.theta[s].begin() + static_cast<std::ptrdiff_t>(l.bias_offset));
    }
  if (!by_name.empty()) throw IoError("unexpected parameter array '" + by_name.begin()->first + "'");
  return p;
}

std::vector<double> NetworkParams::flatten() const {
  std::vector<double> flat(mu);
  for (const auto& t : theta) flat.insert(flat.end(), t.begin(), t.end());
  return flat;
}

void NetworkParams::assign(std::span<const double> flat) {
  if (flat.size() != count()) throw ShapeError("flat parameter vector has the wrong length");
  auto it = flat.begin();
  std::copy(it, it + static_cast<std::ptrdiff_t>(mu.size()), mu.begin());
  it += static_cast<std::ptrdiff_t>(mu.size());
  for (auto& t : theta) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(t.size()), t.begin());
    it += static_cast<std::ptrdiff_t>(t.size());
  }
}

void NetworkParams::check_finite() const {
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  if (!finite(mu)) throw NonFinite("non-finite step size");
  for (const auto& t : theta)
    if (!finite(t)) throw NonFinite("non-finite network parameter");
}

NetworkParams init_network(const NetworkArch& arch, const BlockMaskBank& bank, std::uint64_t seed,
                           std::size_t power_iterations) {
  const nn::UNet net(arch);
  NetworkParams p;
  p.arch = arch;
  p.mu.assign(arch.n_blocks, 0.9 / power_iteration_norm(bank, power_iterations));
  p.theta.assign(theta_sets(arch), std::vector<double>(net.parameter_count(), 0.0));
  std::mt19937_64 rng(seed);
  for (auto& t : p.theta)
    for (const auto& l : net.layers()) {
      const std::size_t fan_in = l.kind == nn::LayerKind::conv ? l.cin * l.k * l.k : l.cin;
      const double a = std::sqrt(6.0 / static_cast<double>(fan_in));
      std::uniform_real_distribution<double> u(-a, a);
      for (std::size_t i = 0; i < l.weight_size(); ++i) t[l.weight_offset + i] = u(rng);
      if (arch.residual && l.name == "final")
        std::fill_n(t.begin() + static_cast<std::ptrdiff_t>(l.weight_offset), l.weight_size(), 0.0);
    }
  return p;
}

ComplexImage w_module(const ComplexImage& x_prev, const ComplexImage& y, double mu,
                      const BlockMaskBank& bank) {
  require_same_grid(x_prev.grid(), y.grid(), "w_module");
  require_same_grid(y.grid(), bank.grid(), "w_module");
  const auto d = adjoint(y - forward(x_prev, bank), bank);
  ComplexImage w = x_prev;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] += mu * d[i];
  return w;
}

nn::Tensor to_tensor(const ComplexImage& img) {
  nn::Tensor t(2, img.ny(), img.nx());
  for (std::size_t i = 0; i < img.size(); ++i) {
    t.data(0, static_cast<Eigen::Index>(i)) = img[i].real();
    t.data(1, static_cast<Eigen::Index>(i)) = img[i].imag();
  }
  return t;
}

ComplexImage from_tensor(const nn::Tensor& t, const ImageGrid& grid) {
  if (t.c != 2 || t.h != grid.ny || t.w != grid.nx) throw ShapeError("tensor does not match the grid");
  ComplexImage img(grid);
  for (std::size_t i = 0; i < img.size(); ++i)
    img[i] = {t.data(0, static_cast<Eigen::Index>(i)), t.data(1, static_cast<Eigen::Index>(i))};
  return img;
}

ComplexImage x_module(const ComplexImage& w, const nn::UNet& net, std::span<const double> theta) {
  return from_tensor(net.forward(to_tensor(w), theta, nullptr), w.grid());
}

ForwardResult forward_network(const ComplexImage& y, const NetworkParams& params,
                              const BlockMaskBank& bank) {
  const nn::UNet net(params.arch);
  net.check_shape(y.ny(), y.nx());
  if (params.mu.size() != params.arch.n_blocks) throw ShapeError("mu length does not match n_blocks");
  ForwardResult r;
  ComplexImage x = y;
  for (std::size_t k = 0; k < params.arch.n_blocks; ++k) {
    r.w.push_back(w_module(x, y, params.mu[k], bank));
    x = x_module(r.w.back(), net, params.theta_for(k));
    r.x_blocks.push_back(x);
  }
  r.x = std::move(x);
  return r;
}

double loss(std::span<const Sample> batch, const NetworkParams& params, const BlockMaskBank& bank) {
  if (batch.empty()) throw InvalidArgument("empty batch");
  double total = 0.0;
  for (const auto& s : batch) {
    require_pair(s, bank);
    total += mse_2ch(forward_network(*s.degraded, params, bank).x, *s.clean);
  }
  const double l = total / static_cast<double>(batch.size());
  if (!std::isfinite(l)) throw NonFinite("loss is not finite");
  return l;
}

LossGrad loss_and_gradients(std::span<const Sample> batch, const NetworkParams& params,
                            const BlockMaskBank& bank) {
  if (batch.empty()) throw InvalidArgument("empty batch");
  const nn::UNet net(params.arch);
  const std::size_t N = params.arch.n_blocks;
  if (params.mu.size() != N) throw ShapeError("mu length does not match n_blocks");
  LossGrad out;
  out.grad.arch = params.arch;
  out.grad.mu.assign(N, 0.0);
  out.grad.theta.assign(params.theta.size(), std::vector<double>(net.parameter_count(), 0.0));
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  std::vector<ComplexImage> d(N);
  std::vector<nn::UNet::Tape> tapes(N);
  for (const auto& s : batch) {
    require_pair(s, bank);
    const auto& y = *s.degraded;
    const auto& grid = y.grid();
    net.check_shape(grid.ny, grid.nx);
    ComplexImage x = y;
    for (std::size_t k = 0; k < N; ++k) {
      d[k] = adjoint(y - forward(x, bank), bank);
      ComplexImage w = x;
      for (std::size_t i = 0; i < w.size(); ++i) w[i] += params.mu[k] * d[k][i];
      x = from_tensor(net.forward(to_tensor(w), params.theta_for(k), &tapes[k]), grid);
    }
    out.loss += mse_2ch(x, *s.clean) * inv_b;

    const double scale = inv_b / static_cast<double>(grid.size());
    ComplexImage g(grid);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = scale * (x[i] - (*s.clean)[i]);
    for (std::size_t k = N; k-- > 0;) {
      const auto gw = from_tensor(
          net.backward(to_tensor(g), params.theta_for(k), tapes[k], out.grad.theta_for(k)), grid);
      double dmu = 0.0;
      for (std::size_t i = 0; i < gw.size(); ++i) dmu += (std::conj(d[k][i]) * gw[i]).real();
      out.grad.mu[k] += dmu;
      const auto ffg = adjoint(forward(gw, bank), bank);
      g = gw;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= params.mu[k] * ffg[i];
    }
  }
  if (!std::isfinite(out.loss)) throw NonFinite("loss is not finite");
  try {
    out.grad.check_finite();
  } catch (const Error& e) {
    throw NonFinite("gradient: " + e.message());
  }
  return out;
}

json EpochLog::to_json() const {
  json j{{"epoch", epoch}, {"train_loss", train_loss}, {"steps", steps}, {"mu", mu}};
  j["test_loss"] = test_loss ? json(*test_loss) : json(nullptr);
  return j;
}

TrainResult train(std::span<const ImagePair> train_set, std::span<const ImagePair> test_set,
                  const NetworkArch& arch, const TrainConfig& cfg, const BlockMaskBank& bank,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  arch.validate();
  if (train_set.empty()) throw InvalidArgument("training set is empty");
  std::vector<Sample> train_samples, test_samples;
  for (const auto& p : train_set) train_samples.push_back({&p.degraded, &p.clean});
  for (const auto& p : test_set) test_samples.push_back({&p.degraded, &p.clean});

  TrainResult res;
  NetworkParams params = init_network(arch, bank, cfg.seed);
  res.initial_train_loss = loss(train_samples, params, bank);

  std::vector<double> flat = params.flatten();
  std::vector<double> m(flat.size(), 0.0), v(flat.size(), 0.0);
  std::size_t t = 0;
  double best = std::numeric_limits<double>::infinity();
  res.params = params;

  std::vector<std::size_t> order(train_samples.size());
  std::vector<Sample> batch;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(derive_seed(cfg.seed, epoch, 3));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);

    EpochLog entry;
    entry.epoch = epoch;
    double loss_sum = 0.0;
    for (std::size_t start = 0, b = 0; start < order.size(); start += cfg.batch_size, ++b) {
      batch.clear();
      for (std::size_t i = start; i < std::min(order.size(), start + cfg.batch_size); ++i)
        batch.push_back(train_samples[order[i]]);
      LossGrad lg;
      try {
        lg = loss_and_gradients(batch, params, bank);
      } catch (const Error& e) {
        throw e.with_context("epoch " + std::to_string(epoch) + " batch " + std::to_string(b) + ": ");
      }
      const auto g = lg.grad.flatten();
      ++t;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
      for (std::size_t i = 0; i < flat.size(); ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        flat[i] -= cfg.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.epsilon);
      }
      params.assign(flat);
      loss_sum += lg.loss;
      ++entry.steps;
    }
    entry.train_loss = loss_sum / static_cast<double>(entry.steps);
    entry.mu = params.mu;
    if (!test_samples.empty()) {
      entry.test_loss = loss(test_samples, params, bank);
      if (*entry.test_loss < best) {
        best = *entry.test_loss;
        res.params = params;
        res.best_epoch = epoch;
      }
    }
    res.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
  }
  res.final_params = params;
  if (test_samples.empty()) {
    res.params = params;
    res.best_epoch = cfg.epochs;
  }
  return res;
}

TrainResult train(const DatasetManifest& manifest, const NetworkArch& arch, const TrainConfig& cfg,
                  const BlockMaskBank& bank, const EpochCallback& on_epoch) {
  auto train_set = load_split(manifest, Split::train);
  if (cfg.max_train_pairs && *cfg.max_train_pairs < train_set.size())
    train_set.resize(*cfg.max_train_pairs);
  const auto test_set = load_split(manifest, Split::test);
  return train(train_set, test_set, arch, cfg, bank, on_epoch);
}

std::vector<std::uint8_t> encode_checkpoint(const NetworkParams& params, const json& extra) {
  const auto arrays = params.named();
  json header = extra.is_object() ? extra : json::object();
  header["format"] = "nfsar-checkpoint";
  header["arch"] = to_json(params.arch);
  json desc = json::array();
  for (const auto& a : arrays) desc.push_back({{"name", a.name}, {"shape", a.shape}});
  header["arrays"] = desc;
  const std::string text = header.dump();

  io::ByteWriter w;
  w.bytes(kMagic, 4);
  w.u16(kVersion);
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.bytes(text.data(), text.size());
  for (const auto& a : arrays)
    for (double x : a.values) w.f64(x);
  return std::move(w.buffer());
}

NetworkParams decode_checkpoint(const std::vector<std::uint8_t>& bytes, json* header_out) {
  io::ByteReader r(bytes);
  char magic[4];
  r.bytes(magic, 4);
  if (!std::equal(magic, magic + 4, kMagic)) throw IoError("not a checkpoint (bad magic)");
  const auto version = r.u16();
  if (version != kVersion) throw IoError("unsupported checkpoint version " + std::to_string(version));
  const auto len = r.u32();
  if (len > r.remaining()) throw IoError("truncated checkpoint header");
  std::string text(len, '\0');
  r.bytes(text.data(), len);
  json header;
  try {
    header = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("checkpoint header is not valid JSON: ") + e.what());
  }
  NetworkArch arch;
  std::vector<ParamArray> arrays;
  try {
    arch = parse_network_arch(header.at("arch"));
    for (const auto& d : header.at("arrays")) {
      ParamArray a;
      a.name = d.at("name").get<std::string>();
      a.shape = d.at("shape").get<std::vector<std::size_t>>();
      arrays.push_back(std::move(a));
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed checkpoint header: ") + e.what());
  } catch (const ConfigError& e) {
    throw IoError("checkpoint architecture: " + e.message());
  }
  for (auto& a : arrays) {
    const std::size_t n =
        std::accumulate(a.shape.begin(), a.shape.end(), std::size_t{1}, std::multiplies<>());
    if (n * 8 > r.remaining()) throw IoError("truncated checkpoint payload");
    a.values.resize(n);
    for (auto& x : a.values) x = r.f64();
  }
  if (r.remaining() != 0) throw IoError("trailing bytes after checkpoint payload");
  if (header_out) *header_out = header;
  return NetworkParams::from_named(arch, arrays);
}

void save_checkpoint(const std::filesystem::path& path, const NetworkParams& params,
                     const json& extra) {
  io::write_file(path, encode_checkpoint(params, extra));
}

NetworkParams load_checkpoint(const std::filesystem::path& path, json* header) {
  try {
    return decode_checkpoint(io::read_file(path), header);
  } catch (const Error& e) {
    throw e.with_context(path.string() + ": ");
  }
}

}  // namespace nfsar::unrolled
