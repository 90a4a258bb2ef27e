#include "nfsar/scenes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "nfsar/config.hpp"
#include "nfsar/echo.hpp"
#include "nfsar/errors.hpp"
#include "nfsar/io.hpp"
#include "nfsar/spectral.hpp"

namespace nfsar {

namespace {

struct BodyPoint {
  double u, v;
  bool strong;
};

class Layout {
 public:
  explicit Layout(double spacing) : spacing_(spacing) {}

  void strong(double u, double v) { pts_.push_back({u, v, true}); }

  // Weak scatterers strictly between the two endpoints.
  void edge(double u0, double v0, double u1, double v1) {
    const double len = std::hypot(u1 - u0, v1 - v0);
    const auto n = std::max<long>(1, std::lround(len / spacing_));
    for (long i = 1; i < n; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(n);
      pts_.push_back({u0 + t * (u1 - u0), v0 + t * (v1 - v0), false});
    }
  }

  // Adds the v >= 0 half and its mirror image.
  template <class F>
  void mirrored(F&& add) {
    add(+1.0);
    add(-1.0);
  }

  std::vector<BodyPoint>& points() { return pts_; }

 private:
  double spacing_;
  std::vector<BodyPoint> pts_;
};

std::vector<BodyPoint> body_layout(const TargetModel& m) {
  Layout l(m.spacing);
  const double half_len = 0.5 * m.fuselage_length;
  const double hw = 0.5 * m.fuselage_width;
  const double nose_cone = 2.0 * m.fuselage_width;
  const double tail_cone = 1.5 * m.fuselage_width;

  // Fuselage.
  l.strong(half_len, 0.0);
  l.strong(-half_len, 0.0);
  l.mirrored([&](double s) {
    l.edge(-half_len + tail_cone, s * hw, half_len - nose_cone, s * hw);
    l.edge(half_len - nose_cone, s * hw, half_len, 0.0);
    l.edge(-half_len + tail_cone, s * hw, -half_len, 0.0);
  });

  // Main wing.
  const double semi = 0.5 * m.wing_span;
  const double sweep = std::tan(m.wing_sweep_deg * kPi / 180.0);
  const double root_le = m.wing_station;
  const double root_te = root_le - m.wing_root_chord;
  const double tip_le = root_le - (semi - hw) * sweep;
  const double tip_te = tip_le - m.wing_tip_chord;
  l.mirrored([&](double s) {
    l.strong(root_le, s * hw);
    l.strong(root_te, s * hw);
    l.strong(tip_le, s * semi);
    l.strong(tip_te, s * semi);
    l.edge(root_le, s * hw, tip_le, s * semi);
    l.edge(root_te, s * hw, tip_te, s * semi);
    l.edge(tip_le, s * semi, tip_te, s * semi);
  });

  // Engines hang ahead of the leading edge.
  l.mirrored([&](double s) {
    for (int e = 0; e < m.engines_per_wing; ++e) {
      const double frac = (e + 1.0) / (m.engines_per_wing + 1.0) * 0.8;
      const double v = hw + frac * (semi - hw);
      const double u = root_le - (v - hw) * sweep + 0.06;
      l.strong(u + 0.03, s * v);
      l.strong(u - 0.03, s * v);
    }
  });

  // Tailplane.
  const double tsemi = 0.5 * m.tail_span;
  const double tsweep = std::tan(m.tail_sweep_deg * kPi / 180.0);
  const double troot_le = -half_len + tail_cone + m.tail_chord;
  const double ttip_le = troot_le - (tsemi - hw) * tsweep;
  l.mirrored([&](double s) {
    l.strong(ttip_le, s * tsemi);
    l.edge(troot_le, s * hw, ttip_le, s * tsemi);
    l.edge(troot_le - m.tail_chord, s * hw, ttip_le - 0.5 * m.tail_chord, s * tsemi);
  });
  return std::move(l.points());
}

std::pair<long, long> nearest_pixel(const ImageGrid& grid, double x, double y) {
  return {std::lround((x - grid.origin_x_m) / grid.dx_m),
          std::lround((y - grid.origin_y_m) / grid.dy_m)};
}

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  throw IoError("manifest split must be train or test, got " + s);
}

}  // namespace

void TargetModel::validate() const {
  if (!(fuselage_length > 0.0 && fuselage_width > 0.0 && wing_span > fuselage_width &&
        tail_span > fuselage_width && spacing > 0.0 && jitter >= 0.0 && extent_m > 0.0))
    throw InvalidArgument("target model '" + name + "' has non-positive dimensions");
  if (engines_per_wing < 0) throw InvalidArgument("engines_per_wing must be >= 0");
  if (!(strong.min > 0.0 && strong.min <= strong.max && weak.min >= 0.0 && weak.min <= weak.max))
    throw InvalidArgument("amplitude tiers must be ordered and non-negative");
  if (min_scatterers > max_scatterers) throw InvalidArgument("scatterer bounds are inverted");
}

const std::vector<TargetModel>& builtin_models() {
  static const std::vector<TargetModel> models = [] {
    std::vector<TargetModel> v;
    auto add = [&](std::string name, double span, double sweep, double root, double tip,
                   double station, double tail, int engines, double width) {
      TargetModel m;
      m.model_id = static_cast<int>(v.size());
      m.name = std::move(name);
      m.wing_span = span;
      m.wing_sweep_deg = sweep;
      m.wing_root_chord = root;
      m.wing_tip_chord = tip;
      m.wing_station = station;
      m.tail_span = tail;
      m.engines_per_wing = engines;
      m.fuselage_width = width;
      v.push_back(m);
    };
    add("airliner", 1.60, 28.0, 0.32, 0.10, 0.20, 0.60, 1, 0.14);
    add("widebody", 1.75, 32.0, 0.36, 0.10, 0.25, 0.70, 2, 0.18);
    add("regional", 1.50, 5.0, 0.22, 0.14, 0.10, 0.50, 1, 0.12);
    add("bizjet", 1.20, 30.0, 0.26, 0.10, 0.05, 0.45, 0, 0.10);
    add("fighter", 1.00, 45.0, 0.55, 0.08, 0.35, 0.40, 0, 0.12);
    add("delta", 1.10, 55.0, 0.90, 0.05, 0.50, 0.30, 0, 0.14);
    add("transport", 1.80, 8.0, 0.30, 0.20, 0.15, 0.65, 2, 0.20);
    add("trainer", 1.30, 0.0, 0.24, 0.18, 0.10, 0.50, 0, 0.10);
    add("bomber", 1.85, 35.0, 0.40, 0.12, 0.25, 0.55, 2, 0.14);
    add("propliner", 1.70, 3.0, 0.26, 0.16, 0.12, 0.55, 1, 0.14);
    return v;
  }();
  return models;
}

double max_extent_for_grid(const ImageGrid& grid, std::size_t guard) {
  const auto reach = [&](std::size_t n, double d) {
    const double cells = static_cast<double>(n / 2) - static_cast<double>(guard) - 1.0;
    return cells * d;
  };
  const double e = std::min(reach(grid.nx, grid.dx_m), reach(grid.ny, grid.dy_m));
  if (!(e > 0.0)) throw TooSmall("grid leaves no interior inside the guard band");
  // Jitter may push a unit-disc point up to 2% outward.
  return e / 1.02;
}

ScattererSet generate_target(const TargetModel& model, double view_angle_deg, std::uint64_t seed,
                             const ImageGrid& grid, std::size_t guard) {
  model.validate();
  grid.validate();
  if (!std::isfinite(view_angle_deg)) throw InvalidArgument("view angle must be finite");
  auto body = body_layout(model);
  double rmax = 0.0;
  for (const auto& p : body) rmax = std::max(rmax, std::hypot(p.u, p.v));
  const double to_unit = 0.98 / rmax;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double theta = view_angle_deg * kPi / 180.0;
  const double c = std::cos(theta), s = std::sin(theta);
  const auto centre = grid.point_at(static_cast<double>(grid.nx / 2),
                                    static_cast<double>(grid.ny / 2));

  ScattererSet out;
  out.reserve(body.size());
  for (const auto& p : body) {
    const double ju = model.jitter * (2.0 * unit(rng) - 1.0);
    const double jv = model.jitter * (2.0 * unit(rng) - 1.0);
    const auto& tier = p.strong ? model.strong : model.weak;
    const double mag = tier.min + (tier.max - tier.min) * unit(rng);
    const double phase = 2.0 * kPi * unit(rng);
    const double u = (p.u * to_unit + ju) * model.extent_m;
    const double v = (p.v * to_unit + jv) * model.extent_m;
    out.push_back({centre.x_m + u * c - v * s, centre.y_m + u * s + v * c, std::polar(mag, phase)});
  }
  if (out.size() < model.min_scatterers || out.size() > model.max_scatterers)
    throw InvalidArgument("model '" + model.name + "' produced " + std::to_string(out.size()) +
                          " scatterers, outside [" + std::to_string(model.min_scatterers) + ", " +
                          std::to_string(model.max_scatterers) + "]");
  check_guard(out, grid, guard);
  return out;
}

std::size_t count_weak(const ScattererSet& s, const TargetModel& model) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [&](const Scatterer& p) {
    return std::abs(p.amplitude) <= model.weak.max;
  }));
}

void check_guard(const ScattererSet& s, const ImageGrid& grid, std::size_t guard) {
  const long g = static_cast<long>(guard);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto [ix, iy] = nearest_pixel(grid, s[i].x_m, s[i].y_m);
    if (ix < g || iy < g || ix >= static_cast<long>(grid.nx) - g ||
        iy >= static_cast<long>(grid.ny) - g)
      throw OutOfBounds("scatterer " + std::to_string(i) + " at (" + std::to_string(s[i].x_m) +
                        ", " + std::to_string(s[i].y_m) + ") enters the " +
                        std::to_string(guard) + "-pixel guard band");
  }
}

ScattererSet snap_to_pixels(const ScattererSet& s, const ImageGrid& grid) {
  ScattererSet out = s;
  for (auto& p : out) {
    const auto [ix, iy] = nearest_pixel(grid, p.x_m, p.y_m);
    p.x_m = grid.x_at(static_cast<double>(ix));
    p.y_m = grid.y_at(static_cast<double>(iy));
  }
  return out;
}

ComplexImage rasterize_clean(const ScattererSet& s, const ImageGrid& grid) {
  ComplexImage img(grid);
  for (const auto& p : s) {
    const auto [ix, iy] = nearest_pixel(grid, p.x_m, p.y_m);
    if (ix < 0 || iy < 0 || ix >= static_cast<long>(grid.nx) || iy >= static_cast<long>(grid.ny))
      throw OutOfBounds("scatterer outside the image grid");
    img(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy)) += p.amplitude;
  }
  return img;
}

const char* to_string(GenerationPath p) {
  return p == GenerationPath::operator_model ? "operator" : "echo";
}

const char* to_string(Split s) { return s == Split::train ? "train" : "test"; }

void DatasetConfig::validate() const {
  geometry.validate();
  grid.validate();
  if (block_size == 0 || grid.nx % block_size || grid.ny % block_size)
    throw ConfigError("bank.block_size must divide the grid");
  if (!(taper_width >= 0.0)) throw ConfigError("bank.taper_width must be >= 0");
  if (model_count == 0 || model_count > builtin_models().size())
    throw ConfigError("dataset.model_count must lie in [1, " +
                      std::to_string(builtin_models().size()) + "]");
  if (view_angles_deg.empty()) throw ConfigError("dataset.view_angles_deg is empty");
  if (total_pairs == 0 || total_pairs > model_count * view_angles_deg.size())
    throw ConfigError("dataset.total_pairs must lie in [1, model_count * angles]");
  if (train_pairs > total_pairs) throw ConfigError("dataset.train_pairs exceeds total_pairs");
  for (const auto& snr : {image_snr_db, echo_snr_db})
    if (snr && std::isnan(*snr)) throw ConfigError("noise SNR must be a number or null");
  if (!(extent_fraction > 0.0 && extent_fraction <= 1.0))
    throw ConfigError("dataset.extent_fraction must lie in (0, 1]");
}

DatasetConfig DatasetConfig::paper_scale() {
  DatasetConfig c;
  c.grid = ImageGrid::centered(256, 256, 0.008, 0.008, c.geometry.center_range_m);
  c.total_pairs = 120;
  c.train_pairs = 100;
  return c;
}

std::size_t DatasetManifest::count(Split s) const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [&](const auto& e) { return e.split == s; }));
}

BlockMaskBank dataset_bank(const DatasetConfig& config) {
  return build_bank(config.geometry, config.grid, config.block_size,
                    SupportOptions{config.taper_width});
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t stream) {
  return splitmix64(splitmix64(splitmix64(master) ^ index) ^ (stream * 0xd1b54a32d192ed03ULL));
}

std::vector<std::pair<std::size_t, double>> dataset_plan(const DatasetConfig& config) {
  config.validate();
  std::vector<std::pair<std::size_t, double>> all;
  for (std::size_t m = 0; m < config.model_count; ++m)
    for (double a : config.view_angles_deg) all.emplace_back(m, a);
  // Fisher-Yates with an explicit draw so the order does not depend on the
  // standard library's shuffle implementation.
  std::mt19937_64 rng(derive_seed(config.seed, 0, 0));
  for (std::size_t i = all.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(all[i - 1], all[j]);
  }
  all.resize(config.total_pairs);
  return all;
}

ComplexImage degrade(const DatasetConfig& config, const BlockMaskBank& bank,
                     const ScattererSet& scatterers, const ComplexImage& clean,
                     std::uint64_t noise_seed) {
  ComplexImage y;
  if (config.path == GenerationPath::operator_model) {
    y = forward(clean, bank);
  } else {
    // Pre-compensate the carrier so that backprojection returns amplitudes
    // comparable to the clean image, then match the operator's gain at the
    // scene centre.
    const double kc2 = config.geometry.carrier_wavenumber();
    ScattererSet shifted = scatterers;
    for (auto& s : shifted) s.amplitude *= std::polar(1.0, kc2 * s.y_m);
    auto echo = simulate_echo(shifted, config.geometry);
    if (config.echo_snr_db)
      add_noise_inplace(echo.samples, {config.echo_snr_db, derive_seed(noise_seed, 0, 3)});
    y = backproject(echo, config.geometry, config.grid);
    const auto& centre = bank.block(bank.block_of(config.grid.nx / 2, config.grid.ny / 2));
    y *= centre.gain;
  }
  return add_noise(y, {config.image_snr_db, noise_seed});
}

std::vector<DatasetEntry> generate_dataset(const DatasetConfig& config) {
  const auto plan = dataset_plan(config);
  if (config.path == GenerationPath::echo_backprojection)
    validate_sampling(config.geometry, config.grid);
  const auto bank = dataset_bank(config);
  const auto& models = builtin_models();
  const double extent = config.extent_fraction * max_extent_for_grid(config.grid, config.guard_pixels);

  std::vector<DatasetEntry> entries;
  entries.reserve(plan.size());
  for (std::size_t i = 0; i < plan.size(); ++i) {
    try {
      DatasetEntry e;
      e.index = i;
      e.model_id = models[plan[i].first].model_id;
      e.view_angle_deg = plan[i].second;
      e.split = i < config.train_pairs ? Split::train : Split::test;
      e.target_seed = derive_seed(config.seed, i, 1);
      e.noise_seed = derive_seed(config.seed, i, 2);
      auto model = models[plan[i].first];
      model.extent_m = extent;
      e.scatterers = snap_to_pixels(
          generate_target(model, e.view_angle_deg, e.target_seed, config.grid, config.guard_pixels),
          config.grid);
      e.clean = rasterize_clean(e.scatterers, config.grid);
      e.degraded = degrade(config, bank, e.scatterers, e.clean, e.noise_seed);
      entries.push_back(std::move(e));
    } catch (const Error& err) {
      throw err.with_context("dataset entry " + std::to_string(i) + ": ");
    }
  }
  return entries;
}

void write_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  json j;
  j["format"] = "nfsar-manifest";
  j["version"] = 1;
  j["seed"] = m.seed;
  j["config"] = to_json(m.config);
  j["counts"] = {{"train", m.count(Split::train)}, {"test", m.count(Split::test)}};
  json list = json::array();
  for (const auto& e : m.entries)
    list.push_back({{"clean", e.clean_path},
                    {"degraded", e.degraded_path},
                    {"model_id", e.model_id},
                    {"view_angle_deg", e.view_angle_deg},
                    {"split", to_string(e.split)},
                    {"target_seed", e.target_seed},
                    {"noise_seed", e.noise_seed}});
  j["entries"] = std::move(list);
  io::write_text(path, j.dump(2) + "\n");
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(io::read_text(path));
  } catch (const json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "nfsar-manifest") throw IoError(path.string() + ": not a manifest");
  DatasetManifest m;
  m.root = path.parent_path();
  try {
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config = parse_dataset_config(j.at("config"));
    for (const auto& e : j.at("entries")) {
      ManifestEntry me;
      me.clean_path = e.at("clean").get<std::string>();
      me.degraded_path = e.at("degraded").get<std::string>();
      me.model_id = e.at("model_id").get<int>();
      me.view_angle_deg = e.at("view_angle_deg").get<double>();
      me.split = parse_split(e.at("split").get<std::string>());
      me.target_seed = e.at("target_seed").get<std::uint64_t>();
      me.noise_seed = e.at("noise_seed").get<std::uint64_t>();
      m.entries.push_back(std::move(me));
    }
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": malformed manifest: " + e.what());
  }
  return m;
}

DatasetManifest build_dataset(const DatasetConfig& config, const std::filesystem::path& out_dir) {
  const auto entries = generate_dataset(config);
  DatasetManifest m;
  m.config = config;
  m.seed = config.seed;
  m.root = out_dir;
  for (const auto& e : entries) {
    char name[32];
    std::snprintf(name, sizeof name, "%03zu.nfsi", e.index);
    ManifestEntry me;
    me.clean_path = std::string("clean/") + name;
    me.degraded_path = std::string("degraded/") + name;
    me.model_id = e.model_id;
    me.view_angle_deg = e.view_angle_deg;
    me.split = e.split;
    me.target_seed = e.target_seed;
    me.noise_seed = e.noise_seed;
    try {
      io::write_image(out_dir / me.clean_path, e.clean);
      io::write_image(out_dir / me.degraded_path, e.degraded);
    } catch (const IoError& err) {
      throw IoError("dataset entry " + std::to_string(e.index) + ": " + err.what());
    }
    m.entries.push_back(std::move(me));
  }
  write_manifest(m, out_dir / "manifest.json");
  return m;
}

std::vector<ImagePair> load_split(const DatasetManifest& m, Split s) {
  std::vector<ImagePair> out;
  for (const auto& e : m.entries) {
    if (e.split != s) continue;
    ImagePair p{io::read_image(m.root / e.clean_path), io::read_image(m.root / e.degraded_path)};
    require_same_grid(p.clean.grid(), m.config.grid, "manifest entry");
    require_same_grid(p.degraded.grid(), m.config.grid, "manifest entry");
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace nfsar
