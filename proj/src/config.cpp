#include "nfsar/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "nfsar/errors.hpp"
#include "nfsar/io.hpp"

namespace nfsar {

namespace {

// Object view that records which keys were consumed so that leftovers can
// be reported as unknown.
class Strict {
 public:
  Strict(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be a JSON object");
  }

  template <class T>
  void read(const char* key, T& out) {
    const auto it = j_.find(key);
    seen_.insert(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  void read_optional(const char* key, std::optional<double>& out) {
    const auto it = j_.find(key);
    seen_.insert(key);
    if (it == j_.end()) return;
    if (it->is_null()) {
      out.reset();
      return;
    }
    if (!it->is_number()) throw ConfigError(where(key) + " must be a number or null");
    out = it->get<double>();
  }

  void read_optional(const char* key, std::optional<std::size_t>& out) {
    const auto it = j_.find(key);
    seen_.insert(key);
    if (it == j_.end()) return;
    if (it->is_null()) {
      out.reset();
      return;
    }
    if (!it->is_number_unsigned()) throw ConfigError(where(key) + " must be a count or null");
    out = it->get<std::size_t>();
  }

  void read_size(const char* key, std::size_t& out) {
    const auto it = j_.find(key);
    seen_.insert(key);
    if (it == j_.end()) return;
    if (!it->is_number_unsigned()) throw ConfigError(where(key) + " must be a non-negative integer");
    out = it->get<std::size_t>();
  }

  const json* section(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  bool has(const char* key) const { return j_.contains(key); }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError("unknown key " + where(k.c_str()));
  }

  std::string where(const char* key = nullptr) const {
    if (!key) return "'" + (path_.empty() ? std::string("<root>") : path_) + "'";
    return "'" + (path_.empty() ? std::string(key) : path_ + "." + key) + "'";
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void check(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

GenerationPath parse_path(const std::string& s) {
  if (s == "operator") return GenerationPath::operator_model;
  if (s == "echo") return GenerationPath::echo_backprojection;
  throw ConfigError("dataset.path must be \"operator\" or \"echo\", got \"" + s + "\"");
}

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "linear") return Activation::linear;
  throw ConfigError("network.activation must be \"relu\" or \"linear\", got \"" + s + "\"");
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void parse_arch_into(Strict& s, NetworkArch& a) {
  s.read_size("n_blocks", a.n_blocks);
  s.read_size("unet_levels", a.unet_levels);
  s.read_size("base_channels", a.base_channels);
  s.read_size("kernel_size", a.kernel_size);
  s.read("shared_theta", a.shared_theta);
  std::string act = a.activation == Activation::relu ? "relu" : "linear";
  s.read("activation", act);
  a.activation = parse_activation(act);
  s.read("residual", a.residual);
  s.finish();
}

}  // namespace

void SolverConfig::validate() const {
  check(std::isfinite(beta) && beta >= 0.0, "solver.beta must be >= 0");
  for (double b : beta_candidates)
    check(std::isfinite(b) && b >= 0.0, "solver.beta_candidates must be >= 0");
  check(!step_mu || (std::isfinite(*step_mu) && *step_mu > 0.0), "solver.step_mu must be > 0");
  check(backtracking_shrink > 0.0 && backtracking_shrink < 1.0,
        "solver.backtracking_shrink must lie in (0, 1)");
  check(max_iterations >= 1, "solver.max_iterations must be >= 1");
  check(stop_tolerance > 0.0, "solver.stop_tolerance must be > 0");
  check(clean_loop_gain > 0.0 && clean_loop_gain <= 1.0, "solver.clean_loop_gain must lie in (0, 1]");
  check(clean_stop_db > 0.0, "solver.clean_stop_db must be > 0");
  check(sva_weight_max >= 0.0, "solver.sva_weight_max must be >= 0");
  check(power_iterations >= 10, "solver.power_iterations must be >= 10");
}

void NetworkArch::validate() const {
  check(n_blocks >= 1, "network.n_blocks must be >= 1");
  check(unet_levels >= 1, "network.unet_levels must be >= 1");
  check(base_channels >= 1, "network.base_channels must be >= 1");
  check(kernel_size % 2 == 1, "network.kernel_size must be odd");
}

void TrainConfig::validate() const {
  check(epochs >= 1, "training.epochs must be >= 1");
  check(learning_rate > 0.0, "training.learning_rate must be > 0");
  check(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0,
        "training moment decays must lie in [0, 1)");
  check(epsilon > 0.0, "training.epsilon must be > 0");
  check(batch_size >= 1, "training.batch_size must be >= 1");
  check(!max_train_pairs || *max_train_pairs >= 1, "training.max_train_pairs must be >= 1");
}

void RunConfig::validate() const {
  dataset.validate();
  solver.validate();
  network.validate();
  training.validate();
  const std::size_t f = std::size_t{1} << network.unet_levels;
  check(dataset.grid.nx % f == 0 && dataset.grid.ny % f == 0,
        "grid dimensions must be divisible by 2^unet_levels");
}

RunConfig RunConfig::paper_scale() {
  RunConfig c;
  c.dataset = DatasetConfig::paper_scale();
  c.dataset.seed = c.seed;
  return c;
}

RunConfig parse_run_config(const json& j) {
  RunConfig c;
  Strict root(j, "");
  if (const json* v = root.section("preset")) {
    if (!v->is_string()) throw ConfigError("'preset' must be a string");
    if (*v == "paper") c = RunConfig::paper_scale();
    else if (*v != "desk") throw ConfigError("'preset' must be \"desk\" or \"paper\"");
  }
  root.read("seed", c.seed);
  root.read("deterministic", c.deterministic);
  c.dataset.seed = c.seed;
  auto& d = c.dataset;

  if (const json* v = root.section("geometry")) {
    Strict s(*v, "geometry");
    auto& g = d.geometry;
    s.read("center_frequency_hz", g.center_frequency_hz);
    s.read("bandwidth_hz", g.bandwidth_hz);
    s.read("aperture_length_m", g.aperture_length_m);
    s.read("center_range_m", g.center_range_m);
    s.read("propagation_speed_m_s", g.propagation_speed_m_s);
    s.read_size("aperture_samples", g.aperture_samples);
    s.read_size("frequency_samples", g.frequency_samples);
    s.finish();
  }
  {
    // The grid follows the centre range unless an origin is pinned.
    ImageGrid g = d.grid;
    bool pinned = false;
    if (const json* v = root.section("grid")) {
      Strict s(*v, "grid");
      s.read_size("nx", g.nx);
      s.read_size("ny", g.ny);
      s.read("dx_m", g.dx_m);
      s.read("dy_m", g.dy_m);
      pinned = s.has("origin_x_m") || s.has("origin_y_m");
      if (pinned) {
        s.read("origin_x_m", g.origin_x_m);
        s.read("origin_y_m", g.origin_y_m);
      }
      s.finish();
    }
    if (!pinned) g = ImageGrid::centered(g.nx, g.ny, g.dx_m, g.dy_m, d.geometry.center_range_m);
    d.grid = g;
  }
  if (const json* v = root.section("bank")) {
    Strict s(*v, "bank");
    s.read_size("block_size", d.block_size);
    s.read("taper_width", d.taper_width);
    s.finish();
  }
  if (const json* v = root.section("noise")) {
    Strict s(*v, "noise");
    s.read_optional("image_snr_db", d.image_snr_db);
    s.read_optional("echo_snr_db", d.echo_snr_db);
    s.finish();
  }
  if (const json* v = root.section("dataset")) {
    Strict s(*v, "dataset");
    s.read_size("model_count", d.model_count);
    s.read("view_angles_deg", d.view_angles_deg);
    s.read_size("total_pairs", d.total_pairs);
    s.read_size("train_pairs", d.train_pairs);
    std::string path = d.path == GenerationPath::operator_model ? "operator" : "echo";
    s.read("path", path);
    d.path = parse_path(path);
    s.read_size("guard_pixels", d.guard_pixels);
    s.read("extent_fraction", d.extent_fraction);
    s.finish();
  }
  if (const json* v = root.section("solver")) {
    Strict s(*v, "solver");
    auto& o = c.solver;
    s.read("beta", o.beta);
    s.read("beta_candidates", o.beta_candidates);
    s.read_optional("step_mu", o.step_mu);
    s.read("backtracking", o.backtracking);
    s.read("backtracking_shrink", o.backtracking_shrink);
    s.read("step_growth", o.step_growth);
    s.read_size("max_iterations", o.max_iterations);
    s.read("stop_tolerance", o.stop_tolerance);
    s.read("clean_loop_gain", o.clean_loop_gain);
    s.read("clean_stop_db", o.clean_stop_db);
    s.read_size("clean_max_iterations", o.clean_max_iterations);
    s.read("sva_weight_max", o.sva_weight_max);
    s.read_size("power_iterations", o.power_iterations);
    s.finish();
  }
  if (const json* v = root.section("network")) {
    Strict s(*v, "network");
    parse_arch_into(s, c.network);
  }
  if (const json* v = root.section("training")) {
    Strict s(*v, "training");
    auto& t = c.training;
    s.read_size("epochs", t.epochs);
    s.read("learning_rate", t.learning_rate);
    s.read("beta1", t.beta1);
    s.read("beta2", t.beta2);
    s.read("epsilon", t.epsilon);
    s.read_size("batch_size", t.batch_size);
    s.read("seed", t.seed);
    s.read("deterministic", t.deterministic);
    s.read_optional("max_train_pairs", t.max_train_pairs);
    s.finish();
  }
  root.finish();
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const std::string text = io::read_text(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_run_config(j);
}

json to_json(const DatasetConfig& d) {
  const auto& g = d.geometry;
  json j;
  j["seed"] = d.seed;
  j["geometry"] = {{"center_frequency_hz", g.center_frequency_hz},
                   {"bandwidth_hz", g.bandwidth_hz},
                   {"aperture_length_m", g.aperture_length_m},
                   {"center_range_m", g.center_range_m},
                   {"propagation_speed_m_s", g.propagation_speed_m_s},
                   {"aperture_samples", g.aperture_samples},
                   {"frequency_samples", g.frequency_samples}};
  j["grid"] = {{"nx", d.grid.nx},         {"ny", d.grid.ny},
               {"dx_m", d.grid.dx_m},     {"dy_m", d.grid.dy_m},
               {"origin_x_m", d.grid.origin_x_m}, {"origin_y_m", d.grid.origin_y_m}};
  j["bank"] = {{"block_size", d.block_size}, {"taper_width", d.taper_width}};
  j["noise"] = {{"image_snr_db", optional_json(d.image_snr_db)},
                {"echo_snr_db", optional_json(d.echo_snr_db)}};
  j["dataset"] = {{"model_count", d.model_count},
                  {"view_angles_deg", d.view_angles_deg},
                  {"total_pairs", d.total_pairs},
                  {"train_pairs", d.train_pairs},
                  {"path", d.path == GenerationPath::operator_model ? "operator" : "echo"},
                  {"guard_pixels", d.guard_pixels},
                  {"extent_fraction", d.extent_fraction}};
  return j;
}

DatasetConfig parse_dataset_config(const json& j) { return parse_run_config(j).dataset; }

json to_json(const NetworkArch& a) {
  return {{"n_blocks", a.n_blocks},
          {"unet_levels", a.unet_levels},
          {"base_channels", a.base_channels},
          {"kernel_size", a.kernel_size},
          {"shared_theta", a.shared_theta},
          {"activation", a.activation == Activation::relu ? "relu" : "linear"},
          {"residual", a.residual}};
}

NetworkArch parse_network_arch(const json& j) {
  NetworkArch a;
  Strict s(j, "network");
  parse_arch_into(s, a);
  a.validate();
  return a;
}

json to_json(const RunConfig& c) {
  json j = to_json(c.dataset);
  j["seed"] = c.seed;
  j["deterministic"] = c.deterministic;
  const auto& o = c.solver;
  j["solver"] = {{"beta", o.beta},
                 {"beta_candidates", o.beta_candidates},
                 {"step_mu", optional_json(o.step_mu)},
                 {"backtracking", o.backtracking},
                 {"backtracking_shrink", o.backtracking_shrink},
                 {"step_growth", o.step_growth},
                 {"max_iterations", o.max_iterations},
                 {"stop_tolerance", o.stop_tolerance},
                 {"clean_loop_gain", o.clean_loop_gain},
                 {"clean_stop_db", o.clean_stop_db},
                 {"clean_max_iterations", o.clean_max_iterations},
                 {"sva_weight_max", o.sva_weight_max},
                 {"power_iterations", o.power_iterations}};
  j["network"] = to_json(c.network);
  const auto& t = c.training;
  j["training"] = {{"epochs", t.epochs},
                   {"learning_rate", t.learning_rate},
                   {"beta1", t.beta1},
                   {"beta2", t.beta2},
                   {"epsilon", t.epsilon},
                   {"batch_size", t.batch_size},
                   {"seed", t.seed},
                   {"deterministic", t.deterministic},
                   {"max_train_pairs", t.max_train_pairs ? json(*t.max_train_pairs) : json(nullptr)}};
  return j;
}

}  // namespace nfsar
