#include "nfsar/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>

#include "CLI11.hpp"

#include "nfsar/config.hpp"
#include "nfsar/errors.hpp"
#include "nfsar/evaluate.hpp"
#include "nfsar/io.hpp"
#include "nfsar/metrics.hpp"
#include "nfsar/scenes.hpp"
#include "nfsar/spectral.hpp"
#include "nfsar/unrolled.hpp"

namespace nfsar::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  bool paper_scale = false;
  std::string out;
  std::string manifest;
  std::string checkpoint;
  std::string log;
  std::string stats;
  std::string input;
  std::string method;
  std::string methods;
  std::string pgm;
  std::string png;
  std::optional<std::size_t> block;
  std::vector<double> point;
};

RunConfig load_config(const Options& o) {
  json j = json::object();
  if (!o.config.empty()) {
    try {
      j = json::parse(io::read_text(o.config));
    } catch (const json::parse_error& e) {
      throw ConfigError(o.config + ": " + e.what());
    }
  }
  if (o.paper_scale) {
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    if (j.contains("preset") && j["preset"] != "paper")
      throw ConfigError("--paper-scale conflicts with the configured preset");
    j["preset"] = "paper";
  }
  return parse_run_config(j);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void export_views(const ComplexImage& img, const Options& o) {
  if (!o.pgm.empty()) io::write_pgm(o.pgm, img);
  if (!o.png.empty()) io::write_png(o.png, img);
}

std::vector<solvers::Method> parse_methods(const std::string& list) {
  std::vector<solvers::Method> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const auto end = std::min(list.find(',', pos), list.size());
    const auto name = list.substr(pos, end - pos);
    if (!name.empty()) {
      const auto m = solvers::parse_method(name);
      if (std::find(out.begin(), out.end(), m) != out.end())
        throw ConfigError("method '" + name + "' listed twice");
      out.push_back(m);
    }
    pos = end + 1;
  }
  if (out.empty()) throw ConfigError("no methods given");
  return out;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const RunConfig cfg = load_config(o);
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(o.out);
  const auto m = build_dataset(cfg.dataset, o.out);
  io::write_text(fs::path(o.out) / "config.json", to_json(cfg).dump(2) + "\n");
  out << "wrote " << m.entries.size() << " pairs (" << m.count(Split::train) << " train, "
      << m.count(Split::test) << " test) of " << cfg.dataset.grid.nx << "x" << cfg.dataset.grid.ny
      << " to " << o.out << " in " << seconds_since(t0) << " s\n";
  return ok;
}

int cmd_train(const Options& o, std::ostream& out) {
  const RunConfig cfg = load_config(o);
  const auto manifest = read_manifest(o.manifest);
  const auto bank = dataset_bank(manifest.config);
  const fs::path log_path = o.log.empty() ? fs::path(o.out).replace_extension(".jsonl") : fs::path(o.log);
  std::ofstream log(log_path, std::ios::binary | std::ios::trunc);
  if (!log) throw IoError("cannot open " + log_path.string() + " for writing");

  const auto t0 = std::chrono::steady_clock::now();
  const auto result = unrolled::train(manifest, cfg.network, cfg.training, bank, [&](const unrolled::EpochLog& e) {
    log << e.to_json().dump() << "\n";
    log.flush();
    if (!log) throw IoError("cannot write " + log_path.string());
    char line[160];
    std::snprintf(line, sizeof line, "epoch %zu train %.6g test %s\n", e.epoch, e.train_loss,
                  e.test_loss ? std::to_string(*e.test_loss).c_str() : "-");
    out << line << std::flush;
  });
  const json extra = {{"best_epoch", result.best_epoch},
                      {"initial_train_loss", result.initial_train_loss},
                      {"dataset", to_json(manifest.config)}};
  unrolled::save_checkpoint(o.out, result.params, extra);
  out << "saved epoch " << result.best_epoch << " parameters to " << o.out << " after "
      << seconds_since(t0) << " s\n";
  return ok;
}

/// Bank for single-image commands: the manifest's dataset when given,
/// otherwise the run configuration's.
BlockMaskBank command_bank(const Options& o, const RunConfig& cfg) {
  if (!o.manifest.empty()) return dataset_bank(read_manifest(o.manifest).config);
  return dataset_bank(cfg.dataset);
}

int cmd_restore(const Options& o, std::ostream& out) {
  const RunConfig cfg = load_config(o);
  const auto method = solvers::parse_method(o.method);
  const bool network = method == solvers::Method::network;
  if (network && o.checkpoint.empty()) throw MissingCheckpoint("the network method needs --checkpoint");
  if (!network && !o.checkpoint.empty())
    throw ConfigError("--checkpoint only applies to the network method");

  const auto y = io::read_image(o.input);
  const auto bank = command_bank(o, cfg);
  require_same_grid(y.grid(), bank.grid(), "restore");
  std::optional<unrolled::NetworkParams> params;
  if (network) params = unrolled::load_checkpoint(o.checkpoint);

  const auto t0 = std::chrono::steady_clock::now();
  const auto x = eval::restore(method, y, bank, cfg.solver, params ? &*params : nullptr);
  const double elapsed = seconds_since(t0);
  io::write_image(o.out, x);
  export_views(x, o);

  json stats = {{"method", solvers::to_string(method)},
                {"input", o.input},
                {"rows", x.ny()},
                {"cols", x.nx()},
                {"peak", x.max_abs()},
                {"energy", x.norm_squared()},
                {"seconds", elapsed}};
  if (method == solvers::Method::sparsity || method == solvers::Method::deconv)
    stats["beta"] = cfg.solver.beta;
  const auto stats_path = o.stats.empty() ? fs::path(o.out).replace_extension(".json") : fs::path(o.stats);
  io::write_text(stats_path, stats.dump(2) + "\n");
  out << solvers::to_string(method) << " restored " << o.input << " -> " << o.out << " in " << elapsed
      << " s\n";
  return ok;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  const RunConfig cfg = load_config(o);
  const auto manifest = read_manifest(o.manifest);
  const auto bank = dataset_bank(manifest.config);
  std::vector<solvers::Method> methods;
  if (!o.methods.empty()) {
    methods = parse_methods(o.methods);
  } else {
    methods = {solvers::Method::sparsity, solvers::Method::deconv, solvers::Method::clean,
               solvers::Method::sva};
    if (!o.checkpoint.empty()) methods.push_back(solvers::Method::network);
  }
  std::optional<unrolled::NetworkParams> params;
  if (!o.checkpoint.empty()) params = unrolled::load_checkpoint(o.checkpoint);

  const auto test = load_split(manifest, Split::test);
  std::vector<ImagePair> train;
  if (!cfg.solver.beta_candidates.empty()) train = load_split(manifest, Split::train);

  eval::Report report;
  report.images = test.size();
  json betas = json::object();
  for (auto m : methods) {
    SolverConfig sc = cfg.solver;
    if ((m == solvers::Method::sparsity || m == solvers::Method::deconv) && !train.empty()) {
      const auto sweep = eval::tune_beta(train, bank, sc, m, sc.beta_candidates);
      sc.beta = sweep.best;
      json table = json::array();
      for (const auto& [b, v] : sweep.mse_by_beta) table.push_back({{"beta", b}, {"mse", v}});
      betas[solvers::to_string(m)] = {{"chosen", sc.beta}, {"sweep", table}};
    } else if (m == solvers::Method::sparsity || m == solvers::Method::deconv) {
      betas[solvers::to_string(m)] = {{"chosen", sc.beta}};
    }
    const std::vector<solvers::Method> one{m};
    auto r = eval::evaluate(test, bank, sc, one, params ? &*params : nullptr);
    report.scores.push_back(std::move(r.scores.front()));
    out << solvers::to_string(m) << " done\n" << std::flush;
  }
  report.settings = {{"manifest", o.manifest}, {"beta", betas}};
  if (!o.checkpoint.empty()) report.settings["checkpoint"] = o.checkpoint;
  out << report.table();
  if (!o.out.empty()) io::write_text(o.out, report.to_json().dump(2) + "\n");
  return ok;
}

int cmd_psf(const Options& o, std::ostream& out) {
  const RunConfig cfg = load_config(o);
  const auto bank = command_bank(o, cfg);
  const auto& grid = bank.grid();
  json info;
  SpectralMask mask;
  if (o.block) {
    if (*o.block >= bank.block_count())
      throw InvalidArgument("block " + std::to_string(*o.block) + " out of range (bank has " +
                            std::to_string(bank.block_count()) + ")");
    const auto& b = bank.block(*o.block);
    mask = b.dense_mask(grid.size());
    info = {{"block", *o.block}, {"center_m", {b.center.x_m, b.center.y_m}}};
  } else {
    const ScenePoint p{o.point[0], o.point[1]};
    mask = spectral_support(bank.geometry(), p, KGrid::from(grid), {bank.taper_width()});
    info = {{"point_m", {p.x_m, p.y_m}}};
  }
  const auto img = psf_image(mask, grid);
  const std::size_t peak = img.argmax_abs();
  const std::size_t px = peak % grid.nx, py = peak / grid.nx;
  info["peak_pixel"] = {px, py};
  try {
    const auto w = metrics::mainlobe_width(img, px, py);
    info["width_x_m"] = w.width_x_m;
    info["width_y_m"] = w.width_y_m;
  } catch (const NoCrossing&) {
    info["width_x_m"] = nullptr;
    info["width_y_m"] = nullptr;
  }
  const fs::path prefix(o.out);
  io::write_image(fs::path(prefix).concat(".nfsi"), img);
  io::write_pgm(fs::path(prefix).concat(".pgm"), img);
  if (!o.png.empty()) io::write_png(o.png, img);
  io::write_text(fs::path(prefix).concat(".json"), info.dump(2) + "\n");
  out << info.dump() << "\n";
  return ok;
}

int exit_code(ErrorClass c) {
  switch (c) {
    case ErrorClass::config: return config_error;
    case ErrorClass::numeric: return numeric_error;
    case ErrorClass::io: return io_error;
  }
  return numeric_error;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Near-field SAR image restoration toolkit", "nfsar"};
  app.require_subcommand(1);
  Options o;

  auto config_opts = [&](CLI::App* c) {
    c->add_option("--config", o.config, "JSON run configuration");
  };

  auto* sim = app.add_subcommand("simulate", "Generate a dataset of clean/degraded image pairs");
  config_opts(sim);
  sim->add_flag("--paper-scale", o.paper_scale, "Start from the 256x256, 120-pair preset");
  sim->add_option("--out", o.out, "Output directory")->required();

  auto* tr = app.add_subcommand("train", "Train the unrolled network on a dataset");
  config_opts(tr);
  tr->add_option("--manifest", o.manifest, "Dataset manifest.json")->required();
  tr->add_option("--out", o.out, "Checkpoint file")->required();
  tr->add_option("--log", o.log, "JSONL training log (default: checkpoint path with .jsonl)");

  auto* rs = app.add_subcommand("restore", "Restore one NFSI image");
  config_opts(rs);
  rs->add_option("method", o.method, "sparsity | deconv | clean | sva | network")->required();
  rs->add_option("--input", o.input, "Degraded NFSI image")->required();
  rs->add_option("--out", o.out, "Restored NFSI image")->required();
  rs->add_option("--manifest", o.manifest, "Take the imaging setup from a dataset manifest");
  rs->add_option("--checkpoint", o.checkpoint, "Network checkpoint");
  rs->add_option("--stats", o.stats, "Stats JSON (default: output path with .json)");
  rs->add_option("--pgm", o.pgm, "dB magnitude PGM export");
  rs->add_option("--png", o.png, "dB magnitude PNG export");

  auto* ev = app.add_subcommand("evaluate", "Score restoration methods on a test split");
  config_opts(ev);
  ev->add_option("--manifest", o.manifest, "Dataset manifest.json")->required();
  ev->add_option("--checkpoint", o.checkpoint, "Network checkpoint");
  ev->add_option("--methods", o.methods, "Comma-separated method list");
  ev->add_option("--out", o.out, "Report JSON");

  auto* ps = app.add_subcommand("psf", "Render a point spread function");
  config_opts(ps);
  ps->add_option("--manifest", o.manifest, "Take the imaging setup from a dataset manifest");
  auto* blk = ps->add_option("--block", o.block, "Block index");
  auto* pt = ps->add_option("--point", o.point, "Scene point x,y in metres")->expected(2)->delimiter(',');
  blk->excludes(pt);
  ps->add_option("--out", o.out, "Output prefix (.nfsi, .pgm, .json)")->required();
  ps->add_option("--png", o.png, "dB magnitude PNG export");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (ps->parsed() && !o.block && o.point.empty()) throw CLI::RequiredError("--block or --point");
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : config_error;
  }

  try {
    if (sim->parsed()) return cmd_simulate(o, out);
    if (tr->parsed()) return cmd_train(o, out);
    if (rs->parsed()) return cmd_restore(o, out);
    if (ev->parsed()) return cmd_evaluate(o, out);
    return cmd_psf(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.error_class());
  } catch (const fs::filesystem_error& e) {
    err << "error: IoError: " << e.what() << "\n";
    return io_error;
  } catch (const json::exception& e) {
    err << "error: ConfigError: " << e.what() << "\n";
    return config_error;
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return numeric_error;
  }
}

}  // namespace nfsar::cli
