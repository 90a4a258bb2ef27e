#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nfsar/degradation.hpp"
#include "nfsar/geometry.hpp"
#include "nfsar/image.hpp"
#include "nfsar/scatterers.hpp"

namespace nfsar {

struct AmplitudeTier {
  double min = 0.0;
  double max = 0.0;
};

/// Parametric aircraft layout in body coordinates (u toward the nose, v to
/// the right wing), lengths normalised so the layout fits the unit disc.
struct TargetModel {
  int model_id = 0;
  std::string name = "airliner";
  double fuselage_length = 1.9;
  double fuselage_width = 0.14;
  double wing_span = 1.6;
  double wing_sweep_deg = 25.0;
  double wing_root_chord = 0.30;
  double wing_tip_chord = 0.12;
  double wing_station = 0.15;  ///< u of the wing-root leading edge
  double tail_span = 0.6;
  double tail_sweep_deg = 30.0;
  double tail_chord = 0.14;
  int engines_per_wing = 1;
  double spacing = 0.05;        ///< distance between distributed scatterers
  double jitter = 0.01;         ///< uniform position jitter per coordinate
  double extent_m = 0.2;        ///< physical radius of the unit disc
  AmplitudeTier strong{0.7, 1.0};
  AmplitudeTier weak{0.05, 0.3};
  std::size_t min_scatterers = 50;
  std::size_t max_scatterers = 500;

  void validate() const;
};

/// Ten built-in airframes differing in span, sweep, chord and engine count.
const std::vector<TargetModel>& builtin_models();

/// Largest extent_m for which any rotation stays `guard` pixels inside `grid`.
double max_extent_for_grid(const ImageGrid& grid, std::size_t guard = 8);

/// Scatterers of `model` rotated by `view_angle_deg` about the grid centre
/// pixel (nx/2, ny/2). Strong scatterers sit at part junctions, tips and
/// engines; weak ones are spread along edges. Throws OutOfBounds when a
/// scatterer falls inside the guard band.
ScattererSet generate_target(const TargetModel& model, double view_angle_deg, std::uint64_t seed,
                             const ImageGrid& grid, std::size_t guard = 8);

/// Number of scatterers in the weak amplitude tier.
std::size_t count_weak(const ScattererSet& s, const TargetModel& model);

/// Throws OutOfBounds unless every scatterer's nearest pixel lies at least
/// `guard` pixels from the image border.
void check_guard(const ScattererSet& s, const ImageGrid& grid, std::size_t guard = 8);

/// Moves each scatterer to the centre of its nearest pixel.
ScattererSet snap_to_pixels(const ScattererSet& s, const ImageGrid& grid);

/// Ideal impulse image: each amplitude added to its nearest pixel.
ComplexImage rasterize_clean(const ScattererSet& s, const ImageGrid& grid);

enum class GenerationPath { operator_model, echo_backprojection };
enum class Split { train, test };

const char* to_string(GenerationPath p);
const char* to_string(Split s);

struct DatasetConfig {
  SceneGeometry geometry;
  ImageGrid grid = ImageGrid::centered(64, 64, 0.01, 0.02, 3.0);
  std::size_t block_size = 8;
  double taper_width = 0.0;
  std::size_t model_count = 10;
  std::vector<double> view_angles_deg = {0, 30, 60, 90, 120, 150, 180, 210, 240, 270, 300, 330};
  std::size_t total_pairs = 72;
  std::size_t train_pairs = 60;
  std::optional<double> image_snr_db = 30.0;
  std::optional<double> echo_snr_db;
  GenerationPath path = GenerationPath::operator_model;
  std::size_t guard_pixels = 8;
  /// Fraction of max_extent_for_grid used by the targets.
  double extent_fraction = 1.0;
  std::uint64_t seed = 20240601;

  void validate() const;
  /// 120 pairs (100 train / 20 test) on a 256 x 256 grid of 0.008 m pixels.
  static DatasetConfig paper_scale();
};

/// Block bank described by a dataset configuration.
BlockMaskBank dataset_bank(const DatasetConfig& config);

struct DatasetEntry {
  std::size_t index = 0;
  int model_id = 0;
  double view_angle_deg = 0.0;
  Split split = Split::train;
  std::uint64_t target_seed = 0;
  std::uint64_t noise_seed = 0;
  ScattererSet scatterers;
  ComplexImage clean;
  ComplexImage degraded;
};

struct ManifestEntry {
  std::string clean_path;
  std::string degraded_path;
  int model_id = 0;
  double view_angle_deg = 0.0;
  Split split = Split::train;
  std::uint64_t target_seed = 0;
  std::uint64_t noise_seed = 0;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  DatasetConfig config;
  std::uint64_t seed = 0;
  std::filesystem::path root;  ///< directory holding the manifest

  std::size_t count(Split s) const;
};

/// Independent stream seed for entry `index` under `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t stream);

/// (model, angle) pairs selected for the dataset, in entry order.
std::vector<std::pair<std::size_t, double>> dataset_plan(const DatasetConfig& config);

/// Generates all entries in memory.
std::vector<DatasetEntry> generate_dataset(const DatasetConfig& config);

/// Degraded image for a clean scene under the configured path and noise.
ComplexImage degrade(const DatasetConfig& config, const BlockMaskBank& bank,
                     const ScattererSet& scatterers, const ComplexImage& clean,
                     std::uint64_t noise_seed);

/// Writes clean/degraded NFSI pairs plus manifest.json under `out_dir`.
DatasetManifest build_dataset(const DatasetConfig& config, const std::filesystem::path& out_dir);

void write_manifest(const DatasetManifest& m, const std::filesystem::path& path);
DatasetManifest read_manifest(const std::filesystem::path& path);

struct ImagePair {
  ComplexImage clean;
  ComplexImage degraded;
};

/// Loads the image pairs of one split.
std::vector<ImagePair> load_split(const DatasetManifest& m, Split s);

}  // namespace nfsar
