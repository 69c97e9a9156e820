#ifndef COLABEL_IO_HPP
#define COLABEL_IO_HPP

#include "colabel/core.hpp"
#include "colabel/potentials.hpp"
#include "colabel/superpixels.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace colabel {

// Binary P6 PPM, maxval 255.
Image read_ppm(const std::filesystem::path& path);
void write_ppm(const Image& image, const std::filesystem::path& path);

// "UNRY", u32 LE version=1, T, H, W, L, then T*H*W*L float32 LE in [t][y][x][l].
inline constexpr std::uint32_t kUnaryVersion = 1;
UnaryField read_unary(const std::filesystem::path& path);
void write_unary(const UnaryField& field, const std::filesystem::path& path);

// "LMAP", u32 LE version=1, T, H, W, then T*H*W u32 LE ids.
inline constexpr std::uint32_t kLabelMapVersion = 1;
LabelVolume read_labelmap(const std::filesystem::path& path);
void write_labelmap(const LabelVolume& labels, const std::filesystem::path& path);

/// Renders labels through the palette, one PPM per frame:
/// <dir>/<prefix>_00000.ppm, <prefix>_00001.ppm, ...
void write_color_map(const LabelVolume& labels, const LabelSet& label_set, const std::filesystem::path& dir,
                     const std::string& prefix = "frame");

/// Loads every *.ppm in `dir`. Temporal order is the lexicographic order of
/// the file names.
VideoVolume read_frames(const std::filesystem::path& dir);
void write_frames(const VideoVolume& video, const std::filesystem::path& dir, const std::string& prefix = "frame");

/// Whitespace-separated L x L matrix; '#' starts a comment.
RowMatrixXd read_matrix(const std::filesystem::path& path);

struct PnPottsLayerConfig {
  double gamma_max = 0.0;
  std::optional<MeanShiftParams> meanshift;
  std::optional<std::filesystem::path> regions;  // precomputed region map, one map per frame
};

struct PnPottsConfig {
  bool enabled = true;
  double gamma_low = 0.0;
  std::vector<PnPottsLayerConfig> layers;

  PnPottsParams params() const;
};

struct CooccurrenceConfig {
  bool enabled = false;
  double weight = 1.0;
  std::optional<std::filesystem::path> matrix;
  std::optional<std::filesystem::path> estimate_from;  // ground-truth label map, one map per frame
};

struct RunConfig {
  std::vector<KernelSpec> kernels;
  PnPottsConfig pn_potts;
  CooccurrenceConfig cooccurrence;
  MeanFieldConfig inference;
  std::optional<LabelSet> labels;

  /// Documented defaults: three kernels, three Pn-Potts layers, no co-occurrence.
  static RunConfig defaults();
};

/// Parses and validates a JSON document. Missing sections take defaults;
/// unknown keys are rejected. Relative paths resolve against `base_dir`.
RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const RunConfig& config);

}  // namespace colabel

#endif  // COLABEL_IO_HPP
