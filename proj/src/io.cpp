#include "colabel/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace colabel {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(path.string() + ": cannot open for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(path.string() + ": write failed");
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

std::uint32_t checked_u32(Index v, const char* what) {
  if (v < 0 || v > static_cast<Index>(UINT32_MAX)) throw Error(std::string(what) + " does not fit in 32 bits");
  return static_cast<std::uint32_t>(v);
}

// Parses magic + `count` u32 fields; checks version (the first field).
std::vector<std::uint32_t> read_header(const std::vector<std::uint8_t>& bytes, const fs::path& path,
                                       const char* magic, int count, std::uint32_t version) {
  const std::size_t header = 4 + 4 * static_cast<std::size_t>(count);
  if (bytes.size() < header)
    throw Error(path.string() + ": truncated header (" + std::to_string(bytes.size()) + " of " +
                std::to_string(header) + " bytes)");
  if (!std::equal(magic, magic + 4, bytes.begin()))
    throw Error(path.string() + ": bad magic, expected \"" + std::string(magic, 4) + "\"");
  std::vector<std::uint32_t> fields;
  for (int k = 0; k < count; ++k) fields.push_back(get_u32(bytes.data() + 4 + 4 * k));
  if (fields[0] != version)
    throw Error(path.string() + ": unsupported version " + std::to_string(fields[0]) + " (expected " +
                std::to_string(version) + ")");
  return fields;
}

void check_payload(const std::vector<std::uint8_t>& bytes, std::size_t header, std::uint64_t expected,
                   const fs::path& path) {
  const std::uint64_t actual = bytes.size() - header;
  if (actual != expected)
    throw Error(path.string() + ": size mismatch, header declares " + std::to_string(expected) +
                " payload bytes, file has " + std::to_string(actual));
}

std::string frame_name(const std::string& prefix, Index t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%05ld.ppm", static_cast<long>(t));
  return prefix + buf;
}

// ---- config reading ----

class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& what) const { throw Error("config: " + path_ + ": " + what); }

  const json& value() const { return value_; }
  const std::string& path() const { return path_; }

  void expect_object(std::initializer_list<const char*> allowed) const {
    if (!value_.is_object()) fail("expected an object");
    for (const auto& [key, _] : value_.items())
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
        Node(value_, child_path(key)).fail("unknown key");
  }

  bool has(const char* key) const { return value_.contains(key) && !value_.at(key).is_null(); }
  Node at(const char* key) const { return {value_.at(key), child_path(key)}; }
  Node at(std::size_t i) const { return {value_.at(i), path_ + "[" + std::to_string(i) + "]"}; }

  double number() const {
    if (!value_.is_number()) fail("expected a number");
    const double v = value_.get<double>();
    if (!std::isfinite(v)) fail("must be finite");
    return v;
  }

  int integer() const {
    if (!value_.is_number_integer()) fail("expected an integer");
    return value_.get<int>();
  }

  bool boolean() const {
    if (!value_.is_boolean()) fail("expected true or false");
    return value_.get<bool>();
  }

  std::string string() const {
    if (!value_.is_string()) fail("expected a string");
    return value_.get<std::string>();
  }

  std::size_t array_size() const {
    if (!value_.is_array()) fail("expected an array");
    return value_.size();
  }

  double number_or(const char* key, double fallback) const { return has(key) ? at(key).number() : fallback; }
  int integer_or(const char* key, int fallback) const { return has(key) ? at(key).integer() : fallback; }
  bool boolean_or(const char* key, bool fallback) const { return has(key) ? at(key).boolean() : fallback; }

 private:
  std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& value_;
  std::string path_;
};

double positive(const Node& parent, const char* key, double fallback) {
  const double v = parent.number_or(key, fallback);
  if (!(v > 0.0)) (parent.has(key) ? parent.at(key) : parent).fail(std::string(key) + " must be positive");
  return v;
}

KernelSpec parse_kernel(const Node& node) {
  node.expect_object({"kind", "weight", "spatial", "color", "temporal"});
  if (!node.has("kind")) node.fail("missing \"kind\"");
  KernelKind kind{};
  try {
    kind = kernel_kind_from_string(node.at("kind").string());
  } catch (const Error& e) {
    node.at("kind").fail(e.what());
  }
  KernelSpec fallback{};
  for (const auto& k : default_kernels())
    if (k.kind == kind) fallback = k;
  KernelSpec spec{kind, node.number_or("weight", fallback.weight), 0.0, 0.0, 0.0};
  if (spec.weight < 0.0) node.at("weight").fail("must be >= 0");
  const bool spatial = kind != KernelKind::global_appearance;
  const bool color = kind != KernelKind::smoothness;
  if (!spatial && node.has("spatial")) node.at("spatial").fail("not used by " + to_string(kind));
  if (!spatial && node.has("temporal")) node.at("temporal").fail("not used by " + to_string(kind));
  if (!color && node.has("color")) node.at("color").fail("not used by " + to_string(kind));
  if (spatial) {
    spec.spatial = positive(node, "spatial", fallback.spatial);
    spec.temporal = positive(node, "temporal", fallback.temporal);
  }
  if (color) spec.color = positive(node, "color", fallback.color);
  return spec;
}

MeanShiftParams parse_meanshift(const Node& node) {
  node.expect_object({"spatial_bandwidth", "range_bandwidth", "min_region_size", "max_iterations", "convergence_eps"});
  MeanShiftParams p;
  p.spatial_bandwidth = positive(node, "spatial_bandwidth", p.spatial_bandwidth);
  p.range_bandwidth = positive(node, "range_bandwidth", p.range_bandwidth);
  p.min_region_size = node.integer_or("min_region_size", p.min_region_size);
  if (p.min_region_size < 1) node.at("min_region_size").fail("must be >= 1");
  p.max_iterations = node.integer_or("max_iterations", p.max_iterations);
  if (p.max_iterations < 1) node.at("max_iterations").fail("must be >= 1");
  p.convergence_eps = positive(node, "convergence_eps", p.convergence_eps);
  return p;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

PnPottsConfig parse_pn_potts(const Node& node, const fs::path& base) {
  node.expect_object({"enabled", "gamma_low", "layers"});
  PnPottsConfig cfg = RunConfig::defaults().pn_potts;
  cfg.enabled = node.boolean_or("enabled", cfg.enabled);
  cfg.gamma_low = node.number_or("gamma_low", cfg.gamma_low);
  if (cfg.gamma_low < 0.0) node.at("gamma_low").fail("must be >= 0");
  if (node.has("layers")) {
    const Node layers = node.at("layers");
    cfg.layers.clear();
    for (std::size_t i = 0; i < layers.array_size(); ++i) {
      const Node layer = layers.at(i);
      layer.expect_object({"gamma_max", "meanshift", "regions"});
      PnPottsLayerConfig lc;
      if (!layer.has("gamma_max")) layer.fail("missing \"gamma_max\"");
      lc.gamma_max = layer.at("gamma_max").number();
      if (!(lc.gamma_max > cfg.gamma_low)) layer.at("gamma_max").fail("must exceed gamma_low");
      if (layer.has("meanshift") == layer.has("regions"))
        layer.fail("needs exactly one of \"meanshift\" or \"regions\"");
      if (layer.has("meanshift")) lc.meanshift = parse_meanshift(layer.at("meanshift"));
      if (layer.has("regions")) lc.regions = resolve(base, layer.at("regions").string());
      cfg.layers.push_back(std::move(lc));
    }
  }
  if (cfg.enabled && cfg.layers.empty()) node.fail("enabled with no layers");
  return cfg;
}

CooccurrenceConfig parse_cooccurrence(const Node& node, const fs::path& base) {
  node.expect_object({"enabled", "weight", "matrix", "estimate_from"});
  CooccurrenceConfig cfg;
  cfg.enabled = node.boolean_or("enabled", true);
  cfg.weight = node.number_or("weight", cfg.weight);
  if (cfg.weight < 0.0) node.at("weight").fail("must be >= 0");
  if (node.has("matrix")) cfg.matrix = resolve(base, node.at("matrix").string());
  if (node.has("estimate_from")) cfg.estimate_from = resolve(base, node.at("estimate_from").string());
  if (cfg.matrix && cfg.estimate_from) node.fail("give only one of \"matrix\" or \"estimate_from\"");
  if (cfg.enabled && !cfg.matrix && !cfg.estimate_from) node.fail("enabled needs \"matrix\" or \"estimate_from\"");
  return cfg;
}

MeanFieldConfig parse_inference(const Node& node) {
  node.expect_object({"iterations", "batch_size", "q_floor", "convergence_tol"});
  MeanFieldConfig cfg;
  cfg.iterations = node.integer_or("iterations", cfg.iterations);
  if (cfg.iterations < 1) node.at("iterations").fail("must be >= 1");
  cfg.batch_size = node.integer_or("batch_size", cfg.batch_size);
  if (cfg.batch_size < 1) node.at("batch_size").fail("must be >= 1");
  cfg.q_floor = node.number_or("q_floor", cfg.q_floor);
  if (!(cfg.q_floor > 0.0 && cfg.q_floor < 1e-3)) node.at("q_floor").fail("must lie in (0, 1e-3)");
  if (node.has("convergence_tol")) {
    cfg.convergence_tol = node.at("convergence_tol").number();
    if (!(*cfg.convergence_tol > 0.0)) node.at("convergence_tol").fail("must be positive");
  }
  return cfg;
}

LabelSet parse_labels(const Node& node) {
  node.expect_object({"names", "palette", "ignore_label"});
  if (!node.has("names")) node.fail("missing \"names\"");
  LabelSet set;
  const Node names = node.at("names");
  for (std::size_t i = 0; i < names.array_size(); ++i) set.names.push_back(names.at(i).string());
  if (set.names.size() < 2) names.fail("needs at least 2 labels");
  if (node.has("palette")) {
    const Node palette = node.at("palette");
    if (palette.array_size() != set.names.size())
      palette.fail("has " + std::to_string(palette.array_size()) + " entries, expected " +
                   std::to_string(set.names.size()));
    for (std::size_t i = 0; i < palette.array_size(); ++i) {
      const Node c = palette.at(i);
      if (c.array_size() != 3) c.fail("expected [r, g, b]");
      Rgb rgb;
      for (std::size_t k = 0; k < 3; ++k) {
        const int v = c.at(k).integer();
        if (v < 0 || v > 255) c.at(k).fail("must lie in 0..255");
        rgb[k] = static_cast<std::uint8_t>(v);
      }
      set.palette.push_back(rgb);
    }
  } else {
    set.palette = LabelSet::numbered(set.size()).palette;
  }
  if (node.has("ignore_label")) {
    const int ignore = node.at("ignore_label").integer();
    if (ignore < 0 || ignore >= set.size()) node.at("ignore_label").fail("out of range");
    set.ignore_label = ignore;
  }
  return set;
}

}  // namespace

Image read_ppm(const fs::path& path) {
  const auto bytes = read_bytes(path);
  std::size_t pos = 0;
  const auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  const auto read_int = [&](const char* what) {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos]))
      throw Error(path.string() + ": malformed PPM header, expected " + what);
    long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > 1 << 24) throw Error(path.string() + ": malformed PPM header, " + what + " too large");
    }
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') throw Error(path.string() + ": not a binary P6 PPM");
  pos = 2;
  const long width = read_int("width");
  const long height = read_int("height");
  const long maxval = read_int("maxval");
  if (width < 1 || height < 1) throw Error(path.string() + ": malformed PPM header, empty image");
  if (maxval != 255) throw Error(path.string() + ": unsupported maxval " + std::to_string(maxval) + " (expected 255)");
  if (pos >= bytes.size() || !std::isspace(bytes[pos]))
    throw Error(path.string() + ": malformed PPM header, missing separator after maxval");
  ++pos;
  const std::size_t expected = static_cast<std::size_t>(width) * height * 3;
  const std::size_t available = bytes.size() - pos;
  if (available < expected)
    throw Error(path.string() + ": truncated payload, missing " + std::to_string(expected - available) +
                " bytes (expected " + std::to_string(expected) + ")");
  Image img(height, width);
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), expected, img.pixels.data());
  return img;
}

void write_ppm(const Image& image, const fs::path& path) {
  const std::string header =
      "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), image.pixels.data(), image.pixels.data() + image.pixels.size());
  write_bytes(path, bytes);
}

UnaryField read_unary(const fs::path& path) {
  const auto bytes = read_bytes(path);
  const auto h = read_header(bytes, path, "UNRY", 5, kUnaryVersion);
  const std::uint64_t count = std::uint64_t(h[1]) * h[2] * h[3] * h[4];
  check_payload(bytes, 24, 4 * count, path);
  if (h[1] == 0 || h[2] == 0 || h[3] == 0 || h[4] == 0) throw Error(path.string() + ": zero dimension in header");
  UnaryField field;
  field.shape = Shape{h[1], h[2], h[3]};
  field.costs.resize(field.shape.pixels(), h[4]);
  double* out = field.costs.data();
  for (std::uint64_t k = 0; k < count; ++k) {
    const float v = std::bit_cast<float>(get_u32(bytes.data() + 24 + 4 * k));
    if (!std::isfinite(v)) throw Error(path.string() + ": non-finite value at index " + std::to_string(k));
    out[k] = v;
  }
  return field;
}

void write_unary(const UnaryField& field, const fs::path& path) {
  field.validate();
  std::vector<std::uint8_t> bytes{'U', 'N', 'R', 'Y'};
  put_u32(bytes, kUnaryVersion);
  put_u32(bytes, checked_u32(field.shape.frames, "T"));
  put_u32(bytes, checked_u32(field.shape.height, "H"));
  put_u32(bytes, checked_u32(field.shape.width, "W"));
  put_u32(bytes, checked_u32(field.costs.cols(), "L"));
  bytes.reserve(bytes.size() + 4 * static_cast<std::size_t>(field.costs.size()));
  const double* in = field.costs.data();
  for (Index k = 0; k < field.costs.size(); ++k) put_u32(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(in[k])));
  write_bytes(path, bytes);
}

LabelVolume read_labelmap(const fs::path& path) {
  const auto bytes = read_bytes(path);
  const auto h = read_header(bytes, path, "LMAP", 4, kLabelMapVersion);
  const std::uint64_t count = std::uint64_t(h[1]) * h[2] * h[3];
  check_payload(bytes, 20, 4 * count, path);
  if (h[1] == 0 || h[2] == 0 || h[3] == 0) throw Error(path.string() + ": zero dimension in header");
  LabelVolume out(Shape{h[1], h[2], h[3]});
  for (std::uint64_t k = 0; k < count; ++k) {
    const std::uint32_t v = get_u32(bytes.data() + 20 + 4 * k);
    if (v > static_cast<std::uint32_t>(INT32_MAX))
      throw Error(path.string() + ": label id " + std::to_string(v) + " at index " + std::to_string(k) + " too large");
    out.labels(static_cast<Index>(k)) = static_cast<int>(v);
  }
  return out;
}

void write_labelmap(const LabelVolume& labels, const fs::path& path) {
  if (labels.labels.size() != labels.shape.pixels()) throw Error("label volume size does not match its shape");
  std::vector<std::uint8_t> bytes{'L', 'M', 'A', 'P'};
  put_u32(bytes, kLabelMapVersion);
  put_u32(bytes, checked_u32(labels.shape.frames, "T"));
  put_u32(bytes, checked_u32(labels.shape.height, "H"));
  put_u32(bytes, checked_u32(labels.shape.width, "W"));
  for (Index k = 0; k < labels.labels.size(); ++k) put_u32(bytes, checked_u32(labels.labels(k), "label id"));
  write_bytes(path, bytes);
}

void write_color_map(const LabelVolume& labels, const LabelSet& label_set, const fs::path& dir,
                     const std::string& prefix) {
  const Shape& s = labels.shape;
  for (Index t = 0; t < s.frames; ++t) {
    Image img(s.height, s.width);
    for (Index k = 0; k < s.frame_pixels(); ++k) {
      const int l = labels.labels(t * s.frame_pixels() + k);
      if (l < 0 || l >= static_cast<int>(label_set.palette.size()))
        throw Error("label " + std::to_string(l) + " has no palette entry");
      for (int c = 0; c < 3; ++c) img.pixels(k, c) = label_set.palette[l][c];
    }
    write_ppm(img, dir / frame_name(prefix, t));
  }
}

VideoVolume read_frames(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(dir.string() + ": not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".ppm") files.push_back(entry.path());
  if (files.empty()) throw Error(dir.string() + ": no .ppm frames");
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  std::vector<Image> frames;
  for (const auto& f : files) frames.push_back(read_ppm(f));
  return VideoVolume::from_frames(frames);
}

void write_frames(const VideoVolume& video, const fs::path& dir, const std::string& prefix) {
  for (Index t = 0; t < video.shape.frames; ++t) write_ppm(video.frame(t), dir / frame_name(prefix, t));
}

RowMatrixXd read_matrix(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(path.string() + ": cannot open for reading");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::vector<double> row;
    std::string token;
    while (ss >> token) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw Error(path.string() + ": not a number: \"" + token + "\"");
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  const Index n = static_cast<Index>(rows.size());
  RowMatrixXd m(n, n);
  for (Index r = 0; r < n; ++r) {
    if (static_cast<Index>(rows[r].size()) != n)
      throw Error(path.string() + ": row " + std::to_string(r) + " has " + std::to_string(rows[r].size()) +
                  " entries, expected " + std::to_string(n));
    for (Index c = 0; c < n; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

PnPottsParams PnPottsConfig::params() const {
  PnPottsParams p;
  p.gamma_low = gamma_low;
  for (const auto& layer : layers) p.gamma_max.push_back(layer.gamma_max);
  return p;
}

RunConfig RunConfig::defaults() {
  RunConfig cfg;
  cfg.kernels = default_kernels();
  const auto ms = default_meanshift_layers();
  const auto gammas = PnPottsParams::defaults();
  cfg.pn_potts.gamma_low = gammas.gamma_low;
  for (std::size_t m = 0; m < ms.size(); ++m)
    cfg.pn_potts.layers.push_back(PnPottsLayerConfig{gammas.gamma_max[m], ms[m], std::nullopt});
  return cfg;
}

RunConfig parse_config(const std::string& json_text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("config: invalid JSON: ") + e.what());
  }
  const Node root(doc, "");
  if (!doc.is_object()) throw Error("config: expected a JSON object at top level");
  root.expect_object({"kernels", "pn_potts", "cooccurrence", "inference", "labels"});

  RunConfig cfg = RunConfig::defaults();
  if (root.has("kernels")) {
    const Node kernels = root.at("kernels");
    cfg.kernels.clear();
    for (std::size_t i = 0; i < kernels.array_size(); ++i) cfg.kernels.push_back(parse_kernel(kernels.at(i)));
  }
  if (root.has("pn_potts")) cfg.pn_potts = parse_pn_potts(root.at("pn_potts"), base_dir);
  if (root.has("cooccurrence")) cfg.cooccurrence = parse_cooccurrence(root.at("cooccurrence"), base_dir);
  if (root.has("inference")) cfg.inference = parse_inference(root.at("inference"));
  if (root.has("labels")) cfg.labels = parse_labels(root.at("labels"));
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(path.string() + ": cannot open config");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

std::string config_to_json(const RunConfig& cfg) {
  json doc;
  doc["kernels"] = json::array();
  for (const auto& k : cfg.kernels) {
    json j{{"kind", to_string(k.kind)}, {"weight", k.weight}};
    if (k.kind != KernelKind::global_appearance) {
      j["spatial"] = k.spatial;
      j["temporal"] = k.temporal;
    }
    if (k.kind != KernelKind::smoothness) j["color"] = k.color;
    doc["kernels"].push_back(j);
  }
  json layers = json::array();
  for (const auto& l : cfg.pn_potts.layers) {
    json j{{"gamma_max", l.gamma_max}};
    if (l.meanshift)
      j["meanshift"] = {{"spatial_bandwidth", l.meanshift->spatial_bandwidth},
                        {"range_bandwidth", l.meanshift->range_bandwidth},
                        {"min_region_size", l.meanshift->min_region_size},
                        {"max_iterations", l.meanshift->max_iterations},
                        {"convergence_eps", l.meanshift->convergence_eps}};
    if (l.regions) j["regions"] = l.regions->string();
    layers.push_back(j);
  }
  doc["pn_potts"] = {{"enabled", cfg.pn_potts.enabled}, {"gamma_low", cfg.pn_potts.gamma_low}, {"layers", layers}};
  json co{{"enabled", cfg.cooccurrence.enabled}, {"weight", cfg.cooccurrence.weight}};
  if (cfg.cooccurrence.matrix) co["matrix"] = cfg.cooccurrence.matrix->string();
  if (cfg.cooccurrence.estimate_from) co["estimate_from"] = cfg.cooccurrence.estimate_from->string();
  doc["cooccurrence"] = co;
  json inf{{"iterations", cfg.inference.iterations},
           {"batch_size", cfg.inference.batch_size},
           {"q_floor", cfg.inference.q_floor}};
  if (cfg.inference.convergence_tol) inf["convergence_tol"] = *cfg.inference.convergence_tol;
  doc["inference"] = inf;
  if (cfg.labels) {
    json palette = json::array();
    for (const auto& c : cfg.labels->palette) palette.push_back({c[0], c[1], c[2]});
    json labels{{"names", cfg.labels->names}, {"palette", palette}};
    if (cfg.labels->ignore_label) labels["ignore_label"] = *cfg.labels->ignore_label;
    doc["labels"] = labels;
  }
  return doc.dump(2);
}

}  // namespace colabel
