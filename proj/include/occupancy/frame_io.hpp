#ifndef OCCUPANCY_FRAME_IO_HPP
#define OCCUPANCY_FRAME_IO_HPP

// PGM frame I/O, sequence manifests, time sampling and resolution normalization.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "occupancy/image.hpp"

namespace occupancy {

namespace fs = std::filesystem;

inline constexpr int kWorkingWidth = 200;
inline constexpr int kWorkingHeight = 100;

struct SequenceManifest {
  std::vector<fs::path> frame_paths;  // resolved against the manifest's directory
  double source_fps = 1.0;
  double sample_interval_s = 2.0;
  std::optional<std::map<int, int>> ground_truth;  // sampled-frame index -> person count
};

struct PgmHeader {
  char magic = '5';  // '2' ascii, '5' binary
  int width = 0;
  int height = 0;
  int maxval = 0;
};

namespace detail {

inline void skip_pnm_space(std::istream& in) {
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
    } else if (c != EOF && std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

inline int read_pnm_int(std::istream& in, const std::string& where) {
  skip_pnm_space(in);
  long long v = 0;
  if (!(in >> v) || v < 0 || v > 1'000'000'000) throw DataError(where + ": malformed PGM header");
  return static_cast<int>(v);
}

}  // namespace detail

/// Parses the header and leaves `in` positioned at the first pixel byte.
inline PgmHeader read_pgm_header(std::istream& in, const std::string& where) {
  char p = 0, m = 0;
  if (!in.get(p) || !in.get(m) || p != 'P') throw DataError(where + ": unsupported pixel format (not a PNM file)");
  if (m != '2' && m != '5') throw DataError(where + ": unsupported pixel format (P" + std::string(1, m) + ")");
  PgmHeader h;
  h.magic = m;
  h.width = detail::read_pnm_int(in, where);
  h.height = detail::read_pnm_int(in, where);
  h.maxval = detail::read_pnm_int(in, where);
  if (h.width < 1 || h.height < 1) throw DataError(where + ": dimensions below 1x1");
  if (h.maxval < 1 || h.maxval > 65535) throw DataError(where + ": unsupported pixel format (maxval)");
  if (m == '5') {
    // Exactly one whitespace byte separates the header from binary data.
    char sep = 0;
    if (!in.get(sep) || !std::isspace(static_cast<unsigned char>(sep))) throw DataError(where + ": malformed PGM header");
  }
  return h;
}

inline ThermalFrame read_frame(std::istream& in, const std::string& where = "<stream>") {
  const PgmHeader h = read_pgm_header(in, where);
  ThermalFrame f(h.width, h.height);
  const double scale = 1.0 / h.maxval;
  const std::size_t n = f.size();
  if (h.magic == '5') {
    const std::size_t bpp = h.maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(n * bpp);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw DataError(where + ": truncated data");
    for (std::size_t i = 0; i < n; ++i) {
      unsigned v = bpp == 2 ? (unsigned(raw[2 * i]) << 8) | raw[2 * i + 1] : raw[i];
      if (v > static_cast<unsigned>(h.maxval)) throw DataError(where + ": sample exceeds maxval");
      f.data[i] = v * scale;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      detail::skip_pnm_space(in);
      long long v = 0;
      if (!(in >> v)) throw DataError(where + ": truncated data");
      if (v < 0 || v > h.maxval) throw DataError(where + ": sample exceeds maxval");
      f.data[i] = static_cast<double>(v) * scale;
    }
  }
  return f;
}

/// Reads an 8- or 16-bit grayscale PGM (P2 or P5) and normalizes by maxval.
inline ThermalFrame read_frame(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open frame");
  return read_frame(in, path.string());
}

/// Writes a binary PGM with maxval 255 or 65535; intensities are rounded to the nearest level.
inline void write_frame(std::ostream& out, const ThermalFrame& frame, int bit_depth = 16) {
  if (bit_depth != 8 && bit_depth != 16) throw ParameterError("bit depth must be 8 or 16");
  const int maxval = bit_depth == 8 ? 255 : 65535;
  out << "P5\n" << frame.width << ' ' << frame.height << '\n' << maxval << '\n';
  std::vector<unsigned char> raw;
  raw.reserve(frame.size() * (bit_depth / 8));
  for (double v : frame.data) {
    const auto q = static_cast<unsigned>(std::lround(std::clamp(v, 0.0, 1.0) * maxval));
    if (bit_depth == 16) raw.push_back(static_cast<unsigned char>(q >> 8));
    raw.push_back(static_cast<unsigned char>(q & 0xFF));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

inline void write_frame(const fs::path& path, const ThermalFrame& frame, int bit_depth = 16) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path.string() + ": cannot write frame");
  write_frame(out, frame, bit_depth);
  if (!out) throw DataError(path.string() + ": write failed");
}

/// Source indices nearest to t = 0, interval, 2*interval, ... (round half down), each at most once.
inline std::vector<int> sample_indices(std::size_t frame_count, double fps, double interval_s) {
  if (!(fps > 0) || !(interval_s > 0)) throw ParameterError("fps and sample interval must be positive");
  std::vector<int> out;
  const double step = interval_s * fps;
  for (long long k = 0;; ++k) {
    double x = static_cast<double>(k) * step;
    x = std::round(x * 1e9) / 1e9;  // absorb representation error before the half-way test
    const double idx = std::ceil(x - 0.5);
    if (idx >= static_cast<double>(frame_count)) break;
    const int i = static_cast<int>(idx);
    if (out.empty() || out.back() != i) out.push_back(i);
  }
  return out;
}

inline std::size_t sampled_count(const SequenceManifest& m) {
  return sample_indices(m.frame_paths.size(), m.source_fps, m.sample_interval_s).size();
}

inline void validate(const SequenceManifest& m) {
  if (m.frame_paths.empty()) throw DataError("empty sequence");
  if (!(m.source_fps > 0)) throw DataError("manifest: fps must be positive");
  if (!(m.sample_interval_s > 0)) throw DataError("manifest: interval_s must be positive");
  if (m.ground_truth) {
    const auto n = static_cast<int>(sampled_count(m));
    for (const auto& [idx, count] : *m.ground_truth) {
      if (idx < 0 || idx >= n)
        throw DataError("manifest: ground_truth index " + std::to_string(idx) + " is not a sampled frame (0.." +
                        std::to_string(n - 1) + ")");
      if (count < 0) throw DataError("manifest: negative ground_truth count");
    }
  }
}

/// Parses manifest JSON. Relative frame paths resolve against `base_dir`. Frame files are not touched.
inline SequenceManifest parse_manifest(const nlohmann::json& j, const fs::path& base_dir) {
  SequenceManifest m;
  try {
    if (!j.is_object()) throw DataError("manifest: expected a JSON object");
    if (!j.contains("frames") || !j.at("frames").is_array()) throw DataError("manifest: missing 'frames' array");
    for (const auto& p : j.at("frames")) {
      fs::path fp = p.get<std::string>();
      m.frame_paths.push_back(fp.is_absolute() ? fp : base_dir / fp);
    }
    if (!j.contains("fps")) throw DataError("manifest: missing 'fps'");
    m.source_fps = j.at("fps").get<double>();
    m.sample_interval_s = j.value("interval_s", 2.0);
    if (j.contains("ground_truth") && !j.at("ground_truth").is_null()) {
      std::map<int, int> gt;
      for (const auto& [key, value] : j.at("ground_truth").items()) {
        std::size_t used = 0;
        int idx = 0;
        try {
          idx = std::stoi(key, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != key.size()) throw DataError("manifest: ground_truth key '" + key + "' is not an integer");
        gt[idx] = value.get<int>();
      }
      m.ground_truth = std::move(gt);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("manifest: malformed (") + e.what() + ")");
  }
  validate(m);
  return m;
}

inline nlohmann::json to_json(const SequenceManifest& m, const fs::path& base_dir) {
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& p : m.frame_paths) frames.push_back(p.lexically_relative(base_dir).generic_string());
  nlohmann::json j{{"frames", frames}, {"fps", m.source_fps}, {"interval_s", m.sample_interval_s}};
  if (m.ground_truth) {
    nlohmann::json gt = nlohmann::json::object();
    for (const auto& [idx, count] : *m.ground_truth) gt[std::to_string(idx)] = count;
    j["ground_truth"] = gt;
  }
  return j;
}

/// Loads and validates a manifest; every referenced frame must open and carry a grayscale PGM header.
inline SequenceManifest load_sequence(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw DataError(manifest_path.string() + ": cannot open manifest");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(manifest_path.string() + ": malformed manifest (" + e.what() + ")");
  }
  SequenceManifest m = parse_manifest(j, manifest_path.parent_path());
  for (const auto& p : m.frame_paths) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw DataError(p.string() + ": unreadable frame");
    read_pgm_header(f, p.string());
  }
  return m;
}

inline void save_manifest(const fs::path& manifest_path, const SequenceManifest& m) {
  std::ofstream out(manifest_path);
  if (!out) throw DataError(manifest_path.string() + ": cannot write manifest");
  out << to_json(m, manifest_path.parent_path()).dump(2) << '\n';
}

/// Loads the frames picked by sample_indices, with timestamps index / fps.
inline std::vector<ThermalFrame> sample_frames(const SequenceManifest& m) {
  validate(m);
  std::vector<ThermalFrame> out;
  for (int idx : sample_indices(m.frame_paths.size(), m.source_fps, m.sample_interval_s)) {
    ThermalFrame f = read_frame(m.frame_paths[static_cast<std::size_t>(idx)]);
    f.timestamp_s = idx / m.source_fps;
    out.push_back(std::move(f));
  }
  return out;
}

namespace detail {

// Box resampling of one axis. Each output cell averages its exact footprint in the source;
// accumulating offsets from the first contributing sample keeps constant inputs exactly constant.
struct AxisWeights {
  std::vector<int> first;
  std::vector<std::vector<double>> weights;
};

inline AxisWeights box_weights(int src, int dst) {
  AxisWeights a;
  a.first.resize(static_cast<std::size_t>(dst));
  a.weights.resize(static_cast<std::size_t>(dst));
  const double scale = static_cast<double>(src) / dst;
  for (int j = 0; j < dst; ++j) {
    const double lo = j * scale;
    const double hi = (j + 1) * scale;
    const int i0 = static_cast<int>(std::floor(lo));
    const int i1 = std::min(src, static_cast<int>(std::ceil(hi)));
    a.first[static_cast<std::size_t>(j)] = i0;
    for (int i = i0; i < i1; ++i) {
      const double w = std::min(hi, i + 1.0) - std::max(lo, static_cast<double>(i));
      a.weights[static_cast<std::size_t>(j)].push_back(std::max(w, 0.0));
    }
  }
  return a;
}

template <typename Get>
double box_average(const AxisWeights& a, int j, Get&& get) {
  const auto& w = a.weights[static_cast<std::size_t>(j)];
  const int i0 = a.first[static_cast<std::size_t>(j)];
  const double ref = get(i0);
  double acc = 0.0, total = 0.0;
  for (std::size_t t = 0; t < w.size(); ++t) {
    acc += w[t] * (get(i0 + static_cast<int>(t)) - ref);
    total += w[t];
  }
  return std::clamp(ref + acc / total, 0.0, 1.0);
}

}  // namespace detail

/// Center-crops to the target aspect ratio, then area-averages down to exactly target_w x target_h.
inline ThermalFrame crop_resize(const ThermalFrame& frame, int target_w = kWorkingWidth, int target_h = kWorkingHeight) {
  if (target_w < 1 || target_h < 1) throw ParameterError("target resolution must be at least 1x1");
  if (frame.width < target_w || frame.height < target_h)
    throw DataError("below minimum resolution: " + std::to_string(frame.width) + "x" + std::to_string(frame.height) +
                    " < " + std::to_string(target_w) + "x" + std::to_string(target_h));

  int crop_w = frame.width, crop_h = frame.height;
  const long long lhs = static_cast<long long>(frame.width) * target_h;
  const long long rhs = static_cast<long long>(frame.height) * target_w;
  if (lhs > rhs)
    crop_w = static_cast<int>(std::llround(static_cast<double>(rhs) / target_h));
  else if (lhs < rhs)
    crop_h = static_cast<int>(std::llround(static_cast<double>(lhs) / target_w));
  crop_w = std::clamp(crop_w, target_w, frame.width);
  crop_h = std::clamp(crop_h, target_h, frame.height);
  const int x0 = (frame.width - crop_w) / 2;
  const int y0 = (frame.height - crop_h) / 2;

  const auto wx = detail::box_weights(crop_w, target_w);
  const auto wy = detail::box_weights(crop_h, target_h);

  Grid<double> rows(target_w, crop_h);
  for (int y = 0; y < crop_h; ++y)
    for (int x = 0; x < target_w; ++x)
      rows(x, y) = detail::box_average(wx, x, [&](int i) { return frame(x0 + i, y0 + y); });

  ThermalFrame out(target_w, target_h, 0.0, frame.timestamp_s);
  for (int y = 0; y < target_h; ++y)
    for (int x = 0; x < target_w; ++x) out(x, y) = detail::box_average(wy, y, [&](int i) { return rows(x, i); });
  return out;
}

}  // namespace occupancy

#endif  // OCCUPANCY_FRAME_IO_HPP
