#ifndef OCCUPANCY_SYNTH_HPP
#define OCCUPANCY_SYNTH_HPP

// Synthetic overhead thermal scenes with exact ground-truth occupancy.
//
// People are warm discs with a flat core and a steep radial falloff that wander with a
// persistent heading. Static hot objects, global or local lighting offsets and per-pixel
// Gaussian noise model the awkward conditions of real rooms. All randomness comes from
// explicitly seeded generators, so a scene always renders to the same bytes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "occupancy/frame_io.hpp"
#include "occupancy/image.hpp"

namespace occupancy {

struct Person {
  double radius = 7.0;   // px; intensity falls to half way at this distance
  double peak = 0.85;
  double step = 1.0;     // px per source frame
  double entry_s = 0.0;
  double exit_s = 1e9;
  std::optional<double> x, y;  // start position; random when absent
};

struct HotObject {
  enum class Shape { rect, disc } shape = Shape::rect;
  double x = 0, y = 0;          // rect: top-left corner; disc: centre
  double w = 0, h = 0, radius = 0;
  double intensity = 0.8;
};

struct LightingEvent {
  enum class Kind { global, local } kind = Kind::global;
  double start_s = 0.0;
  double duration_s = 0.0;
  double delta = 0.0;
  double x = 0, y = 0, w = 0, h = 0;  // local events only
};

struct Scene {
  int width = kWorkingWidth;
  int height = kWorkingHeight;
  double duration_s = 120.0;
  double fps = 1.0;
  double interval_s = 2.0;
  double background = 0.2;
  double noise_sigma = 0.01;
  int bit_depth = 8;
  std::uint64_t rng_seed = 1;
  std::vector<Person> persons;
  std::vector<HotObject> static_hot_objects;
  std::vector<LightingEvent> lighting_events;
};

inline int frame_count(const Scene& s) { return std::max(1, static_cast<int>(std::floor(s.duration_s * s.fps + 1e-9))); }

inline void validate(const Scene& s) {
  if (s.width < 1 || s.height < 1) throw ParameterError("scene: invalid geometry (dimensions)");
  if (!(s.fps > 0) || !(s.duration_s > 0) || !(s.interval_s > 0))
    throw ParameterError("scene: fps, duration_s and interval_s must be positive");
  if (!(s.background >= 0 && s.background <= 1)) throw ParameterError("scene: background must lie in [0,1]");
  if (!(s.noise_sigma >= 0)) throw ParameterError("scene: noise_sigma must be non-negative");
  if (s.bit_depth != 8 && s.bit_depth != 16) throw ParameterError("scene: bit_depth must be 8 or 16");
  for (const auto& p : s.persons) {
    if (!(p.radius > 0) || 2 * p.radius >= std::min(s.width, s.height))
      throw ParameterError("scene: invalid geometry (person radius)");
    if (!(p.peak > s.background) || p.peak > 1) throw ParameterError("scene: person peak must exceed the background");
    if (!(p.step >= 0)) throw ParameterError("scene: person step must be non-negative");
    if (!(p.exit_s >= p.entry_s)) throw ParameterError("scene: person exits before entering");
    if ((p.x && (*p.x < p.radius || *p.x > s.width - p.radius)) ||
        (p.y && (*p.y < p.radius || *p.y > s.height - p.radius)))
      throw ParameterError("scene: invalid geometry (person start outside the room)");
  }
  for (const auto& o : s.static_hot_objects) {
    const bool bad = o.shape == HotObject::Shape::rect ? !(o.w > 0 && o.h > 0) : !(o.radius > 0);
    if (bad) throw ParameterError("scene: invalid geometry (hot object size)");
    if (!(o.intensity >= 0 && o.intensity <= 1)) throw ParameterError("scene: hot object intensity outside [0,1]");
  }
  for (const auto& e : s.lighting_events) {
    if (!(e.duration_s >= 0)) throw ParameterError("scene: negative lighting duration");
    if (e.kind == LightingEvent::Kind::local && !(e.w > 0 && e.h > 0))
      throw ParameterError("scene: invalid geometry (local lighting region)");
  }
}

/// Number of people present at time t (entry <= t < exit).
inline int occupancy_at(const Scene& s, double t) {
  int n = 0;
  for (const auto& p : s.persons) n += p.entry_s <= t && t < p.exit_s;
  return n;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Distribution objects in <random> are implementation-defined; these are not.
class SceneRng {
public:
  explicit SceneRng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double gaussian() {
    if (spare_) {
      const double v = *spare_;
      spare_.reset();
      return v;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

struct Position {
  double x, y;
};

// Person centres for every source frame. Heading drifts a little each frame; walls reflect.
inline std::vector<std::vector<Position>> trajectories(const Scene& s) {
  SceneRng rng(splitmix64(s.rng_seed));
  const int frames = frame_count(s);
  std::vector<std::vector<Position>> out(s.persons.size());
  for (std::size_t i = 0; i < s.persons.size(); ++i) {
    const Person& p = s.persons[i];
    const double r = p.radius;
    double x = p.x ? *p.x : rng.uniform(r, s.width - r);
    double y = p.y ? *p.y : rng.uniform(r, s.height - r);
    double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
    out[i].reserve(static_cast<std::size_t>(frames));
    for (int f = 0; f < frames; ++f) {
      out[i].push_back({x, y});
      heading += 0.35 * rng.gaussian();
      x += p.step * std::cos(heading);
      y += p.step * std::sin(heading);
      if (x < r || x > s.width - r) {
        x = std::clamp(x < r ? 2 * r - x : 2 * (s.width - r) - x, r, s.width - r);
        heading = std::numbers::pi - heading;
      }
      if (y < r || y > s.height - r) {
        y = std::clamp(y < r ? 2 * r - y : 2 * (s.height - r) - y, r, s.height - r);
        heading = -heading;
      }
    }
  }
  return out;
}

}  // namespace detail

/// Renders every source frame of the scene in memory (unquantized).
inline std::vector<ThermalFrame> render_frames(const Scene& scene) {
  validate(scene);
  const int frames = frame_count(scene);
  const auto paths = detail::trajectories(scene);
  std::vector<ThermalFrame> out;
  out.reserve(static_cast<std::size_t>(frames));
  for (int f = 0; f < frames; ++f) {
    const double t = f / scene.fps;
    ThermalFrame img(scene.width, scene.height, scene.background, t);

    for (const auto& o : scene.static_hot_objects) {
      for (int y = 0; y < scene.height; ++y)
        for (int x = 0; x < scene.width; ++x) {
          const double cx = x + 0.5, cy = y + 0.5;
          const bool inside = o.shape == HotObject::Shape::rect
                                  ? (cx >= o.x && cx < o.x + o.w && cy >= o.y && cy < o.y + o.h)
                                  : std::hypot(cx - o.x, cy - o.y) <= o.radius;
          if (inside) img(x, y) = std::max(img(x, y), o.intensity);
        }
    }

    for (std::size_t i = 0; i < scene.persons.size(); ++i) {
      const Person& p = scene.persons[i];
      if (!(p.entry_s <= t && t < p.exit_s)) continue;
      const auto [px, py] = paths[i][static_cast<std::size_t>(f)];
      const int reach = static_cast<int>(std::ceil(2.5 * p.radius));
      for (int y = std::max(0, static_cast<int>(py) - reach); y < std::min(scene.height, static_cast<int>(py) + reach + 1); ++y)
        for (int x = std::max(0, static_cast<int>(px) - reach); x < std::min(scene.width, static_cast<int>(px) + reach + 1); ++x) {
          const double d = std::hypot(x + 0.5 - px, y + 0.5 - py) / p.radius;
          const double v = scene.background + (p.peak - scene.background) * std::exp(-std::numbers::ln2 * d * d * d * d);
          img(x, y) = std::max(img(x, y), v);
        }
    }

    for (const auto& e : scene.lighting_events) {
      if (!(e.start_s <= t && t < e.start_s + e.duration_s)) continue;
      for (int y = 0; y < scene.height; ++y)
        for (int x = 0; x < scene.width; ++x) {
          const double cx = x + 0.5, cy = y + 0.5;
          if (e.kind == LightingEvent::Kind::global || (cx >= e.x && cx < e.x + e.w && cy >= e.y && cy < e.y + e.h))
            img(x, y) += e.delta;
        }
    }

    if (scene.noise_sigma > 0) {
      detail::SceneRng noise(detail::splitmix64(scene.rng_seed ^ detail::splitmix64(static_cast<std::uint64_t>(f) + 1)));
      for (double& v : img.data) v += scene.noise_sigma * noise.gaussian();
    }
    for (double& v : img.data) v = std::clamp(v, 0.0, 1.0);
    out.push_back(std::move(img));
  }
  return out;
}

/// Ground truth at every sampled index.
inline std::map<int, int> ground_truth(const Scene& scene) {
  std::map<int, int> gt;
  const auto idx = sample_indices(static_cast<std::size_t>(frame_count(scene)), scene.fps, scene.interval_s);
  for (std::size_t k = 0; k < idx.size(); ++k) gt[static_cast<int>(k)] = occupancy_at(scene, idx[k] / scene.fps);
  return gt;
}

/// Writes frame_NNNNN.pgm files plus manifest.json into out_dir and returns the manifest.
inline SequenceManifest render(const Scene& scene, const fs::path& out_dir) {
  const auto frames = render_frames(scene);
  fs::create_directories(out_dir);
  SequenceManifest m;
  m.source_fps = scene.fps;
  m.sample_interval_s = scene.interval_s;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05zu.pgm", f);
    const fs::path p = out_dir / name;
    write_frame(p, frames[f], scene.bit_depth);
    m.frame_paths.push_back(p);
  }
  m.ground_truth = ground_truth(scene);
  save_manifest(out_dir / "manifest.json", m);
  return m;
}

// JSON schema mirrors the structs; omitted keys keep defaults.

inline void to_json(nlohmann::json& j, const Person& p) {
  j = nlohmann::json{{"radius", p.radius}, {"peak", p.peak}, {"step", p.step}, {"entry_s", p.entry_s}, {"exit_s", p.exit_s}};
  if (p.x) j["x"] = *p.x;
  if (p.y) j["y"] = *p.y;
}

inline void from_json(const nlohmann::json& j, Person& p) {
  p.radius = j.value("radius", p.radius);
  p.peak = j.value("peak", p.peak);
  p.step = j.value("step", p.step);
  p.entry_s = j.value("entry_s", p.entry_s);
  p.exit_s = j.value("exit_s", p.exit_s);
  if (j.contains("x")) p.x = j.at("x").get<double>();
  if (j.contains("y")) p.y = j.at("y").get<double>();
}

inline void to_json(nlohmann::json& j, const HotObject& o) {
  if (o.shape == HotObject::Shape::rect)
    j = nlohmann::json{{"shape", "rect"}, {"x", o.x}, {"y", o.y}, {"w", o.w}, {"h", o.h}, {"intensity", o.intensity}};
  else
    j = nlohmann::json{{"shape", "disc"}, {"x", o.x}, {"y", o.y}, {"radius", o.radius}, {"intensity", o.intensity}};
}

inline void from_json(const nlohmann::json& j, HotObject& o) {
  const auto shape = j.value("shape", std::string("rect"));
  if (shape == "rect")
    o.shape = HotObject::Shape::rect;
  else if (shape == "disc")
    o.shape = HotObject::Shape::disc;
  else
    throw ParameterError("scene: unknown hot object shape '" + shape + "'");
  o.x = j.value("x", 0.0);
  o.y = j.value("y", 0.0);
  o.w = j.value("w", 0.0);
  o.h = j.value("h", 0.0);
  o.radius = j.value("radius", 0.0);
  o.intensity = j.value("intensity", o.intensity);
}

inline void to_json(nlohmann::json& j, const LightingEvent& e) {
  j = nlohmann::json{{"type", e.kind == LightingEvent::Kind::global ? "global" : "local"},
                     {"start_s", e.start_s},
                     {"duration_s", e.duration_s},
                     {"delta", e.delta}};
  if (e.kind == LightingEvent::Kind::local) {
    j["x"] = e.x;
    j["y"] = e.y;
    j["w"] = e.w;
    j["h"] = e.h;
  }
}

inline void from_json(const nlohmann::json& j, LightingEvent& e) {
  const auto type = j.value("type", std::string("global"));
  if (type == "global")
    e.kind = LightingEvent::Kind::global;
  else if (type == "local")
    e.kind = LightingEvent::Kind::local;
  else
    throw ParameterError("scene: unknown lighting event type '" + type + "'");
  e.start_s = j.value("start_s", 0.0);
  e.duration_s = j.value("duration_s", 0.0);
  e.delta = j.value("delta", 0.0);
  e.x = j.value("x", 0.0);
  e.y = j.value("y", 0.0);
  e.w = j.value("w", 0.0);
  e.h = j.value("h", 0.0);
}

inline void to_json(nlohmann::json& j, const Scene& s) {
  j = nlohmann::json{{"width", s.width},
                     {"height", s.height},
                     {"duration_s", s.duration_s},
                     {"fps", s.fps},
                     {"interval_s", s.interval_s},
                     {"background", s.background},
                     {"noise_sigma", s.noise_sigma},
                     {"bit_depth", s.bit_depth},
                     {"rng_seed", s.rng_seed},
                     {"persons", s.persons},
                     {"static_hot_objects", s.static_hot_objects},
                     {"lighting_events", s.lighting_events}};
}

inline void from_json(const nlohmann::json& j, Scene& s) {
  s.width = j.value("width", s.width);
  s.height = j.value("height", s.height);
  s.duration_s = j.value("duration_s", s.duration_s);
  s.fps = j.value("fps", s.fps);
  s.interval_s = j.value("interval_s", s.interval_s);
  s.background = j.value("background", s.background);
  s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
  s.bit_depth = j.value("bit_depth", s.bit_depth);
  s.rng_seed = j.value("rng_seed", s.rng_seed);
  if (j.contains("persons")) s.persons = j.at("persons").get<std::vector<Person>>();
  if (j.contains("static_hot_objects")) s.static_hot_objects = j.at("static_hot_objects").get<std::vector<HotObject>>();
  if (j.contains("lighting_events")) s.lighting_events = j.at("lighting_events").get<std::vector<LightingEvent>>();
}

inline Scene load_scene(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open scene file");
  try {
    Scene s = nlohmann::json::parse(in).get<Scene>();
    validate(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": malformed scene (" + e.what() + ")");
  } catch (const ParameterError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace occupancy

#endif  // OCCUPANCY_SYNTH_HPP
