#ifndef OCCUPANCY_CALIBRATION_HPP
#define OCCUPANCY_CALIBRATION_HPP

// Preliminary parameter configuration: coordinate passes over the five tunables, each axis
// searched by bisection under a unimodal-response assumption, maximizing calibration accuracy.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "occupancy/frame_io.hpp"
#include "occupancy/metrics.hpp"
#include "occupancy/params.hpp"
#include "occupancy/pipeline.hpp"
#include "occupancy/segmentation.hpp"

namespace occupancy {

enum class Axis { lighting_threshold, noise_low, noise_high, mask_update_frequency, memory_size };

/// Search order for coordinate passes.
inline constexpr std::array<Axis, 5> kAxisOrder = {Axis::lighting_threshold, Axis::noise_low, Axis::noise_high,
                                                   Axis::mask_update_frequency, Axis::memory_size};

inline constexpr std::string_view axis_name(Axis a) {
  switch (a) {
    case Axis::lighting_threshold: return "lighting_threshold";
    case Axis::noise_low: return "noise_low";
    case Axis::noise_high: return "noise_high";
    case Axis::mask_update_frequency: return "mask_update_frequency";
    case Axis::memory_size: return "memory_size";
  }
  return "";
}

struct AxisRange {
  double min = 0.0;
  double max = 0.0;
  bool integer = false;

  double resolution() const { return integer ? 1.0 : (max - min) / 256.0; }
};

/// Default ranges suit 200x100 frames sampled every 2 s. The search starts at the midpoint, so the
/// midpoint must already be a working configuration: noise_low well under a walking person's
/// difference-map area, and a mask refresh every few samples.
struct ParamSpace {
  AxisRange lighting_threshold{0.0, 1.0, false};
  AxisRange noise_low{0, 120, true};
  AxisRange noise_high{100, 2000, true};
  AxisRange mask_update_frequency{1, 9, true};
  AxisRange memory_size{1, 9, true};
  int k = 2;
  double blur_sigma = 1.0;
  int connectivity = 8;

  const AxisRange& range(Axis a) const {
    switch (a) {
      case Axis::lighting_threshold: return lighting_threshold;
      case Axis::noise_low: return noise_low;
      case Axis::noise_high: return noise_high;
      case Axis::mask_update_frequency: return mask_update_frequency;
      case Axis::memory_size: return memory_size;
    }
    return lighting_threshold;
  }
  AxisRange& range(Axis a) { return const_cast<AxisRange&>(std::as_const(*this).range(a)); }
};

inline void validate(const ParamSpace& s) {
  for (Axis a : kAxisOrder) {
    const auto& r = s.range(a);
    const std::string name(axis_name(a));
    if (!(r.min <= r.max)) throw ParameterError("param space: " + name + " has min > max");
    if (r.integer && (r.min != std::floor(r.min) || r.max != std::floor(r.max)))
      throw ParameterError("param space: integer axis " + name + " has fractional bounds");
  }
  if (s.lighting_threshold.min < 0 || s.lighting_threshold.max > 1)
    throw ParameterError("param space: lighting_threshold must stay within [0,1]");
  if (s.noise_low.min < 0) throw ParameterError("param space: noise_low must be >= 0");
  if (s.mask_update_frequency.min < 1) throw ParameterError("param space: mask_update_frequency must be >= 1");
  if (s.memory_size.min < 1) throw ParameterError("param space: memory_size must be >= 1");
  if (s.noise_low.min > s.noise_high.max) throw ParameterError("param space: noise_low.min exceeds noise_high.max");
}

inline double get_axis(const Params& p, Axis a) {
  switch (a) {
    case Axis::lighting_threshold: return p.lighting_threshold;
    case Axis::noise_low: return p.noise_low;
    case Axis::noise_high: return p.noise_high;
    case Axis::mask_update_frequency: return p.mask_update_frequency;
    case Axis::memory_size: return p.memory_size;
  }
  return 0.0;
}

inline void set_axis(Params& p, Axis a, double v) {
  switch (a) {
    case Axis::lighting_threshold: p.lighting_threshold = v; break;
    case Axis::noise_low: p.noise_low = static_cast<int>(std::lround(v)); break;
    case Axis::noise_high: p.noise_high = static_cast<int>(std::lround(v)); break;
    case Axis::mask_update_frequency: p.mask_update_frequency = static_cast<int>(std::lround(v)); break;
    case Axis::memory_size: p.memory_size = static_cast<int>(std::lround(v)); break;
  }
}

/// Midpoint of every axis (integer axes round down), with noise_low clamped to noise_high.
inline Params midpoint_params(const ParamSpace& s) {
  Params p;
  p.k = s.k;
  p.blur_sigma = s.blur_sigma;
  p.connectivity = s.connectivity;
  for (Axis a : kAxisOrder) {
    const auto& r = s.range(a);
    const double mid = 0.5 * (r.min + r.max);
    set_axis(p, a, r.integer ? std::floor(mid) : mid);
  }
  p.noise_low = std::min(p.noise_low, p.noise_high);
  return p;
}

struct Evaluation {
  Params params;
  double accuracy = 0.0;
};

struct CalibrationReport {
  Params best_params;
  double best_accuracy = 0.0;
  std::vector<Evaluation> trace;
  int passes = 0;
};

namespace detail {

// Memoizes an objective and logs each distinct evaluation in the trace.
template <typename Objective>
class TracedObjective {
public:
  TracedObjective(Objective& f, std::vector<Evaluation>& trace) : f_(f), trace_(trace) {}

  double operator()(const Params& p) {
    const auto key = std::make_tuple(p.lighting_threshold, p.noise_low, p.noise_high, p.mask_update_frequency,
                                     p.memory_size, p.k, p.blur_sigma, p.connectivity);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const double acc = f_(p);
    cache_.emplace(key, acc);
    trace_.push_back({p, acc});
    return acc;
  }

private:
  Objective& f_;
  std::vector<Evaluation>& trace_;
  std::map<std::tuple<double, int, int, int, int, int, double, int>, double> cache_;
};

// Axis bounds once the cross-constraint noise_low <= noise_high is taken into account.
inline AxisRange effective_range(Axis a, const ParamSpace& s, const Params& current) {
  AxisRange r = s.range(a);
  if (a == Axis::noise_low) r.max = std::min(r.max, static_cast<double>(current.noise_high));
  if (a == Axis::noise_high) r.min = std::max(r.min, static_cast<double>(current.noise_low));
  if (r.max < r.min) r.max = r.min;
  return r;
}

}  // namespace detail

/// Bisection on one axis assuming a unimodal accuracy response.
///
/// Keeps [lo, hi], probes the points at 1/3 and 2/3 and drops the worse outer third (ties drop the
/// upper third) until the interval is within the axis resolution. The final interval ends, every
/// probe and the current value compete; the best wins, ties going to the smaller value.
template <typename Objective>
Params binary_search_axis(Axis axis, const ParamSpace& space, const Params& current, Objective&& objective) {
  const AxisRange r = detail::effective_range(axis, space, current);
  double best_value = 0.0, best_acc = -1.0;
  bool have_best = false;
  auto probe = [&](double v) {
    Params p = current;
    set_axis(p, axis, v);
    const double acc = objective(p);
    const double val = get_axis(p, axis);
    if (!have_best || acc > best_acc || (acc == best_acc && val < best_value)) {
      best_value = val;
      best_acc = acc;
      have_best = true;
    }
    return acc;
  };

  const double cur = get_axis(current, axis);
  if (cur >= r.min && cur <= r.max) probe(cur);

  double lo = r.min, hi = r.max;
  if (r.integer) {
    while (hi - lo > 2) {
      const double third = std::floor((hi - lo) / 3);
      const double m1 = lo + third, m2 = hi - third;
      if (probe(m1) >= probe(m2))
        hi = m2;
      else
        lo = m1;
    }
    for (double v = lo; v <= hi; v += 1) probe(v);
  } else {
    const double res = r.resolution();
    while (hi - lo > res && hi - lo > 0) {
      const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
      if (probe(m1) >= probe(m2))
        hi = m2;
      else
        lo = m1;
    }
    probe(lo);
    probe(hi);
  }

  Params out = current;
  set_axis(out, axis, best_value);
  return out;
}

/// Coordinate passes over the axes in kAxisOrder, starting from the midpoint of the space, until a
/// full pass brings no improvement or five passes have run. `objective` maps Params to accuracy.
template <typename Objective>
CalibrationReport configure(const ParamSpace& space, Objective&& objective) {
  validate(space);
  CalibrationReport report;
  detail::TracedObjective<std::remove_reference_t<Objective>> traced(objective, report.trace);

  Params best = midpoint_params(space);
  double best_acc = traced(best);
  constexpr int kMaxPasses = 5;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    ++report.passes;
    const double pass_start = best_acc;
    for (Axis a : kAxisOrder) {
      Params candidate = binary_search_axis(a, space, best, traced);
      candidate.noise_low = std::min(candidate.noise_low, candidate.noise_high);
      const double acc = traced(candidate);
      if (acc >= best_acc) {
        best = candidate;
        best_acc = acc;
      }
    }
    if (!(best_acc > pass_start)) break;
  }
  report.best_params = best;
  report.best_accuracy = best_acc;
  return report;
}

/// Labeled frames prepared once for repeated evaluation. Hot-cluster maps depend only on k and the
/// cleaned maps only on the lighting threshold, so both are cached across evaluations.
class CalibrationSet {
public:
  CalibrationSet(std::vector<ThermalFrame> frames, std::vector<int> truth)
      : frames_(std::move(frames)), truth_(std::move(truth)) {
    if (frames_.empty()) throw DataError("calibration: no frames");
    if (truth_.size() != frames_.size()) throw DataError("calibration: ground truth must cover every sampled frame");
  }

  static CalibrationSet from_manifest(const SequenceManifest& m) {
    auto frames = load_working_frames(m);
    std::vector<int> truth;
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const auto t = truth_at(m, static_cast<int>(i));
      if (!t) throw DataError("calibration: missing ground truth for sampled frame " + std::to_string(i));
      truth.push_back(*t);
    }
    return CalibrationSet(std::move(frames), std::move(truth));
  }

  std::size_t size() const { return frames_.size(); }
  std::span<const ThermalFrame> frames() const { return frames_; }
  std::span<const int> truth() const { return truth_; }

  /// Accuracy (percent, one decimal) of a full session run with `params`.
  double evaluate(const Params& params) {
    validate(params);
    const auto& maps = unmasked_maps(params);
    SessionState state;
    state.mask = maps.front();
    std::int64_t matches = 0;
    for (std::size_t i = 0; i < frames_.size(); ++i) {
      const StepOutput out = step_segmented(state, maps[i], params);
      matches += out.record.final_count == truth_[i];
    }
    return percent_one_decimal(matches, static_cast<std::int64_t>(frames_.size()));
  }

private:
  const std::vector<BinaryMap>& unmasked_maps(const Params& p) {
    auto& hot = hot_[p.k];
    if (hot.empty())
      for (const auto& f : frames_) hot.push_back(hot_cluster_map(kmeans_intensity(f, p.k), f.width, f.height));
    auto& cleaned = cleaned_[std::make_tuple(p.k, p.lighting_threshold, p.blur_sigma)];
    if (cleaned.empty())
      for (std::size_t i = 0; i < frames_.size(); ++i) cleaned.push_back(clean_hot_map(hot[i], frames_[i], p));
    return cleaned;
  }

  std::vector<ThermalFrame> frames_;
  std::vector<int> truth_;
  std::map<int, std::vector<BinaryMap>> hot_;
  std::map<std::tuple<int, double, double>, std::vector<BinaryMap>> cleaned_;
};

/// Accuracy of a full session on a labeled manifest; every sampled frame needs ground truth.
inline double evaluate_params(const Params& params, const SequenceManifest& calibration) {
  return CalibrationSet::from_manifest(calibration).evaluate(params);
}

inline CalibrationReport configure(const ParamSpace& space, CalibrationSet& calibration) {
  return configure(space, [&](const Params& p) { return calibration.evaluate(p); });
}

inline CalibrationReport configure(const ParamSpace& space, const SequenceManifest& calibration) {
  CalibrationSet set = CalibrationSet::from_manifest(calibration);
  return configure(space, set);
}

inline void to_json(nlohmann::json& j, const AxisRange& r) { j = nlohmann::json{{"min", r.min}, {"max", r.max}}; }

inline void to_json(nlohmann::json& j, const ParamSpace& s) {
  j = nlohmann::json::object();
  for (Axis a : kAxisOrder) j[std::string(axis_name(a))] = s.range(a);
  j["k"] = s.k;
  j["blur_sigma"] = s.blur_sigma;
  j["connectivity"] = s.connectivity;
}

/// Axes: {"min": .., "max": ..} or a bare number (a fixed value). Omitted axes keep defaults.
inline void from_json(const nlohmann::json& j, ParamSpace& s) {
  if (!j.is_object()) throw ParameterError("param space: expected a JSON object");
  try {
    for (Axis a : kAxisOrder) {
      const std::string name(axis_name(a));
      if (!j.contains(name)) continue;
      const auto& v = j.at(name);
      auto& r = s.range(a);
      if (v.is_number()) {
        r.min = r.max = v.get<double>();
      } else {
        r.min = v.at("min").get<double>();
        r.max = v.at("max").get<double>();
      }
    }
    s.k = j.value("k", s.k);
    s.blur_sigma = j.value("blur_sigma", s.blur_sigma);
    s.connectivity = j.value("connectivity", s.connectivity);
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("param space: ") + e.what());
  }
  validate(s);
}

inline nlohmann::json to_json(const CalibrationReport& r) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& e : r.trace) trace.push_back({{"params", e.params}, {"accuracy", e.accuracy}});
  return {{"best_params", r.best_params}, {"best_accuracy", r.best_accuracy}, {"passes", r.passes}, {"trace", trace}};
}

}  // namespace occupancy

#endif  // OCCUPANCY_CALIBRATION_HPP
