#ifndef OCCUPANCY_METRICS_HPP
#define OCCUPANCY_METRICS_HPP

// Per-frame confidence, exact-match accuracy and their aggregation over a sequence.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "occupancy/image.hpp"

namespace occupancy {

struct EstimateRecord {
  int frame_index = 0;
  int raw_count = 0;
  int final_count = 0;
  std::optional<int> ground_truth;
  std::optional<double> confidence;

  friend bool operator==(const EstimateRecord&, const EstimateRecord&) = default;
};

/// 1 - (estimation - real) / real, verbatim. Exceeds 1 for underestimates; undefined for real == 0.
inline std::optional<double> confidence(int estimation, int real) {
  if (real <= 0) return std::nullopt;
  return 1.0 - static_cast<double>(estimation - real) / static_cast<double>(real);
}

/// 100 * matches / total, rounded half up to one decimal, computed in integers.
inline double percent_one_decimal(std::int64_t matches, std::int64_t total) {
  if (total <= 0) throw ParameterError("percentage of an empty set");
  const std::int64_t tenths = (2000 * matches + total) / (2 * total);
  return static_cast<double>(tenths) / 10.0;
}

/// Rounds half up to one decimal.
inline double round_one_decimal(double v) { return std::floor(v * 10.0 + 0.5 + 1e-9) / 10.0; }

/// Exact-match accuracy in percent. Every record must carry ground truth.
inline double accuracy(std::span<const EstimateRecord> records) {
  if (records.empty()) throw DataError("accuracy: no records");
  std::int64_t matches = 0;
  for (const auto& r : records) {
    if (!r.ground_truth) throw DataError("accuracy: frame " + std::to_string(r.frame_index) + " has no ground truth");
    matches += r.final_count == *r.ground_truth;
  }
  return percent_one_decimal(matches, static_cast<std::int64_t>(records.size()));
}

struct Aggregate {
  double accuracy = 0.0;
  std::optional<double> mean_confidence;  // absent when every frame has zero ground truth
  int excluded_zero_truth = 0;
  int frames = 0;

  friend bool operator==(const Aggregate&, const Aggregate&) = default;
};

/// Accuracy over all frames; mean confidence over frames whose ground truth is at least 1.
inline Aggregate aggregate(std::span<const EstimateRecord> records) {
  Aggregate a;
  a.accuracy = accuracy(records);
  a.frames = static_cast<int>(records.size());
  double sum = 0.0;
  int used = 0;
  for (const auto& r : records) {
    if (const auto c = confidence(r.final_count, *r.ground_truth)) {
      sum += *c;
      ++used;
    } else {
      ++a.excluded_zero_truth;
    }
  }
  if (used > 0) a.mean_confidence = sum / used;
  return a;
}

/// Plain arithmetic mean, e.g. across experiments.
inline double mean(std::span<const double> values) {
  if (values.empty()) throw ParameterError("mean of an empty set");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

inline nlohmann::json to_json(const Aggregate& a) {
  nlohmann::json j{{"frames", a.frames},
                   {"accuracy", a.accuracy},
                   {"excluded_zero_truth", a.excluded_zero_truth},
                   {"mean_confidence", nullptr}};
  if (a.mean_confidence) j["mean_confidence"] = *a.mean_confidence;
  return j;
}

/// Records that carry ground truth, in order.
inline std::vector<EstimateRecord> with_ground_truth(std::span<const EstimateRecord> records) {
  std::vector<EstimateRecord> out;
  for (const auto& r : records)
    if (r.ground_truth) out.push_back(r);
  return out;
}

}  // namespace occupancy

#endif  // OCCUPANCY_METRICS_HPP
