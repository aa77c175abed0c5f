#ifndef OCCUPANCY_FILTERING_HPP
#define OCCUPANCY_FILTERING_HPP

#include <vector>

#include "occupancy/ccl.hpp"
#include "occupancy/params.hpp"

namespace occupancy {

struct ComponentFilterDecision {
  std::vector<int> kept_labels;
  int raw_count = 0;
};

/// Keeps components whose area lies in [noise_low, noise_high] (both inclusive).
inline ComponentFilterDecision noise_filter(const LabelMap& labelmap, int noise_low, int noise_high) {
  if (noise_low < 0) throw ParameterError("noise_low must be >= 0");
  if (noise_low > noise_high) throw ParameterError("noise_low must not exceed noise_high");
  ComponentFilterDecision d;
  for (std::size_t i = 0; i < labelmap.sizes.size(); ++i) {
    const auto area = labelmap.sizes[i];
    if (area >= static_cast<std::size_t>(noise_low) && area <= static_cast<std::size_t>(noise_high))
      d.kept_labels.push_back(static_cast<int>(i) + 1);
  }
  d.raw_count = static_cast<int>(d.kept_labels.size());
  return d;
}

}  // namespace occupancy

#endif  // OCCUPANCY_FILTERING_HPP
