#ifndef OCCUPANCY_PARAMS_HPP
#define OCCUPANCY_PARAMS_HPP

#include <limits>
#include <string>

#include "json.hpp"
#include "occupancy/image.hpp"

namespace occupancy {

/// Upper noise bound meaning "no upper limit".
inline constexpr int kUnboundedArea = std::numeric_limits<int>::max();

/// Estimation tunables. The first five are the calibrated ones; the rest are fixed algorithm constants.
struct Params {
  int mask_update_frequency = 10;  // sampled frames between mask refreshes
  double lighting_threshold = 0.3;
  int noise_low = 20;              // inclusive component-area band, pixels at working resolution
  int noise_high = 2000;
  int memory_size = 3;             // memory window length
  int k = 2;
  double blur_sigma = 1.0;
  int connectivity = 8;

  friend bool operator==(const Params&, const Params&) = default;
};

inline void validate(const Params& p) {
  if (p.mask_update_frequency < 1) throw ParameterError("mask_update_frequency must be >= 1");
  if (!(p.lighting_threshold >= 0.0 && p.lighting_threshold <= 1.0))
    throw ParameterError("lighting_threshold must lie in [0,1]");
  if (p.noise_low < 0) throw ParameterError("noise_low must be >= 0");
  if (p.noise_low > p.noise_high) throw ParameterError("noise_low must not exceed noise_high");
  if (p.memory_size < 1) throw ParameterError("memory_size must be >= 1");
  if (p.k < 1) throw ParameterError("k must be >= 1");
  if (!(p.blur_sigma > 0.0)) throw ParameterError("blur_sigma must be positive");
  if (p.connectivity != 4 && p.connectivity != 8) throw ParameterError("connectivity must be 4 or 8");
}

inline void to_json(nlohmann::json& j, const Params& p) {
  j = nlohmann::json{{"lighting_threshold", p.lighting_threshold},
                     {"noise_low", p.noise_low},
                     {"noise_high", p.noise_high},
                     {"mask_update_frequency", p.mask_update_frequency},
                     {"memory_size", p.memory_size},
                     {"k", p.k},
                     {"blur_sigma", p.blur_sigma},
                     {"connectivity", p.connectivity}};
}

/// Missing keys keep their defaults; the result is validated.
inline void from_json(const nlohmann::json& j, Params& p) {
  if (!j.is_object()) throw ParameterError("params: expected a JSON object");
  try {
    p.lighting_threshold = j.value("lighting_threshold", p.lighting_threshold);
    p.noise_low = j.value("noise_low", p.noise_low);
    p.noise_high = j.value("noise_high", p.noise_high);
    p.mask_update_frequency = j.value("mask_update_frequency", p.mask_update_frequency);
    p.memory_size = j.value("memory_size", p.memory_size);
    p.k = j.value("k", p.k);
    p.blur_sigma = j.value("blur_sigma", p.blur_sigma);
    p.connectivity = j.value("connectivity", p.connectivity);
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("params: ") + e.what());
  }
  validate(p);
}

}  // namespace occupancy

#endif  // OCCUPANCY_PARAMS_HPP
