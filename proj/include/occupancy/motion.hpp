#ifndef OCCUPANCY_MOTION_HPP
#define OCCUPANCY_MOTION_HPP

#include "occupancy/image.hpp"

namespace occupancy {

/// Difference catcher: pixels whose segmentation changed between consecutive frames (XOR).
inline DifferenceMap difference_catcher(const BinaryMap& prev, const BinaryMap& curr) {
  require_same_shape(prev, curr, "difference_catcher");
  DifferenceMap out(prev.width, prev.height);
  for (std::size_t i = 0; i < prev.size(); ++i) out.data[i] = (prev.data[i] != 0) != (curr.data[i] != 0) ? 1 : 0;
  return out;
}

}  // namespace occupancy

#endif  // OCCUPANCY_MOTION_HPP
