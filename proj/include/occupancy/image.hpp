#ifndef OCCUPANCY_IMAGE_HPP
#define OCCUPANCY_IMAGE_HPP

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace occupancy {

/// Raised for out-of-range tunables and inconsistent arguments.
class ParameterError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for bad input data: missing or malformed files, wrong formats.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Row-major 2-D grid. Width and height are pixel counts.
template <typename T>
struct Grid {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(int w, int h, T fill = T{}) : width(w), height(h), data(checked_size(w, h), fill) {}

  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }

  T& operator()(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  const T& operator()(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

  bool same_shape(int w, int h) const { return width == w && height == h; }
  template <typename U>
  bool same_shape(const Grid<U>& other) const { return same_shape(other.width, other.height); }

  friend bool operator==(const Grid&, const Grid&) = default;

private:
  static std::size_t checked_size(int w, int h) {
    if (w < 0 || h < 0) throw ParameterError("negative grid dimensions");
    return static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  }
};

/// One thermal image. Intensities are normalized into [0,1].
struct ThermalFrame : Grid<double> {
  double timestamp_s = 0.0;

  ThermalFrame() = default;
  ThermalFrame(int w, int h, double fill = 0.0, double t = 0.0) : Grid<double>(w, h, fill), timestamp_s(t) {}

  friend bool operator==(const ThermalFrame&, const ThermalFrame&) = default;
};

/// Foreground map; nonzero means human candidate. uint8_t storage avoids vector<bool>.
struct BinaryMap : Grid<std::uint8_t> {
  BinaryMap() = default;
  BinaryMap(int w, int h, bool fill = false) : Grid<std::uint8_t>(w, h, fill ? 1 : 0) {}

  bool at(int x, int y) const { return (*this)(x, y) != 0; }
  void set(int x, int y, bool v) { (*this)(x, y) = v ? 1 : 0; }

  std::size_t popcount() const {
    std::size_t n = 0;
    for (auto b : data) n += b != 0;
    return n;
  }

  friend bool operator==(const BinaryMap&, const BinaryMap&) = default;
};

/// Pixels where two consecutive segmentations disagree.
using DifferenceMap = BinaryMap;

inline void require_same_shape(const BinaryMap& a, const BinaryMap& b, const char* what) {
  if (!a.same_shape(b))
    throw ParameterError(std::string(what) + ": dimension mismatch (" + std::to_string(a.width) + "x" +
                         std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                         std::to_string(b.height) + ")");
}

}  // namespace occupancy

#endif  // OCCUPANCY_IMAGE_HPP
