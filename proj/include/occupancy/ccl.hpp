#ifndef OCCUPANCY_CCL_HPP
#define OCCUPANCY_CCL_HPP

// Connected component labeling of binary maps.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "occupancy/image.hpp"

namespace occupancy {

struct BoundingBox {
  int min_row = 0, max_row = 0, min_col = 0, max_col = 0;
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// labels: 0 = background, 1..n = components in raster order of first touch.
/// sizes[i-1] and bounding_boxes[i-1] describe component i.
struct LabelMap {
  int width = 0;
  int height = 0;
  std::vector<int> labels;
  std::vector<std::size_t> sizes;
  std::vector<BoundingBox> bounding_boxes;

  int count() const { return static_cast<int>(sizes.size()); }
  int at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
};

namespace detail {

inline void check_connectivity(int connectivity) {
  if (connectivity != 4 && connectivity != 8) throw ParameterError("connectivity must be 4 or 8");
}

class UnionFind {
public:
  int make() {
    parent_.push_back(static_cast<int>(parent_.size()));
    return parent_.back();
  }
  int find(int x) {
    while (parent_[static_cast<std::size_t>(x)] != x) {
      auto& p = parent_[static_cast<std::size_t>(x)];
      p = parent_[static_cast<std::size_t>(p)];  // path halving
      x = p;
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // keep the older label as root
    if (a < b)
      parent_[static_cast<std::size_t>(b)] = a;
    else
      parent_[static_cast<std::size_t>(a)] = b;
  }

private:
  std::vector<int> parent_;
};

// Renumbers provisional labels to 1..n in raster first-touch order and fills sizes/boxes.
inline void finalize_labels(LabelMap& lm) {
  int next = 0;
  std::vector<int> remap;
  for (int y = 0; y < lm.height; ++y) {
    for (int x = 0; x < lm.width; ++x) {
      int& l = lm.labels[static_cast<std::size_t>(y) * lm.width + x];
      if (l == 0) continue;
      if (static_cast<std::size_t>(l) >= remap.size()) remap.resize(static_cast<std::size_t>(l) + 1, 0);
      int& r = remap[static_cast<std::size_t>(l)];
      if (r == 0) {
        r = ++next;
        lm.sizes.push_back(0);
        lm.bounding_boxes.push_back({y, y, x, x});
      }
      l = r;
      auto& box = lm.bounding_boxes[static_cast<std::size_t>(r - 1)];
      ++lm.sizes[static_cast<std::size_t>(r - 1)];
      box.min_row = std::min(box.min_row, y);
      box.max_row = std::max(box.max_row, y);
      box.min_col = std::min(box.min_col, x);
      box.max_col = std::max(box.max_col, x);
    }
  }
}

}  // namespace detail

/// Two-pass labeling with union-find equivalence merging.
inline LabelMap label_components(const BinaryMap& map, int connectivity = 8) {
  detail::check_connectivity(connectivity);
  const int w = map.width, h = map.height;
  LabelMap lm;
  lm.width = w;
  lm.height = h;
  lm.labels.assign(map.size(), 0);

  detail::UnionFind uf;
  uf.make();  // slot 0 is background
  auto label_of = [&](int x, int y) -> int {
    if (x < 0 || y < 0 || x >= w || y >= h) return 0;
    return lm.labels[static_cast<std::size_t>(y) * w + x];
  };

  // First pass: provisional labels from the already-visited neighbours.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!map.at(x, y)) continue;
      int neighbours[4];
      int count = 0;
      auto consider = [&](int nx, int ny) {
        if (const int l = label_of(nx, ny)) neighbours[count++] = l;
      };
      consider(x - 1, y);
      consider(x, y - 1);
      if (connectivity == 8) {
        consider(x - 1, y - 1);
        consider(x + 1, y - 1);
      }
      int label;
      if (count == 0) {
        label = uf.make();
      } else {
        label = *std::min_element(neighbours, neighbours + count);
        for (int i = 0; i < count; ++i) uf.unite(label, neighbours[i]);
      }
      lm.labels[static_cast<std::size_t>(y) * w + x] = label;
    }
  }

  // Second pass: resolve equivalences.
  for (int& l : lm.labels)
    if (l) l = uf.find(l);
  detail::finalize_labels(lm);
  return lm;
}

/// Stack-based flood fill with the same output contract. Used to cross-check label_components.
inline LabelMap flood_fill_oracle(const BinaryMap& map, int connectivity = 8) {
  detail::check_connectivity(connectivity);
  const int w = map.width, h = map.height;
  LabelMap lm;
  lm.width = w;
  lm.height = h;
  lm.labels.assign(map.size(), 0);
  int next = 0;
  std::vector<std::pair<int, int>> stack;
  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      if (!map.at(x0, y0) || lm.at(x0, y0)) continue;
      ++next;
      stack.assign(1, {x0, y0});
      lm.labels[static_cast<std::size_t>(y0) * w + x0] = next;
      while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if ((dx == 0 && dy == 0) || (connectivity == 4 && dx != 0 && dy != 0)) continue;
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h || !map.at(nx, ny)) continue;
            int& l = lm.labels[static_cast<std::size_t>(ny) * w + nx];
            if (l) continue;
            l = next;
            stack.emplace_back(nx, ny);
          }
        }
      }
    }
  }
  detail::finalize_labels(lm);
  return lm;
}

}  // namespace occupancy

#endif  // OCCUPANCY_CCL_HPP
