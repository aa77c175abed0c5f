#ifndef OCCUPANCY_SEGMENTATION_HPP
#define OCCUPANCY_SEGMENTATION_HPP

// Thresholding k-means: intensity clustering, hot-cluster extraction, lighting threshold,
// Gaussian smoothing of the binary map and suppression by the initialization mask.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "occupancy/image.hpp"
#include "occupancy/params.hpp"

namespace occupancy {

struct KMeansResult {
  std::vector<int> assignments;  // per pixel, cluster id in [0, k)
  std::vector<double> centroids; // ascending
  int iterations = 0;
  double inertia = 0.0;
  bool k_reduced = false;        // fewer distinct intensities than the requested k
  std::vector<double> inertia_history;  // inertia after every centroid update

  int k() const { return static_cast<int>(centroids.size()); }
};

namespace detail {

/// Distinct sorted values with multiplicities.
struct WeightedValues {
  std::vector<double> value;
  std::vector<double> weight;
};

inline WeightedValues distinct_values(const std::vector<double>& sorted) {
  WeightedValues wv;
  for (double v : sorted) {
    if (!wv.value.empty() && wv.value.back() == v) {
      wv.weight.back() += 1.0;
    } else {
      wv.value.push_back(v);
      wv.weight.push_back(1.0);
    }
  }
  return wv;
}

/// Nearest centroid, ties to the lower id.
inline int nearest(double x, const std::vector<double>& centroids) {
  int best = 0;
  double best_d = std::abs(x - centroids[0]);
  for (int c = 1; c < static_cast<int>(centroids.size()); ++c) {
    const double d = std::abs(x - centroids[static_cast<std::size_t>(c)]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

inline double weighted_inertia(const WeightedValues& wv, const std::vector<int>& assign,
                               const std::vector<double>& centroids) {
  double s = 0.0;
  for (std::size_t i = 0; i < wv.value.size(); ++i) {
    const double d = wv.value[i] - centroids[static_cast<std::size_t>(assign[i])];
    s += wv.weight[i] * d * d;
  }
  return s;
}

// Globally optimal contiguous partition of sorted weighted values into k groups
// (divide-and-conquer DP, the split point is monotone in the prefix end).
// Returns the group means.
class OptimalSplit1D {
public:
  OptimalSplit1D(const WeightedValues& wv, int k) : m_(wv.value.size()), k_(k) {
    double shift = 0.0, wsum = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      shift += wv.value[i] * wv.weight[i];
      wsum += wv.weight[i];
    }
    shift /= wsum;
    w_.assign(m_ + 1, 0.0);
    s1_.assign(m_ + 1, 0.0);
    s2_.assign(m_ + 1, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const double v = wv.value[i] - shift;
      w_[i + 1] = w_[i] + wv.weight[i];
      s1_[i + 1] = s1_[i] + wv.weight[i] * v;
      s2_[i + 1] = s2_[i] + wv.weight[i] * v * v;
    }
    shift_ = shift;
  }

  std::vector<double> means() {
    const std::size_t m = m_;
    const auto K = static_cast<std::size_t>(k_);
    std::vector<std::vector<double>> cost(K, std::vector<double>(m, kInf));
    split_.assign(K, std::vector<std::size_t>(m, 0));
    for (std::size_t i = 0; i < m; ++i) cost[0][i] = group_cost(0, i);
    for (std::size_t j = 1; j < K; ++j) solve(j, j, m - 1, j, m - 1, cost[j - 1], cost[j]);

    std::vector<double> centroids(K);
    std::size_t end = m - 1;
    for (std::size_t j = K; j-- > 0;) {
      const std::size_t begin = j == 0 ? 0 : split_[j][end];
      const double wsum = w_[end + 1] - w_[begin];
      centroids[j] = (s1_[end + 1] - s1_[begin]) / wsum + shift_;
      if (j > 0) end = begin - 1;
    }
    return centroids;
  }

private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  double group_cost(std::size_t a, std::size_t b) const {  // inclusive range
    const double w = w_[b + 1] - w_[a];
    const double s = s1_[b + 1] - s1_[a];
    return std::max(0.0, (s2_[b + 1] - s2_[a]) - s * s / w);
  }

  // cur[i] = min over l in [opt_lo, min(i, opt_hi)] of prev[l-1] + cost(l, i)
  void solve(std::size_t j, std::size_t lo, std::size_t hi, std::size_t opt_lo, std::size_t opt_hi,
             const std::vector<double>& prev, std::vector<double>& cur) {
    if (lo > hi) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    double best = kInf;
    std::size_t best_l = opt_lo;
    for (std::size_t l = opt_lo; l <= std::min(mid, opt_hi); ++l) {
      const double c = prev[l - 1] + group_cost(l, mid);
      if (c < best) {
        best = c;
        best_l = l;
      }
    }
    cur[mid] = best;
    split_[j][mid] = best_l;
    if (mid > lo) solve(j, lo, mid - 1, opt_lo, best_l, prev, cur);
    solve(j, mid + 1, hi, best_l, opt_hi, prev, cur);
  }

  std::size_t m_;
  int k_;
  double shift_ = 0.0;
  std::vector<double> w_, s1_, s2_;
  std::vector<std::vector<std::size_t>> split_;
};

}  // namespace detail

/// K-means on the 1-D intensity distribution.
///
/// Lloyd iterations start from the quantile centroids (i + 0.5) / k of the sorted intensities and stop
/// once no centroid moves more than `tol`, or after `max_iter` updates. Because Lloyd can settle in a
/// local minimum, the result is then compared with the exact optimal contiguous split of the sorted
/// intensities; if that split is strictly better, Lloyd resumes from it. When the frame has fewer
/// distinct intensities than `k`, k is reduced and `k_reduced` is set.
inline KMeansResult kmeans_intensity(const ThermalFrame& frame, int k = 2, int max_iter = 100, double tol = 1e-6) {
  if (k < 1) throw ParameterError("k-means: k must be >= 1");
  if (max_iter < 1) throw ParameterError("k-means: max_iter must be >= 1");
  if (!(tol >= 0.0)) throw ParameterError("k-means: tol must be non-negative");
  if (frame.empty()) throw ParameterError("k-means: empty frame");

  std::vector<double> sorted = frame.data;
  std::sort(sorted.begin(), sorted.end());
  const detail::WeightedValues wv = detail::distinct_values(sorted);
  const std::size_t m = wv.value.size();
  const std::size_t n = sorted.size();

  KMeansResult r;
  const int keff = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(k), m));
  r.k_reduced = keff < k;
  const auto K = static_cast<std::size_t>(keff);

  // Quantile initialization, nudged onto strictly increasing distinct values.
  std::vector<std::size_t> pos(K);
  for (std::size_t i = 0; i < K; ++i) {
    const auto q = std::min(n - 1, static_cast<std::size_t>((static_cast<double>(i) + 0.5) / keff * n));
    pos[i] = static_cast<std::size_t>(std::lower_bound(wv.value.begin(), wv.value.end(), sorted[q]) - wv.value.begin());
  }
  for (std::size_t i = 1; i < K; ++i) pos[i] = std::max(pos[i], pos[i - 1] + 1);
  for (std::size_t i = K; i-- > 0;) pos[i] = std::min(pos[i], i + 1 < K ? pos[i + 1] - 1 : m - 1);
  std::vector<double> centroids(K);
  for (std::size_t i = 0; i < K; ++i) centroids[i] = wv.value[pos[i]];

  std::vector<int> assign(m, 0);
  auto lloyd = [&](int budget) {
    for (int it = 0; it < budget; ++it) {
      for (std::size_t i = 0; i < m; ++i) assign[i] = detail::nearest(wv.value[i], centroids);
      std::vector<double> sum(K, 0.0), cnt(K, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        sum[static_cast<std::size_t>(assign[i])] += wv.weight[i] * wv.value[i];
        cnt[static_cast<std::size_t>(assign[i])] += wv.weight[i];
      }
      double shift = 0.0;
      for (std::size_t c = 0; c < K; ++c) {
        if (cnt[c] == 0.0) continue;  // empty cluster keeps its centroid
        const double next = sum[c] / cnt[c];
        shift = std::max(shift, std::abs(next - centroids[c]));
        centroids[c] = next;
      }
      ++r.iterations;
      r.inertia_history.push_back(detail::weighted_inertia(wv, assign, centroids));
      if (shift <= tol) return;
    }
  };
  lloyd(max_iter);

  auto final_inertia = [&](std::vector<double> c) {
    std::vector<int> a(m);
    for (std::size_t i = 0; i < m; ++i) a[i] = detail::nearest(wv.value[i], c);
    return detail::weighted_inertia(wv, a, c);
  };
  if (K > 1) {
    std::vector<double> optimal = detail::OptimalSplit1D(wv, keff).means();
    if (final_inertia(optimal) < final_inertia(centroids)) {
      centroids = std::move(optimal);
      r.inertia_history.push_back(final_inertia(centroids));
      lloyd(max_iter);
    }
  }

  std::sort(centroids.begin(), centroids.end());
  r.centroids = centroids;
  r.assignments.resize(n);
  double inertia = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    const int c = detail::nearest(frame.data[p], centroids);
    r.assignments[p] = c;
    const double d = frame.data[p] - centroids[static_cast<std::size_t>(c)];
    inertia += d * d;
  }
  r.inertia = inertia;
  return r;
}

/// Foreground = pixels of the hottest cluster. With a single cluster every pixel is foreground.
inline BinaryMap hot_cluster_map(const KMeansResult& result, int width, int height) {
  if (result.assignments.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw ParameterError("hot_cluster_map: assignment count does not match dimensions");
  BinaryMap map(width, height);
  const int hot = result.k() - 1;
  for (std::size_t i = 0; i < map.size(); ++i) map.data[i] = result.assignments[i] == hot ? 1 : 0;
  return map;
}

/// Clears foreground pixels that are colder than the threshold or have no foreground 8-neighbour.
inline BinaryMap apply_lighting_threshold(const BinaryMap& map, const ThermalFrame& frame, double lighting_threshold) {
  if (!(lighting_threshold >= 0.0 && lighting_threshold <= 1.0))
    throw ParameterError("lighting_threshold must lie in [0,1]");
  if (!map.same_shape(frame)) throw ParameterError("apply_lighting_threshold: dimension mismatch");
  BinaryMap out(map.width, map.height);
  for (int y = 0; y < map.height; ++y) {
    for (int x = 0; x < map.width; ++x) {
      if (!map.at(x, y) || frame(x, y) < lighting_threshold) continue;
      bool has_neighbour = false;
      for (int dy = -1; dy <= 1 && !has_neighbour; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx, ny = y + dy;
          if (nx >= 0 && ny >= 0 && nx < map.width && ny < map.height && map.at(nx, ny)) {
            has_neighbour = true;
            break;
          }
        }
      }
      out.set(x, y, has_neighbour);
    }
  }
  return out;
}

/// Normalized Gaussian taps for offsets -radius..radius, radius = ceil(3 sigma).
inline std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw ParameterError("blur sigma must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

/// Mirror reflection about the edge pixel centres (…2 1 | 0 1 2 … n-1 | n-2 …), any offset.
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

/// Treats the map as a 0/1 field, convolves it with a separable Gaussian and re-thresholds (>= cut).
inline BinaryMap gaussian_blur_binary(const BinaryMap& map, double sigma = 1.0, double rebinarize_at = 0.5) {
  if (!(rebinarize_at > 0.0 && rebinarize_at < 1.0)) throw ParameterError("rebinarize threshold must lie in (0,1)");
  const auto kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int w = map.width, h = map.height;

  Grid<double> horiz(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int t = -radius; t <= radius; ++t)
        if (map(reflect_index(x + t, w), y)) s += kernel[static_cast<std::size_t>(t + radius)];
      horiz(x, y) = s;
    }

  BinaryMap out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int t = -radius; t <= radius; ++t)
        s += kernel[static_cast<std::size_t>(t + radius)] * horiz(x, reflect_index(y + t, h));
      out.set(x, y, s >= rebinarize_at);
    }
  return out;
}

/// map AND NOT mask.
inline BinaryMap apply_mask(const BinaryMap& map, const BinaryMap& mask) {
  require_same_shape(map, mask, "apply_mask");
  BinaryMap out(map.width, map.height);
  for (std::size_t i = 0; i < map.size(); ++i) out.data[i] = (map.data[i] && !mask.data[i]) ? 1 : 0;
  return out;
}

/// Lighting threshold then blur, applied to a hot-cluster map.
inline BinaryMap clean_hot_map(const BinaryMap& hot, const ThermalFrame& frame, const Params& params) {
  return gaussian_blur_binary(apply_lighting_threshold(hot, frame, params.lighting_threshold), params.blur_sigma);
}

/// Hot cluster, lighting threshold and blur; no mask. Also the mask-capture path.
inline BinaryMap segment_unmasked(const ThermalFrame& frame, const Params& params) {
  const KMeansResult km = kmeans_intensity(frame, params.k);
  return clean_hot_map(hot_cluster_map(km, frame.width, frame.height), frame, params);
}

inline BinaryMap segment(const ThermalFrame& frame, const BinaryMap& mask, const Params& params) {
  return apply_mask(segment_unmasked(frame, params), mask);
}

}  // namespace occupancy

#endif  // OCCUPANCY_SEGMENTATION_HPP
