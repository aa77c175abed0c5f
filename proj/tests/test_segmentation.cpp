#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "occupancy/segmentation.hpp"
#include "oracles.hpp"

using namespace occupancy;

namespace {

ThermalFrame frame_of(std::vector<double> values, int w = -1) {
  if (w < 0) w = static_cast<int>(values.size());
  ThermalFrame f(w, static_cast<int>(values.size()) / w);
  f.data = std::move(values);
  return f;
}

ThermalFrame blob_frame(int w, int h, int x0, int y0, int size, double hot, double cold) {
  ThermalFrame f(w, h, cold);
  for (int y = y0; y < y0 + size; ++y)
    for (int x = x0; x < x0 + size; ++x) f(x, y) = hot;
  return f;
}

}  // namespace

TEST(KMeans, ConstantFrameSingleCluster) {
  const KMeansResult r = kmeans_intensity(ThermalFrame(5, 4, 0.37), 1);
  ASSERT_EQ(r.k(), 1);
  EXPECT_DOUBLE_EQ(r.centroids[0], 0.37);
  EXPECT_DOUBLE_EQ(r.inertia, 0.0);
  EXPECT_FALSE(r.k_reduced);
}

TEST(KMeans, SymmetricSplit) {
  const KMeansResult r = kmeans_intensity(frame_of({0, 0, 1, 1}), 2);
  EXPECT_EQ(r.centroids, (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(r.assignments, (std::vector<int>{0, 0, 1, 1}));
  EXPECT_DOUBLE_EQ(r.inertia, 0.0);
}

TEST(KMeans, MatchesExhaustivePartitionOnFixture) {
  const std::vector<double> v{0.10, 0.12, 0.11, 0.80, 0.82};
  const auto [lo, hi] = oracle::exhaustive_two_means_centroids(v);
  EXPECT_NEAR(lo, 0.11, 1e-12);
  EXPECT_NEAR(hi, 0.81, 1e-12);
  const KMeansResult r = kmeans_intensity(frame_of(v), 2);
  ASSERT_EQ(r.k(), 2);
  EXPECT_NEAR(r.centroids[0], lo, 1e-12);
  EXPECT_NEAR(r.centroids[1], hi, 1e-12);
  EXPECT_EQ(r.assignments, (std::vector<int>{0, 0, 0, 1, 1}));
}

TEST(KMeans, FewerDistinctValuesReducesK) {
  const KMeansResult r = kmeans_intensity(ThermalFrame(4, 4, 0.1), 2);
  EXPECT_TRUE(r.k_reduced);
  EXPECT_EQ(r.k(), 1);
  const KMeansResult three = kmeans_intensity(frame_of({0.2, 0.2, 0.9, 0.9, 0.9}), 4);
  EXPECT_TRUE(three.k_reduced);
  EXPECT_EQ(three.centroids, (std::vector<double>{0.2, 0.9}));
}

TEST(KMeans, DuplicateQuantilesStillGiveDistinctCentroids) {
  // Quantiles 0.25 and 0.75 both land on 0.0; initialization must spread them.
  const KMeansResult r = kmeans_intensity(frame_of({0, 0, 0, 0, 0, 0, 0, 1}), 2);
  EXPECT_EQ(r.centroids, (std::vector<double>{0.0, 1.0}));
}

TEST(KMeans, RejectsBadParameters) {
  EXPECT_THROW(kmeans_intensity(ThermalFrame(2, 2, 0.5), 0), ParameterError);
  EXPECT_THROW(kmeans_intensity(ThermalFrame(), 2), ParameterError);
  EXPECT_THROW(kmeans_intensity(ThermalFrame(2, 2), 2, 10, -1.0), ParameterError);
}

TEST(KMeans, EscapesLocalMinimumOfLloyd) {
  // Quantile init puts the split between the two left groups' neighbours; Lloyd alone stalls.
  const std::vector<double> v{0.0, 0.0, 0.0, 0.30, 0.31, 0.32, 0.33, 1.0};
  const KMeansResult r = kmeans_intensity(frame_of(v), 2);
  EXPECT_NEAR(r.inertia, oracle::exhaustive_two_means_inertia(v), 1e-12);
}

TEST(KMeansProperty, NearestCentroidTieLowerAndFixedPoint) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> size(1, 64), k_d(1, 5), level(0, 20);
  for (int trial = 0; trial < 400; ++trial) {
    std::vector<double> v(static_cast<std::size_t>(size(rng)));
    for (double& x : v) x = level(rng) / 20.0;  // coarse levels force ties
    const int k = k_d(rng);
    const KMeansResult r = kmeans_intensity(frame_of(v), k);
    ASSERT_TRUE(std::is_sorted(r.centroids.begin(), r.centroids.end()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      const int a = r.assignments[i];
      const double d = std::abs(v[i] - r.centroids[static_cast<std::size_t>(a)]);
      for (int c = 0; c < r.k(); ++c) {
        const double dc = std::abs(v[i] - r.centroids[static_cast<std::size_t>(c)]);
        ASSERT_TRUE(dc > d || (dc == d && c >= a)) << "pixel " << i << " cluster " << c;
      }
    }
    double inertia = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double d = v[i] - r.centroids[static_cast<std::size_t>(r.assignments[i])];
      inertia += d * d;
    }
    EXPECT_NEAR(inertia, r.inertia, 1e-12);
  }
}

TEST(KMeansProperty, InertiaNeverIncreases) {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    ThermalFrame f(16, 16);
    for (double& x : f.data) x = u(rng) * u(rng);
    const KMeansResult r = kmeans_intensity(f, 3);
    for (std::size_t i = 1; i < r.inertia_history.size(); ++i)
      ASSERT_LE(r.inertia_history[i], r.inertia_history[i - 1] + 1e-12);
  }
}

TEST(KMeansProperty, Deterministic) {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> u(0, 1);
  ThermalFrame f(40, 30);
  for (double& x : f.data) x = u(rng);
  const KMeansResult a = kmeans_intensity(f, 3), b = kmeans_intensity(f, 3);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.centroids, b.centroids);
}

TEST(HotClusterMap, SelectsHottestCluster) {
  KMeansResult r;
  r.centroids = {0.1, 0.8};
  r.assignments = {0, 0, 1, 0};
  const BinaryMap m = hot_cluster_map(r, 2, 2);
  EXPECT_EQ(m.data, (std::vector<std::uint8_t>{0, 0, 1, 0}));
}

TEST(HotClusterMap, SingleClusterIsAllForeground) {
  const KMeansResult r = kmeans_intensity(ThermalFrame(3, 3, 0.4), 1);
  EXPECT_EQ(hot_cluster_map(r, 3, 3).popcount(), 9u);
}

TEST(HotClusterMap, Checkerboard) {
  ThermalFrame f(6, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 6; ++x) f(x, y) = (x + y) % 2 ? 0.7 : 0.2;
  const BinaryMap m = hot_cluster_map(kmeans_intensity(f, 2), 6, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 6; ++x) EXPECT_EQ(m.at(x, y), (x + y) % 2 == 1);
}

TEST(LightingThreshold, ZeroThresholdKeepsConnectedPixels) {
  const BinaryMap m = oracle::rect_map(8, 8, 2, 2, 3, 2);
  EXPECT_EQ(apply_lighting_threshold(m, ThermalFrame(8, 8, 0.0), 0.0), m);
}

TEST(LightingThreshold, IsolatedPixelCleared) {
  BinaryMap m(5, 5);
  m.set(2, 2, true);
  EXPECT_EQ(apply_lighting_threshold(m, ThermalFrame(5, 5, 1.0), 0.0).popcount(), 0u);
  // a diagonal neighbour is enough to survive
  m.set(3, 3, true);
  EXPECT_EQ(apply_lighting_threshold(m, ThermalFrame(5, 5, 1.0), 0.0).popcount(), 2u);
}

TEST(LightingThreshold, ColdForegroundCleared) {
  const BinaryMap m = oracle::rect_map(5, 5, 1, 1, 3, 3);
  EXPECT_EQ(apply_lighting_threshold(m, ThermalFrame(5, 5, 0.6), 0.7).popcount(), 0u);
  EXPECT_EQ(apply_lighting_threshold(m, ThermalFrame(5, 5, 0.7), 0.7).popcount(), 9u);
}

TEST(LightingThreshold, OnlyClearsAndValidates) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const BinaryMap m = oracle::random_map(rng, 12, 9, 0.4);
    ThermalFrame f(12, 9);
    for (double& x : f.data) x = u(rng);
    const BinaryMap out = apply_lighting_threshold(m, f, 0.3);
    for (std::size_t i = 0; i < m.size(); ++i) ASSERT_LE(out.data[i], m.data[i]);
  }
  EXPECT_THROW(apply_lighting_threshold(BinaryMap(2, 2), ThermalFrame(2, 2), 1.5), ParameterError);
  EXPECT_THROW(apply_lighting_threshold(BinaryMap(2, 2), ThermalFrame(3, 2), 0.5), ParameterError);
}

TEST(GaussianBlur, ConstantFields) {
  EXPECT_EQ(gaussian_blur_binary(BinaryMap(9, 7, false), 1.0).popcount(), 0u);
  EXPECT_EQ(gaussian_blur_binary(BinaryMap(9, 7, true), 1.0).popcount(), 63u);
  EXPECT_EQ(gaussian_blur_binary(BinaryMap(1, 1, true), 2.5).popcount(), 1u);
}

TEST(GaussianBlur, SinglePixelVanishes) {
  const auto k = gaussian_kernel(1.0);
  const double centre = k[k.size() / 2] * k[k.size() / 2];
  EXPECT_NEAR(centre, 0.159, 1e-3);
  BinaryMap m(11, 11);
  m.set(5, 5, true);
  EXPECT_EQ(gaussian_blur_binary(m, 1.0, 0.5).popcount(), 0u);
}

TEST(GaussianBlur, AgreesWithDirectConvolution) {
  std::mt19937 rng(21);
  for (double sigma : {0.6, 1.0, 1.7}) {
    for (int trial = 0; trial < 30; ++trial) {
      const BinaryMap m = oracle::random_map(rng, 3 + trial % 17, 2 + trial % 11, 0.5);
      EXPECT_EQ(gaussian_blur_binary(m, sigma, 0.5), oracle::blur_direct(m, sigma, 0.5)) << sigma << " " << trial;
    }
  }
}

TEST(GaussianBlur, ReflectIndex) {
  EXPECT_EQ(reflect_index(-1, 5), 1);
  EXPECT_EQ(reflect_index(-4, 5), 4);
  EXPECT_EQ(reflect_index(5, 5), 3);
  EXPECT_EQ(reflect_index(9, 5), 1);
  EXPECT_EQ(reflect_index(7, 1), 0);
}

TEST(ApplyMask, Identities) {
  std::mt19937 rng(4);
  const BinaryMap m = oracle::random_map(rng, 10, 6, 0.5);
  EXPECT_EQ(apply_mask(m, BinaryMap(10, 6)), m);
  EXPECT_EQ(apply_mask(m, m).popcount(), 0u);
}

TEST(ApplyMask, SetDifference) {
  BinaryMap map(4, 1), mask(4, 1);
  map.set(0, 0, true);  // A
  map.set(1, 0, true);  // B
  mask.set(1, 0, true);
  mask.set(2, 0, true);  // C
  BinaryMap expected(4, 1);
  expected.set(0, 0, true);
  EXPECT_EQ(apply_mask(map, mask), expected);
  EXPECT_THROW(apply_mask(map, BinaryMap(3, 1)), ParameterError);
}

TEST(Segment, UniformColdFrameIsEmpty) {
  Params p;
  p.lighting_threshold = 0.3;
  EXPECT_EQ(segment(ThermalFrame(200, 100, 0.1), BinaryMap(200, 100), p).popcount(), 0u);
}

TEST(Segment, WarmBlobTracedThroughStages) {
  Params p;
  p.lighting_threshold = 0.3;
  const ThermalFrame f = blob_frame(40, 30, 10, 8, 6, 0.9, 0.1);
  // hot cluster = the blob; lighting keeps it; blur shape from the direct 2-D oracle
  const BinaryMap blob = oracle::rect_map(40, 30, 10, 8, 6, 6);
  const BinaryMap expected = oracle::blur_direct(blob, 1.0, 0.5);
  const BinaryMap got = segment(f, BinaryMap(40, 30), p);
  EXPECT_EQ(got, expected);
  // the blur rounds off the four corners of the square
  EXPECT_EQ(got.popcount(), 32u);
  EXPECT_FALSE(got.at(10, 8));
  EXPECT_TRUE(got.at(11, 8));
}

TEST(Segment, MaskedBlobDisappears) {
  Params p;
  const ThermalFrame f = blob_frame(40, 30, 10, 8, 6, 0.9, 0.1);
  const BinaryMap mask = segment_unmasked(f, p);
  EXPECT_EQ(segment(f, mask, p).popcount(), 0u);
}

TEST(Segment, OutputIsSubsetOfUnmaskedAndDeterministic) {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(0, 1);
  Params p;
  for (int trial = 0; trial < 20; ++trial) {
    ThermalFrame f(30, 20);
    for (double& x : f.data) x = u(rng);
    const BinaryMap mask = oracle::random_map(rng, 30, 20, 0.3);
    const BinaryMap a = segment(f, mask, p);
    EXPECT_EQ(a, segment(f, mask, p));
    const BinaryMap unmasked = segment_unmasked(f, p);
    for (std::size_t i = 0; i < a.size(); ++i) ASSERT_LE(a.data[i], unmasked.data[i]);
  }
}
