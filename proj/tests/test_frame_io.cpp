#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <unistd.h>

#include "occupancy/frame_io.hpp"

using namespace occupancy;

namespace {

class TempDir {
public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("occupancy_frame_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

private:
  fs::path path_;
};

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

std::string pgm8(int w, int h, unsigned char value) {
  std::string s = "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  s.append(static_cast<std::size_t>(w * h), static_cast<char>(value));
  return s;
}

void write_sequence(const fs::path& dir, int n, int w = 4, int h = 3) {
  for (int i = 0; i < n; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "f%03d.pgm", i);
    write_text(dir / name, pgm8(w, h, static_cast<unsigned char>(i)));
  }
}

std::string frame_list(int n) {
  std::string s = "[";
  for (int i = 0; i < n; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "\"f%03d.pgm\"", i);
    s += (i ? "," : "") + std::string(name);
  }
  return s + "]";
}

}  // namespace

TEST(ReadFrame, EightBitAllMaxIsOne) {
  std::istringstream in(pgm8(3, 2, 255));
  const ThermalFrame f = read_frame(in);
  EXPECT_EQ(f.width, 3);
  EXPECT_EQ(f.height, 2);
  for (double v : f.data) EXPECT_EQ(v, 1.0);
}

TEST(ReadFrame, SixteenBitNormalizesByFormatMax) {
  std::string s = "P5\n1 1\n65535\n";
  s.push_back(static_cast<char>(0x80));
  s.push_back(static_cast<char>(0x00));
  std::istringstream in(s);
  const ThermalFrame f = read_frame(in);
  EXPECT_DOUBLE_EQ(f.data[0], 32768.0 / 65535.0);
  EXPECT_NEAR(f.data[0], 0.50001, 1e-5);
}

TEST(ReadFrame, AsciiWithComments) {
  std::istringstream in("P2\n# comment\n2 2\n# another\n255\n0 51\n102 255\n");
  const ThermalFrame f = read_frame(in);
  EXPECT_DOUBLE_EQ(f(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(f(1, 0), 0.2);
  EXPECT_DOUBLE_EQ(f(0, 1), 0.4);
  EXPECT_DOUBLE_EQ(f(1, 1), 1.0);
}

TEST(ReadFrame, RejectsColorImages) {
  std::istringstream in("P6\n1 1\n255\nabc");
  try {
    read_frame(in);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("unsupported pixel format"), std::string::npos);
  }
}

TEST(ReadFrame, RejectsTruncatedAndDegenerate) {
  std::istringstream truncated("P5\n4 4\n255\nabc");
  EXPECT_THROW(read_frame(truncated), DataError);
  std::istringstream zero("P5\n0 4\n255\n");
  EXPECT_THROW(read_frame(zero), DataError);
  std::istringstream ascii_short("P2\n2 2\n255\n1 2 3\n");
  EXPECT_THROW(read_frame(ascii_short), DataError);
}

TEST(WriteFrame, SixteenBitRoundTripIsExact) {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> level(0, 65535);
  ThermalFrame f(13, 7);
  for (double& v : f.data) v = level(rng) / 65535.0;
  std::stringstream buf;
  write_frame(buf, f, 16);
  EXPECT_EQ(read_frame(buf).data, f.data);
}

TEST(WriteFrame, EightBitRoundTripWithinQuantization) {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ThermalFrame f(9, 5);
  for (double& v : f.data) v = u(rng);
  std::stringstream buf;
  write_frame(buf, f, 8);
  const ThermalFrame back = read_frame(buf);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_LE(std::abs(back.data[i] - f.data[i]), 0.5 / 255 + 1e-12);
}

TEST(SampleIndices, TwoSecondIntervalAtTenFps) {
  EXPECT_EQ(sample_indices(100, 10.0, 2.0), (std::vector<int>{0, 20, 40, 60, 80}));
}

TEST(SampleIndices, ShortSequenceKeepsOnlyFirstFrame) {
  EXPECT_EQ(sample_indices(10, 10.0, 2.0), (std::vector<int>{0}));
}

TEST(SampleIndices, OneFramePeriodKeepsEverything) {
  std::vector<int> all(10);
  for (int i = 0; i < 10; ++i) all[static_cast<std::size_t>(i)] = i;
  EXPECT_EQ(sample_indices(10, 10.0, 0.1), all);
}

TEST(SampleIndices, RoundsHalfDown) {
  // interval * fps = 1.5 -> targets 0, 1.5, 3, 4.5 -> indices 0, 1, 3, 4
  EXPECT_EQ(sample_indices(6, 3.0, 0.5), (std::vector<int>{0, 1, 3, 4}));
}

TEST(SampleIndices, SubFrameIntervalNeverRepeats) {
  const auto idx = sample_indices(5, 1.0, 0.3);
  EXPECT_EQ(idx, (std::vector<int>{0, 1, 2, 3, 4}));
}

TEST(SampleIndices, TimestampsIncreaseAndStayNearGrid) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> fps_d(0.5, 30.0), dt_d(0.05, 5.0);
  std::uniform_int_distribution<int> n_d(1, 400);
  for (int trial = 0; trial < 500; ++trial) {
    const double fps = fps_d(rng), dt = dt_d(rng);
    const auto idx = sample_indices(static_cast<std::size_t>(n_d(rng)), fps, dt);
    ASSERT_FALSE(idx.empty());
    EXPECT_EQ(idx.front(), 0);
    for (std::size_t i = 1; i < idx.size(); ++i) ASSERT_LT(idx[i - 1], idx[i]);
    // every kept sample lies within one source period of some k * dt
    for (int i : idx) {
      const double t = i / fps;
      const double k = std::round(t / dt);
      EXPECT_LE(std::abs(t - k * dt), 1.0 / fps + 1e-9);
    }
  }
}

TEST(CropResize, IdentityAtTargetResolution) {
  ThermalFrame f(200, 100);
  for (std::size_t i = 0; i < f.size(); ++i) f.data[i] = static_cast<double>(i % 97) / 96.0;
  EXPECT_EQ(crop_resize(f, 200, 100).data, f.data);
}

TEST(CropResize, ConstantFramePreservedExactly) {
  for (auto [w, h] : {std::pair{400, 200}, {333, 180}, {640, 480}, {201, 100}, {217, 131}}) {
    ThermalFrame f(w, h, 0.5);
    const ThermalFrame out = crop_resize(f, 200, 100);
    ASSERT_EQ(out.width, 200);
    ASSERT_EQ(out.height, 100);
    for (double v : out.data) ASSERT_EQ(v, 0.5) << w << "x" << h;
  }
}

TEST(CropResize, HalvingAveragesTwoByTwoBlocks) {
  ThermalFrame f(400, 200);
  for (int y = 0; y < 200; ++y)
    for (int x = 0; x < 400; ++x) f(x, y) = ((x + y) % 2) ? 1.0 : 0.0;
  const ThermalFrame out = crop_resize(f, 200, 100);
  for (double v : out.data) EXPECT_NEAR(v, 0.5, 1e-12);
}

TEST(CropResize, CentreCropsWideFrames) {
  // 300x100 -> crop to the middle 200 columns; the outer 50-column bands are hot.
  ThermalFrame f(300, 100, 0.2);
  for (int y = 0; y < 100; ++y)
    for (int x = 0; x < 300; ++x)
      if (x < 50 || x >= 250) f(x, y) = 1.0;
  const ThermalFrame out = crop_resize(f, 200, 100);
  for (double v : out.data) EXPECT_EQ(v, 0.2);
}

TEST(CropResize, BelowMinimumResolution) {
  ThermalFrame f(150, 80);
  try {
    crop_resize(f, 200, 100);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("below minimum resolution"), std::string::npos);
  }
}

TEST(LoadSequence, ListsFramesInOrder) {
  TempDir dir;
  write_sequence(dir.path(), 10);
  write_text(dir.path() / "m.json", R"({"frames": )" + frame_list(10) + R"(, "fps": 10})");
  const SequenceManifest m = load_sequence(dir.path() / "m.json");
  ASSERT_EQ(m.frame_paths.size(), 10u);
  EXPECT_EQ(m.frame_paths[3].filename(), "f003.pgm");
  EXPECT_DOUBLE_EQ(m.sample_interval_s, 2.0);
  EXPECT_FALSE(m.ground_truth.has_value());
}

TEST(LoadSequence, EmptySequence) {
  TempDir dir;
  write_text(dir.path() / "m.json", R"({"frames": [], "fps": 10})");
  try {
    load_sequence(dir.path() / "m.json");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("empty sequence"), std::string::npos);
  }
}

TEST(LoadSequence, CarriesGroundTruth) {
  TempDir dir;
  write_sequence(dir.path(), 100);
  write_text(dir.path() / "m.json",
             R"({"frames": )" + frame_list(100) + R"(, "fps": 10, "interval_s": 2, "ground_truth": {"0": 1, "5": 2}})");
  // 100 frames at 10 fps with 2 s spacing sample 5 frames, so key 5 is out of range.
  EXPECT_THROW(load_sequence(dir.path() / "m.json"), DataError);

  write_text(dir.path() / "m.json",
             R"({"frames": )" + frame_list(100) + R"(, "fps": 10, "interval_s": 1, "ground_truth": {"0": 1, "5": 2}})");
  const SequenceManifest m = load_sequence(dir.path() / "m.json");
  ASSERT_TRUE(m.ground_truth.has_value());
  EXPECT_EQ(*m.ground_truth, (std::map<int, int>{{0, 1}, {5, 2}}));
}

TEST(LoadSequence, ErrorPaths) {
  TempDir dir;
  EXPECT_THROW(load_sequence(dir.path() / "missing.json"), DataError);
  write_text(dir.path() / "bad.json", "{ not json");
  EXPECT_THROW(load_sequence(dir.path() / "bad.json"), DataError);
  write_text(dir.path() / "nofps.json", R"({"frames": ["a.pgm"]})");
  EXPECT_THROW(load_sequence(dir.path() / "nofps.json"), DataError);
  write_text(dir.path() / "unreadable.json", R"({"frames": ["nope.pgm"], "fps": 1})");
  EXPECT_THROW(load_sequence(dir.path() / "unreadable.json"), DataError);
  write_text(dir.path() / "rgb.ppm", "P6\n1 1\n255\nabc");
  write_text(dir.path() / "rgb.json", R"({"frames": ["rgb.ppm"], "fps": 1})");
  EXPECT_THROW(load_sequence(dir.path() / "rgb.json"), DataError);
}

TEST(SampleFrames, PicksIndicesAndStampsTime) {
  TempDir dir;
  write_sequence(dir.path(), 100);
  write_text(dir.path() / "m.json", R"({"frames": )" + frame_list(100) + R"(, "fps": 10})");
  const auto frames = sample_frames(load_sequence(dir.path() / "m.json"));
  ASSERT_EQ(frames.size(), 5u);
  for (std::size_t k = 0; k < frames.size(); ++k) {
    EXPECT_DOUBLE_EQ(frames[k].timestamp_s, 2.0 * static_cast<double>(k));
    EXPECT_DOUBLE_EQ(frames[k].data[0], (20.0 * static_cast<double>(k)) / 255.0);
  }
}
