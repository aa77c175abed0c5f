#ifndef OCCUPANCY_ANNOTATE_HPP
#define OCCUPANCY_ANNOTATE_HPP

// Labeled output frames: the thermal frame and the segmentation side by side, with the
// predicted count (and, when known, the actual count and confidence) drawn in the top-left corner.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>

#include "occupancy/frame_io.hpp"
#include "occupancy/image.hpp"
#include "occupancy/metrics.hpp"

namespace occupancy {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

using RgbImage = Grid<Rgb>;

inline constexpr int kAnnotatedWidth = 2 * kWorkingWidth;
inline constexpr int kAnnotatedHeight = 2 * kWorkingHeight;

namespace detail {

struct Glyph {
  char ch;
  std::array<std::uint8_t, 7> rows;  // 5 bits per row, MSB = leftmost column
};

// 5x7 bitmap font, only the characters the overlay needs.
inline constexpr std::array<Glyph, 21> kFont = {{
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
    {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
    {':', {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00}},
    {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
    {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
    {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
    {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
    {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
    {'N', {0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11}},
    {'/', {0x01, 0x01, 0x02, 0x04, 0x08, 0x10, 0x10}},
}};

inline const Glyph* find_glyph(char c) {
  for (const auto& g : kFont)
    if (g.ch == c) return &g;
  return nullptr;
}

}  // namespace detail

/// Draws text with the embedded font; unknown characters are skipped but still advance.
/// Returns the x coordinate after the last character.
inline int draw_text(RgbImage& img, int x, int y, std::string_view text, Rgb color, int scale = 2) {
  for (char c : text) {
    if (const auto* g = detail::find_glyph(c)) {
      for (int row = 0; row < 7; ++row)
        for (int col = 0; col < 5; ++col) {
          if (!((g->rows[static_cast<std::size_t>(row)] >> (4 - col)) & 1)) continue;
          for (int sy = 0; sy < scale; ++sy)
            for (int sx = 0; sx < scale; ++sx) {
              const int px = x + col * scale + sx, py = y + row * scale + sy;
              if (px >= 0 && py >= 0 && px < img.width && py < img.height) img(px, py) = color;
            }
        }
    }
    x += 6 * scale;
  }
  return x;
}

/// Fills the box behind a text run so it stays legible over bright pixels.
inline void draw_text_box(RgbImage& img, int x, int y, std::string_view text, Rgb fg, Rgb bg, int scale = 2) {
  const int w = static_cast<int>(text.size()) * 6 * scale + scale;
  const int h = 8 * scale + scale;
  for (int py = std::max(0, y - scale); py < std::min(img.height, y - scale + h); ++py)
    for (int px = std::max(0, x - scale); px < std::min(img.width, x - scale + w); ++px) img(px, py) = bg;
  draw_text(img, x, y, text, fg, scale);
}

inline std::string format_confidence(double c) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", c);
  return buf;
}

/// 400x200 canvas split into two 200x200 halves. The bottom 100 rows hold the thermal frame (left)
/// and the segmentation in grey with the difference map in red (right), both at working resolution.
/// The top band carries the predicted count in the top-left corner and, when ground truth is known,
/// the actual count and confidence below it.
inline RgbImage annotate_frame(const ThermalFrame& frame, const BinaryMap& segmentation, const EstimateRecord& record,
                               const BinaryMap* difference = nullptr) {
  if (!frame.same_shape(kWorkingWidth, kWorkingHeight) || !segmentation.same_shape(frame))
    throw ParameterError("annotate_frame: expects a 200x100 frame and a matching segmentation");
  if (difference && !difference->same_shape(frame)) throw ParameterError("annotate_frame: difference map shape");

  RgbImage img(kAnnotatedWidth, kAnnotatedHeight, Rgb{16, 16, 24});
  const int top = kAnnotatedHeight - kWorkingHeight;
  for (int y = 0; y < kWorkingHeight; ++y)
    for (int x = 0; x < kWorkingWidth; ++x) {
      const auto v = static_cast<std::uint8_t>(std::lround(std::clamp(frame(x, y), 0.0, 1.0) * 255.0));
      img(x, top + y) = Rgb{v, v, v};
      Rgb s = segmentation.at(x, y) ? Rgb{160, 160, 160} : Rgb{0, 0, 0};
      if (difference && difference->at(x, y)) s = Rgb{230, 40, 40};
      img(kWorkingWidth + x, top + y) = s;
    }
  for (int y = 0; y < kAnnotatedHeight; ++y) img(kWorkingWidth, y) = Rgb{90, 90, 90};

  const Rgb white{255, 255, 255}, yellow{255, 220, 0}, bg{0, 0, 0};
  draw_text_box(img, 4, 4, "P:" + std::to_string(record.final_count), yellow, bg, 3);
  if (record.ground_truth) {
    draw_text_box(img, 4, 34, "A:" + std::to_string(*record.ground_truth), white, bg, 2);
    draw_text_box(img, 4, 56, "C:" + (record.confidence ? format_confidence(*record.confidence) : std::string("-")),
                  white, bg, 2);
  }
  draw_text_box(img, kWorkingWidth + 4, 4, std::to_string(record.frame_index), white, bg, 2);
  return img;
}

/// Binary PPM (P6).
inline void write_ppm(const fs::path& path, const RgbImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path.string() + ": cannot write image");
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  for (const Rgb& p : img.data) {
    const char px[3] = {static_cast<char>(p.r), static_cast<char>(p.g), static_cast<char>(p.b)};
    out.write(px, 3);
  }
  if (!out) throw DataError(path.string() + ": write failed");
}

}  // namespace occupancy

#endif  // OCCUPANCY_ANNOTATE_HPP
