#include "discgrade/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

namespace discgrade {

namespace {

// 5x7 bitmap glyphs, one byte per row, low 5 bits used. Lowercase maps to
// uppercase; unknown characters render as blanks.
struct Glyph {
  char ch;
  std::uint8_t rows[7];
};

constexpr Glyph kFont[] = {
    {' ', {0, 0, 0, 0, 0, 0, 0}},
    {'%', {0x18, 0x19, 0x02, 0x04, 0x08, 0x13, 0x03}},
    {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}},
    {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}},
    {'+', {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00}},
    {'-', {0x00, 0x00, 0x00, 0x0E, 0x00, 0x00, 0x00}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
    {'/', {0x00, 0x01, 0x02, 0x04, 0x08, 0x10, 0x00}},
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
    {':', {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00}},
    {'=', {0x00, 0x00, 0x1F, 0x00, 0x1F, 0x00, 0x00}},
    {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
    {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
    {'D', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
    {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
    {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
    {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
    {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
    {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
    {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
    {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
    {'N', {0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11}},
    {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
    {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
    {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
    {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
    {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
    {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
    {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
    {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
    {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}},
    {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
    {'Y', {0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04}},
    {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
    {'_', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F}},
};

const Glyph* find_glyph(char c) {
  if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  for (const auto& g : kFont) {
    if (g.ch == c) return &g;
  }
  return nullptr;
}

void put_pixel(RgbImage& img, int x, int y, std::array<std::uint8_t, 3> color) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  auto* p = &img.data[(static_cast<std::size_t>(y) * img.width + x) * 3];
  p[0] = color[0];
  p[1] = color[1];
  p[2] = color[2];
}

void fill_rect(RgbImage& img, int x0, int y0, int x1, int y1,
               std::array<std::uint8_t, 3> color) {
  for (int y = std::max(0, y0); y <= std::min(img.height - 1, y1); ++y) {
    for (int x = std::max(0, x0); x <= std::min(img.width - 1, x1); ++x) {
      put_pixel(img, x, y, color);
    }
  }
}

std::string format_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

void draw_text(RgbImage& img, int x, int y, const std::string& text,
               std::array<std::uint8_t, 3> color, int scale) {
  int cx = x;
  for (char c : text) {
    if (const Glyph* g = find_glyph(c)) {
      for (int r = 0; r < 7; ++r) {
        for (int b = 0; b < 5; ++b) {
          if (g->rows[r] & (1 << (4 - b))) {
            fill_rect(img, cx + b * scale, y + r * scale, cx + b * scale + scale - 1,
                      y + r * scale + scale - 1, color);
          }
        }
      }
    }
    cx += 6 * scale;
  }
}

void draw_line(RgbImage& img, double x0, double y0, double x1, double y1,
               std::array<std::uint8_t, 3> color, int thickness) {
  const double dx = x1 - x0;
  const double dy = y1 - y0;
  const int steps = std::max(1, static_cast<int>(std::ceil(
                                    std::max(std::abs(dx), std::abs(dy)))));
  const int half = std::max(0, thickness / 2);
  for (int s = 0; s <= steps; ++s) {
    const double t = static_cast<double>(s) / steps;
    const int px = static_cast<int>(std::lround(x0 + t * dx));
    const int py = static_cast<int>(std::lround(y0 + t * dy));
    fill_rect(img, px - half, py - half, px + half, py + half, color);
  }
}

void draw_cross(RgbImage& img, double x, double y, int arm,
                std::array<std::uint8_t, 3> color) {
  draw_line(img, x - arm, y, x + arm, y, color, 1);
  draw_line(img, x, y - arm, x, y + arm, color, 1);
}

void draw_circle(RgbImage& img, double x, double y, int radius,
                 std::array<std::uint8_t, 3> color) {
  const int n = std::max(16, radius * 6);
  for (int i = 0; i < n; ++i) {
    const double a0 = 2.0 * M_PI * i / n;
    const double a1 = 2.0 * M_PI * (i + 1) / n;
    draw_line(img, x + radius * std::cos(a0), y + radius * std::sin(a0),
              x + radius * std::cos(a1), y + radius * std::sin(a1), color, 1);
  }
}

RgbImage gray16_to_rgb(const SliceImage& img) {
  RgbImage out(img.height, img.width);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const auto v = static_cast<std::uint8_t>(img.data[i] >> 8);
    out.data[3 * i] = v;
    out.data[3 * i + 1] = v;
    out.data[3 * i + 2] = v;
  }
  return out;
}

std::vector<double> ema_smooth(const std::vector<double>& values, double factor) {
  std::vector<double> out;
  out.reserve(values.size());
  double ema = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    ema = i == 0 ? values[0] : factor * ema + (1.0 - factor) * values[i];
    out.push_back(ema);
  }
  return out;
}

RgbImage render_line_chart(const LineChartSpec& spec) {
  if (spec.series.empty()) throw DataError("line chart needs at least one series");
  RgbImage img(spec.height, spec.width, 255);

  const int left = 78, right = 24, top = 36, bottom = 52;
  const int x0 = left, x1 = spec.width - right;
  const int y0 = top, y1 = spec.height - bottom;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : spec.series) {
    for (double v : s.x) {
      xmin = std::min(xmin, v);
      xmax = std::max(xmax, v);
    }
    for (double v : s.y) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  if (!std::isfinite(xmin) || !std::isfinite(ymin))
    throw DataError("line chart series are empty");
  if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
  const double ypad = std::max((ymax - ymin) * 0.06, 1e-9);
  ymin -= ypad;
  ymax += ypad;

  auto to_px = [&](double x, double y) {
    const double fx = (x - xmin) / (xmax - xmin);
    const double fy = (y - ymin) / (ymax - ymin);
    return std::make_pair(x0 + fx * (x1 - x0), y1 - fy * (y1 - y0));
  };

  const std::array<std::uint8_t, 3> axis{40, 40, 40};
  const std::array<std::uint8_t, 3> grid{225, 225, 225};

  for (int t = 0; t <= 5; ++t) {
    const double xv = xmin + (xmax - xmin) * t / 5.0;
    const double yv = ymin + (ymax - ymin) * t / 5.0;
    const auto [gx, unused_y] = to_px(xv, ymin);
    const auto [unused_x, gy] = to_px(xmin, yv);
    draw_line(img, gx, y0, gx, y1, grid, 1);
    draw_line(img, x0, gy, x1, gy, grid, 1);
    draw_text(img, static_cast<int>(gx) - 10, y1 + 8, format_tick(xv), axis);
    draw_text(img, 6, static_cast<int>(gy) - 3, format_tick(yv), axis);
  }
  draw_line(img, x0, y0, x0, y1, axis, 1);
  draw_line(img, x0, y1, x1, y1, axis, 1);

  for (const auto& s : spec.series) {
    for (std::size_t i = 1; i < s.x.size(); ++i) {
      const auto [ax, ay] = to_px(s.x[i - 1], s.y[i - 1]);
      const auto [bx, by] = to_px(s.x[i], s.y[i]);
      draw_line(img, ax, ay, bx, by, s.color, s.thickness);
    }
    if (s.x.size() == 1) {
      const auto [ax, ay] = to_px(s.x[0], s.y[0]);
      fill_rect(img, static_cast<int>(ax) - 2, static_cast<int>(ay) - 2,
                static_cast<int>(ax) + 2, static_cast<int>(ay) + 2, s.color);
    }
  }

  draw_text(img, x0, 12, spec.title, axis, 2);
  draw_text(img, (x0 + x1) / 2 - 3 * static_cast<int>(spec.x_label.size()),
            spec.height - 14, spec.x_label, axis);
  draw_text(img, 6, y0 - 14, spec.y_label, axis);

  int ly = y0 + 6;
  for (const auto& s : spec.series) {
    draw_line(img, x1 - 150, ly + 3, x1 - 126, ly + 3, s.color,
              std::max(2, s.thickness));
    draw_text(img, x1 - 120, ly, s.label, axis);
    ly += 14;
  }
  return img;
}

RgbImage render_confusion_heatmap(const ConfusionMatrix3& cm,
                                  const std::string& title) {
  const int cell = 110, left = 110, top = 70, pad_bottom = 40;
  RgbImage img(top + 3 * cell + pad_bottom, left + 3 * cell + 30, 255);
  const std::array<std::uint8_t, 3> axis{40, 40, 40};

  int max_count = 1;
  for (const auto& row : cm.counts) {
    for (int v : row) max_count = std::max(max_count, v);
  }

  static const char* names[3] = {"NORMAL", "MODERATE", "SEVERE"};
  for (int t = 0; t < 3; ++t) {
    for (int p = 0; p < 3; ++p) {
      const int x = left + p * cell;
      const int y = top + t * cell;
      const double frac = static_cast<double>(cm.counts[t][p]) / max_count;
      const auto shade = static_cast<std::uint8_t>(255 - frac * 185);
      fill_rect(img, x, y, x + cell - 2, y + cell - 2, {shade, shade, 255});
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%d", cm.counts[t][p]);
      draw_text(img, x + cell / 2 - 6 * static_cast<int>(std::strlen(buf)),
                y + cell / 2 - 7, buf, axis, 2);
    }
  }
  for (int i = 0; i < 3; ++i) {
    draw_text(img, left + i * cell + 10, top - 16, names[i], axis);
    draw_text(img, 8, top + i * cell + cell / 2 - 4, names[i], axis);
  }
  draw_text(img, left, 10, title, axis, 2);
  draw_text(img, left + cell, top + 3 * cell + 14, "PREDICTED", axis);
  return img;
}

RgbImage render_localization_overlay(
    const SliceImage& slice,
    const std::vector<std::pair<double, double>>& gt_centers,
    const std::vector<std::pair<double, double>>& pred_centers,
    const std::string& title) {
  const RgbImage base = gray16_to_rgb(slice);
  const int gap = 8, top = 26;
  RgbImage out(top + base.height, base.width * 2 + gap, 255);

  auto blit = [&](int ox) {
    for (int r = 0; r < base.height; ++r) {
      for (int c = 0; c < base.width; ++c) {
        const std::size_t src = (static_cast<std::size_t>(r) * base.width + c) * 3;
        const std::size_t dst =
            ((static_cast<std::size_t>(r) + top) * out.width + ox + c) * 3;
        out.data[dst] = base.data[src];
        out.data[dst + 1] = base.data[src + 1];
        out.data[dst + 2] = base.data[src + 2];
      }
    }
  };
  blit(0);
  blit(base.width + gap);

  const std::array<std::uint8_t, 3> green{40, 220, 70};
  const std::array<std::uint8_t, 3> red{235, 40, 40};
  for (const auto& [gx, gy] : gt_centers) {
    draw_circle(out, gx, gy + top, 7, green);
    draw_circle(out, gx + base.width + gap, gy + top, 7, green);
  }
  for (const auto& [px, py] : pred_centers) {
    draw_cross(out, px + base.width + gap, py + top, 6, red);
  }
  draw_text(out, 4, 6, title + "  LEFT: GROUND TRUTH  RIGHT: PREDICTION", {30, 30, 30});
  return out;
}

}  // namespace discgrade
