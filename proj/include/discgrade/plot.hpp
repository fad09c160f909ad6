#pragma once

#include "discgrade/image_io.hpp"
#include "discgrade/metrics.hpp"

namespace discgrade {

// Minimal raster chart rendering for the report bundle: line charts, the
// confusion heatmap, and localization overlay drawing.

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::array<std::uint8_t, 3> color{0, 0, 0};
  int thickness = 1;
};

struct LineChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 860;
  int height = 520;
  std::vector<Series> series;
};

RgbImage render_line_chart(const LineChartSpec& spec);

RgbImage render_confusion_heatmap(const ConfusionMatrix3& cm,
                                  const std::string& title);

/// Exponential moving average, ema_t = factor*ema_{t-1} + (1-factor)*x_t.
std::vector<double> ema_smooth(const std::vector<double>& values, double factor);

// Drawing primitives (used for the localization overlays).
RgbImage gray16_to_rgb(const SliceImage& img);
void draw_line(RgbImage& img, double x0, double y0, double x1, double y1,
               std::array<std::uint8_t, 3> color, int thickness = 1);
void draw_cross(RgbImage& img, double x, double y, int arm,
                std::array<std::uint8_t, 3> color);
void draw_circle(RgbImage& img, double x, double y, int radius,
                 std::array<std::uint8_t, 3> color);
void draw_text(RgbImage& img, int x, int y, const std::string& text,
               std::array<std::uint8_t, 3> color, int scale = 1);

/// Two-panel overlay: left = slice with ground-truth circles, right = the
/// same slice with predicted crosses on top of the circles.
RgbImage render_localization_overlay(
    const SliceImage& slice,
    const std::vector<std::pair<double, double>>& gt_centers,
    const std::vector<std::pair<double, double>>& pred_centers,
    const std::string& title);

}  // namespace discgrade
