#include "discgrade/preprocess.hpp"

#include <algorithm>
#include <sstream>

namespace discgrade {

void PreprocessConfig::validate() const {
  if (roi_size <= 0 || roi_size % 2 != 0)
    throw ValidationError("roi_size must be positive and even");
  if (pad_width < roi_size / 2)
    throw ValidationError("pad_width must be >= roi_size/2 to guarantee full crops");
  if (model_input_size <= 0 || regression_input_size <= 0)
    throw ValidationError("model input sizes must be positive");
  if (channel_std == 0.0f) throw ValidationError("channel_std must be nonzero");
}

ImageF normalize_intensity(const SliceImage& slice) {
  if (slice.empty()) throw DataError("normalize_intensity: empty slice");
  auto [mn_it, mx_it] = std::minmax_element(slice.data.begin(), slice.data.end());
  const float mn = static_cast<float>(*mn_it);
  const float mx = static_cast<float>(*mx_it);
  ImageF out(slice.height, slice.width);
  if (mx > mn) {
    const float inv = 1.0f / (mx - mn);
    for (std::size_t i = 0; i < slice.data.size(); ++i) {
      out.data[i] = (static_cast<float>(slice.data[i]) - mn) * inv;
    }
  }
  return out;  // all zeros when max == min
}

ImageF pad_constant(const ImageF& img, int pad, float value) {
  if (pad < 0) throw GeometryError("pad must be non-negative");
  if (pad == 0) return img;
  ImageF out(img.height + 2 * pad, img.width + 2 * pad, value);
  for (int r = 0; r < img.height; ++r) {
    std::copy_n(&img.at(r, 0), img.width, &out.at(r + pad, pad));
  }
  return out;
}

RoiPatch crop_roi(const ImageF& padded, float center_x, float center_y,
                  int roi_size, const DiscKey& source, int slice_index) {
  const int half = roi_size / 2;
  const long origin_row = round_half_up(center_y) - half;
  const long origin_col = round_half_up(center_x) - half;
  if (origin_row < 0 || origin_col < 0 ||
      origin_row + roi_size > padded.height ||
      origin_col + roi_size > padded.width) {
    std::ostringstream ss;
    ss << "crop window " << roi_size << "x" << roi_size << " at center ("
       << center_x << "," << center_y << ") leaves image "
       << padded.width << "x" << padded.height;
    throw GeometryError(ss.str());
  }
  RoiPatch patch;
  patch.pixels = ImageF(roi_size, roi_size);
  patch.size = roi_size;
  patch.source = source;
  patch.slice_index = slice_index;
  patch.crop_row = static_cast<int>(origin_row);
  patch.crop_col = static_cast<int>(origin_col);
  for (int r = 0; r < roi_size; ++r) {
    std::copy_n(&padded.at(patch.crop_row + r, patch.crop_col), roi_size,
                &patch.pixels.at(r, 0));
  }
  return patch;
}

ImageU8 to_uint8(const ImageF& img) {
  ImageU8 out(img.height, img.width);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const float v = std::clamp(img.data[i], 0.0f, 1.0f);
    out.data[i] = static_cast<std::uint8_t>(round_half_up(v * 255.0));
  }
  return out;
}

ImageF from_uint8(const ImageU8& img) {
  ImageF out(img.height, img.width);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    out.data[i] = static_cast<float>(img.data[i]) / 255.0f;
  }
  return out;
}

ImageF resize_bilinear(const ImageF& img, int out_height, int out_width) {
  if (img.empty()) throw DataError("resize_bilinear: empty image");
  if (out_height == img.height && out_width == img.width) return img;
  ImageF out(out_height, out_width);
  const double sy = static_cast<double>(img.height) / out_height;
  const double sx = static_cast<double>(img.width) / out_width;
  for (int r = 0; r < out_height; ++r) {
    double fy = (r + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(img.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const float wy = static_cast<float>(fy - y0);
    for (int c = 0; c < out_width; ++c) {
      double fx = (c + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(img.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const float wx = static_cast<float>(fx - x0);
      const float top = img.at(y0, x0) * (1.0f - wx) + img.at(y0, x1) * wx;
      const float bot = img.at(y1, x0) * (1.0f - wx) + img.at(y1, x1) * wx;
      out.at(r, c) = top * (1.0f - wy) + bot * wy;
    }
  }
  return out;
}

ImageF standardize_for_model(const ImageF& patch, int size, float mean, float std) {
  if (std == 0.0f) throw NumericError("standardize_for_model: zero std");
  ImageF out = resize_bilinear(patch, size, size);
  const float inv = 1.0f / std;
  for (float& v : out.data) v = (v - mean) * inv;
  return out;
}

std::array<ImageF, 3> stack_2p5d(const std::vector<ImageF>& series, int index) {
  if (series.empty()) throw DataError("stack_2p5d: empty series");
  if (index < 0 || index >= static_cast<int>(series.size()))
    throw DataError("stack_2p5d: slice index out of range");
  const int n = static_cast<int>(series.size());
  const int lo = std::max(index - 1, 0);
  const int hi = std::min(index + 1, n - 1);
  return {series[lo], series[index], series[hi]};
}

}  // namespace discgrade
