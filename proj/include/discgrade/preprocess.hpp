#pragma once

#include "discgrade/types.hpp"

namespace discgrade {

// Standardization chain: normalize -> pad -> coordinate-guided crop -> 8-bit
// export, plus the model-facing resize/standardize and 2.5D stacking. All
// operations are pure functions.

struct PreprocessConfig {
  int roi_size = 96;          // square crop side, must be even
  int pad_width = 48;         // >= roi_size/2 guarantees any in-bounds center crops fully
  float pad_value = 0.0f;     // air-dark constant border
  int model_input_size = 224; // classification path (tiny preset uses 64)
  int regression_input_size = 256;
  float channel_mean = 0.5f;
  float channel_std = 0.5f;

  void validate() const;
};

/// Min-max normalization to [0,1]; a constant image maps to all zeros.
ImageF normalize_intensity(const SliceImage& slice);

/// Constant-pad by `pad` pixels on every side. Annotation coordinates shift
/// by +pad in both axes.
ImageF pad_constant(const ImageF& img, int pad, float value);

/// Fixed-size square crop centered on (x, y) in padded-image coordinates.
/// Origin uses round-half-up: (round(y) - size/2, round(x) - size/2).
/// Throws GeometryError when the window leaves the image.
RoiPatch crop_roi(const ImageF& padded, float center_x, float center_y,
                  int roi_size, const DiscKey& source = {}, int slice_index = 0);

/// round(v*255) with round-half-up; inputs clamped to [0,1] first.
ImageU8 to_uint8(const ImageF& img);

/// Inverse of the 8-bit quantization (v/255), back onto the float stage.
ImageF from_uint8(const ImageU8& img);

/// Bilinear resize with half-pixel centers (src = (dst+0.5)*scale - 0.5,
/// clamped). Resizing to the same size is the identity.
ImageF resize_bilinear(const ImageF& img, int out_height, int out_width);

/// Resize to size x size then (x - mean)/std; single channel.
ImageF standardize_for_model(const ImageF& patch, int size, float mean, float std);

/// Channels (i-1, i, i+1) of a series; edge slices duplicate their neighbor.
/// Throws DataError when the series is empty.
std::array<ImageF, 3> stack_2p5d(const std::vector<ImageF>& series, int index);

}  // namespace discgrade
