#include "discgrade/augment.hpp"

#include <algorithm>
#include <cmath>

namespace discgrade {

namespace {

// Symmetric reflection (edge pixel included) for out-of-range indices.
int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i = ((i % period) + period) % period;
  return i < n ? i : period - 1 - i;
}

ImageF rotate_bilinear_reflect(const ImageF& img, double angle_deg) {
  const int S = img.height;
  const double theta = angle_deg * M_PI / 180.0;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double center = (S - 1) / 2.0;
  ImageF out(S, S);
  for (int r = 0; r < S; ++r) {
    for (int c = 0; c < S; ++c) {
      // Inverse rotation of the output grid point about the image center.
      const double dy = r - center;
      const double dx = c - center;
      const double sx = cos_t * dx + sin_t * dy + center;
      const double sy = -sin_t * dx + cos_t * dy + center;
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const float wx = static_cast<float>(sx - x0);
      const float wy = static_cast<float>(sy - y0);
      const int x0r = reflect_index(x0, S);
      const int x1r = reflect_index(x0 + 1, S);
      const int y0r = reflect_index(y0, S);
      const int y1r = reflect_index(y0 + 1, S);
      const float top = img.at(y0r, x0r) * (1.0f - wx) + img.at(y0r, x1r) * wx;
      const float bot = img.at(y1r, x0r) * (1.0f - wx) + img.at(y1r, x1r) * wx;
      out.at(r, c) = top * (1.0f - wy) + bot * wy;
    }
  }
  return out;
}

ImageF resize_square_bilinear(const ImageF& img, int out_size) {
  if (img.height == out_size && img.width == out_size) return img;
  ImageF out(out_size, out_size);
  const double s = static_cast<double>(img.height) / out_size;
  for (int r = 0; r < out_size; ++r) {
    double fy = std::clamp((r + 0.5) * s - 0.5, 0.0, img.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const float wy = static_cast<float>(fy - y0);
    for (int c = 0; c < out_size; ++c) {
      double fx = std::clamp((c + 0.5) * s - 0.5, 0.0, img.width - 1.0);
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

}  // namespace

void AugmentPolicy::validate() const {
  if (crop_scale.first > crop_scale.second || crop_scale.first <= 0.0 ||
      crop_scale.second > 1.0) {
    throw ValidationError("augment: crop_scale must satisfy 0 < lo <= hi <= 1");
  }
  if (rotation_deg.first > rotation_deg.second)
    throw ValidationError("augment: rotation range ill-ordered");
  if (hflip_prob < 0.0 || hflip_prob > 1.0)
    throw ValidationError("augment: hflip_prob outside [0,1]");
  if (brightness_jitter < 0.0 || contrast_jitter < 0.0)
    throw ValidationError("augment: negative jitter");
}

ImageF augment_view(const ImageF& patch, const AugmentPolicy& policy, Rng& rng) {
  if (patch.height != patch.width || patch.empty())
    throw DataError("augment_view: square non-empty input required");
  if (!policy.enabled) return patch;
  policy.validate();

  const int S = patch.height;
  ImageF img = patch;

  // Random resized crop (area fraction, aspect ratio kept at 1).
  {
    const double area = rng.uniform(policy.crop_scale.first, policy.crop_scale.second);
    const int side =
        std::clamp(static_cast<int>(round_half_up(std::sqrt(area) * S)), 1, S);
    if (side != S) {
      const int top = static_cast<int>(rng.uniform_index(S - side + 1));
      const int left = static_cast<int>(rng.uniform_index(S - side + 1));
      ImageF crop(side, side);
      for (int r = 0; r < side; ++r) {
        std::copy_n(&img.at(top + r, left), side, &crop.at(r, 0));
      }
      img = resize_square_bilinear(crop, S);
    }
  }

  if (policy.hflip_prob > 0.0 && rng.bernoulli(policy.hflip_prob)) {
    for (int r = 0; r < S; ++r) {
      std::reverse(&img.at(r, 0), &img.at(r, 0) + S);
    }
  }

  if (policy.rotation_deg.first != 0.0 || policy.rotation_deg.second != 0.0) {
    const double angle =
        rng.uniform(policy.rotation_deg.first, policy.rotation_deg.second);
    if (angle != 0.0) img = rotate_bilinear_reflect(img, angle);
  }

  if (policy.brightness_jitter > 0.0) {
    const float delta = static_cast<float>(
        rng.uniform(-policy.brightness_jitter, policy.brightness_jitter));
    for (float& v : img.data) v += delta;
  }

  if (policy.contrast_jitter > 0.0) {
    const float factor = static_cast<float>(
        rng.uniform(1.0 - policy.contrast_jitter, 1.0 + policy.contrast_jitter));
    double mean = 0.0;
    for (float v : img.data) mean += v;
    mean /= static_cast<double>(img.data.size());
    const float m = static_cast<float>(mean);
    for (float& v : img.data) v = m + (v - m) * factor;
  }

  return img;
}

ContrastiveViews make_contrastive_views(const ImageF& patch, int num_views,
                                        const AugmentPolicy& policy, Rng& rng,
                                        const DiscKey& key) {
  if (num_views < 2)
    throw ValidationError("contrastive views require V >= 2 (no positive otherwise)");
  ContrastiveViews out;
  out.group_id = DiscKeyHash{}(key);
  out.views.reserve(num_views);
  for (int v = 0; v < num_views; ++v) {
    out.views.push_back(augment_view(patch, policy, rng));
  }
  return out;
}

}  // namespace discgrade
