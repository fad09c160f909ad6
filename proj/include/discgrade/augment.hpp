#pragma once

#include "discgrade/types.hpp"

namespace discgrade {

// Stochastic view generation for contrastive pretraining. All randomness is
// drawn from the caller's Rng, so a view is a pure function of
// (patch, policy, rng state). The evaluation path never calls into here.

struct AugmentPolicy {
  bool enabled = true;
  std::pair<double, double> crop_scale{0.8, 1.0};  // area fraction kept
  double hflip_prob = 0.5;
  std::pair<double, double> rotation_deg{-15.0, 15.0};
  double brightness_jitter = 0.2;  // additive, uniform in +-jitter
  double contrast_jitter = 0.2;    // multiplicative about the mean, 1 +- jitter

  void validate() const;
};

/// Applies, in order: random resized crop -> horizontal flip -> rotation
/// (bilinear, reflect fill) -> brightness -> contrast. Output shape equals
/// input shape. Disabled policy is the identity.
ImageF augment_view(const ImageF& patch, const AugmentPolicy& policy, Rng& rng);

struct ContrastiveViews {
  std::vector<ImageF> views;
  std::uint64_t group_id = 0;  // derived from the DiscKey
};

/// V independent draws of augment_view sharing one group id. V < 2 is a
/// configuration error (no positives).
ContrastiveViews make_contrastive_views(const ImageF& patch, int num_views,
                                        const AugmentPolicy& policy, Rng& rng,
                                        const DiscKey& key);

}  // namespace discgrade
