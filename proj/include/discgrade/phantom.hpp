#pragma once

#include "discgrade/types.hpp"

namespace discgrade {

// Synthetic sagittal-view phantom: five disc ellipses stacked between
// vertebral bodies, with a bright canal band behind them. Severity is encoded
// geometrically — the canal narrows behind the disc (bulge) and the disc
// dims — so grades are visually separable inside a coordinate-guided crop.

struct PhantomConfig {
  int n_patients = 20;
  int slices_per_series = 9;          // odd; mid slice carries the annotation
  int image_size = 320;               // square slices
  std::array<double, 3> grade_probabilities{0.77, 0.15, 0.08};
  double noise_std = 0.03;            // additive Gaussian, fraction of full range
  std::uint64_t seed = 0;

  void validate() const;
};

/// Per-patient anatomy and appearance, all drawn from the patient's seed.
struct PhantomPatientParams {
  double intensity_scale = 1.0;
  double background = 0.12;
  double spine_x = 0.0;                        // disc column, pixels
  std::array<double, kNumLevels> disc_y{};     // strictly increasing rows
  std::array<double, kNumLevels> disc_dx{};    // per-level column offset
  std::array<double, kNumLevels> disc_rx{};
  std::array<double, kNumLevels> disc_ry{};
  std::array<double, kNumLevels> disc_intensity{};
  std::array<SeverityGrade, kNumLevels> grades{};
  std::array<double, kNumLevels> canal_closure{};  // fraction of canal width
  double canal_gap = 0.0;        // spine edge -> canal left edge
  double canal_width = 0.0;
  double canal_intensity = 0.88;
  double bulge_intensity = 0.42;
  double vertebra_intensity = 0.50;
  double drift_linear = 0.0;     // per-slice x drift coefficients
  double drift_quadratic = 0.0;
  double drift_y = 0.0;
};

/// Draws patient anatomy; grade per level is sampled from grade_probabilities.
PhantomPatientParams sample_patient_params(const PhantomConfig& config, Rng& rng);

struct RenderedSlice {
  SliceImage image;
  std::array<std::pair<float, float>, kNumLevels> centers;  // (x, y) per level
};

/// Renders one slice at `slice_offset` from the mid slice (0 = mid).
/// Returned centers equal the rendered ellipse centers exactly. Total over
/// valid params; `noise_rng` drives only the additive noise.
RenderedSlice render_phantom_slice(const PhantomConfig& config,
                                   const PhantomPatientParams& params,
                                   int slice_offset, Rng& noise_rng);

/// Writes slices_per_series PGM images per patient under out_dir/images and a
/// manifest (out_dir/manifest.csv + .json) with one annotated disc per level
/// on the mid slice. Pure function of (config, seed).
DatasetManifest generate_phantom_dataset(const PhantomConfig& config,
                                         const fs::path& out_dir);

}  // namespace discgrade
