#include "discgrade/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "discgrade/image_io.hpp"
#include "discgrade/manifest.hpp"

namespace discgrade {

namespace {

// Grade-conditional canal closure fractions. Ranges are disjoint with gaps so
// a fixed-window intensity statistic separates grades, while jitter and noise
// keep the task from saturating.
constexpr double kClosureLo[kNumGrades] = {0.02, 0.36, 0.78};
constexpr double kClosureHi[kNumGrades] = {0.20, 0.62, 0.97};
constexpr double kDiscBrightness[kNumGrades] = {0.78, 0.63, 0.50};

// Anatomy layout as fractions of image size.
constexpr double kDiscYBase[kNumLevels] = {0.30, 0.42, 0.54, 0.66, 0.78};
constexpr double kSpineXBase = 0.42;
constexpr double kDiscRxBase = 0.055;
constexpr double kDiscRyBase = 0.020;
constexpr double kCanalGapBase = 0.018;
constexpr double kCanalWidthBase = 0.045;
constexpr double kVertebraHalfWidth = 0.075;

void blend(float& dst, double intensity, double alpha) {
  if (alpha <= 0.0) return;
  alpha = std::min(alpha, 1.0);
  dst = static_cast<float>(dst * (1.0 - alpha) + intensity * alpha);
}

// Soft-edged coverage from an implicit superellipse value t (inside: t <= 1).
double edge_alpha(double t) { return std::clamp((1.10 - t) / 0.20, 0.0, 1.0); }

SeverityGrade sample_grade(const std::array<double, 3>& probs, Rng& rng) {
  const double u = rng.uniform();
  if (u < probs[0]) return SeverityGrade::Normal;
  if (u < probs[0] + probs[1]) return SeverityGrade::Moderate;
  return SeverityGrade::Severe;
}

}  // namespace

void PhantomConfig::validate() const {
  if (n_patients <= 0) throw ValidationError("phantom: n_patients must be positive");
  if (slices_per_series < 3 || slices_per_series % 2 == 0)
    throw ValidationError("phantom: slices_per_series must be odd and >= 3");
  if (image_size < 64) throw ValidationError("phantom: image_size must be >= 64");
  const double sum =
      grade_probabilities[0] + grade_probabilities[1] + grade_probabilities[2];
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("phantom: grade probabilities must sum to 1");
  for (double p : grade_probabilities) {
    if (p < 0.0) throw ValidationError("phantom: negative grade probability");
  }
  if (noise_std < 0.0) throw ValidationError("phantom: negative noise_std");
}

PhantomPatientParams sample_patient_params(const PhantomConfig& config, Rng& rng) {
  const double S = config.image_size;
  PhantomPatientParams p;
  p.intensity_scale = rng.uniform(0.82, 1.0);
  p.background = 0.12 + rng.uniform(-0.02, 0.02);
  p.spine_x = (kSpineXBase + rng.uniform(-0.03, 0.03)) * S;

  const double global_shift = rng.uniform(-0.02, 0.02) * S;
  for (int i = 0; i < kNumLevels; ++i) {
    p.disc_y[i] = kDiscYBase[i] * S + global_shift + rng.uniform(-0.012, 0.012) * S;
    p.disc_dx[i] = rng.uniform(-0.012, 0.012) * S;
    p.disc_rx[i] = kDiscRxBase * S * (1.0 + rng.uniform(-0.10, 0.10));
    p.disc_ry[i] = kDiscRyBase * S * (1.0 + rng.uniform(-0.15, 0.15));
    p.grades[i] = sample_grade(config.grade_probabilities, rng);
    const int g = static_cast<int>(p.grades[i]);
    p.disc_intensity[i] = kDiscBrightness[g] + rng.uniform(-0.06, 0.06);
    p.canal_closure[i] = rng.uniform(kClosureLo[g], kClosureHi[g]);
  }
  p.canal_gap = kCanalGapBase * S;
  p.canal_width = kCanalWidthBase * S * (1.0 + rng.uniform(-0.12, 0.12));
  p.canal_intensity = 0.88 + rng.uniform(-0.04, 0.04);
  p.bulge_intensity = 0.42 + rng.uniform(-0.03, 0.03);
  p.vertebra_intensity = 0.50 + rng.uniform(-0.05, 0.05);
  p.drift_linear = rng.uniform(-0.004, 0.004) * S;
  p.drift_quadratic = rng.uniform(-0.0012, 0.0012) * S;
  p.drift_y = rng.uniform(-0.001, 0.001) * S;
  return p;
}

RenderedSlice render_phantom_slice(const PhantomConfig& config,
                                   const PhantomPatientParams& p,
                                   int slice_offset, Rng& noise_rng) {
  const int S = config.image_size;
  const double k = slice_offset;
  const double dx = p.drift_linear * k + p.drift_quadratic * k * k;
  const double dy = p.drift_y * k;
  const double shrink = std::max(0.70, 1.0 - 0.035 * std::abs(k));

  ImageF canvas(S, S, static_cast<float>(p.background));

  // Mild vertical gradient plus broad soft-tissue bands for texture.
  const double canal_left_nominal = p.spine_x + dx + kDiscRxBase * S + p.canal_gap;
  const double canal_right = canal_left_nominal + p.canal_width;
  for (int r = 0; r < S; ++r) {
    for (int c = 0; c < S; ++c) {
      double v = p.background + 0.04 * (static_cast<double>(r) / S);
      if (c > canal_right + 0.02 * S) v += 0.16;                    // posterior muscle
      else if (c < p.spine_x + dx - kVertebraHalfWidth * S - 0.02 * S) v += 0.10;
      canvas.at(r, c) = static_cast<float>(v);
    }
  }

  std::array<double, kNumLevels> cy;
  std::array<double, kNumLevels> cx;
  for (int i = 0; i < kNumLevels; ++i) {
    cy[i] = p.disc_y[i] + dy;
    cx[i] = p.spine_x + p.disc_dx[i] + dx;
  }

  // Vertebral bodies between and around the discs (superellipse n=4).
  const double hw = kVertebraHalfWidth * S;
  for (int i = 0; i <= kNumLevels; ++i) {
    const double above = (i == 0) ? cy[0] - (cy[1] - cy[0]) : cy[i - 1];
    const double below = (i == kNumLevels) ? cy[kNumLevels - 1] +
                                                  (cy[kNumLevels - 1] - cy[kNumLevels - 2])
                                           : cy[i];
    const double vc = 0.5 * (above + below);
    const double hh = 0.36 * (below - above);
    const int r0 = std::max(0, static_cast<int>(vc - hh - 2));
    const int r1 = std::min(S - 1, static_cast<int>(vc + hh + 2));
    const int c0 = std::max(0, static_cast<int>(p.spine_x + dx - hw - 2));
    const int c1 = std::min(S - 1, static_cast<int>(p.spine_x + dx + hw + 2));
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        const double ty = (r + 0.5 - vc) / hh;
        const double tx = (c + 0.5 - (p.spine_x + dx)) / hw;
        const double t = tx * tx * tx * tx + ty * ty * ty * ty;
        blend(canvas.at(r, c), p.vertebra_intensity, edge_alpha(t));
      }
    }
  }

  // Disc ellipses. Centers are returned exactly as rendered.
  RenderedSlice out;
  for (int i = 0; i < kNumLevels; ++i) {
    const double rx = p.disc_rx[i] * shrink;
    const double ry = p.disc_ry[i] * shrink;
    const int r0 = std::max(0, static_cast<int>(cy[i] - ry - 2));
    const int r1 = std::min(S - 1, static_cast<int>(cy[i] + ry + 2));
    const int c0 = std::max(0, static_cast<int>(cx[i] - rx - 2));
    const int c1 = std::min(S - 1, static_cast<int>(cx[i] + rx + 2));
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        const double ty = (r + 0.5 - cy[i]) / ry;
        const double tx = (c + 0.5 - cx[i]) / rx;
        blend(canvas.at(r, c), p.disc_intensity[i], edge_alpha(tx * tx + ty * ty));
      }
    }
    out.centers[i] = {static_cast<float>(cx[i]), static_cast<float>(cy[i])};
  }

  // Canal band with grade-dependent narrowing behind each disc. The left edge
  // shifts right by closure*width under a Gaussian profile; the displaced
  // region renders as bulging disc material.
  const int canal_r0 = std::max(0, static_cast<int>(cy[0] - 0.10 * S));
  const int canal_r1 = std::min(S - 1, static_cast<int>(cy[kNumLevels - 1] + 0.10 * S));
  for (int r = canal_r0; r <= canal_r1; ++r) {
    const double y = r + 0.5;
    double shift = 0.0;
    for (int i = 0; i < kNumLevels; ++i) {
      const double sigma = 2.2 * p.disc_ry[i] * shrink;
      const double d = (y - cy[i]) / sigma;
      shift += p.canal_closure[i] * p.canal_width * std::exp(-d * d);
    }
    shift = std::min(shift, p.canal_width);
    const double left = canal_left_nominal + shift;
    const int cb0 = std::max(0, static_cast<int>(canal_left_nominal) - 1);
    const int cb1 = std::min(S - 1, static_cast<int>(canal_right) + 1);
    for (int c = cb0; c <= cb1; ++c) {
      // Pixel column [c, c+1): coverage against bulge and canal intervals.
      const double bulge_cov =
          std::clamp(std::min<double>(left, c + 1.0) -
                         std::max<double>(canal_left_nominal, c),
                     0.0, 1.0);
      const double canal_cov =
          std::clamp(std::min<double>(canal_right, c + 1.0) -
                         std::max<double>(left, c),
                     0.0, 1.0);
      blend(canvas.at(r, c), p.bulge_intensity, bulge_cov);
      blend(canvas.at(r, c), p.canal_intensity, canal_cov);
    }
  }

  // Scale, noise, clamp, quantize to 16 bits.
  out.image = SliceImage(S, S);
  for (std::size_t i = 0; i < canvas.data.size(); ++i) {
    double v = p.intensity_scale * canvas.data[i];
    if (config.noise_std > 0.0) v += noise_rng.normal(0.0, config.noise_std);
    v = std::clamp(v, 0.0, 1.0);
    out.image.data[i] = static_cast<std::uint16_t>(round_half_up(v * 65535.0));
  }
  return out;
}

DatasetManifest generate_phantom_dataset(const PhantomConfig& config,
                                         const fs::path& out_dir) {
  config.validate();
  std::error_code ec;
  fs::create_directories(out_dir / "images", ec);
  if (ec) throw IoError("cannot create output dir: " + (out_dir / "images").string());

  DatasetManifest manifest;
  manifest.image_root = "images";
  const int mid = config.slices_per_series / 2;

  for (int pi = 0; pi < config.n_patients; ++pi) {
    const std::uint64_t patient_seed = derive_seed(config.seed, pi);
    Rng patient_rng(patient_seed);
    const PhantomPatientParams params = sample_patient_params(config, patient_rng);

    char pid[16];
    std::snprintf(pid, sizeof(pid), "P%04d", pi);
    const DiscKey base_key{pid, "S1", DiscLevel::L1_L2};

    for (int si = 0; si < config.slices_per_series; ++si) {
      Rng noise_rng(derive_seed(patient_seed, 1000 + si));
      RenderedSlice slice =
          render_phantom_slice(config, params, si - mid, noise_rng);
      write_pgm16(slice_image_path(out_dir / "images", base_key, si), slice.image);
      if (si == mid) {
        for (int lvl = 0; lvl < kNumLevels; ++lvl) {
          Annotation a;
          a.key = DiscKey{pid, "S1", level_from_index(lvl)};
          a.slice_index = si;
          a.x = slice.centers[lvl].first;
          a.y = slice.centers[lvl].second;
          a.grade = params.grades[lvl];
          manifest.records.push_back(a);
        }
      }
    }
  }

  save_manifest(manifest, out_dir / "manifest.csv");
  return manifest;
}

}  // namespace discgrade
