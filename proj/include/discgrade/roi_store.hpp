#pragma once

#include "discgrade/manifest.hpp"
#include "discgrade/preprocess.hpp"

namespace discgrade {

// Output of the preprocess stage: 8-bit grayscale ROI PNGs plus an index CSV
// with provenance (crop origin in padded coordinates, source dimensions).
// The classification stages train from these exports.

struct RoiRecord {
  DiscKey key;
  int slice_index = 0;
  SeverityGrade grade = SeverityGrade::Normal;
  std::string roi_file;  // relative to the store directory
  int crop_row = 0;
  int crop_col = 0;
  int src_height = 0;
  int src_width = 0;
};

struct RoiStore {
  fs::path dir;
  std::vector<RoiRecord> records;
  int roi_size = 96;
  int pad_width = 48;
  float pad_value = 0.0f;
  int format_version = 1;
};

/// Runs normalize -> pad -> coordinate-guided crop -> 8-bit PNG for every
/// annotation in the manifest.
RoiStore export_rois(const DatasetManifest& manifest, const fs::path& manifest_csv,
                     const PreprocessConfig& preprocess, const fs::path& out_dir);

RoiStore load_roi_store(const fs::path& dir);

/// ROI pixels back on the float stage (v / 255).
ImageF load_roi_patch(const RoiStore& store, const RoiRecord& record);

/// One record per disc (the representative annotated slice).
std::vector<RoiRecord> representative_rois(const RoiStore& store);

}  // namespace discgrade
