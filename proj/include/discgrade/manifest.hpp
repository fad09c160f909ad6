#pragma once

#include "discgrade/types.hpp"

namespace discgrade {

// Manifest on disk = UTF-8 CSV with fixed header
//   patient_id,series_id,level,slice_index,x,y,grade
// plus a JSON sidecar (same path, .json extension) carrying image_root and
// format_version. Slice images live under
//   <image_root>/<patient_id>/<series_id>/slice_<NNN>.pgm

/// Path of the sidecar belonging to a manifest CSV.
fs::path manifest_sidecar_path(const fs::path& csv_path);

void save_manifest(const DatasetManifest& manifest, const fs::path& csv_path);

/// Loads CSV + sidecar verbatim (image_root unresolved). Throws IoError when
/// either file is unreadable, DataError on malformed content.
DatasetManifest load_manifest(const fs::path& csv_path);

/// image_root is kept verbatim in the manifest; resolve it against the
/// manifest's own directory when it is relative.
fs::path resolved_image_root(const DatasetManifest& manifest,
                             const fs::path& csv_path);

fs::path slice_image_path(const fs::path& image_root, const DiscKey& key,
                          int slice_index);

/// Checks every type invariant; returns an empty report iff all hold. Each
/// line names the offending record. Needs the resolved image root to check
/// file existence and coordinate bounds.
std::vector<std::string> validate_manifest(const DatasetManifest& manifest,
                                           const fs::path& image_root);

/// Convenience: load + validate in one step.
std::vector<std::string> validate_manifest_file(const fs::path& csv_path);

/// Distinct DiscKeys in manifest order of first appearance, with the grade of
/// the disc. Throws DataError if one disc carries two different grades.
std::vector<std::pair<DiscKey, SeverityGrade>> discs_in_manifest(
    const DatasetManifest& manifest);

/// The annotation used as the representative slice of a disc (the single
/// mid-sagittal annotation in phantom data; first by slice_index otherwise).
std::vector<Annotation> representative_annotations(const DatasetManifest& manifest);

}  // namespace discgrade
