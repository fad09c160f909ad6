#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <tuple>
#include <vector>

#include "discgrade/common.hpp"

namespace discgrade {

// ---------------------------------------------------------------------------
// Severity grade: three-point ordinal scale. Ordinal order is the enum order
// and is preserved by every serialization.
// ---------------------------------------------------------------------------
enum class SeverityGrade : int { Normal = 0, Moderate = 1, Severe = 2 };

inline constexpr int kNumGrades = 3;

std::string grade_to_string(SeverityGrade g);
SeverityGrade grade_from_string(const std::string& s);  // case-insensitive

// ---------------------------------------------------------------------------
// The five lumbar disc levels, L1/L2 .. L5/S1. index() is bijective with the
// enum and is what embeddings and histograms key on.
// ---------------------------------------------------------------------------
enum class DiscLevel : int { L1_L2 = 0, L2_L3 = 1, L3_L4 = 2, L4_L5 = 3, L5_S1 = 4 };

inline constexpr int kNumLevels = 5;

inline int level_index(DiscLevel l) { return static_cast<int>(l); }
DiscLevel level_from_index(int idx);
std::string level_to_string(DiscLevel l);          // "L1/L2" ... "L5/S1"
DiscLevel level_from_string(const std::string& s); // case-insensitive

// ---------------------------------------------------------------------------
// DiscKey: the atomic unit of splitting and evaluation.
// ---------------------------------------------------------------------------
struct DiscKey {
  std::string patient_id;
  std::string series_id;
  DiscLevel level = DiscLevel::L1_L2;

  bool operator==(const DiscKey&) const = default;
  auto tie() const { return std::tie(patient_id, series_id, level); }
  bool operator<(const DiscKey& o) const { return tie() < o.tie(); }

  std::string str() const {
    return patient_id + "/" + series_id + "/" + level_to_string(level);
  }
};

struct DiscKeyHash {
  std::size_t operator()(const DiscKey& k) const {
    std::uint64_t h = fnv1a64(k.patient_id);
    h = fnv1a64(k.series_id.data(), k.series_id.size(), h);
    int idx = level_index(k.level);
    h = fnv1a64(&idx, sizeof(idx), h);
    return static_cast<std::size_t>(h);
  }
};

// ---------------------------------------------------------------------------
// Annotation: ground-truth disc center (x = column, y = row, in source-slice
// pixel coordinates before any padding) plus the severity grade.
// ---------------------------------------------------------------------------
struct Annotation {
  DiscKey key;
  int slice_index = 0;
  float x = 0.0f;
  float y = 0.0f;
  SeverityGrade grade = SeverityGrade::Normal;

  bool operator==(const Annotation&) const = default;
};

// ---------------------------------------------------------------------------
// Dense 2-D images, row-major. SliceImage is the 16-bit source format,
// ImageF the [0,1] float working format, ImageU8 the 8-bit export format.
// ---------------------------------------------------------------------------
template <typename T>
struct Image {
  int height = 0;
  int width = 0;
  std::vector<T> data;  // row-major, size height*width

  Image() = default;
  Image(int h, int w, T fill = T{})
      : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

  T& at(int r, int c) { return data[static_cast<std::size_t>(r) * width + c]; }
  const T& at(int r, int c) const {
    return data[static_cast<std::size_t>(r) * width + c];
  }
  bool empty() const { return data.empty(); }
  bool operator==(const Image&) const = default;
};

using SliceImage = Image<std::uint16_t>;
using ImageF = Image<float>;
using ImageU8 = Image<std::uint8_t>;

// ---------------------------------------------------------------------------
// RoiPatch: square crop centered on a disc, with provenance back to the
// source slice and the crop offset in padded-image coordinates.
// ---------------------------------------------------------------------------
struct RoiPatch {
  ImageF pixels;   // float stage; values in [0,1]
  int size = 0;    // square side
  DiscKey source;
  int slice_index = 0;
  int crop_row = 0;  // origin in padded-image coordinates
  int crop_col = 0;
};

// ---------------------------------------------------------------------------
// DatasetManifest: list of annotations plus the image root they refer to.
// Images are referenced by the relative path scheme of the writer (see
// manifest.hpp for the CSV layout).
// ---------------------------------------------------------------------------
struct DatasetManifest {
  std::vector<Annotation> records;
  std::string image_root;   // directory with slice images
  int format_version = 1;

  bool operator==(const DatasetManifest&) const = default;
};

// ---------------------------------------------------------------------------
// Split partitions
// ---------------------------------------------------------------------------
enum class Partition : int { Train = 0, Val = 1, Test = 2 };

inline constexpr int kNumPartitions = 3;

std::string partition_to_string(Partition p);
Partition partition_from_string(const std::string& s);

struct SplitAssignment {
  // Kept sorted by DiscKey for deterministic iteration and serialization.
  std::vector<std::pair<DiscKey, Partition>> mapping;
  std::uint64_t seed = 0;
  std::array<double, 3> fractions{0.70, 0.15, 0.15};

  const Partition* find(const DiscKey& key) const;
  std::vector<DiscKey> keys_in(Partition p) const;
  bool operator==(const SplitAssignment&) const = default;
};

}  // namespace discgrade
