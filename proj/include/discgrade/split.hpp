#pragma once

#include "discgrade/manifest.hpp"
#include "discgrade/types.hpp"

namespace discgrade {

// Leakage-safe, grade-stratified partitioning at DiscKey granularity.

struct SplitResult {
  SplitAssignment assignment;
  std::vector<std::string> warnings;  // degenerate classes routed to train
};

/// Within each grade, discs are shuffled with the seeded generator and
/// apportioned by largest remainder (ties toward train, val, test in that
/// order), so per-class counts deviate from exact proportion by at most 1.
/// A grade with fewer discs than partitions goes entirely to train, with a
/// warning.
SplitResult stratified_disc_split(const DatasetManifest& manifest,
                                  const std::array<double, 3>& fractions,
                                  std::uint64_t seed);

struct AuditReport {
  std::vector<std::string> violations;
  // histogram[partition][grade]
  std::array<std::array<int, kNumGrades>, kNumPartitions> histogram{};
  bool clean() const { return violations.empty(); }
};

/// Zero violations iff every manifest DiscKey appears in exactly one
/// partition. Throws DataError when the split names a key absent from the
/// manifest.
AuditReport audit_leakage(const SplitAssignment& split,
                          const DatasetManifest& manifest);

// Split on disk = CSV (patient_id,series_id,level,partition) + JSON sidecar
// with seed and fractions.
void save_split(const SplitAssignment& split, const fs::path& csv_path);
SplitAssignment load_split(const fs::path& csv_path);

}  // namespace discgrade
