#include "discgrade/types.hpp"

#include <algorithm>

namespace discgrade {

std::string grade_to_string(SeverityGrade g) {
  switch (g) {
    case SeverityGrade::Normal: return "normal";
    case SeverityGrade::Moderate: return "moderate";
    case SeverityGrade::Severe: return "severe";
  }
  throw DataError("invalid SeverityGrade value");
}

SeverityGrade grade_from_string(const std::string& s) {
  const std::string v = to_lower(trim(s));
  if (v == "normal") return SeverityGrade::Normal;
  if (v == "moderate") return SeverityGrade::Moderate;
  if (v == "severe") return SeverityGrade::Severe;
  throw DataError("unknown severity grade: '" + s + "'");
}

DiscLevel level_from_index(int idx) {
  if (idx < 0 || idx >= kNumLevels)
    throw DataError("disc level index out of range: " + std::to_string(idx));
  return static_cast<DiscLevel>(idx);
}

std::string level_to_string(DiscLevel l) {
  static const char* names[kNumLevels] = {"L1/L2", "L2/L3", "L3/L4", "L4/L5", "L5/S1"};
  return names[level_index(l)];
}

DiscLevel level_from_string(const std::string& s) {
  const std::string v = to_lower(trim(s));
  static const char* names[kNumLevels] = {"l1/l2", "l2/l3", "l3/l4", "l4/l5", "l5/s1"};
  for (int i = 0; i < kNumLevels; ++i) {
    if (v == names[i]) return static_cast<DiscLevel>(i);
  }
  throw DataError("unknown disc level: '" + s + "'");
}

std::string partition_to_string(Partition p) {
  switch (p) {
    case Partition::Train: return "train";
    case Partition::Val: return "val";
    case Partition::Test: return "test";
  }
  throw DataError("invalid Partition value");
}

Partition partition_from_string(const std::string& s) {
  const std::string v = to_lower(trim(s));
  if (v == "train") return Partition::Train;
  if (v == "val") return Partition::Val;
  if (v == "test") return Partition::Test;
  throw DataError("unknown partition: '" + s + "'");
}

const Partition* SplitAssignment::find(const DiscKey& key) const {
  auto it = std::lower_bound(
      mapping.begin(), mapping.end(), key,
      [](const auto& entry, const DiscKey& k) { return entry.first < k; });
  if (it == mapping.end() || !(it->first == key)) return nullptr;
  return &it->second;
}

std::vector<DiscKey> SplitAssignment::keys_in(Partition p) const {
  std::vector<DiscKey> out;
  for (const auto& [key, part] : mapping) {
    if (part == p) out.push_back(key);
  }
  return out;
}

}  // namespace discgrade
