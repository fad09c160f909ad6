#include "discgrade/split.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace discgrade {

SplitResult stratified_disc_split(const DatasetManifest& manifest,
                                  const std::array<double, 3>& fractions,
                                  std::uint64_t seed) {
  const double sum = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("split fractions must sum to 1");
  for (double f : fractions) {
    if (f < 0.0) throw ValidationError("split fractions must be non-negative");
  }

  // discs_in_manifest enforces one grade per DiscKey.
  auto discs = discs_in_manifest(manifest);
  std::array<std::vector<DiscKey>, kNumGrades> by_grade;
  for (auto& [key, grade] : discs) {
    by_grade[static_cast<int>(grade)].push_back(key);
  }

  SplitResult result;
  result.assignment.seed = seed;
  result.assignment.fractions = fractions;

  for (int g = 0; g < kNumGrades; ++g) {
    auto& keys = by_grade[g];
    if (keys.empty()) continue;
    // Canonical order first so the shuffle depends only on (keys, seed).
    std::sort(keys.begin(), keys.end());
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(g)));
    rng.shuffle(keys);

    const int n = static_cast<int>(keys.size());
    std::array<int, kNumPartitions> counts{};
    if (n < kNumPartitions) {
      counts = {n, 0, 0};
      std::ostringstream ss;
      ss << "grade " << grade_to_string(static_cast<SeverityGrade>(g)) << " has "
         << n << " disc(s), fewer than partitions; all assigned to train";
      result.warnings.push_back(ss.str());
    } else {
      // Largest remainder; ties broken by partition order (train, val, test).
      std::array<double, kNumPartitions> exact{};
      int assigned = 0;
      for (int p = 0; p < kNumPartitions; ++p) {
        exact[p] = fractions[p] * n;
        counts[p] = static_cast<int>(std::floor(exact[p]));
        assigned += counts[p];
      }
      std::array<int, kNumPartitions> order{0, 1, 2};
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return (exact[a] - std::floor(exact[a])) > (exact[b] - std::floor(exact[b]));
      });
      for (int r = 0; r < n - assigned; ++r) counts[order[r]] += 1;
    }

    int cursor = 0;
    for (int p = 0; p < kNumPartitions; ++p) {
      for (int j = 0; j < counts[p]; ++j, ++cursor) {
        result.assignment.mapping.emplace_back(keys[cursor],
                                               static_cast<Partition>(p));
      }
    }
  }

  std::sort(result.assignment.mapping.begin(), result.assignment.mapping.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return result;
}

AuditReport audit_leakage(const SplitAssignment& split,
                          const DatasetManifest& manifest) {
  AuditReport report;

  std::map<DiscKey, SeverityGrade> manifest_discs;
  for (auto& [key, grade] : discs_in_manifest(manifest)) {
    manifest_discs.emplace(key, grade);
  }

  std::map<DiscKey, std::vector<Partition>> seen;
  for (const auto& [key, part] : split.mapping) {
    auto it = manifest_discs.find(key);
    if (it == manifest_discs.end()) {
      throw DataError("split references disc absent from manifest: " + key.str());
    }
    seen[key].push_back(part);
  }

  for (const auto& [key, parts] : seen) {
    if (parts.size() > 1) {
      std::ostringstream ss;
      ss << "disc " << key.str() << " appears in partitions {";
      for (std::size_t i = 0; i < parts.size(); ++i) {
        ss << (i ? "," : "") << partition_to_string(parts[i]);
      }
      ss << "}";
      report.violations.push_back(ss.str());
    }
  }
  for (const auto& [key, grade] : manifest_discs) {
    auto it = seen.find(key);
    if (it == seen.end()) {
      report.violations.push_back("disc " + key.str() + " missing from split");
    } else {
      report.histogram[static_cast<int>(it->second.front())]
                      [static_cast<int>(grade)] += 1;
    }
  }
  return report;
}

void save_split(const SplitAssignment& split, const fs::path& csv_path) {
  std::ostringstream csv;
  csv << "patient_id,series_id,level,partition\n";
  for (const auto& [key, part] : split.mapping) {
    csv << key.patient_id << ',' << key.series_id << ','
        << level_to_string(key.level) << ',' << partition_to_string(part) << "\n";
  }
  write_text_file(csv_path, csv.str());

  nlohmann::json side;
  side["seed"] = split.seed;
  side["fractions"] = split.fractions;
  fs::path side_path = csv_path;
  side_path.replace_extension(".json");
  write_text_file(side_path, side.dump(2) + "\n");
}

SplitAssignment load_split(const fs::path& csv_path) {
  const std::string text = read_text_file(csv_path);
  SplitAssignment split;

  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      trim(line) != "patient_id,series_id,level,partition") {
    throw DataError("split header mismatch in " + csv_path.string());
  }
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 4)
      throw DataError("split row in " + csv_path.string() + " must have 4 fields");
    DiscKey key{f[0], f[1], level_from_string(f[2])};
    split.mapping.emplace_back(std::move(key), partition_from_string(f[3]));
  }
  std::sort(split.mapping.begin(), split.mapping.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  fs::path side_path = csv_path;
  side_path.replace_extension(".json");
  nlohmann::json side = nlohmann::json::parse(read_text_file(side_path));
  split.seed = side.at("seed").get<std::uint64_t>();
  auto fr = side.at("fractions");
  for (int i = 0; i < 3; ++i) split.fractions[i] = fr.at(i).get<double>();
  return split;
}

}  // namespace discgrade
