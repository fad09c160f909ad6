#include "discgrade/manifest.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "discgrade/image_io.hpp"

namespace discgrade {

namespace {
constexpr const char* kHeader = "patient_id,series_id,level,slice_index,x,y,grade";

std::string describe(const Annotation& a, std::size_t row) {
  std::ostringstream ss;
  ss << "record " << row << " (" << a.key.str() << " slice " << a.slice_index << ")";
  return ss.str();
}
}  // namespace

fs::path manifest_sidecar_path(const fs::path& csv_path) {
  fs::path p = csv_path;
  p.replace_extension(".json");
  return p;
}

void save_manifest(const DatasetManifest& manifest, const fs::path& csv_path) {
  std::ostringstream csv;
  csv << kHeader << "\n";
  for (const auto& a : manifest.records) {
    if (a.key.patient_id.find(',') != std::string::npos ||
        a.key.series_id.find(',') != std::string::npos) {
      throw DataError("manifest ids must not contain commas: " + a.key.str());
    }
    csv << a.key.patient_id << ',' << a.key.series_id << ','
        << level_to_string(a.key.level) << ',' << a.slice_index << ','
        << format_float(a.x) << ',' << format_float(a.y) << ','
        << grade_to_string(a.grade) << "\n";
  }
  write_text_file(csv_path, csv.str());

  nlohmann::json side;
  side["image_root"] = manifest.image_root;
  side["format_version"] = manifest.format_version;
  write_text_file(manifest_sidecar_path(csv_path), side.dump(2) + "\n");
}

DatasetManifest load_manifest(const fs::path& csv_path) {
  const std::string text = read_text_file(csv_path);
  DatasetManifest m;

  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != kHeader) {
    throw DataError("manifest header mismatch in " + csv_path.string() +
                    " (expected '" + kHeader + "')");
  }
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 7) {
      throw DataError("manifest row " + std::to_string(row) + " has " +
                      std::to_string(f.size()) + " fields, expected 7");
    }
    Annotation a;
    a.key.patient_id = f[0];
    a.key.series_id = f[1];
    a.key.level = level_from_string(f[2]);
    try {
      a.slice_index = std::stoi(f[3]);
      a.x = std::stof(f[4]);
      a.y = std::stof(f[5]);
    } catch (const std::exception&) {
      throw DataError("manifest row " + std::to_string(row) + ": bad numeric field");
    }
    a.grade = grade_from_string(f[6]);
    m.records.push_back(std::move(a));
  }

  const std::string side_text = read_text_file(manifest_sidecar_path(csv_path));
  nlohmann::json side = nlohmann::json::parse(side_text, nullptr, true);
  m.image_root = side.at("image_root").get<std::string>();
  m.format_version = side.at("format_version").get<int>();
  return m;
}

fs::path resolved_image_root(const DatasetManifest& manifest,
                             const fs::path& csv_path) {
  fs::path root(manifest.image_root);
  if (root.is_absolute()) return root;
  return csv_path.parent_path() / root;
}

fs::path slice_image_path(const fs::path& image_root, const DiscKey& key,
                          int slice_index) {
  char name[32];
  std::snprintf(name, sizeof(name), "slice_%03d.pgm", slice_index);
  return image_root / key.patient_id / key.series_id / name;
}

std::vector<std::string> validate_manifest(const DatasetManifest& manifest,
                                           const fs::path& image_root) {
  std::vector<std::string> report;
  std::set<std::tuple<std::string, std::string, int, int>> seen;
  std::map<std::string, std::pair<int, int>> dims_cache;  // path -> (h, w)

  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const Annotation& a = manifest.records[i];
    const std::size_t row = i + 2;  // 1-based, after header

    if (a.slice_index < 0) {
      report.push_back(describe(a, row) + ": negative slice_index");
    }

    auto id = std::make_tuple(a.key.patient_id, a.key.series_id,
                              level_index(a.key.level), a.slice_index);
    if (!seen.insert(id).second) {
      report.push_back(describe(a, row) + ": duplicate (key, slice_index)");
      continue;
    }

    const fs::path img = slice_image_path(image_root, a.key, a.slice_index);
    auto it = dims_cache.find(img.string());
    if (it == dims_cache.end()) {
      if (!fs::exists(img)) {
        report.push_back(describe(a, row) + ": missing image " + img.string());
        continue;
      }
      it = dims_cache.emplace(img.string(), read_pgm16_dims(img)).first;
    }
    const auto [h, w] = it->second;
    if (!(a.x >= 0.0f && a.x < static_cast<float>(w))) {
      report.push_back(describe(a, row) + ": x=" + format_float(a.x) +
                       " outside [0," + std::to_string(w) + ")");
    }
    if (!(a.y >= 0.0f && a.y < static_cast<float>(h))) {
      report.push_back(describe(a, row) + ": y=" + format_float(a.y) +
                       " outside [0," + std::to_string(h) + ")");
    }
  }
  return report;
}

std::vector<std::string> validate_manifest_file(const fs::path& csv_path) {
  const DatasetManifest m = load_manifest(csv_path);
  return validate_manifest(m, resolved_image_root(m, csv_path));
}

std::vector<std::pair<DiscKey, SeverityGrade>> discs_in_manifest(
    const DatasetManifest& manifest) {
  std::vector<std::pair<DiscKey, SeverityGrade>> out;
  std::map<DiscKey, SeverityGrade> grade_of;
  for (const auto& a : manifest.records) {
    auto it = grade_of.find(a.key);
    if (it == grade_of.end()) {
      grade_of.emplace(a.key, a.grade);
      out.emplace_back(a.key, a.grade);
    } else if (it->second != a.grade) {
      throw DataError("disc " + a.key.str() + " carries two different grades");
    }
  }
  return out;
}

std::vector<Annotation> representative_annotations(const DatasetManifest& manifest) {
  std::map<DiscKey, Annotation> rep;
  for (const auto& a : manifest.records) {
    auto it = rep.find(a.key);
    if (it == rep.end() || a.slice_index < it->second.slice_index) {
      rep[a.key] = a;
    }
  }
  std::vector<Annotation> out;
  out.reserve(rep.size());
  for (auto& [key, a] : rep) out.push_back(a);
  return out;
}

}  // namespace discgrade
