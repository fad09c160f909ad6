#include "discgrade/roi_store.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <map>
#include <sstream>

#include "discgrade/image_io.hpp"

namespace discgrade {

namespace {
constexpr const char* kIndexName = "roi_manifest.csv";
constexpr const char* kHeader =
    "patient_id,series_id,level,slice_index,grade,roi_file,crop_row,crop_col,"
    "src_height,src_width";
}  // namespace

RoiStore export_rois(const DatasetManifest& manifest, const fs::path& manifest_csv,
                     const PreprocessConfig& preprocess, const fs::path& out_dir) {
  preprocess.validate();
  const fs::path image_root = resolved_image_root(manifest, manifest_csv);
  fs::create_directories(out_dir / "rois");

  RoiStore store;
  store.dir = out_dir;
  store.roi_size = preprocess.roi_size;
  store.pad_width = preprocess.pad_width;
  store.pad_value = preprocess.pad_value;

  // Slices are shared between levels of one series; cache the padded float
  // image of the most recently used slice.
  std::string cached_path;
  ImageF cached_padded;
  int cached_h = 0, cached_w = 0;

  for (const auto& a : manifest.records) {
    const fs::path slice_path = slice_image_path(image_root, a.key, a.slice_index);
    if (slice_path.string() != cached_path) {
      const SliceImage slice = read_pgm16(slice_path);
      cached_padded = pad_constant(normalize_intensity(slice), preprocess.pad_width,
                                   preprocess.pad_value);
      cached_h = slice.height;
      cached_w = slice.width;
      cached_path = slice_path.string();
    }
    const float px = a.x + static_cast<float>(preprocess.pad_width);
    const float py = a.y + static_cast<float>(preprocess.pad_width);
    RoiPatch patch = crop_roi(cached_padded, px, py, preprocess.roi_size, a.key,
                              a.slice_index);

    char name[96];
    std::snprintf(name, sizeof(name), "rois/%s_%s_L%d_s%03d.png",
                  a.key.patient_id.c_str(), a.key.series_id.c_str(),
                  level_index(a.key.level), a.slice_index);
    write_png_gray8(out_dir / name, to_uint8(patch.pixels));

    RoiRecord rec;
    rec.key = a.key;
    rec.slice_index = a.slice_index;
    rec.grade = a.grade;
    rec.roi_file = name;
    rec.crop_row = patch.crop_row;
    rec.crop_col = patch.crop_col;
    rec.src_height = cached_h;
    rec.src_width = cached_w;
    store.records.push_back(std::move(rec));
  }

  std::ostringstream csv;
  csv << kHeader << "\n";
  for (const auto& r : store.records) {
    csv << r.key.patient_id << ',' << r.key.series_id << ','
        << level_to_string(r.key.level) << ',' << r.slice_index << ','
        << grade_to_string(r.grade) << ',' << r.roi_file << ',' << r.crop_row
        << ',' << r.crop_col << ',' << r.src_height << ',' << r.src_width << "\n";
  }
  write_text_file(out_dir / kIndexName, csv.str());

  nlohmann::json side;
  side["roi_size"] = store.roi_size;
  side["pad_width"] = store.pad_width;
  side["pad_value"] = store.pad_value;
  side["format_version"] = store.format_version;
  write_text_file(out_dir / "roi_manifest.json", side.dump(2) + "\n");
  return store;
}

RoiStore load_roi_store(const fs::path& dir) {
  RoiStore store;
  store.dir = dir;

  nlohmann::json side =
      nlohmann::json::parse(read_text_file(dir / "roi_manifest.json"));
  store.roi_size = side.at("roi_size").get<int>();
  store.pad_width = side.at("pad_width").get<int>();
  store.pad_value = side.at("pad_value").get<float>();
  store.format_version = side.at("format_version").get<int>();

  const std::string text = read_text_file(dir / kIndexName);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != kHeader)
    throw DataError("roi index header mismatch in " + dir.string());
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto f = split_csv_line(line);
    if (f.size() != 10) throw DataError("roi index row must have 10 fields");
    RoiRecord r;
    r.key = DiscKey{f[0], f[1], level_from_string(f[2])};
    r.slice_index = std::stoi(f[3]);
    r.grade = grade_from_string(f[4]);
    r.roi_file = f[5];
    r.crop_row = std::stoi(f[6]);
    r.crop_col = std::stoi(f[7]);
    r.src_height = std::stoi(f[8]);
    r.src_width = std::stoi(f[9]);
    store.records.push_back(std::move(r));
  }
  return store;
}

ImageF load_roi_patch(const RoiStore& store, const RoiRecord& record) {
  return from_uint8(read_png_gray8(store.dir / record.roi_file));
}

std::vector<RoiRecord> representative_rois(const RoiStore& store) {
  std::map<DiscKey, RoiRecord> rep;
  for (const auto& r : store.records) {
    auto it = rep.find(r.key);
    if (it == rep.end() || r.slice_index < it->second.slice_index) {
      rep[r.key] = r;
    }
  }
  std::vector<RoiRecord> out;
  out.reserve(rep.size());
  for (auto& [key, r] : rep) out.push_back(r);
  return out;
}

}  // namespace discgrade
