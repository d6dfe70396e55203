#include "fbg/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "fbg/error.hpp"
#include "fbg/image_io.hpp"

namespace fbg {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

fs::path resolve(const fs::path& root, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : root / path;
}

void require_exists(const fs::path& p) {
  if (!fs::exists(p)) throw Error(ErrorCode::kMissingFile, p.string());
}

std::string require_string(const json& obj, const char* key,
                           const std::string& where) {
  if (!obj.contains(key) || !obj[key].is_string()) {
    throw Error(ErrorCode::kBadManifest,
                where + " needs a string field '" + key + "'");
  }
  return obj[key].get<std::string>();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::kMissingFile, p.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (!t.empty()) lines.push_back(std::move(t));
  }
  return lines;
}

void validate_categories(const std::vector<std::string>& categories) {
  if (categories.empty()) {
    throw Error(ErrorCode::kBadCategoryTable,
                "category table is empty (index 0 must be background)");
  }
  if (categories.size() > kVoidLabel) {
    throw Error(ErrorCode::kBadCategoryTable,
                "category table has " + std::to_string(categories.size()) +
                    " entries; index 255 is reserved for void");
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (categories[i].empty()) {
      throw Error(ErrorCode::kBadCategoryTable,
                  "category " + std::to_string(i) + " has an empty name");
    }
    if (!seen.insert(categories[i]).second) {
      throw Error(ErrorCode::kBadCategoryTable,
                  "category name '" + categories[i] + "' is repeated");
    }
  }
}

std::vector<std::string> list_candidates(const ImageEntry& entry,
                                         std::size_t cap) {
  std::vector<std::string> ids;
  if (entry.ranking) {
    ids = read_lines(*entry.ranking);
  } else {
    for (const auto& f : fs::directory_iterator(entry.candidate_dir)) {
      if (f.is_regular_file() && f.path().extension() == ".png") {
        ids.push_back(f.path().stem().string());
      }
    }
    std::sort(ids.begin(), ids.end());
  }
  std::set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) {
      throw Error(ErrorCode::kDuplicateId,
                  "candidate '" + id + "' listed twice for image " + entry.id);
    }
  }
  if (ids.size() > cap) ids.resize(cap);
  return ids;
}

std::string relative_to(const fs::path& p, const fs::path& root) {
  if (p.is_absolute()) {
    const auto rel = p.lexically_relative(root);
    if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
    return p.generic_string();
  }
  return p.generic_string();
}

}  // namespace

const ImageEntry& DatasetManifest::image(const std::string& id) const {
  for (const auto& e : images) {
    if (e.id == id) return e;
  }
  throw Error(ErrorCode::kBadManifest, "unknown image id '" + id + "'");
}

std::vector<const ImageEntry*> DatasetManifest::split(
    const std::string& name) const {
  const auto it = splits.find(name);
  if (it == splits.end()) {
    throw Error(ErrorCode::kEmptySplit, "split '" + name + "' does not exist");
  }
  std::vector<const ImageEntry*> out;
  for (const auto& id : it->second) out.push_back(&image(id));
  return out;
}

DatasetManifest load_dataset(const fs::path& manifest,
                             std::size_t max_candidates) {
  std::ifstream in(manifest);
  if (!in) throw Error(ErrorCode::kMissingFile, manifest.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBadManifest,
                manifest.string() + " does not parse: " + e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::kBadManifest, "manifest must be a JSON object");
  }
  if (!doc.contains("schema_version") ||
      doc["schema_version"] != kManifestSchemaVersion) {
    throw Error(ErrorCode::kBadManifest,
                "manifest schema_version must be " +
                    std::to_string(kManifestSchemaVersion));
  }

  DatasetManifest m;
  m.root = fs::absolute(manifest).parent_path();
  m.max_candidates = max_candidates;

  if (!doc.contains("categories") || !doc["categories"].is_array()) {
    throw Error(ErrorCode::kBadCategoryTable,
                "manifest needs a 'categories' array");
  }
  for (const auto& c : doc["categories"]) {
    if (!c.is_string()) {
      throw Error(ErrorCode::kBadCategoryTable,
                  "category names must be strings");
    }
    m.categories.push_back(c.get<std::string>());
  }
  validate_categories(m.categories);

  std::set<std::string> ids;
  if (doc.contains("images")) {
    if (!doc["images"].is_array()) {
      throw Error(ErrorCode::kBadManifest, "'images' must be an array");
    }
    for (const auto& item : doc["images"]) {
      ImageEntry e;
      e.id = require_string(item, "id", "image entry");
      const auto where = "image '" + e.id + "'";
      if (!ids.insert(e.id).second) {
        throw Error(ErrorCode::kDuplicateId,
                    "image id '" + e.id + "' appears twice");
      }
      e.image = resolve(m.root, require_string(item, "image", where));
      e.labels = resolve(m.root, require_string(item, "labels", where));
      e.candidate_dir =
          resolve(m.root, require_string(item, "candidates", where));
      if (item.contains("ranking")) {
        e.ranking = resolve(m.root, require_string(item, "ranking", where));
      }
      require_exists(e.image);
      require_exists(e.labels);
      require_exists(e.candidate_dir);
      if (e.ranking) require_exists(*e.ranking);
      e.candidates = list_candidates(e, max_candidates);
      for (const auto& c : e.candidates) {
        require_exists(e.candidate_dir / (c + ".png"));
      }
      m.images.push_back(std::move(e));
    }
  }

  if (doc.contains("splits")) {
    if (!doc["splits"].is_object()) {
      throw Error(ErrorCode::kBadManifest, "'splits' must be an object");
    }
    for (const auto& [name, list] : doc["splits"].items()) {
      if (!list.is_array()) {
        throw Error(ErrorCode::kBadManifest,
                    "split '" + name + "' must be an array of ids");
      }
      std::set<std::string> seen;
      auto& out = m.splits[name];
      for (const auto& v : list) {
        if (!v.is_string()) {
          throw Error(ErrorCode::kBadManifest,
                      "split '" + name + "' must contain string ids");
        }
        const auto id = v.get<std::string>();
        if (!ids.count(id)) {
          throw Error(ErrorCode::kBadManifest, "split '" + name +
                                                   "' references unknown image '" +
                                                   id + "'");
        }
        if (!seen.insert(id).second) {
          throw Error(ErrorCode::kDuplicateId,
                      "image '" + id + "' repeated in split '" + name + "'");
        }
        out.push_back(id);
      }
    }
  }
  return m;
}

void save_manifest(const DatasetManifest& m, const fs::path& path) {
  const auto root = fs::absolute(path).parent_path();
  json doc;
  doc["schema_version"] = kManifestSchemaVersion;
  doc["categories"] = m.categories;
  json splits = json::object();
  for (const auto& [name, list] : m.splits) splits[name] = list;
  doc["splits"] = splits;
  json images = json::array();
  for (const auto& e : m.images) {
    json item;
    item["id"] = e.id;
    item["image"] = relative_to(e.image, root);
    item["labels"] = relative_to(e.labels, root);
    item["candidates"] = relative_to(e.candidate_dir, root);
    if (e.ranking) item["ranking"] = relative_to(*e.ranking, root);
    images.push_back(std::move(item));
  }
  doc["images"] = images;
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

std::vector<CandidateRecord> load_candidates(const ImageEntry& entry) {
  std::vector<CandidateRecord> out;
  int rank = 0;
  for (const auto& id : entry.candidates) {
    auto mask = load_mask(entry.candidate_dir / (id + ".png"));
    const int r = rank++;
    if (mask.empty()) continue;
    out.push_back({id, std::move(mask), r});
  }
  return out;
}

const std::vector<std::string>& voc_categories() {
  static const std::vector<std::string> names = {
      "background", "aeroplane", "bicycle",     "bird",  "boat",
      "bottle",     "bus",       "car",         "cat",   "chair",
      "cow",        "diningtable", "dog",       "horse", "motorbike",
      "person",     "pottedplant", "sheep",     "sofa",  "train",
      "tvmonitor"};
  return names;
}

DatasetManifest import_voc(const fs::path& voc_root, const fs::path& out_dir) {
  const auto root = fs::absolute(voc_root);
  const auto sets = root / "ImageSets" / "Segmentation";
  require_exists(sets);
  fs::create_directories(out_dir);
  const auto out_root = fs::absolute(out_dir);

  DatasetManifest m;
  m.root = out_root;
  m.categories = voc_categories();
  std::set<std::string> known;
  for (const std::string split : {"train", "val", "test"}) {
    const auto list = sets / (split + ".txt");
    if (!fs::exists(list)) continue;
    auto ids = read_lines(list);
    std::erase_if(ids, [&](const std::string& id) {
      return !fs::exists(root / "SegmentationClass" / (id + ".png"));
    });
    if (ids.empty()) continue;
    for (const auto& id : ids) {
      if (!known.insert(id).second) continue;
      ImageEntry e;
      e.id = id;
      e.image = root / "JPEGImages" / (id + ".jpg");
      e.labels = root / "SegmentationClass" / (id + ".png");
      require_exists(e.image);
      e.candidate_dir = out_root / "candidates" / id;
      e.ranking = e.candidate_dir / "ranking.txt";
      fs::create_directories(e.candidate_dir);
      std::ofstream ranking(*e.ranking);
      const auto objects = root / "SegmentationObject" / (id + ".png");
      if (fs::exists(objects)) {
        const auto inst = load_label_map(objects);
        std::set<int> present;
        for (auto v : inst.labels()) {
          if (v != 0 && v != kVoidLabel) present.insert(v);
        }
        for (int k : present) {
          BinaryMask mask(inst.width(), inst.height());
          for (int y = 0; y < inst.height(); ++y) {
            for (int x = 0; x < inst.width(); ++x) {
              if (inst.at(x, y) == k) mask.set(x, y);
            }
          }
          const auto cid = "obj" + std::to_string(k);
          save_mask_png(e.candidate_dir / (cid + ".png"), mask);
          ranking << cid << "\n";
          e.candidates.push_back(cid);
        }
      }
      m.images.push_back(std::move(e));
    }
    m.splits[split] = ids;
  }
  save_manifest(m, out_root / "manifest.json");
  return m;
}

}  // namespace fbg
