#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fbg/label_map.hpp"
#include "fbg/raster.hpp"

namespace fbg {

inline constexpr int kManifestSchemaVersion = 1;
inline constexpr std::size_t kDefaultMaxCandidates = 150;

struct ImageEntry {
  std::string id;
  std::filesystem::path image;
  std::filesystem::path labels;
  std::filesystem::path candidate_dir;
  std::optional<std::filesystem::path> ranking;
  /// Candidate ids, best first, after capping. Filled at load.
  std::vector<std::string> candidates;
};

// Manifest JSON (paths relative to the manifest's directory unless absolute):
// {
//   "schema_version": 1,
//   "categories": ["background", "cat", ...],      // index = position
//   "splits": {"train": ["id", ...], "val": [...]},
//   "images": [{"id": "...", "image": "...", "labels": "...",
//               "candidates": "dir", "ranking": "dir/ranking.txt"}]
// }
struct DatasetManifest {
  std::filesystem::path root;
  std::vector<std::string> categories;
  std::map<std::string, std::vector<std::string>> splits;
  std::vector<ImageEntry> images;
  std::size_t max_candidates = kDefaultMaxCandidates;

  const ImageEntry& image(const std::string& id) const;
  std::vector<const ImageEntry*> split(const std::string& name) const;
  bool has_split(const std::string& name) const {
    return splits.count(name) > 0;
  }
};

DatasetManifest load_dataset(const std::filesystem::path& manifest,
                             std::size_t max_candidates = kDefaultMaxCandidates);
/// Writes the manifest with paths relative to the manifest's directory where
/// possible.
void save_manifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path);

struct CandidateRecord {
  std::string id;
  BinaryMask mask;
  int rank = 0;
};

std::vector<CandidateRecord> load_candidates(const ImageEntry& entry);

/// Converts a VOC-layout tree (JPEGImages, SegmentationClass,
/// SegmentationObject, ImageSets/Segmentation) into a manifest in `out_dir`.
/// Ground-truth instances become the candidate masks.
DatasetManifest import_voc(const std::filesystem::path& voc_root,
                           const std::filesystem::path& out_dir);

const std::vector<std::string>& voc_categories();

}  // namespace fbg
