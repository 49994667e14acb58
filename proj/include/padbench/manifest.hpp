#pragma once

#include <filesystem>
#include <utility>

#include "padbench/image.hpp"
#include "padbench/types.hpp"

namespace padbench {

// Comma-delimited text with a header row. Required columns: sample_id, path,
// class_label, source_dataset (any order). Optional columns: width, height,
// channels, pixel_hash.
Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const Manifest& manifest);

struct IsoFilterConfig {
  int required_width = 640;
  int required_height = 480;
  int required_channels = 1;
};

// Exactly one representative survives per pixel-identical group; the survivor
// is the lowest (source_dataset, sample_id) pair. Record order is preserved.
std::pair<Manifest, DedupReport> deduplicate(const Manifest& manifest,
                                             const ImageStore& store);

Manifest filter_iso_compliant(const Manifest& manifest, const ImageStore& store,
                              const IsoFilterConfig& config = {});

std::string dedup_report_to_json(const DedupReport& report);
DedupReport dedup_report_from_json(const std::string& text);

}  // namespace padbench
