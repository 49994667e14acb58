#pragma once

#include <cstdint>
#include <filesystem>
#include <map>

#include "padbench/image.hpp"
#include "padbench/types.hpp"

namespace padbench {

struct ToyConfig {
  std::map<ClassLabel, int> per_class_count;  // >= 0 per class
  int width = 64;
  int height = 64;
  std::uint64_t seed = 0;
  std::string dataset_tag = "toy";

  static ToyConfig uniform(int count_per_class, int size = 64, std::uint64_t seed = 0,
                           std::string dataset_tag = "toy");
};

// One visual style per class, deterministic in (class_label, instance_seed).
Image render_sample(ClassLabel class_label, std::uint64_t instance_seed,
                    int width = 64, int height = 64);

// Writes images under output_dir/images/<class>/ plus output_dir/manifest.csv
// and returns the manifest (paths relative to output_dir, pixel hashes filled).
Manifest generate_toy_corpus(const ToyConfig& config,
                             const std::filesystem::path& output_dir);

}  // namespace padbench
