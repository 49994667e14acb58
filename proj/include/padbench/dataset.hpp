#pragma once

#include <set>
#include <string>
#include <vector>

#include "padbench/image.hpp"
#include "padbench/nn.hpp"
#include "padbench/types.hpp"

namespace padbench {

struct LabeledImage {
  std::string sample_id;
  ClassLabel label = ClassLabel::bona_fide;
  Image image;
};

// Materializes the listed ids in manifest order. Missing ids raise.
std::vector<LabeledImage> load_samples(const Manifest& manifest, const ImageStore& store,
                                       const std::set<std::string>& ids);

// grayscale, [0,1], resized (nearest) to size x size when needed
nn::Tensor to_input_tensor(const Image& image, int size);

}  // namespace padbench
