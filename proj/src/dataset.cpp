#include "padbench/dataset.hpp"

#include <unordered_set>

namespace padbench {

std::vector<LabeledImage> load_samples(const Manifest& manifest, const ImageStore& store,
                                       const std::set<std::string>& ids) {
  std::vector<LabeledImage> samples;
  samples.reserve(ids.size());
  std::unordered_set<std::string> remaining(ids.begin(), ids.end());
  for (const auto& record : manifest.records) {
    if (!remaining.count(record.sample_id)) continue;
    remaining.erase(record.sample_id);
    samples.push_back({record.sample_id, record.class_label, store.load(record)});
  }
  if (!remaining.empty()) {
    throw ValidationError("split references sample_id not in manifest: " +
                          *remaining.begin());
  }
  return samples;
}

nn::Tensor to_input_tensor(const Image& image, int size) {
  const Image gray = to_gray(image);
  const Image sized = (gray.width == size && gray.height == size)
                          ? gray
                          : center_crop_resize(gray, size, size, 1.0);
  nn::Tensor t = nn::Tensor::zeros(1, size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      t.at(0, y, x) = sized.at(x, y) / 255.0;
    }
  }
  return t;
}

}  // namespace padbench
