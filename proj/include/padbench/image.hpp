#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "padbench/types.hpp"

namespace padbench {

// 8-bit image, interleaved row-major. channels is 1 (gray) or 3 (rgb).
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;

  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  std::uint8_t& at(int x, int y) {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
};

Image make_image(int width, int height, int channels = 1, std::uint8_t fill = 0);

// Binary PGM (P5) / PPM (P6), maxval 255. Lossless, so pixel hashes are stable.
Image read_pnm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Image& image);
void write_ppm(const std::filesystem::path& path, const Image& image);

// sha256 over the decoded pixel bytes, row-major
std::string pixel_hash(const Image& image);

// Resolves manifest-relative paths and decodes images.
class ImageStore {
 public:
  virtual ~ImageStore() = default;
  virtual Image load(const SampleRecord& record) const = 0;
};

class DirectoryImageStore final : public ImageStore {
 public:
  explicit DirectoryImageStore(std::filesystem::path root) : root_(std::move(root)) {}
  Image load(const SampleRecord& record) const override;
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

// Grayscale conversion (integer BT.601 weights) and center-crop + resize used
// by the CNN preprocessor. Nearest-neighbour resize keeps results integral.
Image to_gray(const Image& image);
Image center_crop_resize(const Image& image, int out_width, int out_height,
                         double crop_fraction = 1.0);

// pixels scaled to [0, 1]
std::vector<double> to_unit_doubles(const Image& image);

}  // namespace padbench
