#include "padbench/image.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "padbench/digest.hpp"

namespace padbench {
namespace {

int read_pnm_token(std::istream& in, const std::filesystem::path& path) {
  // skips whitespace and '#' comments between header fields
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  if (c == EOF) throw IoError("truncated PNM header: " + path.string());
  int value = 0;
  bool any = false;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    any = true;
    c = in.get();
  }
  if (!any) throw IoError("malformed PNM header: " + path.string());
  return value;
}

void write_pnm(const std::filesystem::path& path, const Image& image,
               const char* magic, int channels) {
  if (image.channels != channels) {
    throw ValidationError("channel count does not match PNM format: " + path.string());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << magic << "\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

Image make_image(int width, int height, int channels, std::uint8_t fill) {
  if (width <= 0 || height <= 0 || (channels != 1 && channels != 3)) {
    throw ValidationError("invalid image shape");
  }
  Image image;
  image.width = width;
  image.height = height;
  image.channels = channels;
  image.pixels.assign(
      static_cast<std::size_t>(width) * height * channels, fill);
  return image;
}

Image read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image: " + path.string());
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || (m1 != '5' && m1 != '6')) {
    throw IoError("unsupported image format (expected binary PGM/PPM): " + path.string());
  }
  const int channels = (m1 == '5') ? 1 : 3;
  const int width = read_pnm_token(in, path);
  const int height = read_pnm_token(in, path);
  const int maxval = read_pnm_token(in, path);
  if (maxval != 255) throw IoError("unsupported PNM maxval: " + path.string());
  if (width <= 0 || height <= 0) throw IoError("bad PNM dimensions: " + path.string());
  Image image = make_image(width, height, channels);
  in.read(reinterpret_cast<char*>(image.pixels.data()),
          static_cast<std::streamsize>(image.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(image.pixels.size())) {
    throw IoError("truncated pixel data: " + path.string());
  }
  return image;
}

void write_pgm(const std::filesystem::path& path, const Image& image) {
  write_pnm(path, image, "P5", 1);
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
  write_pnm(path, image, "P6", 3);
}

std::string pixel_hash(const Image& image) {
  return sha256_hex(image.pixels);
}

Image DirectoryImageStore::load(const SampleRecord& record) const {
  return read_pnm(root_ / record.path);
}

Image to_gray(const Image& image) {
  if (image.channels == 1) return image;
  Image gray = make_image(image.width, image.height, 1);
  const std::size_t n = image.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    const int r = image.pixels[i * 3 + 0];
    const int g = image.pixels[i * 3 + 1];
    const int b = image.pixels[i * 3 + 2];
    gray.pixels[i] = static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b) / 1000);
  }
  return gray;
}

Image center_crop_resize(const Image& image, int out_width, int out_height,
                         double crop_fraction) {
  if (crop_fraction <= 0.0 || crop_fraction > 1.0) {
    throw ValidationError("crop_fraction must be in (0, 1]");
  }
  const Image gray = to_gray(image);
  const int crop_w = std::max(1, static_cast<int>(gray.width * crop_fraction));
  const int crop_h = std::max(1, static_cast<int>(gray.height * crop_fraction));
  const int x0 = (gray.width - crop_w) / 2;
  const int y0 = (gray.height - crop_h) / 2;
  Image out = make_image(out_width, out_height, 1);
  for (int y = 0; y < out_height; ++y) {
    const int sy = y0 + std::min(crop_h - 1, y * crop_h / out_height);
    for (int x = 0; x < out_width; ++x) {
      const int sx = x0 + std::min(crop_w - 1, x * crop_w / out_width);
      out.at(x, y) = gray.at(sx, sy);
    }
  }
  return out;
}

std::vector<double> to_unit_doubles(const Image& image) {
  std::vector<double> values(image.pixels.size());
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    values[i] = image.pixels[i] / 255.0;
  }
  return values;
}

}  // namespace padbench
