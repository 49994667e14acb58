#include "padbench/toygen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "padbench/manifest.hpp"
#include "padbench/rng.hpp"

namespace padbench {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct Frame {
  int width, height;
  double cx, cy, scale;  // scale = half of the short side

  double radius(int x, int y) const {
    const double dx = (x - cx) / scale;
    const double dy = (y - cy) / scale;
    return std::sqrt(dx * dx + dy * dy);
  }
  double angle(int x, int y) const { return std::atan2(y - cy, x - cx); }
};

std::uint8_t clamp_gray(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

// sum of a few seeded 2-D sinusoids; smooth pseudo-noise in roughly [-1, 1]
struct SinusoidNoise {
  struct Wave {
    double fx, fy, phase, amp;
  };
  std::vector<Wave> waves;

  // fully random waves in a frequency band
  SinusoidNoise(Rng& rng, int count, double min_freq, double max_freq) {
    double total = 0.0;
    for (int i = 0; i < count; ++i) {
      Wave w;
      w.fx = rng.uniform(min_freq, max_freq) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
      w.fy = rng.uniform(min_freq, max_freq) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
      w.phase = rng.uniform(0.0, kTwoPi);
      w.amp = rng.uniform(0.5, 1.0);
      total += w.amp;
      waves.push_back(w);
    }
    for (auto& w : waves) w.amp /= total;
  }

  // anchored waves: fixed layout with small per-instance jitter
  SinusoidNoise(Rng& rng, const std::vector<std::array<double, 3>>& anchors) {
    double total = 0.0;
    for (const auto& [fx, fy, phase] : anchors) {
      Wave w;
      w.fx = fx + rng.uniform(-0.15, 0.15);
      w.fy = fy + rng.uniform(-0.15, 0.15);
      w.phase = phase + rng.uniform(-0.25, 0.25);
      w.amp = rng.uniform(0.7, 1.0);
      total += w.amp;
      waves.push_back(w);
    }
    for (auto& w : waves) w.amp /= total;
  }

  double at(double u, double v) const {
    double s = 0.0;
    for (const auto& w : waves) {
      s += w.amp * std::sin(kTwoPi * (w.fx * u + w.fy * v) + w.phase);
    }
    return s;
  }
};

struct IrisGeometry {
  double pupil_radius;
  double iris_radius;
  double pupil_value;
  double sclera_value;
};

IrisGeometry draw_geometry(Rng& rng) {
  IrisGeometry g;
  g.pupil_radius = rng.uniform(0.16, 0.26);
  g.iris_radius = rng.uniform(0.86, 0.94);
  g.pupil_value = rng.uniform(18.0, 32.0);
  g.sclera_value = rng.uniform(222.0, 234.0);
  return g;
}

// Smooth radial sinusoid texture with a pupil disk. Texture parameters are
// anchored with small per-instance jitter so class centroids stay crisp.
Image render_live_base(Rng& rng, const Frame& f) {
  const IrisGeometry g = draw_geometry(rng);
  const double radial_freq = 4.0 + rng.uniform(-0.2, 0.2);
  const double radial_phase = rng.uniform(-0.3, 0.3);
  const int angular_waves = static_cast<int>(rng.uniform_index(3)) + 1;
  const double angular_phase = rng.uniform(0.0, kTwoPi);

  Image img = make_image(f.width, f.height);
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      const double r = f.radius(x, y);
      double v;
      if (r < g.pupil_radius) {
        v = g.pupil_value;
      } else if (r > g.iris_radius) {
        v = g.sclera_value;
      } else {
        const double t = f.angle(x, y);
        v = 128.0 + 58.0 * std::sin(kTwoPi * radial_freq * r + radial_phase) +
            12.0 * std::sin(angular_waves * t + angular_phase);
      }
      img.at(x, y) = clamp_gray(v);
    }
  }
  return img;
}

// regular dot grid, the printing artifact overlay
void overlay_dot_grid(Rng& rng, Image& img) {
  const int period = 8;
  const double dot_radius = 1.9;
  const int ox = static_cast<int>(rng.uniform_index(3));
  const int oy = static_cast<int>(rng.uniform_index(3));
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const int gx = (x - ox) % period;
      const int gy = (y - oy) % period;
      const double dx = (gx + period) % period;
      const double dy = (gy + period) % period;
      const double ddx = std::min(dx, period - dx);
      const double ddy = std::min(dy, period - dy);
      if (ddx * ddx + ddy * ddy <= dot_radius * dot_radius) {
        img.at(x, y) = clamp_gray(img.at(x, y) - 135.0);
      }
    }
  }
}

// annular high-contrast blob pattern with a stable blob layout
Image render_textured_contact(Rng& rng, const Frame& f) {
  const IrisGeometry g = draw_geometry(rng);
  static const std::vector<std::array<double, 3>> kBlobAnchors = {
      {2.3, 3.1, 0.4}, {4.2, -2.7, 2.1}, {-3.5, 4.9, 1.3},
      {2.8, 5.3, 4.0}, {-5.1, -3.8, 2.8}, {4.6, 4.4, 5.5},
  };
  const SinusoidNoise noise(rng, kBlobAnchors);
  Image img = make_image(f.width, f.height);
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      const double r = f.radius(x, y);
      double v;
      if (r < g.pupil_radius) {
        v = g.pupil_value;
      } else if (r > g.iris_radius) {
        v = g.sclera_value;
      } else {
        const double n = noise.at(static_cast<double>(x) / f.width,
                                  static_cast<double>(y) / f.height);
        v = n > 0.0 ? 215.0 : 40.0;
      }
      img.at(x, y) = clamp_gray(v);
    }
  }
  return img;
}

// band-limited noise over the whole frame, pupil disk kept
Image render_synthetic(Rng& rng, const Frame& f) {
  const double pupil_radius = rng.uniform(0.16, 0.26);
  const SinusoidNoise noise(rng, 8, 6.0, 12.0);
  Image img = make_image(f.width, f.height);
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      if (f.radius(x, y) < pupil_radius) {
        img.at(x, y) = clamp_gray(24.0);
        continue;
      }
      const double n = noise.at(static_cast<double>(x) / f.width,
                                static_cast<double>(y) / f.height);
      img.at(x, y) = clamp_gray(127.5 + 97.5 * n);
    }
  }
  return img;
}

// concentric flat rings
Image render_artificial(Rng& rng, const Frame& f) {
  const IrisGeometry g = draw_geometry(rng);
  const int ring_count = 5;
  std::vector<double> ring_values(ring_count);
  for (int i = 0; i < ring_count; ++i) {
    const double base = (i % 2 == 0) ? 60.0 : 200.0;
    ring_values[i] = base + rng.uniform(-18.0, 18.0);
  }
  Image img = make_image(f.width, f.height);
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      const double r = f.radius(x, y);
      double v;
      if (r < g.pupil_radius) {
        v = g.pupil_value;
      } else if (r > g.iris_radius) {
        v = g.sclera_value;
      } else {
        const double t = (r - g.pupil_radius) / (g.iris_radius - g.pupil_radius);
        int ring = static_cast<int>(t * ring_count);
        ring = std::clamp(ring, 0, ring_count - 1);
        v = ring_values[ring];
      }
      img.at(x, y) = clamp_gray(v);
    }
  }
  return img;
}

void reduce_contrast(Image& img, double factor) {
  for (auto& p : img.pixels) {
    p = clamp_gray(128.0 + (p - 128.0) * factor);
  }
}

void overlay_wedge(Rng& rng, Image& img, const Frame& f) {
  const double start = rng.uniform(0.0, kTwoPi);
  const double extent = rng.uniform(0.7, 1.1);
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      double t = f.angle(x, y) - start;
      t -= kTwoPi * std::floor(t / kTwoPi);
      if (t < extent && f.radius(x, y) < 1.05) {
        img.at(x, y) = clamp_gray(212.0);
      }
    }
  }
}

void overlay_lesions(Rng& rng, Image& img, const Frame& f) {
  // lesions appear near fixed anchor sites, with per-instance jitter and a
  // randomly dropped site, so the class keeps a recognizable footprint
  static const std::vector<std::pair<double, double>> kSites = {
      {0.55, 0.7}, {0.45, 2.4}, {0.65, 3.7}, {0.5, 5.2}, {0.6, 1.6},
  };
  const std::size_t dropped = rng.uniform_index(kSites.size());
  for (std::size_t i = 0; i < kSites.size(); ++i) {
    if (i == dropped) continue;
    const double lr = kSites[i].first + rng.uniform(-0.06, 0.06);
    const double lt = kSites[i].second + rng.uniform(-0.25, 0.25);
    const double lx = f.cx + lr * f.scale * std::cos(lt);
    const double ly = f.cy + lr * f.scale * std::sin(lt);
    const double rad = rng.uniform(3.5, 5.5);
    const double wobble_phase = rng.uniform(0.0, kTwoPi);
    const double wobble = rng.uniform(0.15, 0.35);
    for (int y = 0; y < f.height; ++y) {
      for (int x = 0; x < f.width; ++x) {
        const double dx = x - lx;
        const double dy = y - ly;
        const double a = std::atan2(dy, dx);
        const double edge = rad * (1.0 + wobble * std::sin(3.0 * a + wobble_phase));
        if (dx * dx + dy * dy <= edge * edge) {
          img.at(x, y) = clamp_gray(240.0);
        }
      }
    }
  }
}

}  // namespace

Image render_sample(ClassLabel class_label, std::uint64_t instance_seed, int width,
                    int height) {
  if (width <= 0 || height <= 0) throw ValidationError("image size must be positive");
  Rng rng(mix_seed(instance_seed, 0x746f79ULL, static_cast<std::uint64_t>(class_label)));
  const Frame f{width, height, (width - 1) / 2.0, (height - 1) / 2.0,
                std::min(width, height) / 2.0};
  switch (class_label) {
    case ClassLabel::bona_fide:
      return render_live_base(rng, f);
    case ClassLabel::printout: {
      Image img = render_live_base(rng, f);
      overlay_dot_grid(rng, img);
      return img;
    }
    case ClassLabel::textured_contact:
      return render_textured_contact(rng, f);
    case ClassLabel::textured_contact_printed: {
      Image img = render_textured_contact(rng, f);
      overlay_dot_grid(rng, img);
      return img;
    }
    case ClassLabel::synthetic:
      return render_synthetic(rng, f);
    case ClassLabel::artificial:
      return render_artificial(rng, f);
    case ClassLabel::post_mortem: {
      Image img = render_live_base(rng, f);
      reduce_contrast(img, 0.45);
      overlay_wedge(rng, img, f);
      return img;
    }
    case ClassLabel::diseased: {
      Image img = render_live_base(rng, f);
      overlay_lesions(rng, img, f);
      return img;
    }
  }
  throw ValidationError("unknown class label");
}

ToyConfig ToyConfig::uniform(int count_per_class, int size, std::uint64_t seed,
                             std::string dataset_tag) {
  ToyConfig config;
  for (ClassLabel label : kAllClasses) config.per_class_count[label] = count_per_class;
  config.width = size;
  config.height = size;
  config.seed = seed;
  config.dataset_tag = std::move(dataset_tag);
  return config;
}

Manifest generate_toy_corpus(const ToyConfig& config,
                             const std::filesystem::path& output_dir) {
  if (config.width <= 0 || config.height <= 0) {
    throw ValidationError("image size must be positive");
  }
  for (const auto& [label, count] : config.per_class_count) {
    if (count < 0) throw ValidationError("negative per-class count");
  }

  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  if (ec) throw IoError("cannot create output dir: " + output_dir.string());

  Manifest manifest;
  for (ClassLabel label : kAllClasses) {
    auto it = config.per_class_count.find(label);
    const int count = it == config.per_class_count.end() ? 0 : it->second;
    if (count == 0) continue;
    const std::string class_name(to_string(label));
    const std::filesystem::path class_dir = output_dir / "images" / class_name;
    std::filesystem::create_directories(class_dir, ec);
    if (ec) throw IoError("cannot create class dir: " + class_dir.string());
    for (int i = 0; i < count; ++i) {
      const std::uint64_t instance_seed =
          mix_seed(config.seed, static_cast<std::uint64_t>(label), static_cast<std::uint64_t>(i));
      const Image img = render_sample(label, instance_seed, config.width, config.height);
      char name[64];
      std::snprintf(name, sizeof(name), "%s_%05d.pgm", class_name.c_str(), i);
      const std::filesystem::path rel =
          std::filesystem::path("images") / class_name / name;
      write_pgm(output_dir / rel, img);

      SampleRecord record;
      record.sample_id = config.dataset_tag + "_" + class_name + "_" + std::to_string(i);
      record.path = rel.generic_string();
      record.class_label = label;
      record.source_dataset = config.dataset_tag;
      record.width = img.width;
      record.height = img.height;
      record.channels = img.channels;
      record.pixel_hash = pixel_hash(img);
      manifest.records.push_back(std::move(record));
    }
  }
  save_manifest(output_dir / "manifest.csv", manifest);
  return manifest;
}

}  // namespace padbench
