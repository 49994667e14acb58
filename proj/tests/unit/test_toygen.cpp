#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "padbench/manifest.hpp"
#include "padbench/rng.hpp"
#include "padbench/toygen.hpp"
#include "test_util.hpp"

using namespace padbench;
using padbench::testutil::TempDir;

namespace {

double fraction_differing(const Image& a, const Image& b) {
  REQUIRE(a.pixels.size() == b.pixels.size());
  std::size_t differ = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    if (a.pixels[i] != b.pixels[i]) ++differ;
  }
  return static_cast<double>(differ) / static_cast<double>(a.pixels.size());
}

}  // namespace

TEST_CASE("render is deterministic in (class, seed)") {
  for (ClassLabel label : kAllClasses) {
    const Image a = render_sample(label, 1234, 64, 64);
    const Image b = render_sample(label, 1234, 64, 64);
    CHECK(a.pixels == b.pixels);
  }
}

TEST_CASE("different classes with the same seed render differently") {
  const Image live = render_sample(ClassLabel::bona_fide, 42, 64, 64);
  const Image print = render_sample(ClassLabel::printout, 42, 64, 64);
  CHECK(fraction_differing(live, print) > 0.01);
}

TEST_CASE("instance seeds produce instance variation") {
  const Image a = render_sample(ClassLabel::bona_fide, 1, 64, 64);
  const Image b = render_sample(ClassLabel::bona_fide, 2, 64, 64);
  CHECK(fraction_differing(a, b) > 0.0);
}

TEST_CASE("all class-style pairs are visually distinct") {
  for (std::size_t i = 0; i < kAllClasses.size(); ++i) {
    for (std::size_t j = i + 1; j < kAllClasses.size(); ++j) {
      const Image a = render_sample(kAllClasses[i], 7, 64, 64);
      const Image b = render_sample(kAllClasses[j], 7, 64, 64);
      CHECK(fraction_differing(a, b) > 0.01);
    }
  }
}

TEST_CASE("zero counts give an empty manifest") {
  TempDir dir("toyz");
  ToyConfig config = ToyConfig::uniform(0, 32, 1);
  const Manifest m = generate_toy_corpus(config, dir.path);
  CHECK(m.records.empty());
}

TEST_CASE("five per class yields forty records") {
  TempDir dir("toy5");
  const Manifest m = generate_toy_corpus(ToyConfig::uniform(5, 32, 9), dir.path);
  CHECK(m.records.size() == 40);
  for (const auto& [label, count] : class_counts(m)) CHECK(count == 5);
  // every image file exists and decodes to the recorded hash
  DirectoryImageStore store(dir.path);
  for (const auto& r : m.records) {
    const Image img = store.load(r);
    CHECK(pixel_hash(img) == r.pixel_hash);
    CHECK(img.width == 32);
  }
}

TEST_CASE("same seed reproduces manifests and pixel hashes") {
  TempDir dir_a("toyrep_a");
  TempDir dir_b("toyrep_b");
  const ToyConfig config = ToyConfig::uniform(3, 32, 777);
  const Manifest a = generate_toy_corpus(config, dir_a.path);
  const Manifest b = generate_toy_corpus(config, dir_b.path);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].sample_id == b.records[i].sample_id);
    CHECK(a.records[i].pixel_hash == b.records[i].pixel_hash);
  }
}

TEST_CASE("unbalanced per-class counts are honored") {
  TempDir dir("toyu");
  ToyConfig config;
  config.width = config.height = 32;
  config.seed = 3;
  config.per_class_count[ClassLabel::bona_fide] = 4;
  config.per_class_count[ClassLabel::synthetic] = 2;
  const Manifest m = generate_toy_corpus(config, dir.path);
  auto counts = class_counts(m);
  CHECK(counts[ClassLabel::bona_fide] == 4);
  CHECK(counts[ClassLabel::synthetic] == 2);
  CHECK(counts[ClassLabel::printout] == 0);
  CHECK(m.records.size() == 6);
}

TEST_CASE("negative counts are rejected") {
  TempDir dir("toyn");
  ToyConfig config = ToyConfig::uniform(1, 32, 1);
  config.per_class_count[ClassLabel::diseased] = -1;
  CHECK_THROWS_AS(generate_toy_corpus(config, dir.path), ValidationError);
}

TEST_CASE("held-out nearest-centroid accuracy is at least 99 percent") {
  // train centroids on one corpus, classify a held-out corpus
  const int train_n = 12, test_n = 8, size = 64;
  std::map<ClassLabel, std::vector<double>> centroids;
  for (ClassLabel label : kAllClasses) {
    std::vector<double> mean(static_cast<std::size_t>(size) * size, 0.0);
    for (int i = 0; i < train_n; ++i) {
      const Image img =
          render_sample(label, mix_seed(100, static_cast<std::uint64_t>(label), i), size, size);
      for (std::size_t p = 0; p < mean.size(); ++p) mean[p] += img.pixels[p];
    }
    for (auto& v : mean) v /= train_n;
    centroids[label] = std::move(mean);
  }

  int correct = 0, total = 0;
  for (ClassLabel label : kAllClasses) {
    for (int i = 0; i < test_n; ++i) {
      const Image img =
          render_sample(label, mix_seed(999, static_cast<std::uint64_t>(label), i), size, size);
      double best = 1e300;
      ClassLabel best_label = label;
      for (const auto& [candidate, mean] : centroids) {
        double d = 0.0;
        for (std::size_t p = 0; p < mean.size(); ++p) {
          const double diff = img.pixels[p] - mean[p];
          d += diff * diff;
        }
        if (d < best) {
          best = d;
          best_label = candidate;
        }
      }
      if (best_label == label) ++correct;
      ++total;
    }
  }
  CHECK(static_cast<double>(correct) / total >= 0.99);
}
