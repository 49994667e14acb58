#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <filesystem>

#include "padbench/manifest.hpp"
#include "padbench/rng.hpp"
#include "padbench/toygen.hpp"
#include "test_util.hpp"

using namespace padbench;
using padbench::testutil::TempDir;
using padbench::testutil::write_text;

namespace {

const char* kHeader = "sample_id,path,class_label,source_dataset\n";

// deterministic distinct gray image
Image patterned_image(int w, int h, unsigned tag) {
  Image img = make_image(w, h);
  Rng rng(mix_seed(tag, 0xf00d));
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.uniform_index(256));
  return img;
}

struct Corpus {
  TempDir dir{"manifest"};
  Manifest manifest;

  void add(const std::string& id, const std::string& dataset, ClassLabel label,
           const Image& img) {
    const std::string rel = id + ".pgm";
    write_pgm(dir.path / rel, img);
    SampleRecord r;
    r.sample_id = id;
    r.path = rel;
    r.class_label = label;
    r.source_dataset = dataset;
    manifest.records.push_back(r);
  }
};

}  // namespace

TEST_CASE("empty manifest file with header only") {
  TempDir dir("load");
  write_text(dir.path / "m.csv", kHeader);
  const Manifest m = load_manifest(dir.path / "m.csv");
  CHECK(m.records.empty());
  for (const auto& [label, count] : class_counts(m)) CHECK(count == 0);
}

TEST_CASE("class outside the taxonomy is rejected") {
  TempDir dir("load");
  write_text(dir.path / "m.csv", std::string(kHeader) + "s1,a.pgm,e_ink,livdet\n");
  CHECK_THROWS_AS(load_manifest(dir.path / "m.csv"), ParseError);
}

TEST_CASE("malformed row error names the row number") {
  TempDir dir("load");
  write_text(dir.path / "m.csv",
             std::string(kHeader) + "s1,a.pgm,bona_fide,d1\ns2,b.pgm,bona_fide\n");
  try {
    load_manifest(dir.path / "m.csv");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }
}

TEST_CASE("duplicate sample ids are rejected") {
  TempDir dir("load");
  write_text(dir.path / "m.csv",
             std::string(kHeader) + "s1,a.pgm,bona_fide,d1\ns1,b.pgm,printout,d1\n");
  CHECK_THROWS_AS(load_manifest(dir.path / "m.csv"), ValidationError);
}

TEST_CASE("12-row fixture loads with expected class counts") {
  TempDir dir("load");
  std::string text = kHeader;
  // 4 bona fide, 3 printout, 2 synthetic, 2 textured_contact, 1 post_mortem
  text += "b1,b1.pgm,bona_fide,d1\n";
  text += "b2,b2.pgm,bona_fide,d1\n";
  text += "b3,b3.pgm,bona_fide,d2\n";
  text += "b4,b4.pgm,bona_fide,d2\n";
  text += "p1,p1.pgm,printout,d1\n";
  text += "p2,p2.pgm,printout,d1\n";
  text += "p3,p3.pgm,printout,d2\n";
  text += "y1,y1.pgm,synthetic,d3\n";
  text += "y2,y2.pgm,synthetic,d3\n";
  text += "t1,t1.pgm,textured_contact,d1\n";
  text += "t2,t2.pgm,textured_contact,d2\n";
  text += "m1,m1.pgm,post_mortem,d4\n";
  write_text(dir.path / "m.csv", text);
  const Manifest m = load_manifest(dir.path / "m.csv");
  REQUIRE(m.records.size() == 12);
  auto counts = class_counts(m);
  CHECK(counts[ClassLabel::bona_fide] == 4);
  CHECK(counts[ClassLabel::printout] == 3);
  CHECK(counts[ClassLabel::synthetic] == 2);
  CHECK(counts[ClassLabel::textured_contact] == 2);
  CHECK(counts[ClassLabel::post_mortem] == 1);
  CHECK(counts[ClassLabel::diseased] == 0);
  CHECK(m.records.front().sample_id == "b1");  // file order preserved
  CHECK(m.records.back().sample_id == "m1");
}

TEST_CASE("save/load round-trip") {
  Corpus corpus;
  corpus.add("a1", "d1", ClassLabel::bona_fide, patterned_image(8, 8, 1));
  corpus.add("a2", "d1", ClassLabel::printout, patterned_image(8, 8, 2));
  save_manifest(corpus.dir.path / "out.csv", corpus.manifest);
  const Manifest back = load_manifest(corpus.dir.path / "out.csv");
  REQUIRE(back.records.size() == 2);
  CHECK(back.records[0].sample_id == "a1");
  CHECK(back.records[1].class_label == ClassLabel::printout);
}

TEST_CASE("deduplicate removes planted copies and keeps lowest key") {
  Corpus corpus;
  const Image duplicated = patterned_image(8, 8, 99);
  for (int i = 0; i < 10; ++i) {
    corpus.add("u" + std::to_string(i), "d1", ClassLabel::bona_fide,
               patterned_image(8, 8, static_cast<unsigned>(i)));
  }
  // three pixel-identical copies across datasets; "a_first" sorts lowest
  corpus.add("z_copy", "d2", ClassLabel::printout, duplicated);
  corpus.add("a_first", "d1", ClassLabel::printout, duplicated);
  corpus.add("m_mid", "d1", ClassLabel::printout, duplicated);

  DirectoryImageStore store(corpus.dir.path);
  const auto [deduped, rep] = deduplicate(corpus.manifest, store);
  CHECK(rep.input_count == 13);
  CHECK(rep.removed_count == 2);
  CHECK(rep.kept_count == 11);
  REQUIRE(rep.duplicate_groups.size() == 1);
  CHECK(rep.duplicate_groups[0].first == "a_first");
  REQUIRE(rep.duplicate_groups[0].second.size() == 2);
  CHECK(rep.duplicate_groups[0].second[0] == "m_mid");
  CHECK(rep.duplicate_groups[0].second[1] == "z_copy");
  CHECK(deduped.records.size() == 11);

  // record order preserved from input
  std::vector<std::string> kept_ids;
  for (const auto& r : deduped.records) kept_ids.push_back(r.sample_id);
  std::vector<std::string> expected = {"u0", "u1", "u2", "u3", "u4", "u5",
                                       "u6", "u7", "u8", "u9", "a_first"};
  CHECK(kept_ids == expected);

  // idempotence: second pass removes nothing
  const auto [again, rep2] = deduplicate(deduped, store);
  CHECK(rep2.removed_count == 0);
  CHECK(again.records.size() == deduped.records.size());

  // curation log arithmetic
  REQUIRE(again.curation_log.size() == 2);
  for (const auto& step : again.curation_log) {
    CHECK(step.input_count - step.removed_count == step.output_count);
  }
}

TEST_CASE("deduplicate on all-distinct corpus is a no-op") {
  Corpus corpus;
  for (int i = 0; i < 6; ++i) {
    corpus.add("x" + std::to_string(i), "d1", ClassLabel::synthetic,
               patterned_image(8, 8, 100 + static_cast<unsigned>(i)));
  }
  DirectoryImageStore store(corpus.dir.path);
  const auto [deduped, rep] = deduplicate(corpus.manifest, store);
  CHECK(rep.removed_count == 0);
  CHECK(deduped.records.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(deduped.records[i].sample_id == corpus.manifest.records[i].sample_id);
  }
}

TEST_CASE("deduplicate surfaces undecodable images by sample id") {
  Corpus corpus;
  corpus.add("ok", "d1", ClassLabel::bona_fide, patterned_image(8, 8, 1));
  write_text(corpus.dir.path / "broken.pgm", "not an image");
  SampleRecord bad;
  bad.sample_id = "broken_sample";
  bad.path = "broken.pgm";
  bad.class_label = ClassLabel::printout;
  bad.source_dataset = "d1";
  corpus.manifest.records.push_back(bad);

  DirectoryImageStore store(corpus.dir.path);
  try {
    deduplicate(corpus.manifest, store);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("broken_sample") != std::string::npos);
  }
}

TEST_CASE("iso filter drops wrong channel count and wrong resolution") {
  Corpus corpus;
  corpus.add("g1", "d1", ClassLabel::bona_fide, patterned_image(64, 64, 1));
  Image rgb = make_image(64, 64, 3, 128);
  write_ppm(corpus.dir.path / "rgb.ppm", rgb);
  SampleRecord r;
  r.sample_id = "rgb1";
  r.path = "rgb.ppm";
  r.class_label = ClassLabel::printout;
  r.source_dataset = "d1";
  corpus.manifest.records.push_back(r);
  corpus.add("small", "d1", ClassLabel::synthetic, patterned_image(32, 24, 5));

  DirectoryImageStore store(corpus.dir.path);
  IsoFilterConfig config;
  config.required_width = 64;
  config.required_height = 64;
  const Manifest filtered = filter_iso_compliant(corpus.manifest, store, config);
  REQUIRE(filtered.records.size() == 1);
  CHECK(filtered.records[0].sample_id == "g1");
  CHECK(filtered.curation_log.back().removed_count == 2);
}

TEST_CASE("iso filter 20-image corpus with 4 non-compliant sizes") {
  Corpus corpus;
  for (int i = 0; i < 16; ++i) {
    corpus.add("ok" + std::to_string(i), "d1", ClassLabel::bona_fide,
               patterned_image(64, 48, static_cast<unsigned>(i)));
  }
  for (int i = 0; i < 4; ++i) {
    corpus.add("bad" + std::to_string(i), "d1", ClassLabel::bona_fide,
               patterned_image(32, 24, 100 + static_cast<unsigned>(i)));
  }
  DirectoryImageStore store(corpus.dir.path);
  IsoFilterConfig config{64, 48, 1};
  const Manifest filtered = filter_iso_compliant(corpus.manifest, store, config);
  CHECK(filtered.records.size() == 16);
}

TEST_CASE("dedup and iso filter commute") {
  Corpus corpus;
  const Image dup_ok = patterned_image(64, 48, 7);
  const Image dup_bad = patterned_image(20, 20, 8);
  for (int i = 0; i < 5; ++i) {
    corpus.add("n" + std::to_string(i), "d1", ClassLabel::bona_fide,
               patterned_image(64, 48, static_cast<unsigned>(i)));
  }
  corpus.add("dupA1", "d1", ClassLabel::printout, dup_ok);
  corpus.add("dupA2", "d2", ClassLabel::printout, dup_ok);
  corpus.add("dupB1", "d1", ClassLabel::synthetic, dup_bad);
  corpus.add("dupB2", "d2", ClassLabel::synthetic, dup_bad);
  corpus.add("odd", "d1", ClassLabel::diseased, patterned_image(10, 10, 9));

  DirectoryImageStore store(corpus.dir.path);
  IsoFilterConfig config{64, 48, 1};

  const auto dedup_first = filter_iso_compliant(deduplicate(corpus.manifest, store).first,
                                                store, config);
  const auto filter_first =
      deduplicate(filter_iso_compliant(corpus.manifest, store, config), store).first;

  REQUIRE(dedup_first.records.size() == filter_first.records.size());
  for (std::size_t i = 0; i < dedup_first.records.size(); ++i) {
    CHECK(dedup_first.records[i].sample_id == filter_first.records[i].sample_id);
  }
}

TEST_CASE("class counts sum to record count after every operation") {
  TempDir dir("toy");
  const Manifest m = generate_toy_corpus(ToyConfig::uniform(3, 32, 5), dir.path);
  auto counts = class_counts(m);
  std::size_t total = 0;
  for (const auto& [label, count] : counts) total += count;
  CHECK(total == m.records.size());

  DirectoryImageStore store(dir.path);
  const auto [deduped, rep] = deduplicate(m, store);
  counts = class_counts(deduped);
  total = 0;
  for (const auto& [label, count] : counts) total += count;
  CHECK(total == deduped.records.size());
}

TEST_CASE("dedup report json round-trip") {
  DedupReport rep;
  rep.input_count = 5;
  rep.removed_count = 2;
  rep.kept_count = 3;
  rep.duplicate_groups = {{"keep1", {"gone1", "gone2"}}};
  const DedupReport back = dedup_report_from_json(dedup_report_to_json(rep));
  CHECK(back.input_count == 5);
  CHECK(back.removed_count == 2);
  CHECK(back.kept_count == 3);
  REQUIRE(back.duplicate_groups.size() == 1);
  CHECK(back.duplicate_groups[0].first == "keep1");
  CHECK(back.duplicate_groups[0].second == std::vector<std::string>{"gone1", "gone2"});
}
