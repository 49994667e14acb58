#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "padbench/splits.hpp"
#include "padbench/types.hpp"
#include "test_util.hpp"

using namespace padbench;

namespace {

Manifest synthetic_manifest(int per_class, const std::string& dataset = "toy") {
  Manifest m;
  for (ClassLabel label : kAllClasses) {
    for (int i = 0; i < per_class; ++i) {
      SampleRecord r;
      r.sample_id = dataset + "_" + std::string(to_string(label)) + "_" + std::to_string(i);
      r.path = r.sample_id + ".pgm";
      r.class_label = label;
      r.source_dataset = dataset;
      m.records.push_back(r);
    }
  }
  return m;
}

Manifest bona_fide_only(int n, const std::string& dataset) {
  Manifest m;
  for (int i = 0; i < n; ++i) {
    SampleRecord r;
    r.sample_id = dataset + "_live_" + std::to_string(i);
    r.path = r.sample_id + ".pgm";
    r.class_label = ClassLabel::bona_fide;
    r.source_dataset = dataset;
    m.records.push_back(r);
  }
  return m;
}

std::map<ClassLabel, std::size_t> count_in(const std::set<std::string>& ids,
                                           const Manifest& manifest) {
  std::map<ClassLabel, std::size_t> counts;
  for (const auto& r : manifest.records) {
    if (ids.count(r.sample_id)) ++counts[r.class_label];
  }
  return counts;
}

}  // namespace

TEST_CASE("linked exclusion table") {
  CHECK(linked_exclusion(ClassLabel::textured_contact) ==
        std::set<ClassLabel>{ClassLabel::textured_contact,
                             ClassLabel::textured_contact_printed});
  CHECK(linked_exclusion(ClassLabel::printout) ==
        std::set<ClassLabel>{ClassLabel::printout, ClassLabel::textured_contact_printed});
  CHECK(linked_exclusion(ClassLabel::textured_contact_printed) ==
        std::set<ClassLabel>{ClassLabel::textured_contact_printed,
                             ClassLabel::textured_contact, ClassLabel::printout});
  CHECK(linked_exclusion(ClassLabel::post_mortem) ==
        std::set<ClassLabel>{ClassLabel::post_mortem});
  CHECK(linked_exclusion(ClassLabel::artificial) ==
        std::set<ClassLabel>{ClassLabel::artificial});
  CHECK(linked_exclusion(ClassLabel::diseased) ==
        std::set<ClassLabel>{ClassLabel::diseased});
  CHECK(linked_exclusion(ClassLabel::synthetic) ==
        std::set<ClassLabel>{ClassLabel::synthetic});
  CHECK_THROWS_AS(linked_exclusion(ClassLabel::bona_fide), ValidationError);
}

TEST_CASE("every linked exclusion set contains the left-out class") {
  for (ClassLabel label : kAttackClasses) {
    CHECK(linked_exclusion(label).count(label) == 1);
  }
}

TEST_CASE("closed-set rotation on 5-per-class corpus") {
  const Manifest m = synthetic_manifest(5);
  const auto plans = closed_set_rotation(m, 5, 11);
  REQUIRE(plans.size() == 5);

  std::multiset<std::string> test_union;
  for (const auto& plan : plans) {
    CHECK(plan.train_ids.size() == 24);
    CHECK(plan.val_ids.size() == 8);
    CHECK(plan.test_ids.size() == 8);
    CHECK(plan.left_out_classes.empty());
    // one per class in val and test
    for (const auto& [label, count] : count_in(plan.test_ids, m)) CHECK(count == 1);
    for (const auto& [label, count] : count_in(plan.val_ids, m)) CHECK(count == 1);
    CHECK(validate_split(plan, m).ok());
    test_union.insert(plan.test_ids.begin(), plan.test_ids.end());
  }
  // rotation covers the whole manifest exactly once as test
  CHECK(test_union.size() == m.records.size());
  for (const auto& r : m.records) CHECK(test_union.count(r.sample_id) == 1);
}

TEST_CASE("rotation is deterministic in the seed") {
  const Manifest m = synthetic_manifest(7);
  const auto a = closed_set_rotation(m, 5, 3);
  const auto b = closed_set_rotation(m, 5, 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].train_ids == b[i].train_ids);
    CHECK(a[i].val_ids == b[i].val_ids);
    CHECK(a[i].test_ids == b[i].test_ids);
  }
  const auto c = closed_set_rotation(m, 5, 4);
  bool any_differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    any_differs |= a[i].train_ids != c[i].train_ids;
  }
  CHECK(any_differs);
}

TEST_CASE("rotation per-class split sizes differ by at most one") {
  const Manifest m = synthetic_manifest(13);
  const auto plans = closed_set_rotation(m, 5, 5);
  // reconstruct the underlying splits from fold test sets
  for (ClassLabel label : kAllClasses) {
    std::vector<std::size_t> split_counts;
    for (const auto& plan : plans) {
      split_counts.push_back(count_in(plan.test_ids, m)[label]);
    }
    const auto [lo, hi] = std::minmax_element(split_counts.begin(), split_counts.end());
    CHECK(*hi - *lo <= 1);
  }
}

TEST_CASE("rotation rejects classes smaller than k") {
  Manifest m = synthetic_manifest(5);
  m.records.push_back({"lone_diseased_extra", "x.pgm", ClassLabel::diseased, "other"});
  Manifest small = synthetic_manifest(4);
  try {
    closed_set_rotation(small, 5, 1);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("bona_fide") != std::string::npos);
  }
}

TEST_CASE("leave-one-pai-out composition") {
  const Manifest m = synthetic_manifest(5);
  const Manifest external = bona_fide_only(10, "ext");
  const SplitPlan plan = leave_one_pai_out(m, ClassLabel::synthetic, external, 21);
  CHECK(plan.test_ids.size() == 15);  // 5 synthetic + 10 external bona fide
  CHECK(plan.train_ids.size() == 28);
  CHECK(plan.val_ids.size() == 7);
  CHECK(plan.left_out_classes == std::set<ClassLabel>{ClassLabel::synthetic});
  CHECK(validate_split(plan, m).ok());
}

TEST_CASE("leave-one-pai-out drags linked categories into test") {
  const Manifest m = synthetic_manifest(5);
  const Manifest external = bona_fide_only(10, "ext");
  const SplitPlan plan = leave_one_pai_out(m, ClassLabel::textured_contact, external, 21);
  // 5 textured_contact + 5 textured_contact_printed + 10 external
  CHECK(plan.test_ids.size() == 20);
  const auto counts = count_in(plan.test_ids, m);
  CHECK(counts.at(ClassLabel::textured_contact) == 5);
  CHECK(counts.at(ClassLabel::textured_contact_printed) == 5);
  // nothing linked leaks into train or val
  for (const auto& ids : {plan.train_ids, plan.val_ids}) {
    const auto c = count_in(ids, m);
    CHECK(c.count(ClassLabel::textured_contact) == 0);
    CHECK(c.count(ClassLabel::textured_contact_printed) == 0);
  }
}

TEST_CASE("leave-one-pai-out rejects attack samples in the external set") {
  const Manifest m = synthetic_manifest(5);
  Manifest external = bona_fide_only(4, "ext");
  external.records.push_back({"ext_bad", "b.pgm", ClassLabel::printout, "ext"});
  CHECK_THROWS_AS(leave_one_pai_out(m, ClassLabel::synthetic, external, 1),
                  ValidationError);
}

TEST_CASE("leave-one-pai-out rejects overlapping external sets") {
  const Manifest m = synthetic_manifest(5);
  Manifest external = bona_fide_only(4, "ext");
  external.records.push_back(m.records.front());  // same id and path
  CHECK_THROWS_AS(leave_one_pai_out(m, ClassLabel::synthetic, external, 1),
                  ValidationError);
}

TEST_CASE("livdet protocol splits 80/20 and keeps the held-out set as test") {
  const Manifest m = synthetic_manifest(5);  // 40 records
  const Manifest heldout = bona_fide_only(16, "heldout");
  const SplitPlan plan = livdet_protocol(m, heldout, 31);
  CHECK(plan.train_ids.size() == 32);
  CHECK(plan.val_ids.size() == 8);
  CHECK(plan.test_ids.size() == 16);
  CHECK(plan.left_out_classes.empty());
  // stratification: each class splits 4/1
  for (const auto& [label, count] : count_in(plan.train_ids, m)) CHECK(count == 4);
  for (const auto& [label, count] : count_in(plan.val_ids, m)) CHECK(count == 1);
  CHECK(validate_split(plan, m).ok());
}

TEST_CASE("validate_split flags overlaps and exclusion leaks") {
  const Manifest m = synthetic_manifest(5);
  SplitPlan plan;
  plan.name = "bad";
  plan.train_ids = {m.records[0].sample_id};
  plan.test_ids = {m.records[0].sample_id};
  const auto v = validate_split(plan, m);
  REQUIRE(v.violations.size() == 1);
  CHECK(v.violations[0].message.find(m.records[0].sample_id) != std::string::npos);

  SplitPlan leak;
  leak.name = "leak";
  leak.left_out_classes = {ClassLabel::synthetic};
  for (const auto& r : m.records) {
    if (r.class_label == ClassLabel::synthetic) {
      leak.val_ids.insert(r.sample_id);
    } else {
      leak.train_ids.insert(r.sample_id);
    }
  }
  const auto v2 = validate_split(leak, m);
  REQUIRE_FALSE(v2.ok());
  bool mentions_class = false;
  for (const auto& violation : v2.violations) {
    mentions_class |= violation.message.find("synthetic") != std::string::npos;
  }
  CHECK(mentions_class);
}

TEST_CASE("split plan json round-trip") {
  const Manifest m = synthetic_manifest(5);
  const SplitPlan plan = leave_one_pai_out(m, ClassLabel::printout,
                                           bona_fide_only(3, "ext"), 77);
  const SplitPlan back = split_plan_from_json(split_plan_to_json(plan));
  CHECK(back.name == plan.name);
  CHECK(back.seed == plan.seed);
  CHECK(back.train_ids == plan.train_ids);
  CHECK(back.val_ids == plan.val_ids);
  CHECK(back.test_ids == plan.test_ids);
  CHECK(back.left_out_classes == plan.left_out_classes);
}
