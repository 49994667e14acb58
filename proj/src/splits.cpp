#include "padbench/splits.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "padbench/rng.hpp"

namespace padbench {
namespace {

using nlohmann::json;

// per-class sample ids in manifest order
std::map<ClassLabel, std::vector<std::string>> ids_by_class(const Manifest& manifest) {
  std::map<ClassLabel, std::vector<std::string>> by_class;
  for (const auto& record : manifest.records) {
    by_class[record.class_label].push_back(record.sample_id);
  }
  return by_class;
}

// Stratified 80/20: per class, shuffle then take floor(0.8 n) for train.
void stratified_80_20(const Manifest& manifest, std::uint64_t seed,
                      const std::set<ClassLabel>& excluded, std::set<std::string>& train,
                      std::set<std::string>& val) {
  auto by_class = ids_by_class(manifest);
  for (auto& [label, ids] : by_class) {
    if (excluded.count(label)) continue;
    Rng rng(mix_seed(seed, 0x383230ULL, static_cast<std::uint64_t>(label)));
    rng.shuffle(ids);
    const std::size_t n_train = ids.size() * 4 / 5;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      (i < n_train ? train : val).insert(ids[i]);
    }
  }
}

void check_disjoint_sources(const Manifest& manifest, const Manifest& external,
                            const char* what) {
  std::unordered_set<std::string> ids, paths, hashes;
  for (const auto& r : manifest.records) {
    ids.insert(r.sample_id);
    paths.insert(r.path);
    if (!r.pixel_hash.empty()) hashes.insert(r.pixel_hash);
  }
  for (const auto& r : external.records) {
    if (ids.count(r.sample_id)) {
      throw ValidationError(std::string(what) + " shares sample_id with manifest: " +
                            r.sample_id);
    }
    if (paths.count(r.path)) {
      throw ValidationError(std::string(what) + " shares path with manifest: " + r.path);
    }
    if (!r.pixel_hash.empty() && hashes.count(r.pixel_hash)) {
      throw ValidationError(std::string(what) + " shares pixel hash with manifest: " +
                            r.sample_id);
    }
  }
}

json class_set_to_json(const std::set<ClassLabel>& classes) {
  json arr = json::array();
  for (ClassLabel label : classes) arr.push_back(std::string(to_string(label)));
  return arr;
}

}  // namespace

std::set<ClassLabel> linked_exclusion(ClassLabel left_out) {
  switch (left_out) {
    case ClassLabel::bona_fide:
      throw ValidationError("cannot leave out the bona fide class");
    case ClassLabel::textured_contact:
      return {ClassLabel::textured_contact, ClassLabel::textured_contact_printed};
    case ClassLabel::printout:
      return {ClassLabel::printout, ClassLabel::textured_contact_printed};
    case ClassLabel::textured_contact_printed:
      return {ClassLabel::textured_contact_printed, ClassLabel::textured_contact,
              ClassLabel::printout};
    default:
      return {left_out};
  }
}

std::vector<SplitPlan> closed_set_rotation(const Manifest& manifest, int k,
                                           std::uint64_t seed) {
  if (k < 5) throw ValidationError("rotation needs k >= 5 (3 train + 1 val + 1 test)");

  auto by_class = ids_by_class(manifest);
  for (const auto& [label, ids] : by_class) {
    if (ids.size() < static_cast<std::size_t>(k)) {
      throw ValidationError("class " + std::string(to_string(label)) + " has " +
                            std::to_string(ids.size()) + " samples, fewer than k=" +
                            std::to_string(k));
    }
  }

  // deal each shuffled class round-robin; remainders land in the lowest splits
  std::vector<std::vector<std::string>> splits(k);
  for (auto& [label, ids] : by_class) {
    Rng rng(mix_seed(seed, 0x726f74ULL, static_cast<std::uint64_t>(label)));
    rng.shuffle(ids);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      splits[i % k].push_back(ids[i]);
    }
  }

  std::vector<SplitPlan> plans;
  for (int fold = 0; fold < k; ++fold) {
    SplitPlan plan;
    plan.name = "closed_fold_" + std::to_string(fold);
    plan.seed = seed;
    for (int j = 0; j < 3; ++j) {
      for (const auto& id : splits[(fold + j) % k]) plan.train_ids.insert(id);
    }
    for (const auto& id : splits[(fold + 3) % k]) plan.val_ids.insert(id);
    for (const auto& id : splits[(fold + 4) % k]) plan.test_ids.insert(id);
    plans.push_back(std::move(plan));
  }
  return plans;
}

SplitPlan leave_one_pai_out(const Manifest& manifest, ClassLabel left_out,
                            const Manifest& external_bona_fide, std::uint64_t seed) {
  if (!is_attack(left_out)) throw ValidationError("cannot leave out the bona fide class");
  for (const auto& r : external_bona_fide.records) {
    if (r.class_label != ClassLabel::bona_fide) {
      throw ValidationError("external bona fide manifest contains attack sample: " +
                            r.sample_id);
    }
  }
  check_disjoint_sources(manifest, external_bona_fide, "external bona fide set");

  const std::set<ClassLabel> excluded = linked_exclusion(left_out);

  SplitPlan plan;
  plan.name = "loo_" + std::string(to_string(left_out));
  plan.seed = seed;
  plan.left_out_classes = excluded;
  for (const auto& r : manifest.records) {
    if (excluded.count(r.class_label)) plan.test_ids.insert(r.sample_id);
  }
  for (const auto& r : external_bona_fide.records) plan.test_ids.insert(r.sample_id);
  stratified_80_20(manifest, seed, excluded, plan.train_ids, plan.val_ids);
  return plan;
}

SplitPlan livdet_protocol(const Manifest& manifest, const Manifest& heldout_test,
                          std::uint64_t seed) {
  check_disjoint_sources(manifest, heldout_test, "held-out test set");

  SplitPlan plan;
  plan.name = "livdet";
  plan.seed = seed;
  for (const auto& r : heldout_test.records) plan.test_ids.insert(r.sample_id);
  stratified_80_20(manifest, seed, {}, plan.train_ids, plan.val_ids);
  return plan;
}

SplitValidation validate_split(const SplitPlan& plan, const Manifest& manifest) {
  SplitValidation result;
  auto violation = [&](std::string message) {
    result.violations.push_back({std::move(message)});
  };

  std::unordered_map<std::string, ClassLabel> label_of;
  for (const auto& r : manifest.records) label_of[r.sample_id] = r.class_label;

  auto check_pair = [&](const std::set<std::string>& a, const char* an,
                        const std::set<std::string>& b, const char* bn) {
    for (const auto& id : a) {
      if (b.count(id)) {
        violation("sample '" + id + "' appears in both " + an + " and " + bn);
      }
    }
  };
  check_pair(plan.train_ids, "train", plan.val_ids, "val");
  check_pair(plan.train_ids, "train", plan.test_ids, "test");
  check_pair(plan.val_ids, "val", plan.test_ids, "test");

  for (const auto& [role, ids] :
       {std::pair{"train", &plan.train_ids}, std::pair{"val", &plan.val_ids}}) {
    for (const auto& id : *ids) {
      auto it = label_of.find(id);
      if (it == label_of.end()) continue;  // external sets are not in this manifest
      if (plan.left_out_classes.count(it->second)) {
        violation("left-out class " + std::string(to_string(it->second)) +
                  " present in " + role + " (sample '" + id + "')");
        break;  // one violation per class/role pair is enough to flag it
      }
    }
  }

  // Stratification: per class, the train share of train+val must be within
  // one sample of the overall train share.
  std::map<ClassLabel, std::size_t> train_c, val_c;
  for (const auto& id : plan.train_ids) {
    if (auto it = label_of.find(id); it != label_of.end()) ++train_c[it->second];
  }
  for (const auto& id : plan.val_ids) {
    if (auto it = label_of.find(id); it != label_of.end()) ++val_c[it->second];
  }
  std::size_t train_total = 0, val_total = 0;
  for (const auto& [c, n] : train_c) train_total += n;
  for (const auto& [c, n] : val_c) val_total += n;
  if (train_total + val_total > 0) {
    const double train_share =
        static_cast<double>(train_total) / static_cast<double>(train_total + val_total);
    for (ClassLabel label : kAllClasses) {
      const std::size_t t = train_c.count(label) ? train_c[label] : 0;
      const std::size_t v = val_c.count(label) ? val_c[label] : 0;
      if (t + v == 0) continue;
      const double expected = train_share * static_cast<double>(t + v);
      if (std::abs(static_cast<double>(t) - expected) > 1.0 + 1e-9) {
        violation("class " + std::string(to_string(label)) +
                  " train count deviates from stratified share by more than 1");
      }
    }
  }
  return result;
}

std::string split_plan_to_json(const SplitPlan& plan) {
  const json doc = {
      {"name", plan.name},
      {"seed", plan.seed},
      {"train_ids", std::vector<std::string>(plan.train_ids.begin(), plan.train_ids.end())},
      {"val_ids", std::vector<std::string>(plan.val_ids.begin(), plan.val_ids.end())},
      {"test_ids", std::vector<std::string>(plan.test_ids.begin(), plan.test_ids.end())},
      {"left_out_classes", class_set_to_json(plan.left_out_classes)},
  };
  return doc.dump(2);
}

SplitPlan split_plan_from_json(const std::string& text) {
  const json doc = json::parse(text);
  SplitPlan plan;
  plan.name = doc.at("name").get<std::string>();
  plan.seed = doc.at("seed").get<std::uint64_t>();
  for (const auto& id : doc.at("train_ids")) plan.train_ids.insert(id.get<std::string>());
  for (const auto& id : doc.at("val_ids")) plan.val_ids.insert(id.get<std::string>());
  for (const auto& id : doc.at("test_ids")) plan.test_ids.insert(id.get<std::string>());
  for (const auto& name : doc.at("left_out_classes")) {
    plan.left_out_classes.insert(class_label_from_string(name.get<std::string>()));
  }
  return plan;
}

void save_split_plan(const std::filesystem::path& path, const SplitPlan& plan) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write split plan: " + path.string());
  out << split_plan_to_json(plan) << "\n";
}

SplitPlan load_split_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read split plan: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return split_plan_from_json(text);
}

}  // namespace padbench
