#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "padbench/types.hpp"

namespace padbench {

struct SplitPlan {
  std::string name;
  std::set<std::string> train_ids;
  std::set<std::string> val_ids;
  std::set<std::string> test_ids;
  std::set<ClassLabel> left_out_classes;
  std::uint64_t seed = 0;
};

struct SplitViolation {
  std::string message;
};

struct SplitValidation {
  std::vector<SplitViolation> violations;
  bool ok() const { return violations.empty(); }
};

// The linked-attack table: leaving out either parent of the combined
// "textured contact & printed" category drags the combined category with it,
// and leaving out the combined category drags both parents.
std::set<ClassLabel> linked_exclusion(ClassLabel left_out);

// k stratified splits, fold i: train = {i, i+1, i+2}, val = {i+3}, test = {i+4}
// (all mod k). Every split serves as test exactly once.
std::vector<SplitPlan> closed_set_rotation(const Manifest& manifest, int k,
                                           std::uint64_t seed);

SplitPlan leave_one_pai_out(const Manifest& manifest, ClassLabel left_out,
                            const Manifest& external_bona_fide, std::uint64_t seed);

SplitPlan livdet_protocol(const Manifest& manifest, const Manifest& heldout_test,
                          std::uint64_t seed);

SplitValidation validate_split(const SplitPlan& plan, const Manifest& manifest);

std::string split_plan_to_json(const SplitPlan& plan);
SplitPlan split_plan_from_json(const std::string& text);
void save_split_plan(const std::filesystem::path& path, const SplitPlan& plan);
SplitPlan load_split_plan(const std::filesystem::path& path);

}  // namespace padbench
