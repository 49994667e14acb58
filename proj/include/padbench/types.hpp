#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace padbench {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Closed taxonomy: seven attack instrument classes plus the live class.
enum class ClassLabel : std::uint8_t {
  bona_fide = 0,
  artificial,
  textured_contact,
  textured_contact_printed,
  diseased,
  post_mortem,
  printout,
  synthetic,
};

inline constexpr std::array<ClassLabel, 8> kAllClasses = {
    ClassLabel::bona_fide,
    ClassLabel::artificial,
    ClassLabel::textured_contact,
    ClassLabel::textured_contact_printed,
    ClassLabel::diseased,
    ClassLabel::post_mortem,
    ClassLabel::printout,
    ClassLabel::synthetic,
};

inline constexpr std::array<ClassLabel, 7> kAttackClasses = {
    ClassLabel::artificial,
    ClassLabel::textured_contact,
    ClassLabel::textured_contact_printed,
    ClassLabel::diseased,
    ClassLabel::post_mortem,
    ClassLabel::printout,
    ClassLabel::synthetic,
};

std::string_view to_string(ClassLabel label);
ClassLabel class_label_from_string(std::string_view name);
std::optional<ClassLabel> try_class_label_from_string(std::string_view name);

inline bool is_attack(ClassLabel label) { return label != ClassLabel::bona_fide; }

struct SampleRecord {
  std::string sample_id;
  std::string path;  // relative to a corpus root supplied at load time
  ClassLabel class_label = ClassLabel::bona_fide;
  std::string source_dataset;
  int width = 0;     // 0 until decoded
  int height = 0;
  int channels = 0;
  std::string pixel_hash;  // hex sha256 of decoded pixel bytes; empty until computed
};

struct CurationStep {
  std::string name;
  std::size_t input_count = 0;
  std::size_t removed_count = 0;
  std::size_t output_count = 0;
};

struct Manifest {
  std::vector<SampleRecord> records;
  std::vector<CurationStep> curation_log;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
};

struct DedupReport {
  std::size_t input_count = 0;
  std::size_t removed_count = 0;
  std::size_t kept_count = 0;
  // one entry per pixel-identical group with >= 2 members
  std::vector<std::pair<std::string, std::vector<std::string>>> duplicate_groups;
};

std::map<ClassLabel, std::size_t> class_counts(const Manifest& manifest);

}  // namespace padbench
