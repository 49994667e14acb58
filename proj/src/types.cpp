#include "padbench/types.hpp"

namespace padbench {

std::string_view to_string(ClassLabel label) {
  switch (label) {
    case ClassLabel::bona_fide: return "bona_fide";
    case ClassLabel::artificial: return "artificial";
    case ClassLabel::textured_contact: return "textured_contact";
    case ClassLabel::textured_contact_printed: return "textured_contact_printed";
    case ClassLabel::diseased: return "diseased";
    case ClassLabel::post_mortem: return "post_mortem";
    case ClassLabel::printout: return "printout";
    case ClassLabel::synthetic: return "synthetic";
  }
  throw ValidationError("invalid class label value");
}

std::optional<ClassLabel> try_class_label_from_string(std::string_view name) {
  for (ClassLabel label : kAllClasses) {
    if (to_string(label) == name) return label;
  }
  return std::nullopt;
}

ClassLabel class_label_from_string(std::string_view name) {
  if (auto label = try_class_label_from_string(name)) return *label;
  throw ParseError("unknown class label: " + std::string(name));
}

std::map<ClassLabel, std::size_t> class_counts(const Manifest& manifest) {
  std::map<ClassLabel, std::size_t> counts;
  for (ClassLabel label : kAllClasses) counts[label] = 0;
  for (const auto& record : manifest.records) ++counts[record.class_label];
  return counts;
}

}  // namespace padbench
