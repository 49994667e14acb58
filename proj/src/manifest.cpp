#include "padbench/manifest.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace padbench {
namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

const std::vector<std::string> kRequiredColumns = {"sample_id", "path", "class_label",
                                                   "source_dataset"};
const std::vector<std::string> kOptionalColumns = {"width", "height", "channels",
                                                   "pixel_hash"};

int parse_int_field(const std::string& value, const std::string& column, std::size_t row) {
  try {
    std::size_t pos = 0;
    const int parsed = std::stoi(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing chars");
    return parsed;
  } catch (const std::exception&) {
    throw ParseError("row " + std::to_string(row) + ": bad integer in column '" +
                     column + "': " + value);
  }
}

// Fills pixel hashes for every record missing one. Independent images are
// hashed on worker threads; results land in per-index slots so the outcome
// does not depend on scheduling.
void compute_pixel_hashes(std::vector<SampleRecord>& records, const ImageStore& store) {
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].pixel_hash.empty()) pending.push_back(i);
  }
  if (pending.empty()) return;

  struct Slot {
    std::string hash;
    int width = 0, height = 0, channels = 0;
    std::string error;
  };
  std::vector<Slot> slots(pending.size());

  const unsigned hw = std::thread::hardware_concurrency();
  const std::size_t n_threads = std::max<std::size_t>(1, std::min<std::size_t>(hw ? hw : 1, pending.size()));
  std::vector<std::thread> workers;
  std::atomic<std::size_t> cursor{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t k = cursor.fetch_add(1);
      if (k >= pending.size()) return;
      const SampleRecord& record = records[pending[k]];
      try {
        const Image image = store.load(record);
        slots[k].hash = pixel_hash(image);
        slots[k].width = image.width;
        slots[k].height = image.height;
        slots[k].channels = image.channels;
      } catch (const std::exception& e) {
        slots[k].error = e.what();
      }
    }
  };
  for (std::size_t t = 0; t < n_threads; ++t) workers.emplace_back(work);
  for (auto& w : workers) w.join();

  for (std::size_t k = 0; k < pending.size(); ++k) {
    SampleRecord& record = records[pending[k]];
    if (!slots[k].error.empty()) {
      throw IoError("cannot decode sample '" + record.sample_id + "': " + slots[k].error);
    }
    record.pixel_hash = slots[k].hash;
    record.width = slots[k].width;
    record.height = slots[k].height;
    record.channels = slots[k].channels;
  }
}

}  // namespace

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw ParseError("manifest has no header row: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split_csv_line(line);
  std::map<std::string, std::size_t> column_index;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string& name = header[i];
    const bool known =
        std::find(kRequiredColumns.begin(), kRequiredColumns.end(), name) != kRequiredColumns.end() ||
        std::find(kOptionalColumns.begin(), kOptionalColumns.end(), name) != kOptionalColumns.end();
    if (!known) throw ParseError("unknown manifest column: " + name);
    if (column_index.count(name)) throw ParseError("duplicate manifest column: " + name);
    column_index[name] = i;
  }
  for (const auto& required : kRequiredColumns) {
    if (!column_index.count(required)) {
      throw ParseError("manifest missing required column: " + required);
    }
  }

  Manifest manifest;
  std::unordered_set<std::string> seen_ids;
  std::size_t row = 1;  // header consumed
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw ParseError("row " + std::to_string(row) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    SampleRecord record;
    record.sample_id = fields[column_index["sample_id"]];
    record.path = fields[column_index["path"]];
    record.source_dataset = fields[column_index["source_dataset"]];
    const std::string& label = fields[column_index["class_label"]];
    if (auto parsed = try_class_label_from_string(label)) {
      record.class_label = *parsed;
    } else {
      throw ParseError("row " + std::to_string(row) + ": unknown class label '" + label + "'");
    }
    if (record.sample_id.empty()) {
      throw ParseError("row " + std::to_string(row) + ": empty sample_id");
    }
    auto optional_int = [&](const char* name, int& out) {
      auto it = column_index.find(name);
      if (it == column_index.end()) return;
      const std::string& value = fields[it->second];
      if (!value.empty()) out = parse_int_field(value, name, row);
    };
    optional_int("width", record.width);
    optional_int("height", record.height);
    optional_int("channels", record.channels);
    if (auto it = column_index.find("pixel_hash"); it != column_index.end()) {
      record.pixel_hash = fields[it->second];
    }
    if (!seen_ids.insert(record.sample_id).second) {
      throw ValidationError("duplicate sample_id '" + record.sample_id + "' at row " +
                            std::to_string(row));
    }
    manifest.records.push_back(std::move(record));
  }
  return manifest;
}

void save_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open manifest for writing: " + path.string());
  const bool with_hash = std::any_of(manifest.records.begin(), manifest.records.end(),
                                     [](const SampleRecord& r) { return !r.pixel_hash.empty(); });
  out << "sample_id,path,class_label,source_dataset";
  if (with_hash) out << ",width,height,channels,pixel_hash";
  out << "\n";
  for (const auto& record : manifest.records) {
    out << record.sample_id << ',' << record.path << ',' << to_string(record.class_label)
        << ',' << record.source_dataset;
    if (with_hash) {
      out << ',' << record.width << ',' << record.height << ',' << record.channels << ','
          << record.pixel_hash;
    }
    out << "\n";
  }
  if (!out) throw IoError("manifest write failed: " + path.string());
}

std::pair<Manifest, DedupReport> deduplicate(const Manifest& manifest,
                                             const ImageStore& store) {
  Manifest result;
  result.curation_log = manifest.curation_log;
  result.records = manifest.records;
  compute_pixel_hashes(result.records, store);

  // group by hash, keep the lowest (source_dataset, sample_id) member
  std::unordered_map<std::string, std::vector<std::size_t>> groups;
  std::vector<std::string> group_order;
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    auto [it, inserted] = groups.try_emplace(result.records[i].pixel_hash);
    if (inserted) group_order.push_back(result.records[i].pixel_hash);
    it->second.push_back(i);
  }

  auto record_key = [&](std::size_t i) {
    const SampleRecord& r = result.records[i];
    return std::make_pair(r.source_dataset, r.sample_id);
  };

  DedupReport report;
  report.input_count = result.records.size();
  std::vector<bool> keep(result.records.size(), true);
  for (const std::string& hash : group_order) {
    const auto& members = groups[hash];
    if (members.size() < 2) continue;
    std::size_t kept = members[0];
    for (std::size_t idx : members) {
      if (record_key(idx) < record_key(kept)) kept = idx;
    }
    std::vector<std::size_t> removed;
    for (std::size_t idx : members) {
      if (idx != kept) {
        keep[idx] = false;
        removed.push_back(idx);
      }
    }
    std::sort(removed.begin(), removed.end(),
              [&](std::size_t a, std::size_t b) { return record_key(a) < record_key(b); });
    std::vector<std::string> removed_ids;
    removed_ids.reserve(removed.size());
    for (std::size_t idx : removed) removed_ids.push_back(result.records[idx].sample_id);
    report.duplicate_groups.emplace_back(result.records[kept].sample_id, std::move(removed_ids));
    report.removed_count += members.size() - 1;
  }
  report.kept_count = report.input_count - report.removed_count;

  std::vector<SampleRecord> kept_records;
  kept_records.reserve(report.kept_count);
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    if (keep[i]) kept_records.push_back(std::move(result.records[i]));
  }
  result.records = std::move(kept_records);
  result.curation_log.push_back({"deduplicate", report.input_count, report.removed_count,
                                 report.kept_count});
  return {std::move(result), std::move(report)};
}

Manifest filter_iso_compliant(const Manifest& manifest, const ImageStore& store,
                              const IsoFilterConfig& config) {
  Manifest result;
  result.curation_log = manifest.curation_log;
  std::vector<SampleRecord> records = manifest.records;
  compute_pixel_hashes(records, store);

  const std::size_t input_count = records.size();
  for (auto& record : records) {
    const bool compliant = record.channels == config.required_channels &&
                           record.width == config.required_width &&
                           record.height == config.required_height;
    if (compliant) result.records.push_back(std::move(record));
  }
  result.curation_log.push_back({"filter_iso_compliant", input_count,
                                 input_count - result.records.size(),
                                 result.records.size()});
  return result;
}

std::string dedup_report_to_json(const DedupReport& report) {
  json groups = json::array();
  for (const auto& [kept, removed] : report.duplicate_groups) {
    groups.push_back({{"kept", kept}, {"removed", removed}});
  }
  const json doc = {{"input_count", report.input_count},
                    {"removed_count", report.removed_count},
                    {"kept_count", report.kept_count},
                    {"duplicate_groups", groups}};
  return doc.dump(2);
}

DedupReport dedup_report_from_json(const std::string& text) {
  const json doc = json::parse(text);
  DedupReport report;
  report.input_count = doc.at("input_count").get<std::size_t>();
  report.removed_count = doc.at("removed_count").get<std::size_t>();
  report.kept_count = doc.at("kept_count").get<std::size_t>();
  for (const auto& group : doc.at("duplicate_groups")) {
    report.duplicate_groups.emplace_back(group.at("kept").get<std::string>(),
                                         group.at("removed").get<std::vector<std::string>>());
  }
  return report;
}

}  // namespace padbench
