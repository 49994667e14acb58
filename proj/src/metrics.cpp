#include "padbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "padbench/types.hpp"

namespace padbench {

using nlohmann::json;

Confusion confusion(const std::vector<double>& scores,
                    const std::vector<BinaryLabel>& labels, double threshold) {
  if (scores.size() != labels.size()) {
    throw ValidationError("scores/labels length mismatch");
  }
  // the sentinel from threshold_at_fdr sits just above 1.0
  if (threshold < 0.0 || threshold > std::nextafter(1.0, 2.0)) {
    throw ValidationError("threshold outside [0, 1]");
  }
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool called_attack = scores[i] >= threshold;  // ties go to attack
    if (labels[i] == BinaryLabel::attack) {
      called_attack ? ++c.tp_attack : ++c.fn_attack;
    } else {
      called_attack ? ++c.fp_bona : ++c.tn_bona;
    }
  }
  return c;
}

MetricsReport report(const Confusion& c, double threshold) {
  const std::size_t n_attack = c.n_attack();
  const std::size_t n_bona = c.n_bona();
  if (n_attack + n_bona == 0) throw ValidationError("empty confusion");

  MetricsReport r;
  r.n_attack = n_attack;
  r.n_bona = n_bona;
  r.threshold = threshold;
  if (n_attack > 0) r.apcer = static_cast<double>(c.fn_attack) / n_attack;
  if (n_bona > 0) r.bpcer = static_cast<double>(c.fp_bona) / n_bona;
  // ccr via the reconstruction identity, so the identity holds exactly
  const double attack_err = r.apcer ? *r.apcer * n_attack : 0.0;
  const double bona_err = r.bpcer ? *r.bpcer * n_bona : 0.0;
  r.ccr = 1.0 - (attack_err + bona_err) / static_cast<double>(n_attack + n_bona);
  if (r.apcer && r.bpcer) r.acer = (*r.apcer + *r.bpcer) / 2.0;
  return r;
}

double threshold_at_fdr(const std::vector<double>& val_scores,
                        const std::vector<BinaryLabel>& val_labels, double target_fdr) {
  if (val_scores.size() != val_labels.size()) {
    throw ValidationError("scores/labels length mismatch");
  }
  std::vector<double> bona_scores;
  for (std::size_t i = 0; i < val_scores.size(); ++i) {
    if (val_labels[i] == BinaryLabel::bona_fide) bona_scores.push_back(val_scores[i]);
  }
  if (bona_scores.empty()) {
    throw ValidationError("threshold calibration requires bona fide samples");
  }

  std::vector<double> candidates = val_scores;
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  candidates.push_back(std::nextafter(1.0, 2.0));  // sentinel: classifies nothing as attack

  std::sort(bona_scores.begin(), bona_scores.end());
  const double n = static_cast<double>(bona_scores.size());
  for (double tau : candidates) {
    // bona fide with score >= tau are false detections
    const auto first = std::lower_bound(bona_scores.begin(), bona_scores.end(), tau);
    const double fdr = static_cast<double>(bona_scores.end() - first) / n;
    if (fdr <= target_fdr) return tau;
  }
  return candidates.back();
}

AggregateReport aggregate_folds(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) throw ValidationError("aggregate_folds needs at least one report");

  auto stat = [&](auto&& get) {
    std::vector<double> values;
    for (const auto& r : reports) {
      if (auto v = get(r)) values.push_back(*v);
    }
    AggregateStat s;
    if (values.empty()) return s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
    if (values.size() > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - s.mean) * (v - s.mean);
      s.stddev = std::sqrt(ss / (values.size() - 1));
    }
    return s;
  };

  AggregateReport agg;
  agg.fold_count = reports.size();
  agg.ccr = stat([](const MetricsReport& r) { return std::optional<double>(r.ccr); });
  agg.apcer = stat([](const MetricsReport& r) { return r.apcer; });
  agg.bpcer = stat([](const MetricsReport& r) { return r.bpcer; });
  agg.acer = stat([](const MetricsReport& r) { return r.acer; });
  return agg;
}

double round_percent_2dp(double percent) {
  // snap to 3 dp first so binary representation noise cannot flip the
  // half-up decision at the 2 dp boundary
  const double milli = std::round(percent * 1000.0);
  return std::floor(milli / 10.0 + 0.5) / 100.0;
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", round_percent_2dp(fraction * 100.0));
  return buf;
}

std::string format_report_line(const MetricsReport& r) {
  std::ostringstream out;
  out << "CCR " << format_percent(r.ccr) << "%";
  out << "  APCER " << (r.apcer ? format_percent(*r.apcer) + "%" : std::string("--"));
  out << "  BPCER " << (r.bpcer ? format_percent(*r.bpcer) + "%" : std::string("--"));
  if (r.acer) out << "  ACER " << format_percent(*r.acer) << "%";
  return out.str();
}

std::string metrics_report_to_json(const MetricsReport& r) {
  json doc = {{"ccr", r.ccr},
              {"n_attack", r.n_attack},
              {"n_bona", r.n_bona},
              {"threshold", r.threshold}};
  if (r.apcer) doc["apcer"] = *r.apcer;
  if (r.bpcer) doc["bpcer"] = *r.bpcer;
  if (r.acer) doc["acer"] = *r.acer;
  return doc.dump(2);
}

MetricsReport metrics_report_from_json(const std::string& text) {
  const json doc = json::parse(text);
  MetricsReport r;
  r.ccr = doc.at("ccr").get<double>();
  r.n_attack = doc.at("n_attack").get<std::size_t>();
  r.n_bona = doc.at("n_bona").get<std::size_t>();
  r.threshold = doc.at("threshold").get<double>();
  if (doc.contains("apcer")) r.apcer = doc["apcer"].get<double>();
  if (doc.contains("bpcer")) r.bpcer = doc["bpcer"].get<double>();
  if (doc.contains("acer")) r.acer = doc["acer"].get<double>();
  return r;
}

}  // namespace padbench
