#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace padbench {

// Binary ground truth for metric computation. Any attack class maps to
// `attack`; the decision rule is `attack iff score >= threshold`.
enum class BinaryLabel : bool { bona_fide = false, attack = true };

struct Confusion {
  std::size_t tp_attack = 0;  // attacks classified attack
  std::size_t fn_attack = 0;  // attacks classified bona fide
  std::size_t tn_bona = 0;    // bona fide classified bona fide
  std::size_t fp_bona = 0;    // bona fide classified attack

  std::size_t n_attack() const { return tp_attack + fn_attack; }
  std::size_t n_bona() const { return tn_bona + fp_bona; }
  std::size_t total() const { return n_attack() + n_bona(); }
};

// Rates are stored as fractions in [0, 1]; rendering converts to percent.
// apcer/bpcer are absent when the corresponding class is empty.
struct MetricsReport {
  double ccr = 0.0;
  std::optional<double> apcer;
  std::optional<double> bpcer;
  std::optional<double> acer;
  std::size_t n_attack = 0;
  std::size_t n_bona = 0;
  double threshold = 0.5;
};

struct AggregateStat {
  double mean = 0.0;
  double stddev = 0.0;  // sample std, n-1 denominator; 0 for a single fold
};

struct AggregateReport {
  AggregateStat ccr;
  AggregateStat apcer;
  AggregateStat bpcer;
  AggregateStat acer;
  std::size_t fold_count = 0;
};

Confusion confusion(const std::vector<double>& scores,
                    const std::vector<BinaryLabel>& labels, double threshold);

MetricsReport report(const Confusion& c, double threshold);

// Smallest threshold among observed scores (plus a just-above-1 sentinel)
// whose bona-fide false-detection fraction is <= target_fdr.
double threshold_at_fdr(const std::vector<double>& val_scores,
                        const std::vector<BinaryLabel>& val_labels, double target_fdr);

AggregateReport aggregate_folds(const std::vector<MetricsReport>& reports);

// Decimal-safe half-up rounding of a percentage to 2 dp (table rendering).
double round_percent_2dp(double percent);

std::string metrics_report_to_json(const MetricsReport& report);
MetricsReport metrics_report_from_json(const std::string& text);
std::string format_percent(double fraction);  // "12.08" style
std::string format_report_line(const MetricsReport& report);

}  // namespace padbench
