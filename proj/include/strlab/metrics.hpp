#pragma once

#include <string>
#include <vector>

namespace strlab {
namespace metrics {

struct Prediction {
  std::string predicted;  // P, possibly empty
  std::string target;     // T, non-empty lowercase a-z
};

/// Exact-match: 1 iff P == T.
double word_accuracy(const Prediction& p);

/// Position-insensitive character overlap: C = multiset intersection of the
/// characters of P and T (capped by target multiplicities, so C <= N);
/// returns C/N. Throws on empty targets.
double char_accuracy(const Prediction& p);

/// 1 iff |P| == |T|.
double length_accuracy(const Prediction& p);

/// Minimum number of single-character edits (insert/delete/substitute).
int levenshtein(const std::string& a, const std::string& b);

/// max(0, 1 - levenshtein(P,T)/N); the raw distance can exceed N, the
/// accuracy is clamped at zero (the raw distance is reported separately).
double edit_distance_accuracy(const Prediction& p);

struct SampleMetrics {
  std::string target;
  std::string predicted;
  double a_word = 0.0;
  double a_char = 0.0;
  double a_length = 0.0;
  double a_edit = 0.0;
  int raw_edit_distance = 0;
};

struct MetricsReport {
  size_t n_samples = 0;
  double mean_word = 0.0;
  double mean_char = 0.0;
  double mean_length = 0.0;
  double mean_edit = 0.0;
  std::vector<SampleMetrics> samples;
};

SampleMetrics score(const Prediction& p);

/// Arithmetic means of all four metrics; order-independent.
MetricsReport aggregate(const std::vector<Prediction>& preds);

/// Per-sample records as CSV: target, predicted, a_word, a_char, a_length,
/// a_edit, raw_edit_distance.
void export_csv(const MetricsReport& report, const std::string& path);

}  // namespace metrics
}  // namespace strlab
