#include "strlab/metrics.hpp"

#include <algorithm>
#include <array>
#include <fstream>

#include "strlab/csv.hpp"
#include "strlab/errors.hpp"

namespace strlab {
namespace metrics {

double word_accuracy(const Prediction& p) { return p.predicted == p.target ? 1.0 : 0.0; }

double char_accuracy(const Prediction& p) {
  if (p.target.empty()) throw Error("char_accuracy: empty target");
  std::array<int, 256> want{};
  for (unsigned char c : p.target) ++want[c];
  int common = 0;
  for (unsigned char c : p.predicted) {
    if (want[c] > 0) {
      --want[c];
      ++common;
    }
  }
  return static_cast<double>(common) / static_cast<double>(p.target.size());
}

double length_accuracy(const Prediction& p) {
  return p.predicted.size() == p.target.size() ? 1.0 : 0.0;
}

int levenshtein(const std::string& a, const std::string& b) {
  size_t n = a.size(), m = b.size();
  std::vector<int> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= m; ++j) {
      int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double edit_distance_accuracy(const Prediction& p) {
  if (p.target.empty()) throw Error("edit_distance_accuracy: empty target");
  int dist = levenshtein(p.predicted, p.target);
  double acc = 1.0 - static_cast<double>(dist) / static_cast<double>(p.target.size());
  return std::max(0.0, acc);
}

SampleMetrics score(const Prediction& p) {
  SampleMetrics s;
  s.target = p.target;
  s.predicted = p.predicted;
  s.a_word = word_accuracy(p);
  s.a_char = char_accuracy(p);
  s.a_length = length_accuracy(p);
  s.a_edit = edit_distance_accuracy(p);
  s.raw_edit_distance = levenshtein(p.predicted, p.target);
  return s;
}

MetricsReport aggregate(const std::vector<Prediction>& preds) {
  if (preds.empty()) throw Error("aggregate: empty prediction list");
  MetricsReport r;
  r.n_samples = preds.size();
  r.samples.reserve(preds.size());
  for (const auto& p : preds) {
    SampleMetrics s = score(p);
    r.mean_word += s.a_word;
    r.mean_char += s.a_char;
    r.mean_length += s.a_length;
    r.mean_edit += s.a_edit;
    r.samples.push_back(std::move(s));
  }
  double n = static_cast<double>(r.n_samples);
  r.mean_word /= n;
  r.mean_char /= n;
  r.mean_length /= n;
  r.mean_edit /= n;
  return r;
}

void export_csv(const MetricsReport& report, const std::string& path) {
  CsvWriter csv(path);
  csv.row({"target", "predicted", "a_word", "a_char", "a_length", "a_edit",
           "raw_edit_distance"});
  for (const auto& s : report.samples) {
    csv.row({s.target, s.predicted, CsvWriter::num(s.a_word), CsvWriter::num(s.a_char),
             CsvWriter::num(s.a_length), CsvWriter::num(s.a_edit),
             std::to_string(s.raw_edit_distance)});
  }
}

}  // namespace metrics
}  // namespace strlab
