#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <deque>
#include <filesystem>
#include <unordered_map>

#include "strlab/csv.hpp"
#include "strlab/errors.hpp"
#include "strlab/metrics.hpp"
#include "strlab/rng.hpp"

using namespace strlab;
using namespace strlab::metrics;
namespace fs = std::filesystem;

namespace {

/// Independent oracle: breadth-first search over single-character edit
/// scripts (insert/delete/substitute over the given alphabet), i.e. the
/// literal "minimum number of edits" definition.
int bfs_edit_distance(const std::string& from, const std::string& to,
                      const std::string& alphabet) {
  if (from == to) return 0;
  std::unordered_map<std::string, int> dist{{from, 0}};
  std::deque<std::string> queue{from};
  size_t max_len = std::max(from.size(), to.size()) + 1;
  while (!queue.empty()) {
    std::string cur = queue.front();
    queue.pop_front();
    int d = dist[cur];
    auto visit = [&](const std::string& next) -> bool {
      if (next.size() > max_len) return false;
      if (dist.count(next)) return false;
      if (next == to) return true;
      dist[next] = d + 1;
      queue.push_back(next);
      return false;
    };
    for (size_t i = 0; i <= cur.size(); ++i)
      for (char c : alphabet) {
        if (visit(cur.substr(0, i) + c + cur.substr(i))) return d + 1;  // insert
      }
    for (size_t i = 0; i < cur.size(); ++i)
      if (visit(cur.substr(0, i) + cur.substr(i + 1))) return d + 1;  // delete
    for (size_t i = 0; i < cur.size(); ++i)
      for (char c : alphabet) {
        std::string next = cur;
        next[i] = c;
        if (visit(next)) return d + 1;  // substitute
      }
  }
  throw Error("bfs oracle failed to reach target");
}

std::vector<std::string> all_strings_up_to(size_t max_len, const std::string& alphabet) {
  std::vector<std::string> out = {""};
  size_t begin = 0;
  for (size_t len = 1; len <= max_len; ++len) {
    size_t end = out.size();
    for (size_t i = begin; i < end; ++i)
      for (char c : alphabet) out.push_back(out[i] + c);
    begin = end;
  }
  return out;
}

}  // namespace

TEST_CASE("word accuracy is exact match") {
  CHECK(word_accuracy({"model", "model"}) == 1.0);
  CHECK(word_accuracy({"ode", "model"}) == 0.0);
  CHECK(word_accuracy({"", "cat"}) == 0.0);
}

TEST_CASE("char accuracy is capped multiset overlap") {
  CHECK(char_accuracy({"model", "model"}) == doctest::Approx(1.0));
  CHECK(char_accuracy({"ode", "model"}) == doctest::Approx(0.6));
  CHECK(char_accuracy({"aaa", "abc"}) == doctest::Approx(1.0 / 3.0));
  CHECK(char_accuracy({"", "abc"}) == doctest::Approx(0.0));
  CHECK(char_accuracy({"zzzzzz", "abc"}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(char_accuracy({"abc", ""}), Error);
}

TEST_CASE("char accuracy never exceeds one (C <= N)") {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::string p, t;
    for (uint64_t i = rng.next_below(8); i > 0; --i)
      p.push_back(static_cast<char>('a' + rng.next_below(3)));
    for (uint64_t i = 1 + rng.next_below(7); i > 0; --i)
      t.push_back(static_cast<char>('a' + rng.next_below(3)));
    double a = char_accuracy({p, t});
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
  }
}

TEST_CASE("length accuracy compares lengths only") {
  CHECK(length_accuracy({"cat", "dog"}) == 1.0);
  CHECK(length_accuracy({"ode", "model"}) == 0.0);
  CHECK(length_accuracy({"", "ab"}) == 0.0);
}

TEST_CASE("edit distance accuracy: worked example and clamping") {
  CHECK(edit_distance_accuracy({"model", "model"}) == doctest::Approx(1.0));
  CHECK(levenshtein("ode", "model") == 2);
  CHECK(edit_distance_accuracy({"ode", "model"}) == doctest::Approx(0.6));
  CHECK(levenshtein("abcdefghij", "ab") == 8);
  CHECK(edit_distance_accuracy({"abcdefghij", "ab"}) == doctest::Approx(0.0));
}

TEST_CASE("levenshtein equals the exhaustive edit-script oracle") {
  // Keep the pair count sane: every string of length <= 3 against every
  // string of length <= 5, over a 3-letter alphabet (oracle is BFS).
  const std::string alphabet = "abc";
  auto shorts = all_strings_up_to(3, alphabet);
  auto longs = all_strings_up_to(5, alphabet);
  for (const auto& p : shorts)
    for (const auto& t : longs)
      CHECK(levenshtein(p, t) == bfs_edit_distance(p, t, alphabet));
}

TEST_CASE("levenshtein is a metric (symmetry + triangle inequality)") {
  Rng rng(12);
  auto random_string = [&] {
    std::string s;
    for (uint64_t i = rng.next_below(9); i > 0; --i)
      s.push_back(static_cast<char>('a' + rng.next_below(26)));
    return s;
  };
  for (int trial = 0; trial < 300; ++trial) {
    std::string a = random_string(), b = random_string(), c = random_string();
    CHECK(levenshtein(a, b) == levenshtein(b, a));
    CHECK(levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c));
    CHECK((levenshtein(a, b) == 0) == (a == b));
  }
}

TEST_CASE("A_edit equals one iff exact match") {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    std::string p, t;
    for (uint64_t i = rng.next_below(7); i > 0; --i)
      p.push_back(static_cast<char>('a' + rng.next_below(4)));
    for (uint64_t i = 1 + rng.next_below(6); i > 0; --i)
      t.push_back(static_cast<char>('a' + rng.next_below(4)));
    CHECK((edit_distance_accuracy({p, t}) == 1.0) == (p == t));
  }
}

TEST_CASE("word accuracy lower-bounds every other metric samplewise") {
  Rng rng(14);
  for (int trial = 0; trial < 300; ++trial) {
    std::string p, t;
    for (uint64_t i = rng.next_below(8); i > 0; --i)
      p.push_back(static_cast<char>('a' + rng.next_below(5)));
    for (uint64_t i = 1 + rng.next_below(7); i > 0; --i)
      t.push_back(static_cast<char>('a' + rng.next_below(5)));
    Prediction pair{p, t};
    double w = word_accuracy(pair);
    CHECK(w <= char_accuracy(pair));
    CHECK(w <= length_accuracy(pair));
    CHECK(w <= edit_distance_accuracy(pair));
  }
}

TEST_CASE("aggregate: arithmetic and order independence") {
  std::vector<Prediction> preds = {{"cat", "cat"}, {"xyz", "abc"}};
  MetricsReport r = aggregate(preds);
  CHECK(r.n_samples == 2);
  CHECK(r.mean_word == doctest::Approx(0.5));
  CHECK(r.mean_length == doctest::Approx(1.0));

  std::vector<Prediction> reversed = {{"xyz", "abc"}, {"cat", "cat"}};
  MetricsReport r2 = aggregate(reversed);
  CHECK(r2.mean_word == doctest::Approx(r.mean_word));
  CHECK(r2.mean_char == doctest::Approx(r.mean_char));
  CHECK(r2.mean_edit == doctest::Approx(r.mean_edit));

  std::vector<Prediction> all_right = {{"aa", "aa"}, {"bob", "bob"}};
  MetricsReport r3 = aggregate(all_right);
  CHECK(r3.mean_word == doctest::Approx(1.0));
  CHECK(r3.mean_char == doctest::Approx(1.0));
  CHECK(r3.mean_length == doctest::Approx(1.0));
  CHECK(r3.mean_edit == doctest::Approx(1.0));

  CHECK_THROWS_AS(aggregate({}), Error);
}

TEST_CASE("per-sample CSV export carries the documented columns") {
  std::vector<Prediction> preds = {{"ode", "model"}, {"a,b", "abz"}};
  MetricsReport r = aggregate(preds);
  auto path = (fs::temp_directory_path() / "metrics.csv").string();
  export_csv(r, path);
  auto rows = parse_csv(path);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"target", "predicted", "a_word", "a_char",
                                            "a_length", "a_edit", "raw_edit_distance"});
  CHECK(rows[1][0] == "model");
  CHECK(rows[1][1] == "ode");
  CHECK(rows[1][6] == "2");
  CHECK(rows[2][1] == "a,b");  // quoting survives the round trip
}
