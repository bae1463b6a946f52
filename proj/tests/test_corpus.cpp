#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "strlab/corpus.hpp"
#include "strlab/errors.hpp"

using namespace strlab;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  fs::path p = fs::temp_directory_path() / name;
  std::ofstream out(p);
  out << content;
  return p.string();
}

std::set<std::string> as_set(const WordList& w) {
  return std::set<std::string>(w.words.begin(), w.words.end());
}

}  // namespace

TEST_CASE("load_wordlist filters invalid tokens and reports counts") {
  auto path = write_temp("words_mixed.txt", "Cat\ndog\ndog\na\nzebra!\n");
  LoadStats stats;
  WordList list = load_wordlist(path, &stats);
  CHECK(list.words == std::vector<std::string>{"cat", "dog"});
  CHECK(stats.rejected_total() == 3);
  CHECK(stats.rejected_duplicate == 1);
  CHECK(stats.rejected_invalid == 2);
}

TEST_CASE("load_wordlist accepts a paper-sized synthetic list") {
  WordList synth = synthetic_wordlist(22878, 7);
  auto path = (fs::temp_directory_path() / "words_22878.txt").string();
  save_wordlist(synth, path);
  WordList loaded = load_wordlist(path);
  CHECK(loaded.words.size() == 22878);
}

TEST_CASE("load_wordlist rejects empty files") {
  auto path = write_temp("words_empty.txt", "");
  CHECK_THROWS_AS(load_wordlist(path), IoError);
  CHECK_THROWS_AS(load_wordlist("/nonexistent/path/words.txt"), IoError);
}

TEST_CASE("save then load is identity on valid lists") {
  WordList synth = synthetic_wordlist(500, 21);
  auto path = (fs::temp_directory_path() / "words_rt.txt").string();
  save_wordlist(synth, path);
  CHECK(load_wordlist(path).words == synth.words);
}

TEST_CASE("stratified_split: exact arithmetic at fraction 0.7") {
  // Ten words of each length 2..7 -> 7 train + 3 test per length.
  WordList list;
  for (int len = 2; len <= 7; ++len)
    for (int i = 0; i < 10; ++i)
      list.words.push_back(std::string(static_cast<size_t>(len - 1), 'a' + char(i)) +
                           char('a' + i));
  SplitSpec spec;
  spec.seed = 5;
  auto [train, test] = stratified_split(list, spec);
  auto train_hist = length_histogram(train);
  auto test_hist = length_histogram(test);
  for (int len = 2; len <= 7; ++len) {
    CHECK(train_hist[len] == 7);
    CHECK(test_hist[len] == 3);
  }
}

TEST_CASE("stratified_split honors the length filter") {
  WordList list = synthetic_wordlist(2000, 3);
  SplitSpec spec;
  spec.seed = 9;
  spec.length_filter = std::set<int>{5};
  auto [train, test] = stratified_split(list, spec);
  for (const auto& w : train.words) CHECK(w.size() == 5);
  for (const auto& w : test.words) CHECK(w.size() == 5);
  size_t n5 = 0;
  for (const auto& w : list.words) n5 += w.size() == 5;
  CHECK(train.words.size() + test.words.size() == n5);

  spec.length_filter = std::set<int>{1};  // nothing has length 1
  CHECK_THROWS_AS(stratified_split(list, spec), Error);
}

TEST_CASE("stratified_split is deterministic and a partition") {
  WordList list = synthetic_wordlist(3000, 11);
  SplitSpec spec;
  spec.seed = 1234;
  auto [train1, test1] = stratified_split(list, spec);
  auto [train2, test2] = stratified_split(list, spec);
  CHECK(train1.words == train2.words);
  CHECK(test1.words == test2.words);

  // Disjoint and exhaustive.
  auto train_set = as_set(train1);
  auto test_set = as_set(test1);
  CHECK(train_set.size() + test_set.size() == list.words.size());
  for (const auto& w : test_set) CHECK(train_set.count(w) == 0);

  // Per-length proportions within half a word of round(0.7 n).
  auto full_hist = length_histogram(list);
  auto train_hist = length_histogram(train1);
  for (auto [len, total] : full_hist) {
    if (total == 0) continue;
    double expected = std::floor(0.7 * static_cast<double>(total) + 0.5);
    CHECK(std::abs(static_cast<double>(train_hist[len]) - expected) <= 0.5);
  }
}

TEST_CASE("stratified_split membership is order-invariant") {
  WordList list = synthetic_wordlist(800, 17);
  SplitSpec spec;
  spec.seed = 99;
  auto [train1, test1] = stratified_split(list, spec);

  WordList reversed;
  reversed.words.assign(list.words.rbegin(), list.words.rend());
  auto [train2, test2] = stratified_split(reversed, spec);
  CHECK(as_set(train1) == as_set(train2));
  CHECK(as_set(test1) == as_set(test2));
}

TEST_CASE("length_subsets returns exactly the three paper subsets") {
  WordList list;
  list.words = {"cat", "boat", "plane", "stream"};
  auto subsets = length_subsets(list);
  REQUIRE(subsets.size() == 3);
  CHECK(subsets.at("5 letter").words == std::vector<std::string>{"plane"});
  CHECK(subsets.at("4 and 6 letter").words == std::vector<std::string>{"boat", "stream"});
  CHECK(subsets.at("3 and 7 letter").words == std::vector<std::string>{"cat"});
}

TEST_CASE("length_subsets flags empty subsets without erroring") {
  WordList list;
  list.words = {"cat", "boat"};
  auto subsets = length_subsets(list);
  CHECK(subsets.at("5 letter").words.empty());
}

TEST_CASE("length_subsets on the bundled list omits only 2-letter words") {
  WordList list = load_wordlist(STRLAB_WORDS_FILE);
  auto subsets = length_subsets(list);
  size_t uni = 0;
  for (const auto& [name, sub] : subsets) uni += sub.words.size();
  auto hist = length_histogram(list);
  CHECK(uni == list.words.size() - hist[2]);
  CHECK(hist[2] > 0);
}

TEST_CASE("bundled word list is valid and desk-scale sized") {
  LoadStats stats;
  WordList list = load_wordlist(STRLAB_WORDS_FILE, &stats);
  CHECK(stats.rejected_total() == 0);
  CHECK(list.words.size() >= 2000);
  for (const auto& w : list.words) CHECK(is_valid_word(w));
}

TEST_CASE("balance_567 equalizes the long-word counts") {
  WordList list = load_wordlist(STRLAB_WORDS_FILE);
  WordList balanced = balance_567(list, 5);
  auto hist = length_histogram(balanced);
  CHECK(hist[5] == hist[6]);
  CHECK(hist[6] == hist[7]);
}

TEST_CASE("select_vocab keeps per-length proportions and the exact count") {
  WordList list = load_wordlist(STRLAB_WORDS_FILE);
  WordList vocab = select_vocab(list, 2000, 42);
  CHECK(vocab.words.size() == 2000);
  WordList again = select_vocab(list, 2000, 42);
  CHECK(vocab.words == again.words);
  auto hist = length_histogram(vocab);
  for (int len = 3; len <= 7; ++len) CHECK(hist[len] > 300);
}

TEST_CASE("split manifest round-trips through JSON") {
  WordList list = synthetic_wordlist(100, 2);
  SplitSpec spec;
  spec.seed = 77;
  auto [train, test] = stratified_split(list, spec);
  auto path = (fs::temp_directory_path() / "split_manifest.json").string();
  save_split_manifest(path, "all_words", spec, train, test);
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text.find("\"seed\": 77") != std::string::npos);
  CHECK(text.find(train.words[0]) != std::string::npos);
}
