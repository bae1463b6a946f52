#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace strlab {

constexpr int kMinWordLen = 2;
constexpr int kMaxWordLen = 7;

/// Validated vocabulary: lowercase a-z words of length 2..7, no duplicates,
/// first-occurrence order.
struct WordList {
  std::vector<std::string> words;
  std::string source;
};

struct SplitSpec {
  uint64_t seed = 0;
  double train_fraction = 0.7;
  std::optional<std::set<int>> length_filter;
};

struct LoadStats {
  size_t accepted = 0;
  size_t rejected_invalid = 0;   // bad charset or length
  size_t rejected_duplicate = 0;
  size_t rejected_total() const { return rejected_invalid + rejected_duplicate; }
};

/// True iff w matches [a-z]+ with length in [2,7].
bool is_valid_word(const std::string& w);

/// Loads one token per line, lowercases, drops invalid/duplicate tokens.
/// Throws IoError on unreadable files or when nothing survives filtering.
WordList load_wordlist(const std::string& path, LoadStats* stats = nullptr);

/// Inverse of load_wordlist on valid lists (one word per line).
void save_wordlist(const WordList& list, const std::string& path);

/// 70:30-style split performed independently within each word length.
/// Per length L: |train_L| = round(train_fraction * |words_L|), round half
/// up. Words are canonicalized by sorting before the seeded shuffle, so the
/// split depends only on (word set, spec), never on input order.
std::pair<WordList, WordList> stratified_split(const WordList& list, const SplitSpec& spec);

/// The three length-restricted subsets: "5 letter" {5}, "4 and 6 letter"
/// {4,6}, "3 and 7 letter" {3,7}. Empty subsets are returned (and reported
/// by the caller), not errors.
std::map<std::string, WordList> length_subsets(const WordList& list);

/// Keep only words whose length is in `lengths`.
WordList filter_lengths(const WordList& list, const std::set<int>& lengths);

/// Subsample 5/6/7-letter words down to equal counts (the --balance flag).
WordList balance_567(const WordList& list, uint64_t seed);

/// Deterministic proportional-per-length subsample to at most n words.
WordList select_vocab(const WordList& list, size_t n, uint64_t seed);

/// Deterministic pronounceable-word generator (fallback so tests never
/// depend on a network fetch). Words are CV-patterned, length 2..7,
/// deduplicated, in generation order.
WordList synthetic_wordlist(size_t count, uint64_t seed);

/// Split manifest (JSON): subset name, seed, fraction, word arrays.
void save_split_manifest(const std::string& path, const std::string& name,
                         const SplitSpec& spec, const WordList& train, const WordList& test);

/// Per-length histogram, lengths 2..7.
std::map<int, size_t> length_histogram(const WordList& list);

}  // namespace strlab
