#include "strlab/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "strlab/errors.hpp"
#include "strlab/rng.hpp"

namespace strlab {

bool is_valid_word(const std::string& w) {
  if (w.size() < static_cast<size_t>(kMinWordLen) || w.size() > static_cast<size_t>(kMaxWordLen))
    return false;
  for (char c : w)
    if (c < 'a' || c > 'z') return false;
  return true;
}

WordList load_wordlist(const std::string& path, LoadStats* stats) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open word list: " + path);

  WordList out;
  out.source = path;
  LoadStats st;
  std::unordered_set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    // Trim trailing CR and surrounding whitespace.
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
      line.pop_back();
    size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    std::string tok = line.substr(start);
    std::transform(tok.begin(), tok.end(), tok.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (!is_valid_word(tok)) {
      ++st.rejected_invalid;
      continue;
    }
    if (!seen.insert(tok).second) {
      ++st.rejected_duplicate;
      continue;
    }
    out.words.push_back(tok);
    ++st.accepted;
  }
  if (stats) *stats = st;
  if (out.words.empty()) throw IoError("word list is empty after filtering: " + path);
  return out;
}

void save_wordlist(const WordList& list, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write word list: " + path);
  for (const auto& w : list.words) out << w << '\n';
  if (!out) throw IoError("write failed: " + path);
}

WordList filter_lengths(const WordList& list, const std::set<int>& lengths) {
  WordList out;
  out.source = list.source;
  for (const auto& w : list.words)
    if (lengths.count(static_cast<int>(w.size()))) out.words.push_back(w);
  return out;
}

std::pair<WordList, WordList> stratified_split(const WordList& list, const SplitSpec& spec) {
  if (list.words.empty()) throw Error("stratified_split: empty word list");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw ConfigError("train_fraction must be in (0,1)");

  std::vector<std::string> pool = list.words;
  if (spec.length_filter) {
    pool.clear();
    for (const auto& w : list.words)
      if (spec.length_filter->count(static_cast<int>(w.size()))) pool.push_back(w);
    if (pool.empty()) throw Error("stratified_split: length filter removed every word");
  }

  // Per length: sort for a canonical order, shuffle with a length-keyed
  // stream, take the first round(frac*n) as train. Membership then depends
  // only on the word set and the spec.
  std::map<int, std::vector<std::string>> by_len;
  for (const auto& w : pool) by_len[static_cast<int>(w.size())].push_back(w);

  std::unordered_set<std::string> train_set;
  for (auto& [len, words] : by_len) {
    std::sort(words.begin(), words.end());
    Rng rng(derive_seed(spec.seed, static_cast<uint64_t>(len)));
    rng.shuffle(words);
    size_t n_train =
        static_cast<size_t>(std::floor(spec.train_fraction * static_cast<double>(words.size()) + 0.5));
    for (size_t i = 0; i < n_train; ++i) train_set.insert(words[i]);
  }

  WordList train, test;
  train.source = list.source + " (train)";
  test.source = list.source + " (test)";
  for (const auto& w : pool) {
    if (train_set.count(w))
      train.words.push_back(w);
    else
      test.words.push_back(w);
  }
  return {train, test};
}

std::map<std::string, WordList> length_subsets(const WordList& list) {
  if (list.words.empty()) throw Error("length_subsets: empty word list");
  std::map<std::string, WordList> out;
  out["5 letter"] = filter_lengths(list, {5});
  out["4 and 6 letter"] = filter_lengths(list, {4, 6});
  out["3 and 7 letter"] = filter_lengths(list, {3, 7});
  return out;
}

WordList balance_567(const WordList& list, uint64_t seed) {
  auto hist = length_histogram(list);
  size_t target = std::min({hist[5], hist[6], hist[7]});
  std::unordered_set<std::string> keep;
  for (int len : {5, 6, 7}) {
    std::vector<std::string> words;
    for (const auto& w : list.words)
      if (static_cast<int>(w.size()) == len) words.push_back(w);
    std::sort(words.begin(), words.end());
    Rng rng(derive_seed(seed, 0x1000u + static_cast<uint64_t>(len)));
    rng.shuffle(words);
    for (size_t i = 0; i < target && i < words.size(); ++i) keep.insert(words[i]);
  }
  WordList out;
  out.source = list.source + " (balanced)";
  for (const auto& w : list.words) {
    int len = static_cast<int>(w.size());
    if (len >= 5 && len <= 7) {
      if (keep.count(w)) out.words.push_back(w);
    } else {
      out.words.push_back(w);
    }
  }
  return out;
}

WordList select_vocab(const WordList& list, size_t n, uint64_t seed) {
  if (n >= list.words.size()) return list;
  auto hist = length_histogram(list);
  double scale = static_cast<double>(n) / static_cast<double>(list.words.size());

  std::map<int, size_t> quota;
  size_t assigned = 0;
  for (auto [len, cnt] : hist) {
    quota[len] = static_cast<size_t>(std::floor(scale * static_cast<double>(cnt)));
    assigned += quota[len];
  }
  // Hand out the rounding remainder to the largest buckets, longest first.
  std::vector<int> order;
  for (auto [len, cnt] : hist) order.push_back(len);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return hist[a] != hist[b] ? hist[a] > hist[b] : a > b; });
  for (size_t i = 0; assigned < n; i = (i + 1) % order.size()) {
    if (quota[order[i]] < hist[order[i]]) {
      ++quota[order[i]];
      ++assigned;
    }
  }

  std::unordered_set<std::string> keep;
  for (auto [len, want] : quota) {
    std::vector<std::string> words;
    for (const auto& w : list.words)
      if (static_cast<int>(w.size()) == len) words.push_back(w);
    std::sort(words.begin(), words.end());
    Rng rng(derive_seed(seed, 0x2000u + static_cast<uint64_t>(len)));
    rng.shuffle(words);
    for (size_t i = 0; i < want && i < words.size(); ++i) keep.insert(words[i]);
  }
  WordList out;
  out.source = list.source;
  for (const auto& w : list.words)
    if (keep.count(w)) out.words.push_back(w);
  return out;
}

WordList synthetic_wordlist(size_t count, uint64_t seed) {
  static const char* kOnsets[] = {"b", "c", "d", "f", "g", "h", "j", "k", "l", "m",
                                  "n", "p", "r", "s", "t", "v", "w", "z", "br", "ch",
                                  "cl", "dr", "fl", "gr", "pl", "pr", "sh", "sl", "st", "tr"};
  static const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "ea", "oo"};
  static const char* kCodas[] = {"", "b", "d", "g", "k", "l", "m", "n", "p", "r", "s", "t", "x", "nd", "st"};

  Rng rng(derive_seed(seed, 0xfa11bacc));
  WordList out;
  out.source = "synthetic";
  std::unordered_set<std::string> seen;
  size_t guard = 0;
  while (out.words.size() < count && guard < count * 400 + 10000) {
    ++guard;
    std::string w;
    int syllables = 1 + static_cast<int>(rng.next_below(3));
    for (int s = 0; s < syllables; ++s) {
      w += kOnsets[rng.next_below(std::size(kOnsets))];
      w += kVowels[rng.next_below(std::size(kVowels))];
      if (s + 1 == syllables) w += kCodas[rng.next_below(std::size(kCodas))];
    }
    if (!is_valid_word(w)) continue;
    if (!seen.insert(w).second) continue;
    out.words.push_back(w);
  }
  if (out.words.size() < count)
    throw Error("synthetic_wordlist: could not generate enough unique words");
  return out;
}

void save_split_manifest(const std::string& path, const std::string& name,
                         const SplitSpec& spec, const WordList& train, const WordList& test) {
  nlohmann::json j;
  j["subset"] = name;
  j["seed"] = spec.seed;
  j["train_fraction"] = spec.train_fraction;
  if (spec.length_filter) {
    j["length_filter"] = std::vector<int>(spec.length_filter->begin(), spec.length_filter->end());
  }
  j["train"] = train.words;
  j["test"] = test.words;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write split manifest: " + path);
  out << j.dump(2) << '\n';
}

std::map<int, size_t> length_histogram(const WordList& list) {
  std::map<int, size_t> hist;
  for (int len = kMinWordLen; len <= kMaxWordLen; ++len) hist[len] = 0;
  for (const auto& w : list.words) ++hist[static_cast<int>(w.size())];
  return hist;
}

}  // namespace strlab
