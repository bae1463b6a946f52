#include "strlab/stimulus.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include <json.hpp>

#include "strlab/errors.hpp"
#include "strlab/rng.hpp"

namespace strlab {

namespace {

void blit(Image& canvas, const Glyph& g, int x0, int y0) {
  for (int r = 0; r < g.height; ++r)
    for (int c = 0; c < g.width; ++c)
      if (g.at(r, c)) canvas.at(y0 + r, x0 + c) = 255;
}

int word_x0(const std::string& word, const GlyphAtlas& atlas) {
  return (kCanvasWidth - atlas.word_width(word)) / 2;
}

int glyph_y0(const GlyphAtlas& atlas) { return (kCanvasHeight - atlas.line_height) / 2; }

}  // namespace

std::string manipulation_name(const Manipulation& m) {
  struct Visitor {
    std::string operator()(const NoManipulation&) const { return "none"; }
    std::string operator()(const OccludeBottomUp&) const { return "occlude_bottom_up"; }
    std::string operator()(const OccludeTopDown&) const { return "occlude_top_down"; }
    std::string operator()(const Flankers&) const { return "flankers"; }
    std::string operator()(const SaltPepper&) const { return "salt_pepper"; }
    std::string operator()(const FontOverride&) const { return "font_override"; }
  };
  return std::visit(Visitor{}, m);
}

Image render_word(const std::string& word, const GlyphAtlas& atlas) {
  if (word.empty()) throw Error("render_word: empty word");
  if (!atlas.covers_word(word)) throw Error("render_word: word has uncovered characters");
  int width = atlas.word_width(word);
  if (width > kCanvasWidth)
    throw Error("render_word: '" + word + "' is too wide for the canvas in " + atlas.font_id);

  Image canvas(kCanvasWidth, kCanvasHeight, 0);
  int x = word_x0(word, atlas);
  int y = glyph_y0(atlas);
  for (char c : word) {
    const Glyph& g = atlas.glyph(c);
    blit(canvas, g, x, y);
    x += g.width + 1;
  }
  return canvas;
}

Image occlude(const Image& img, OcclusionMode mode, int percent) {
  if (percent < 0 || percent > 100) throw Error("occlude: percent out of range");
  int rows = static_cast<int>(std::floor(percent / 100.0 * img.height / 2.0 + 0.5));
  Image out = img;
  if (mode == OcclusionMode::kBottomUp) {
    for (int r = img.height - rows; r < img.height; ++r)
      for (int c = 0; c < img.width; ++c) out.at(r, c) = 0;
  } else {
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < img.width; ++c) out.at(r, c) = 0;
  }
  return out;
}

Sample add_flankers(const std::string& word, const GlyphAtlas& atlas, uint64_t seed) {
  Image canvas = render_word(word, atlas);
  int wx0 = word_x0(word, atlas);
  int wx1 = wx0 + atlas.word_width(word);  // one past the last word column
  int y = glyph_y0(atlas);

  Rng rng(derive_seed(seed, 0xf1a9));

  // Three distinct characters, uniform over the nine.
  std::string pool = kFlankerChars;
  std::string chars;
  for (int i = 0; i < 3; ++i) {
    size_t j = rng.next_below(pool.size());
    chars.push_back(pool[j]);
    pool.erase(pool.begin() + static_cast<long>(j));
  }

  int max_flanker_w = 0;
  for (char c : chars) max_flanker_w = std::max(max_flanker_w, atlas.glyph(c).width);
  int left_room = wx0 - 1;                     // keep >= 1 px clear of the word
  int right_room = kCanvasWidth - (wx1 + 1);
  if (left_room + right_room < 3 * (max_flanker_w + 1))
    throw Error("add_flankers: word too wide to leave room for three flankers");

  // Rejection-sample non-overlapping x positions strictly outside the word.
  std::vector<std::pair<int, int>> placed;  // [x, x+w)
  for (char c : chars) {
    int w = atlas.glyph(c).width;
    bool ok = false;
    for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
      int left_slots = std::max(0, left_room - w + 1);
      int right_slots = std::max(0, right_room - w + 1);
      if (left_slots + right_slots == 0) break;
      int pick = static_cast<int>(rng.next_below(static_cast<uint64_t>(left_slots + right_slots)));
      int x = pick < left_slots ? pick : (wx1 + 1) + (pick - left_slots);
      bool overlap = false;
      for (auto [px, pe] : placed)
        if (x < pe + 1 && px < x + w + 1) overlap = true;  // keep a 1-px gap
      if (overlap) continue;
      placed.emplace_back(x, x + w);
      blit(canvas, atlas.glyph(c), x, y);
      ok = true;
    }
    if (!ok) throw Error("add_flankers: could not place flankers without overlap");
  }

  Sample s;
  s.image = std::move(canvas);
  s.label = word;
  s.manipulation = Flankers{chars, seed};
  s.font_id = atlas.font_id;
  return s;
}

Image salt_pepper_with_mask(const Image& img, double p, uint64_t seed,
                            std::vector<uint8_t>* replaced) {
  if (p < 0.0 || p > 1.0) throw Error("salt_pepper: p must be in [0,1]");
  Image out = img;
  if (replaced) replaced->assign(img.pixels.size(), 0);
  Rng rng(derive_seed(seed, 0x5a17));
  for (size_t i = 0; i < out.pixels.size(); ++i) {
    if (rng.next_double() < p) {
      out.pixels[i] = (rng.next_u64() & 1) ? 255 : 0;
      if (replaced) (*replaced)[i] = 1;
    }
  }
  return out;
}

Image salt_pepper(const Image& img, double p, uint64_t seed) {
  return salt_pepper_with_mask(img, p, seed, nullptr);
}

const std::vector<std::string>& image_set_names() {
  static const std::vector<std::string> names = {
      "all_words", "bottom_up", "top_down",   "flankers",   "fonts3",     "fonts5",
      "noise",     "all_manipulations", "5_letter", "4_6_letter", "3_7_letter"};
  return names;
}

bool is_image_set_name(const std::string& name) {
  const auto& names = image_set_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

Sample make_sample(const std::string& word, const Manipulation& manip) {
  Sample s;
  s.label = word;
  s.font_id = default_font_id();

  if (const auto* f = std::get_if<Flankers>(&manip)) {
    return add_flankers(word, builtin_atlas(default_font_id()), f->seed);
  }
  if (const auto* fo = std::get_if<FontOverride>(&manip)) {
    s.font_id = fo->font_id;
    s.image = render_word(word, builtin_atlas(fo->font_id));
    s.manipulation = manip;
    return s;
  }

  Image img = render_word(word, builtin_atlas(default_font_id()));
  if (std::holds_alternative<NoManipulation>(manip)) {
    s.image = std::move(img);
  } else if (const auto* ob = std::get_if<OccludeBottomUp>(&manip)) {
    s.image = occlude(img, OcclusionMode::kBottomUp, ob->percent);
  } else if (const auto* ot = std::get_if<OccludeTopDown>(&manip)) {
    s.image = occlude(img, OcclusionMode::kTopDown, ot->percent);
  } else if (const auto* sp = std::get_if<SaltPepper>(&manip)) {
    s.image = salt_pepper(img, sp->p, sp->seed);
  }
  s.manipulation = manip;
  return s;
}

namespace {

/// The nine manipulations of the all_manipulations set: occlusions use only
/// the non-trivial grid (percent >= 10); the five font overrides include the
/// default face.
Manipulation draw_all_manip(Rng& rng, uint64_t sample_seed) {
  switch (rng.next_below(9)) {
    case 0:
      return OccludeBottomUp{static_cast<int>(10 * (1 + rng.next_below(10)))};
    case 1:
      return OccludeTopDown{static_cast<int>(10 * (1 + rng.next_below(10)))};
    case 2:
      return Flankers{"", derive_seed(sample_seed, 2)};
    case 3:
      return SaltPepper{0.15, derive_seed(sample_seed, 3)};
    default: {
      size_t f = rng.next_below(5);
      return FontOverride{font_ids()[f]};
    }
  }
}

}  // namespace

Dataset build_image_set(const ImageSetSpec& spec, const WordList& words) {
  if (!is_image_set_name(spec.name)) throw ConfigError("unknown image set: " + spec.name);
  if (words.words.empty()) throw Error("build_image_set: empty word list");

  const WordList* pool = &words;
  WordList filtered;
  if (spec.name == "5_letter") {
    filtered = filter_lengths(words, {5});
    pool = &filtered;
  } else if (spec.name == "4_6_letter") {
    filtered = filter_lengths(words, {4, 6});
    pool = &filtered;
  } else if (spec.name == "3_7_letter") {
    filtered = filter_lengths(words, {3, 7});
    pool = &filtered;
  }
  if (pool->words.empty())
    throw Error("build_image_set: no words of the requested lengths for " + spec.name);

  Dataset ds;
  ds.spec = spec;
  ds.samples.reserve(pool->words.size());
  for (size_t i = 0; i < pool->words.size(); ++i) {
    const std::string& word = pool->words[i];
    uint64_t sample_seed = derive_seed(spec.seed, i);
    Rng rng(sample_seed);

    Manipulation manip = NoManipulation{};
    if (spec.name == "bottom_up") {
      manip = OccludeBottomUp{static_cast<int>(10 * rng.next_below(11))};
    } else if (spec.name == "top_down") {
      manip = OccludeTopDown{static_cast<int>(10 * rng.next_below(11))};
    } else if (spec.name == "flankers") {
      manip = Flankers{"", derive_seed(sample_seed, 1)};
    } else if (spec.name == "noise") {
      manip = SaltPepper{0.15, derive_seed(sample_seed, 1)};
    } else if (spec.name == "fonts3") {
      manip = FontOverride{font_ids()[rng.next_below(3)]};
    } else if (spec.name == "fonts5") {
      manip = FontOverride{font_ids()[rng.next_below(5)]};
    } else if (spec.name == "all_manipulations") {
      manip = draw_all_manip(rng, sample_seed);
    }
    ds.samples.push_back(make_sample(word, manip));
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Binary container

namespace {

constexpr char kMagic[4] = {'S', 'T', 'I', 'M'};
constexpr uint32_t kVersion = 1;

enum ManipTag : uint8_t {
  kTagNone = 0,
  kTagOccB = 1,
  kTagOccT = 2,
  kTagFlankers = 3,
  kTagNoise = 4,
  kTagFont = 5,
};

template <typename T>
void put(std::ostream& out, T v) {
  // Little-endian on all supported targets.
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
  if (ds.samples.empty()) throw Error("save_dataset: empty dataset");
  int w = ds.samples[0].image.width;
  int h = ds.samples[0].image.height;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset: " + path);
  out.write(kMagic, 4);
  put<uint32_t>(out, kVersion);
  put<uint64_t>(out, ds.samples.size());
  put<uint16_t>(out, static_cast<uint16_t>(w));
  put<uint16_t>(out, static_cast<uint16_t>(h));

  for (const auto& s : ds.samples) {
    if (s.image.width != w || s.image.height != h)
      throw Error("save_dataset: inconsistent image dims");
    put<uint8_t>(out, static_cast<uint8_t>(s.label.size()));
    out.write(s.label.data(), static_cast<std::streamsize>(s.label.size()));
    put<uint8_t>(out, static_cast<uint8_t>(s.font_id.size()));
    out.write(s.font_id.data(), static_cast<std::streamsize>(s.font_id.size()));

    uint8_t tag = kTagNone, percent = 0;
    double p = 0.0;
    uint64_t seed = 0;
    std::string extra;
    if (const auto* ob = std::get_if<OccludeBottomUp>(&s.manipulation)) {
      tag = kTagOccB;
      percent = static_cast<uint8_t>(ob->percent);
    } else if (const auto* ot = std::get_if<OccludeTopDown>(&s.manipulation)) {
      tag = kTagOccT;
      percent = static_cast<uint8_t>(ot->percent);
    } else if (const auto* f = std::get_if<Flankers>(&s.manipulation)) {
      tag = kTagFlankers;
      seed = f->seed;
      extra = f->chars;
    } else if (const auto* sp = std::get_if<SaltPepper>(&s.manipulation)) {
      tag = kTagNoise;
      p = sp->p;
      seed = sp->seed;
    } else if (const auto* fo = std::get_if<FontOverride>(&s.manipulation)) {
      tag = kTagFont;
      extra = fo->font_id;
    }
    put<uint8_t>(out, tag);
    put<uint8_t>(out, percent);
    put<double>(out, p);
    put<uint64_t>(out, seed);
    put<uint8_t>(out, static_cast<uint8_t>(extra.size()));
    out.write(extra.data(), static_cast<std::streamsize>(extra.size()));
    out.write(reinterpret_cast<const char*>(s.image.pixels.data()),
              static_cast<std::streamsize>(s.image.pixels.size()));
  }
  if (!out) throw IoError("dataset write failed: " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read dataset: " + path);
  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw IoError("bad dataset magic: " + path);
  uint32_t version = get<uint32_t>(in);
  if (version != kVersion) throw IoError("unsupported dataset version: " + path);
  uint64_t count = get<uint64_t>(in);
  int w = get<uint16_t>(in);
  int h = get<uint16_t>(in);

  Dataset ds;
  ds.samples.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    Sample s;
    uint8_t label_len = get<uint8_t>(in);
    s.label.resize(label_len);
    in.read(s.label.data(), label_len);
    uint8_t font_len = get<uint8_t>(in);
    s.font_id.resize(font_len);
    in.read(s.font_id.data(), font_len);

    uint8_t tag = get<uint8_t>(in);
    uint8_t percent = get<uint8_t>(in);
    double p = get<double>(in);
    uint64_t seed = get<uint64_t>(in);
    uint8_t extra_len = get<uint8_t>(in);
    std::string extra(extra_len, '\0');
    in.read(extra.data(), extra_len);

    switch (tag) {
      case kTagNone: s.manipulation = NoManipulation{}; break;
      case kTagOccB: s.manipulation = OccludeBottomUp{percent}; break;
      case kTagOccT: s.manipulation = OccludeTopDown{percent}; break;
      case kTagFlankers: s.manipulation = Flankers{extra, seed}; break;
      case kTagNoise: s.manipulation = SaltPepper{p, seed}; break;
      case kTagFont: s.manipulation = FontOverride{extra}; break;
      default: throw IoError("bad manipulation tag in " + path);
    }
    s.image = Image(w, h);
    in.read(reinterpret_cast<char*>(s.image.pixels.data()),
            static_cast<std::streamsize>(s.image.pixels.size()));
    if (!in) throw IoError("truncated dataset: " + path);
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

void save_dataset_manifest(const Dataset& ds, const std::string& path) {
  nlohmann::json j;
  j["set"] = ds.spec.name;
  j["seed"] = ds.spec.seed;
  j["split"] = ds.spec.split;
  j["count"] = ds.samples.size();
  if (!ds.samples.empty()) {
    j["width"] = ds.samples[0].image.width;
    j["height"] = ds.samples[0].image.height;
  }
  std::map<std::string, size_t> by_manip;
  for (const auto& s : ds.samples) ++by_manip[manipulation_name(s.manipulation)];
  j["manipulations"] = by_manip;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest: " + path);
  out << j.dump(2) << '\n';
}

}  // namespace strlab
