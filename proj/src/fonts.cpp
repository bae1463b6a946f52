#include "strlab/font.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <mutex>

#include <json.hpp>

#include "strlab/errors.hpp"

namespace strlab {

namespace {

constexpr int kLineHeight = 9;

struct GlyphSpec {
  char ch;
  int width;
  std::array<const char*, kLineHeight> rows;
};

// Hand-drawn pixel faces. Rows top to bottom; baseline sits at row 6 with
// rows 7-8 reserved for descenders, rows 0-1 for ascenders. The upper band
// carries most of the distinguishing detail (ascenders, dots, arch tops),
// like real lowercase typography.

// Default face: fixed-pitch serif, 5 px wide.
const GlyphSpec kMonoSerif[] = {
    {'a', 5, {".....", ".....", ".###.", "....#", ".####", "#...#", ".####", ".....", "....."}},
    {'b', 5, {"##...", "#....", "####.", "#...#", "#...#", "#...#", "####.", ".....", "....."}},
    {'c', 5, {".....", ".....", ".###.", "#...#", "#....", "#...#", ".###.", ".....", "....."}},
    {'d', 5, {"...##", "....#", ".####", "#...#", "#...#", "#...#", ".####", ".....", "....."}},
    {'e', 5, {".....", ".....", ".###.", "#...#", "#####", "#....", ".###.", ".....", "....."}},
    {'f', 5, {"..##.", ".#...", "####.", ".#...", ".#...", ".#...", "###..", ".....", "....."}},
    {'g', 5, {".....", ".....", ".####", "#...#", "#...#", "#...#", ".####", "....#", ".###."}},
    {'h', 5, {"##...", "#....", "####.", "#...#", "#...#", "#...#", "#...#", ".....", "....."}},
    {'i', 5, {"..#..", ".....", ".##..", "..#..", "..#..", "..#..", ".###.", ".....", "....."}},
    {'j', 5, {"...#.", ".....", "..##.", "...#.", "...#.", "...#.", "...#.", "...#.", ".##.."}},
    {'k', 5, {"##...", "#....", "#...#", "#..#.", "###..", "#..#.", "#...#", ".....", "....."}},
    {'l', 5, {".##..", "..#..", "..#..", "..#..", "..#..", "..#..", ".###.", ".....", "....."}},
    {'m', 5, {".....", ".....", "##.#.", "#.#.#", "#.#.#", "#.#.#", "#.#.#", ".....", "....."}},
    {'n', 5, {".....", ".....", "####.", "#...#", "#...#", "#...#", "#...#", ".....", "....."}},
    {'o', 5, {".....", ".....", ".###.", "#...#", "#...#", "#...#", ".###.", ".....", "....."}},
    {'p', 5, {".....", ".....", "####.", "#...#", "#...#", "#...#", "####.", "#....", "##..."}},
    {'q', 5, {".....", ".....", ".####", "#...#", "#...#", "#...#", ".####", "....#", "...##"}},
    {'r', 5, {".....", ".....", "#.##.", "##..#", "#....", "#....", "###..", ".....", "....."}},
    {'s', 5, {".....", ".....", ".####", "#....", ".###.", "....#", "####.", ".....", "....."}},
    {'t', 5, {".#...", ".#...", "####.", ".#...", ".#...", ".#...", "..##.", ".....", "....."}},
    {'u', 5, {".....", ".....", "#...#", "#...#", "#...#", "#...#", ".####", ".....", "....."}},
    {'v', 5, {".....", ".....", "#...#", "#...#", ".#.#.", ".#.#.", "..#..", ".....", "....."}},
    {'w', 5, {".....", ".....", "#.#.#", "#.#.#", "#.#.#", "#.#.#", ".#.#.", ".....", "....."}},
    {'x', 5, {".....", ".....", "#...#", ".#.#.", "..#..", ".#.#.", "#...#", ".....", "....."}},
    {'y', 5, {".....", ".....", "#...#", "#...#", "#...#", "#...#", ".####", "....#", ".###."}},
    {'z', 5, {".....", ".....", "#####", "...#.", "..#..", ".#...", "#####", ".....", "....."}},
};

// Narrow squared sans face, 5 px cell with 4-px forms.
const GlyphSpec kSans[] = {
    {'a', 5, {".....", ".....", "####.", "...#.", "####.", "#..#.", "####.", ".....", "....."}},
    {'b', 5, {"#....", "#....", "####.", "#..#.", "#..#.", "#..#.", "####.", ".....", "....."}},
    {'c', 5, {".....", ".....", "####.", "#....", "#....", "#....", "####.", ".....", "....."}},
    {'d', 5, {"...#.", "...#.", "####.", "#..#.", "#..#.", "#..#.", "####.", ".....", "....."}},
    {'e', 5, {".....", ".....", "####.", "#..#.", "####.", "#....", "####.", ".....", "....."}},
    {'f', 5, {".###.", "#....", "###..", "#....", "#....", "#....", "#....", ".....", "....."}},
    {'g', 5, {".....", ".....", "####.", "#..#.", "#..#.", "#..#.", "####.", "...#.", "###.."}},
    {'h', 5, {"#....", "#....", "####.", "#..#.", "#..#.", "#..#.", "#..#.", ".....", "....."}},
    {'i', 5, {".#...", ".....", ".#...", ".#...", ".#...", ".#...", ".#...", ".....", "....."}},
    {'j', 5, {"..#..", ".....", "..#..", "..#..", "..#..", "..#..", "..#..", "..#..", "##..."}},
    {'k', 5, {"#....", "#....", "#..#.", "#.#..", "###..", "#.#..", "#..#.", ".....", "....."}},
    {'l', 5, {".#...", ".#...", ".#...", ".#...", ".#...", ".#...", ".#...", ".....", "....."}},
    {'m', 5, {".....", ".....", "##.##", "#.#.#", "#.#.#", "#.#.#", "#.#.#", ".....", "....."}},
    {'n', 5, {".....", ".....", "#.##.", "##..#", "#...#", "#...#", "#...#", ".....", "....."}},
    {'o', 5, {".....", ".....", "####.", "#..#.", "#..#.", "#..#.", "####.", ".....", "....."}},
    {'p', 5, {".....", ".....", "####.", "#..#.", "#..#.", "#..#.", "####.", "#....", "#...."}},
    {'q', 5, {".....", ".....", "####.", "#..#.", "#..#.", "#..#.", "####.", "...#.", "...#."}},
    {'r', 5, {".....", ".....", "#.##.", "##...", "#....", "#....", "#....", ".....", "....."}},
    {'s', 5, {".....", ".....", "####.", "#....", "####.", "...#.", "####.", ".....", "....."}},
    {'t', 5, {".#...", ".#...", "####.", ".#...", ".#...", ".#...", ".#...", ".....", "....."}},
    {'u', 5, {".....", ".....", "#..#.", "#..#.", "#..#.", "#..#.", "####.", ".....", "....."}},
    {'v', 5, {".....", ".....", "#...#", "#...#", "#...#", ".#.#.", "..#..", ".....", "....."}},
    {'w', 5, {".....", ".....", "#...#", "#.#.#", "#.#.#", "#.#.#", ".#.#.", ".....", "....."}},
    {'x', 5, {".....", ".....", "#..#.", ".##..", ".##..", ".##..", "#..#.", ".....", "....."}},
    {'y', 5, {".....", ".....", "#..#.", "#..#.", "#..#.", "#..#.", "####.", "...#.", "###.."}},
    {'z', 5, {".....", ".....", "####.", "..#..", ".#...", "#....", "####.", ".....", "....."}},
};

// Rounded casual face: 6 px wide, tall x-height (rows 1-6), bubbly bowls.
const GlyphSpec kRound[] = {
    {'a', 6, {"......", ".####.", ".....#", ".#####", "#....#", "#....#", ".#####", "......", "......"}},
    {'b', 6, {"#.....", "#####.", "#....#", "#....#", "#....#", "#....#", "#####.", "......", "......"}},
    {'c', 6, {"......", ".####.", "#....#", "#.....", "#.....", "#....#", ".####.", "......", "......"}},
    {'d', 6, {".....#", ".#####", "#....#", "#....#", "#....#", "#....#", ".#####", "......", "......"}},
    {'e', 6, {"......", ".####.", "#....#", "######", "#.....", "#....#", ".####.", "......", "......"}},
    {'f', 6, {"..###.", ".#....", "#####.", ".#....", ".#....", ".#....", ".#....", "......", "......"}},
    {'g', 6, {"......", ".#####", "#....#", "#....#", "#....#", "#....#", ".#####", ".....#", ".####."}},
    {'h', 6, {"#.....", "#.....", "#####.", "#....#", "#....#", "#....#", "#....#", "......", "......"}},
    {'i', 6, {"..##..", "......", "..##..", "..##..", "..##..", "..##..", "..##..", "......", "......"}},
    {'j', 6, {"...##.", "......", "...##.", "...##.", "...##.", "...##.", "...##.", "...##.", ".###.."}},
    {'k', 6, {"#.....", "#.....", "#...#.", "#..#..", "####..", "#...#.", "#....#", "......", "......"}},
    {'l', 6, {"..##..", "..##..", "..##..", "..##..", "..##..", "..##..", "..##..", "......", "......"}},
    {'m', 6, {"......", "##.##.", "#.#..#", "#.#..#", "#.#..#", "#.#..#", "#.#..#", "......", "......"}},
    {'n', 6, {"......", "#.###.", "##...#", "#....#", "#....#", "#....#", "#....#", "......", "......"}},
    {'o', 6, {"......", ".####.", "#....#", "#....#", "#....#", "#....#", ".####.", "......", "......"}},
    {'p', 6, {"......", "#####.", "#....#", "#....#", "#....#", "#....#", "#####.", "#.....", "#....."}},
    {'q', 6, {"......", ".#####", "#....#", "#....#", "#....#", "#....#", ".#####", ".....#", ".....#"}},
    {'r', 6, {"......", "#.###.", "##...#", "#.....", "#.....", "#.....", "#.....", "......", "......"}},
    {'s', 6, {"......", ".#####", "#.....", ".####.", ".....#", ".....#", "#####.", "......", "......"}},
    {'t', 6, {".##...", ".##...", "#####.", ".##...", ".##...", ".##...", "..###.", "......", "......"}},
    {'u', 6, {"......", "#....#", "#....#", "#....#", "#....#", "#....#", ".####.", "......", "......"}},
    {'v', 6, {"......", "#....#", "#....#", "#....#", ".#..#.", ".#..#.", "..##..", "......", "......"}},
    {'w', 6, {"......", "#....#", "#....#", "#....#", "#.##.#", "#.##.#", ".#..#.", "......", "......"}},
    {'x', 6, {"......", "#....#", ".#..#.", "..##..", "..##..", ".#..#.", "#....#", "......", "......"}},
    {'y', 6, {"......", "#....#", "#....#", "#....#", "#....#", "#....#", ".#####", ".....#", ".####."}},
    {'z', 6, {"......", "######", "....#.", "...#..", "..#...", ".#....", "######", "......", "......"}},
};

// Flanker characters, shared across the hand-drawn faces; the derived faces
// transform them like any other glyph.
const GlyphSpec kFlankers[] = {
    {'!', 2, {"#.", "#.", "#.", "#.", "#.", "..", "#.", "..", ".."}},
    {'#', 5, {".#.#.", ".#.#.", "#####", ".#.#.", "#####", ".#.#.", ".#.#.", ".....", "....."}},
    {'$', 5, {"..#..", ".####", "#.#..", ".###.", "..#.#", "####.", "..#..", ".....", "....."}},
    {'%', 5, {"##..#", "##..#", "...#.", "..#..", ".#...", "#..##", "#..##", ".....", "....."}},
    {'&', 5, {".##..", "#..#.", "#..#.", ".##..", "#.#.#", "#..#.", ".##.#", ".....", "....."}},
    {'*', 5, {".....", "..#..", "#.#.#", ".###.", "#.#.#", "..#..", ".....", ".....", "....."}},
    {'+', 5, {".....", "..#..", "..#..", "#####", "..#..", "..#..", ".....", ".....", "....."}},
    {'@', 5, {".###.", "#...#", "#.###", "#.#.#", "#.###", "#....", ".###.", ".....", "....."}},
    {'^', 5, {"..#..", ".#.#.", "#...#", ".....", ".....", ".....", ".....", ".....", "....."}},
};

Glyph make_glyph(const GlyphSpec& spec) {
  Glyph g;
  g.width = spec.width;
  g.height = kLineHeight;
  g.bits.resize(static_cast<size_t>(g.width) * kLineHeight, 0);
  for (int r = 0; r < kLineHeight; ++r) {
    if (static_cast<int>(std::strlen(spec.rows[r])) != spec.width)
      throw Error(std::string("glyph row width mismatch for '") + spec.ch + "'");
    for (int c = 0; c < spec.width; ++c)
      g.bits[static_cast<size_t>(r) * g.width + c] = spec.rows[r][c] == '#' ? 1 : 0;
  }
  return g;
}

/// Widen: duplicate the middle column (bookish proportions).
Glyph widen(const Glyph& src) {
  Glyph g;
  g.width = src.width + 1;
  g.height = src.height;
  g.bits.resize(static_cast<size_t>(g.width) * g.height, 0);
  int mid = src.width / 2;
  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) {
      int sc = c <= mid ? c : c - 1;
      g.bits[static_cast<size_t>(r) * g.width + c] = src.at(r, sc);
    }
  }
  return g;
}

/// Bold: dilate one pixel to the right. Italic: shear upper rows rightwards.
Glyph bold_italic(const Glyph& src) {
  Glyph g;
  g.width = src.width + 3;  // +1 bold, +2 shear
  g.height = src.height;
  g.bits.resize(static_cast<size_t>(g.width) * g.height, 0);
  for (int r = 0; r < g.height; ++r) {
    int shear = (g.height - 1 - r) / 3;  // rows 0-2 shift 2, 3-5 shift 1, 6-8 shift 0
    for (int c = 0; c < src.width; ++c) {
      if (!src.at(r, c)) continue;
      g.bits[static_cast<size_t>(r) * g.width + c + shear] = 1;
      g.bits[static_cast<size_t>(r) * g.width + c + shear + 1] = 1;
    }
  }
  return g;
}

GlyphAtlas build_hand_face(const std::string& id, bool serif, const GlyphSpec* letters, size_t n) {
  GlyphAtlas atlas;
  atlas.font_id = id;
  atlas.line_height = kLineHeight;
  atlas.serif = serif;
  for (size_t i = 0; i < n; ++i) atlas.glyphs[letters[i].ch] = make_glyph(letters[i]);
  for (const auto& spec : kFlankers) atlas.glyphs[spec.ch] = make_glyph(spec);
  return atlas;
}

GlyphAtlas build_derived_face(const std::string& id, const GlyphAtlas& base,
                              Glyph (*transform)(const Glyph&)) {
  GlyphAtlas atlas;
  atlas.font_id = id;
  atlas.line_height = base.line_height;
  atlas.serif = true;
  for (const auto& [ch, glyph] : base.glyphs) atlas.glyphs[ch] = transform(glyph);
  return atlas;
}

void validate(const GlyphAtlas& atlas) {
  for (char c = 'a'; c <= 'z'; ++c)
    if (!atlas.covers(c)) throw Error(atlas.font_id + ": missing letter glyph");
  for (char c : kFlankerChars)
    if (!atlas.covers(c)) throw Error(atlas.font_id + ": missing flanker glyph");
  for (const auto& [ch, g] : atlas.glyphs)
    if (g.height > atlas.line_height) throw Error(atlas.font_id + ": glyph taller than line");
}

const std::map<std::string, GlyphAtlas>& all_atlases() {
  static std::map<std::string, GlyphAtlas> atlases;
  static std::once_flag once;
  std::call_once(once, [] {
    atlases["mono_serif"] = build_hand_face("mono_serif", true, kMonoSerif, std::size(kMonoSerif));
    atlases["sans"] = build_hand_face("sans", false, kSans, std::size(kSans));
    atlases["round"] = build_hand_face("round", false, kRound, std::size(kRound));
    atlases["book"] = build_derived_face("book", atlases["mono_serif"], widen);
    atlases["bold_italic"] = build_derived_face("bold_italic", atlases["mono_serif"], bold_italic);
    for (const auto& [id, atlas] : atlases) validate(atlas);
  });
  return atlases;
}

}  // namespace

bool GlyphAtlas::covers_word(const std::string& w) const {
  for (char c : w)
    if (!covers(c)) return false;
  return true;
}

const Glyph& GlyphAtlas::glyph(char c) const {
  auto it = glyphs.find(c);
  if (it == glyphs.end())
    throw Error(font_id + ": no glyph for '" + std::string(1, c) + "'");
  return it->second;
}

int GlyphAtlas::word_width(const std::string& w) const {
  if (w.empty()) return 0;
  int width = static_cast<int>(w.size()) - 1;  // 1-px gaps
  for (char c : w) width += glyph(c).width;
  return width;
}

const std::vector<std::string>& font_ids() {
  static const std::vector<std::string> ids = {"mono_serif", "sans", "round", "book",
                                               "bold_italic"};
  return ids;
}

const std::string& default_font_id() { return font_ids()[0]; }

std::vector<std::string> font_palette(int n_fonts) {
  if (n_fonts != 1 && n_fonts != 3 && n_fonts != 5)
    throw ConfigError("font palette size must be 1, 3 or 5");
  const auto& ids = font_ids();
  return std::vector<std::string>(ids.begin(), ids.begin() + n_fonts);
}

const GlyphAtlas& builtin_atlas(const std::string& font_id) {
  const auto& atlases = all_atlases();
  auto it = atlases.find(font_id);
  if (it == atlases.end()) throw ConfigError("unknown font: " + font_id);
  return it->second;
}

void save_atlas(const GlyphAtlas& atlas, const std::string& base_path) {
  // Raster strip: glyphs left to right separated by one blank column.
  int total = 0;
  for (const auto& [ch, g] : atlas.glyphs) total += g.width + 1;
  Image strip(total, atlas.line_height);
  nlohmann::json meta;
  meta["font_id"] = atlas.font_id;
  meta["line_height"] = atlas.line_height;
  meta["style"] = atlas.serif ? "serif" : "sans-serif";
  nlohmann::json entries = nlohmann::json::array();
  int x = 0;
  for (const auto& [ch, g] : atlas.glyphs) {
    for (int r = 0; r < g.height; ++r)
      for (int c = 0; c < g.width; ++c)
        strip.at(r, x + c) = g.at(r, c) ? 255 : 0;
    entries.push_back({{"char", std::string(1, ch)}, {"x", x}, {"width", g.width}});
    x += g.width + 1;
  }
  meta["glyphs"] = entries;
  write_pgm(strip, base_path + ".pgm");
  std::ofstream out(base_path + ".json");
  if (!out) throw IoError("cannot write atlas sidecar: " + base_path + ".json");
  out << meta.dump(2) << '\n';
}

GlyphAtlas load_atlas(const std::string& base_path) {
  std::ifstream in(base_path + ".json");
  if (!in) throw IoError("cannot read atlas sidecar: " + base_path + ".json");
  nlohmann::json meta = nlohmann::json::parse(in);
  Image strip = read_pgm(base_path + ".pgm");

  GlyphAtlas atlas;
  atlas.font_id = meta.at("font_id").get<std::string>();
  atlas.line_height = meta.at("line_height").get<int>();
  atlas.serif = meta.at("style").get<std::string>() == "serif";
  for (const auto& e : meta.at("glyphs")) {
    std::string ch = e.at("char").get<std::string>();
    int x = e.at("x").get<int>();
    int width = e.at("width").get<int>();
    Glyph g;
    g.width = width;
    g.height = atlas.line_height;
    g.bits.resize(static_cast<size_t>(width) * atlas.line_height);
    for (int r = 0; r < g.height; ++r)
      for (int c = 0; c < width; ++c)
        g.bits[static_cast<size_t>(r) * width + c] = strip.at(r, x + c) > 127 ? 1 : 0;
    atlas.glyphs[ch.at(0)] = g;
  }
  validate(atlas);
  return atlas;
}

}  // namespace strlab
