#pragma once

#include <map>
#include <string>
#include <vector>

#include "strlab/image.hpp"

namespace strlab {

/// The nine flanker characters; labels never contain any of these.
inline const std::string kFlankerChars = "!#$%&*+@^";

/// One glyph bitmap; rows are line_height tall, values 0 or 1.
struct Glyph {
  int width = 0;
  int height = 0;  // == atlas line_height
  std::vector<uint8_t> bits;

  uint8_t at(int row, int col) const { return bits[static_cast<size_t>(row) * width + col]; }
};

/// Fixed-pitch bitmap face covering a-z plus the flanker characters.
struct GlyphAtlas {
  std::string font_id;
  int line_height = 0;
  bool serif = false;
  std::map<char, Glyph> glyphs;

  bool covers(char c) const { return glyphs.count(c) != 0; }
  bool covers_word(const std::string& w) const;
  const Glyph& glyph(char c) const;

  /// Rendered width of a word at a 1-pixel inter-glyph gap.
  int word_width(const std::string& w) const;
};

/// The bundled palette, in order: mono_serif (default), sans, round, book,
/// bold_italic. The first three form the 3-font palette, all five the
/// 5-font palette.
const std::vector<std::string>& font_ids();
const std::string& default_font_id();
std::vector<std::string> font_palette(int n_fonts);  // n in {1,3,5}

/// Built-in atlases (constructed once, immutable).
const GlyphAtlas& builtin_atlas(const std::string& font_id);

/// Atlas container: raster strip (PGM, glyphs left to right with 1-px
/// separators) plus a JSON metrics sidecar at <base>.json.
void save_atlas(const GlyphAtlas& atlas, const std::string& base_path);
GlyphAtlas load_atlas(const std::string& base_path);

}  // namespace strlab
