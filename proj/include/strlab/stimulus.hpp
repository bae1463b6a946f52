#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "strlab/corpus.hpp"
#include "strlab/font.hpp"
#include "strlab/image.hpp"

namespace strlab {

// ---------------------------------------------------------------------------
// Manipulations

enum class OcclusionMode { kBottomUp, kTopDown };

struct NoManipulation {};
struct OccludeBottomUp {
  int percent = 0;  // multiple of 10 in [0,100]
};
struct OccludeTopDown {
  int percent = 0;
};
struct Flankers {
  std::string chars;  // 3 distinct chars from kFlankerChars
  uint64_t seed = 0;
};
struct SaltPepper {
  double p = 0.15;
  uint64_t seed = 0;
};
struct FontOverride {
  std::string font_id;
};

using Manipulation =
    std::variant<NoManipulation, OccludeBottomUp, OccludeTopDown, Flankers, SaltPepper, FontOverride>;

std::string manipulation_name(const Manipulation& m);

struct Sample {
  Image image;
  std::string label;  // a-z only; flankers never appear here
  Manipulation manipulation;
  std::string font_id;
};

// ---------------------------------------------------------------------------
// Core operations

/// Blit the word's glyphs left to right with 1-px gaps, centered on the
/// 100x11 black canvas, ink white. Throws if the word is empty, contains an
/// uncovered character, or is too wide for the canvas.
Image render_word(const std::string& word, const GlyphAtlas& atlas);

/// Black out round(percent/100 * height/2) rows from the bottom (bottom_up)
/// or the top (top_down); rounding is half-up. Everything else unchanged.
Image occlude(const Image& img, OcclusionMode mode, int percent);

/// Render `word` and place three flankers (drawn without replacement from
/// the nine-character set) at seeded-random non-overlapping positions
/// strictly outside the word's horizontal extent. Throws when the margins
/// cannot hold three flanker glyphs.
Sample add_flankers(const std::string& word, const GlyphAtlas& atlas, uint64_t seed);

/// Independently replace each pixel with probability p; a replaced pixel
/// becomes 0 or 255 with equal probability. Deterministic per seed.
Image salt_pepper(const Image& img, double p, uint64_t seed);

/// As salt_pepper, but also reports which pixels were replaced (for the
/// statistical acceptance checks).
Image salt_pepper_with_mask(const Image& img, double p, uint64_t seed,
                            std::vector<uint8_t>* replaced);

// resize lives in image.hpp (resize_bilinear).

// ---------------------------------------------------------------------------
// Image sets

/// The eight paper-style image sets plus the three length-subset variants
/// of all_words.
const std::vector<std::string>& image_set_names();
bool is_image_set_name(const std::string& name);

struct ImageSetSpec {
  std::string name;
  uint64_t seed = 0;
  std::string split = "train";  // train|test (metadata only)
};

struct Dataset {
  ImageSetSpec spec;
  std::vector<Sample> samples;
};

/// Assemble one image set over `words`. Each sample derives its own seed as
/// derive_seed(spec.seed, index) so parallel and serial assembly are
/// byte-identical. Recipes:
///   all_words          no manipulation, default font
///   bottom_up/top_down percent uniform on {0,10,...,100}
///   flankers           every word flanked (default font)
///   fonts3/fonts5      font uniform over the 3-/5-font palette
///   noise              salt-pepper p=0.15 on every word
///   all_manipulations  exactly one of nine: occ-bu(>=10), occ-td(>=10),
///                      flankers, noise, font override x5
///   5_letter/4_6_letter/3_7_letter  all_words recipe on the length subset
Dataset build_image_set(const ImageSetSpec& spec, const WordList& words);

/// Apply one manipulation to one word (the single-sample recipe step).
Sample make_sample(const std::string& word, const Manipulation& manip);

// ---------------------------------------------------------------------------
// Containers

/// Packed binary container (little-endian): header (magic "STIM", version,
/// count, width, height) then per-sample records: label_len u8, label bytes,
/// font_id_len u8, font_id, manip tag u8, percent u8, p f64, seed u64,
/// pixel payload (width*height bytes).
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

/// Human-readable manifest (JSON): set name, seed, split, recipe, counts.
void save_dataset_manifest(const Dataset& ds, const std::string& path);

}  // namespace strlab
