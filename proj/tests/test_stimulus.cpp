#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "strlab/errors.hpp"
#include "strlab/rng.hpp"
#include "strlab/stimulus.hpp"

using namespace strlab;
namespace fs = std::filesystem;

namespace {

struct BBox {
  int r0 = 1 << 30, r1 = -1, c0 = 1 << 30, c1 = -1;
  bool empty() const { return r1 < 0; }
};

BBox ink_bbox(const Image& img) {
  BBox b;
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c)
      if (img.at(r, c) > 0) {
        b.r0 = std::min(b.r0, r);
        b.r1 = std::max(b.r1, r);
        b.c0 = std::min(b.c0, c);
        b.c1 = std::max(b.c1, c);
      }
  return b;
}

size_t ink_count(const Image& img) {
  size_t n = 0;
  for (uint8_t p : img.pixels) n += p > 0;
  return n;
}

/// Independent scalar-loop bilinear resampler (same half-pixel convention).
Image reference_bilinear(const Image& src, int w, int h) {
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double fy = (y + 0.5) * src.height / static_cast<double>(h) - 0.5;
      double fx = (x + 0.5) * src.width / static_cast<double>(w) - 0.5;
      int y0 = static_cast<int>(std::floor(fy)), x0 = static_cast<int>(std::floor(fx));
      double dy = fy - y0, dx = fx - x0;
      auto sample = [&](int yy, int xx) {
        yy = std::min(std::max(yy, 0), src.height - 1);
        xx = std::min(std::max(xx, 0), src.width - 1);
        return static_cast<double>(src.at(yy, xx));
      };
      double v = (1 - dy) * ((1 - dx) * sample(y0, x0) + dx * sample(y0, x0 + 1)) +
                 dy * ((1 - dx) * sample(y0 + 1, x0) + dx * sample(y0 + 1, x0 + 1));
      out.at(y, x) = static_cast<uint8_t>(std::lround(v));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("render_word rejects degenerate input") {
  const auto& atlas = builtin_atlas(default_font_id());
  CHECK_THROWS_AS(render_word("", atlas), Error);
  CHECK_THROWS_AS(render_word("abQ", atlas), Error);  // uppercase is uncovered
  // 17 mono glyphs at 5+1 px each exceed the 100-px canvas.
  CHECK_THROWS_AS(render_word("aaaaaaaaaaaaaaaaa", atlas), Error);
}

TEST_CASE("render_word conserves ink and hits only atlas values") {
  const auto& atlas = builtin_atlas(default_font_id());
  Image img = render_word("jogady", atlas);
  CHECK(img.width == kCanvasWidth);
  CHECK(img.height == kCanvasHeight);
  std::set<uint8_t> values(img.pixels.begin(), img.pixels.end());
  for (uint8_t v : values) CHECK((v == 0 || v == 255));

  size_t glyph_area = 0;
  for (char c : std::string("jogady")) {
    const Glyph& g = atlas.glyph(c);
    for (uint8_t b : g.bits) glyph_area += b;
  }
  CHECK(ink_count(img) == glyph_area);  // non-overlapping blits
  CHECK(img.pixels.size() - ink_count(img) >=
        img.pixels.size() - glyph_area);  // background floor
}

TEST_CASE("render_word centers the word within a pixel on both axes") {
  const auto& atlas = builtin_atlas(default_font_id());
  Image img = render_word("model", atlas);
  BBox b = ink_bbox(img);
  REQUIRE(!b.empty());
  double cx = (b.c0 + b.c1) / 2.0;
  double cy = (b.r0 + b.r1) / 2.0;
  CHECK(std::fabs(cx - (kCanvasWidth - 1) / 2.0) <= 1.0);
  CHECK(std::fabs(cy - (kCanvasHeight - 1) / 2.0) <= 1.0);
}

TEST_CASE("occlude: percent 0 is identity") {
  Image img = render_word("jogady", builtin_atlas(default_font_id()));
  CHECK(occlude(img, OcclusionMode::kBottomUp, 0) == img);
  CHECK(occlude(img, OcclusionMode::kTopDown, 0) == img);
}

TEST_CASE("occlude: pixel-count oracle at 100 percent of the bottom half") {
  Image img(kCanvasWidth, kCanvasHeight, 200);
  Image out = occlude(img, OcclusionMode::kBottomUp, 100);
  // round(100/100 * 11/2) = round(5.5) = 6 rows blacked, rows 0..4 intact.
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < out.width; ++c) CHECK(out.at(r, c) == 200);
  for (int r = 5; r < 11; ++r)
    for (int c = 0; c < out.width; ++c) CHECK(out.at(r, c) == 0);
}

TEST_CASE("occlude: row masks are exact for the full grid") {
  Image img(20, 11, 77);
  for (int percent = 0; percent <= 100; percent += 10) {
    int rows = static_cast<int>(std::floor(percent / 100.0 * 11 / 2.0 + 0.5));
    Image bu = occlude(img, OcclusionMode::kBottomUp, percent);
    Image td = occlude(img, OcclusionMode::kTopDown, percent);
    size_t black_bu = 0, black_td = 0;
    for (int r = 0; r < 11; ++r)
      for (int c = 0; c < 20; ++c) {
        black_bu += bu.at(r, c) == 0;
        black_td += td.at(r, c) == 0;
      }
    CHECK(black_bu == static_cast<size_t>(rows) * 20);
    CHECK(black_td == static_cast<size_t>(rows) * 20);
  }
}

TEST_CASE("occlude: composed top and bottom masks leave only middle rows") {
  Image img(10, 11, 255);
  // 90%: round(4.95) = 5 rows each side; row 5 is the only survivor.
  Image both = occlude(occlude(img, OcclusionMode::kTopDown, 90), OcclusionMode::kBottomUp, 90);
  for (int c = 0; c < 10; ++c) CHECK(both.at(5, c) == 255);
  CHECK(ink_count(both) == 10);
  // 100%: 6 + 6 rows cover all 11; nothing survives.
  Image none = occlude(occlude(img, OcclusionMode::kTopDown, 100), OcclusionMode::kBottomUp, 100);
  CHECK(ink_count(none) == 0);
}

TEST_CASE("add_flankers never touches the word and is deterministic") {
  const auto& atlas = builtin_atlas(default_font_id());
  Image bare = render_word("be", atlas);
  BBox word_box = ink_bbox(bare);

  Sample s1 = add_flankers("be", atlas, 42);
  Sample s2 = add_flankers("be", atlas, 42);
  CHECK(s1.image == s2.image);
  CHECK(s1.label == "be");
  CHECK(std::get<Flankers>(s1.manipulation).chars.size() == 3);

  // Word pixels unchanged, no flanker ink inside the word's columns.
  for (int r = 0; r < bare.height; ++r)
    for (int c = word_box.c0; c <= word_box.c1; ++c)
      CHECK(s1.image.at(r, c) == bare.at(r, c));

  Sample s3 = add_flankers("be", atlas, 43);
  CHECK(s1.image.pixels != s3.image.pixels);
}

TEST_CASE("add_flankers draws characters uniformly over the nine") {
  const auto& atlas = builtin_atlas(default_font_id());
  std::map<char, int> counts;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    Sample s = add_flankers("cat", atlas, 1000 + static_cast<uint64_t>(i));
    for (char c : std::get<Flankers>(s.manipulation).chars) ++counts[c];
  }
  int total = 3 * n;
  for (char c : kFlankerChars) {
    double freq = counts[c] / static_cast<double>(total);
    CHECK(std::fabs(freq - 1.0 / 9.0) < 0.05);
  }
}

TEST_CASE("add_flankers errors when the margins are too tight") {
  const auto& atlas = builtin_atlas(default_font_id());
  // 15 glyphs: width 15*6-1=89, leaving 11 px total margin < 3 slots.
  CHECK_THROWS_AS(add_flankers("aaaaaaaaaaaaaaa", atlas, 1), Error);
}

TEST_CASE("salt_pepper: p=0 identity, p=1 saturates") {
  Image img = render_word("voxel", builtin_atlas(default_font_id()));
  CHECK(salt_pepper(img, 0.0, 9) == img);
  Image full = salt_pepper(img, 1.0, 9);
  for (uint8_t p : full.pixels) CHECK((p == 0 || p == 255));
}

TEST_CASE("salt_pepper is deterministic and mask matches the diff") {
  Image img = render_word("pixel", builtin_atlas(default_font_id()));
  std::vector<uint8_t> mask;
  Image a = salt_pepper_with_mask(img, 0.3, 77, &mask);
  Image b = salt_pepper(img, 0.3, 77);
  CHECK(a == b);
  for (size_t i = 0; i < mask.size(); ++i)
    if (a.pixels[i] != img.pixels[i]) CHECK(mask[i] == 1);
}

TEST_CASE("salt_pepper replacement statistics at p=0.15") {
  // On 0/255 images half the replacements keep the original value, so the
  // visible-change fraction concentrates near 0.15/2.
  const auto& atlas = builtin_atlas(default_font_id());
  WordList words = synthetic_wordlist(1000, 5);
  size_t diff = 0, replaced = 0, total = 0;
  for (size_t i = 0; i < words.words.size(); ++i) {
    Image img = render_word(words.words[i], atlas);
    std::vector<uint8_t> mask;
    Image noisy = salt_pepper_with_mask(img, 0.15, derive_seed(3, i), &mask);
    for (size_t j = 0; j < mask.size(); ++j) {
      replaced += mask[j];
      diff += noisy.pixels[j] != img.pixels[j];
    }
    total += mask.size();
  }
  double replaced_frac = static_cast<double>(replaced) / static_cast<double>(total);
  double diff_frac = static_cast<double>(diff) / static_cast<double>(total);
  CHECK(std::fabs(replaced_frac - 0.15) < 0.02);
  CHECK(std::fabs(diff_frac - 0.075) < 0.02);
}

TEST_CASE("resize: identity and constant preservation") {
  Image img = render_word("resize", builtin_atlas(default_font_id()));
  CHECK(resize_bilinear(img, img.width, img.height) == img);

  Image constant(10, 7, 123);
  Image big = resize_bilinear(constant, 33, 17);
  for (uint8_t p : big.pixels) CHECK(p == 123);
}

TEST_CASE("resize matches an independent scalar-loop bilinear oracle") {
  Image img = render_word("owl", builtin_atlas(default_font_id()));
  Image ours = resize_bilinear(img, 100, 32);
  Image ref = reference_bilinear(img, 100, 32);
  for (size_t i = 0; i < ours.pixels.size(); ++i)
    CHECK(std::abs(int(ours.pixels[i]) - int(ref.pixels[i])) <= 1);

  Image wide = resize_bilinear(img, 280, 32);
  Image wide_ref = reference_bilinear(img, 280, 32);
  for (size_t i = 0; i < wide.pixels.size(); ++i)
    CHECK(std::abs(int(wide.pixels[i]) - int(wide_ref.pixels[i])) <= 1);
}

TEST_CASE("build_image_set: all_words recipe") {
  WordList words = synthetic_wordlist(10, 1);
  Dataset ds = build_image_set({"all_words", 5, "train"}, words);
  CHECK(ds.samples.size() == 10);
  for (const auto& s : ds.samples) {
    CHECK(std::holds_alternative<NoManipulation>(s.manipulation));
    CHECK(s.font_id == default_font_id());
  }
}

TEST_CASE("build_image_set: bottom_up set draws grid percents only") {
  WordList words = synthetic_wordlist(200, 2);
  Dataset ds = build_image_set({"bottom_up", 6, "train"}, words);
  for (const auto& s : ds.samples) {
    const auto* ob = std::get_if<OccludeBottomUp>(&s.manipulation);
    REQUIRE(ob != nullptr);
    CHECK(ob->percent % 10 == 0);
    CHECK(ob->percent >= 0);
    CHECK(ob->percent <= 100);
  }
}

TEST_CASE("build_image_set: all_manipulations draws each of nine uniformly") {
  WordList words = synthetic_wordlist(9000, 4);
  Dataset ds = build_image_set({"all_manipulations", 8, "train"}, words);
  std::map<std::string, int> counts;
  for (const auto& s : ds.samples) {
    std::string name = manipulation_name(s.manipulation);
    if (name == "font_override") name += ":" + std::get<FontOverride>(s.manipulation).font_id;
    ++counts[name];
  }
  REQUIRE(counts.size() == 9);
  for (const auto& [name, count] : counts) {
    CHECK(count > 900);
    CHECK(count < 1100);
  }
}

TEST_CASE("build_image_set is byte-deterministic and label-preserving") {
  WordList words = synthetic_wordlist(50, 6);
  Dataset a = build_image_set({"all_manipulations", 123, "train"}, words);
  Dataset b = build_image_set({"all_manipulations", 123, "train"}, words);
  REQUIRE(a.samples.size() == b.samples.size());
  for (size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].image == b.samples[i].image);
    CHECK(a.samples[i].label == words.words[i]);
    for (char c : a.samples[i].label) {
      CHECK(c >= 'a');
      CHECK(c <= 'z');
    }
  }
  CHECK_THROWS_AS(build_image_set({"mystery_set", 1, "train"}, words), ConfigError);
}

TEST_CASE("length-subset sets restrict as named") {
  WordList words = synthetic_wordlist(500, 10);
  Dataset ds = build_image_set({"3_7_letter", 2, "test"}, words);
  CHECK(!ds.samples.empty());
  for (const auto& s : ds.samples)
    CHECK((s.label.size() == 3 || s.label.size() == 7));
}

TEST_CASE("dataset container round-trips byte-exactly") {
  WordList words = synthetic_wordlist(40, 8);
  Dataset ds = build_image_set({"all_manipulations", 99, "test"}, words);
  auto path = (fs::temp_directory_path() / "ds_roundtrip.bin").string();
  save_dataset(ds, path);
  Dataset back = load_dataset(path);
  REQUIRE(back.samples.size() == ds.samples.size());
  for (size_t i = 0; i < ds.samples.size(); ++i) {
    CHECK(back.samples[i].image == ds.samples[i].image);
    CHECK(back.samples[i].label == ds.samples[i].label);
    CHECK(back.samples[i].font_id == ds.samples[i].font_id);
    CHECK(manipulation_name(back.samples[i].manipulation) ==
          manipulation_name(ds.samples[i].manipulation));
  }
}

TEST_CASE("PGM round-trip") {
  Image img = render_word("pgm", builtin_atlas("round"));
  auto path = (fs::temp_directory_path() / "img.pgm").string();
  write_pgm(img, path);
  CHECK(read_pgm(path) == img);
}

TEST_CASE("atlas strip + sidecar round-trip") {
  const auto& atlas = builtin_atlas("sans");
  auto base = (fs::temp_directory_path() / "sans_atlas").string();
  save_atlas(atlas, base);
  GlyphAtlas back = load_atlas(base);
  CHECK(back.font_id == atlas.font_id);
  CHECK(back.line_height == atlas.line_height);
  CHECK(back.serif == atlas.serif);
  REQUIRE(back.glyphs.size() == atlas.glyphs.size());
  for (const auto& [c, g] : atlas.glyphs) CHECK(back.glyph(c).bits == g.bits);
}

TEST_CASE("all five atlases cover letters and flankers with distinct glyphs") {
  for (const auto& id : font_ids()) {
    const auto& atlas = builtin_atlas(id);
    for (char c = 'a'; c <= 'z'; ++c) CHECK(atlas.covers(c));
    for (char c : kFlankerChars) CHECK(atlas.covers(c));
    // Every letter pair must differ or the task is ill-posed.
    for (char a = 'a'; a <= 'z'; ++a)
      for (char b = static_cast<char>(a + 1); b <= 'z'; ++b)
        CHECK((atlas.glyph(a).bits != atlas.glyph(b).bits ||
               atlas.glyph(a).width != atlas.glyph(b).width));
  }
  // Fonts must differ from each other on most letters (they are the font
  // axis of the experiment).
  for (size_t i = 0; i < font_ids().size(); ++i) {
    for (size_t j = i + 1; j < font_ids().size(); ++j) {
      const auto& a = builtin_atlas(font_ids()[i]);
      const auto& b = builtin_atlas(font_ids()[j]);
      int differing = 0;
      for (char c = 'a'; c <= 'z'; ++c)
        if (a.glyph(c).width != b.glyph(c).width || a.glyph(c).bits != b.glyph(c).bits)
          ++differing;
      CHECK(differing >= 20);
    }
  }
}

TEST_CASE("the un-manipulated image is shared across recipes that keep the base font") {
  WordList words;
  words.words = {"stone"};
  Image direct = render_word("stone", builtin_atlas(default_font_id()));
  Dataset all_words = build_image_set({"all_words", 1, "train"}, words);
  CHECK(all_words.samples[0].image == direct);
  CHECK(occlude(direct, OcclusionMode::kBottomUp, 0) == direct);
  Dataset fonts(build_image_set({"fonts5", 1, "train"}, words));
  if (fonts.samples[0].font_id == default_font_id())
    CHECK(fonts.samples[0].image == direct);
}
