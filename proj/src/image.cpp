#include "strlab/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace strlab {

void write_pgm(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write PGM: " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw IoError("PGM write failed: " + path);
}

Image read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read PGM: " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw IoError("not a binary PGM (P5): " + path);
  auto next_int = [&in, &path]() {
    // Skip whitespace and '#' comment lines between header fields.
    int c = in.get();
    while (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '#') {
      if (c == '#')
        while (c != '\n' && c != EOF) c = in.get();
      c = in.get();
    }
    int v = 0;
    bool any = false;
    while (c >= '0' && c <= '9') {
      v = v * 10 + (c - '0');
      any = true;
      c = in.get();
    }
    if (!any) throw IoError("malformed PGM header: " + path);
    return v;
  };
  int w = next_int();
  int h = next_int();
  int maxval = next_int();
  if (maxval != 255) throw IoError("unsupported PGM maxval: " + path);
  Image img(w, h);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    throw IoError("truncated PGM payload: " + path);
  return img;
}

Image resize_bilinear(const Image& img, int w, int h) {
  if (w < 1 || h < 1) throw Error("resize: target dims must be >= 1");
  if (w == img.width && h == img.height) return img;

  Image out(w, h);
  double sx = static_cast<double>(img.width) / w;
  double sy = static_cast<double>(img.height) / h;
  for (int y = 0; y < h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    int y0 = static_cast<int>(std::floor(fy));
    double wy = fy - y0;
    int y1 = std::min(y0 + 1, img.height - 1);
    y0 = std::max(y0, 0);
    for (int x = 0; x < w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      int x0 = static_cast<int>(std::floor(fx));
      double wx = fx - x0;
      int x1 = std::min(x0 + 1, img.width - 1);
      x0 = std::max(x0, 0);
      double top = (1.0 - wx) * img.at(y0, x0) + wx * img.at(y0, x1);
      double bot = (1.0 - wx) * img.at(y1, x0) + wx * img.at(y1, x1);
      double v = (1.0 - wy) * top + wy * bot;
      out.at(y, x) = static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  }
  return out;
}

}  // namespace strlab
