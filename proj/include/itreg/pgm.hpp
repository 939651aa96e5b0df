#pragma once

// Binary 8-bit greyscale PGM (P5, maxval 255).

#include "itreg/core.hpp"
#include "itreg/imaging.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace itreg {

inline unsigned char to_byte(double v) {
  const double c = std::clamp(v, 0.0, 1.0) * 255.0;
  return static_cast<unsigned char>(std::floor(c + 0.5));
}

inline void write_pgm(std::ostream& out, const Image& img) {
  out << "P5\n" << img.side << ' ' << img.side << "\n255\n";
  for (Index k = 0; k < img.pixels.size(); ++k) out.put(static_cast<char>(to_byte(img.pixels[k])));
  if (!out) throw FormatError("pgm: write failed");
}

inline void write_pgm(const std::string& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("pgm: cannot open " + path);
  write_pgm(out, img);
}

namespace detail {
inline long pgm_header_int(std::istream& in) {
  int c = in.peek();
  while (c != EOF) {
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
    c = in.peek();
  }
  long v = 0;
  if (!(in >> v)) throw FormatError("pgm: malformed header");
  return v;
}
}  // namespace detail

/// Reads a square P5 image with maxval 255; pixels become byte / 255.
inline Image read_pgm(std::istream& in) {
  std::string magic;
  if (!(in >> magic) || magic != "P5") throw FormatError("pgm: expected P5 magic");
  const long w = detail::pgm_header_int(in);
  const long h = detail::pgm_header_int(in);
  const long maxval = detail::pgm_header_int(in);
  if (w < 1 || h < 1) throw FormatError("pgm: bad dimensions");
  if (maxval != 255) throw FormatError("pgm: only maxval 255 is supported");
  if (w != h) throw FormatError("pgm: image must be square");
  in.get();  // single whitespace before the raster
  Image img = Image::zeros(w);
  for (Index k = 0; k < img.pixels.size(); ++k) {
    const int c = in.get();
    if (c == EOF) throw FormatError("pgm: truncated raster");
    img.pixels[k] = static_cast<double>(c) / 255.0;
  }
  return img;
}

inline Image read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("pgm: cannot open " + path);
  return read_pgm(in);
}

}  // namespace itreg
