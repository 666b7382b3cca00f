#include "mvap/image.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace mvap {

void write_ppm(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  char header[64];
  const int n = std::snprintf(header, sizeof(header), "P6\n%d %d\n255\n",
                              img.width, img.height);
  out.write(header, n);
  out.write(reinterpret_cast<const char*>(img.rgb.data()),
            static_cast<std::streamsize>(img.rgb.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

int read_ppm_token(std::istream& in, const std::string& path) {
  // Skips whitespace and '#' comments per the PPM grammar.
  int c = in.get();
  while (c == '#' || c == ' ' || c == '\t' || c == '\n' || c == '\r') {
    if (c == '#')
      while (c != '\n' && c != EOF) c = in.get();
    c = in.get();
  }
  int value = 0;
  bool any = false;
  while (c >= '0' && c <= '9') {
    value = value * 10 + (c - '0');
    any = true;
    c = in.get();
  }
  if (!any) throw std::runtime_error("malformed PPM header: " + path);
  return value;
}

}  // namespace

Image read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P' || magic[1] != '6')
    throw std::runtime_error("not a P6 PPM: " + path);
  Image img;
  img.width = read_ppm_token(in, path);
  img.height = read_ppm_token(in, path);
  const int maxval = read_ppm_token(in, path);
  if (maxval != 255)
    throw std::runtime_error("unsupported PPM maxval in " + path);
  if (img.width <= 0 || img.height <= 0)
    throw std::runtime_error("bad PPM dimensions: " + path);
  img.rgb.resize(3 * static_cast<std::size_t>(img.width) * img.height);
  in.read(reinterpret_cast<char*>(img.rgb.data()),
          static_cast<std::streamsize>(img.rgb.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.rgb.size()))
    throw std::runtime_error("truncated PPM: " + path);
  return img;
}

}  // namespace mvap
