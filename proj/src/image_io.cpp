#include "ratgan/image_io.hpp"

#include "ratgan/errors.hpp"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace ratgan {

uint8_t ppm_quantize(double v) {
  const double x = (v + 1.0) * 127.5;
  double r = std::floor(x);
  const double frac = x - r;
  if (frac > 0.5 || (frac == 0.5 && std::fmod(r, 2.0) != 0.0)) r += 1.0;
  if (r < 0.0) r = 0.0;
  if (r > 255.0) r = 255.0;
  return static_cast<uint8_t>(r);
}

void write_ppm(const Tensor& img, const std::string& path) {
  if (img.shape().size() != 3 || img.shape()[0] != 3) {
    throw ShapeError("write_ppm: want [3,H,W], got " + img.shape_str());
  }
  const int h = img.shape()[1];
  const int w = img.shape()[2];
  const size_t plane = static_cast<size_t>(h) * w;

  std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  out.reserve(out.size() + plane * 3);
  for (size_t px = 0; px < plane; ++px) {
    for (int c = 0; c < 3; ++c) {
      out.push_back(static_cast<char>(ppm_quantize(img.data()[c * plane + px])));
    }
  }

  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw UsageError("cannot write image '" + path + "'");
  const size_t written = std::fwrite(out.data(), 1, out.size(), f);
  const bool ok = written == out.size() && std::fclose(f) == 0;
  if (!ok) throw UsageError("short write on image '" + path + "'");
}

}  // namespace ratgan
