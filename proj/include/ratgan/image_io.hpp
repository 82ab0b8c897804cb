#pragma once

#include "ratgan/tensor.hpp"

#include <cstdint>
#include <string>

namespace ratgan {

// Maps one channel value from [-1,1] to a byte: (v+1)*127.5 rounded to the
// nearest integer with ties going to the even neighbor, clamped to [0,255].
// Independent of the ambient floating-point rounding mode.
uint8_t ppm_quantize(double v);

// Binary PPM (P6, maxval 255) from a [3,H,W] tensor in [-1,1].
void write_ppm(const Tensor& img, const std::string& path);

}  // namespace ratgan
