#pragma once

#include <cstdint>
#include <vector>

#include "dgan/tensor.hpp"

namespace dgan {

// Model-facing images are {C,H,W} tensors with values in [-1,1]; raw pixel
// buffers are interleaved HWC bytes. Differential images are plain
// subtractions with values in [-2,2] and are never rescaled.

// v -> v/127.5 - 1. raw.size() must equal h*w*c.
Tensor normalize_image(const std::vector<uint8_t>& raw, int h, int w, int c = 3);

// Inverse of normalize_image: rounds half away from zero, clamps to [0,255].
std::vector<uint8_t> denormalize_image(const Tensor& img);

// Elementwise x - y. Shapes must match.
Tensor differential(const Tensor& x, const Tensor& y);

// Label codes are attribute-intensity vectors with entries in [0,1].
using LabelCode = std::vector<double>;

void validate_label_code(const LabelCode& code);

}  // namespace dgan
