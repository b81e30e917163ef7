#include "dgan/image.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dgan {

Tensor normalize_image(const std::vector<uint8_t>& raw, int h, int w, int c) {
    if (h <= 0 || w <= 0 || (c != 1 && c != 3))
        throw std::invalid_argument("normalize_image: bad dims " + std::to_string(h) + "x" +
                                    std::to_string(w) + "x" + std::to_string(c));
    const size_t want = static_cast<size_t>(h) * w * c;
    if (raw.size() != want)
        throw std::invalid_argument("normalize_image: expected " + std::to_string(want) +
                                    " bytes for " + std::to_string(h) + "x" + std::to_string(w) +
                                    "x" + std::to_string(c) + ", got " + std::to_string(raw.size()));
    Tensor img({c, h, w});
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < c; ++ch)
                img.at3(ch, y, x) = raw[(static_cast<size_t>(y) * w + x) * c + ch] / 127.5 - 1.0;
    return img;
}

std::vector<uint8_t> denormalize_image(const Tensor& img) {
    if (img.rank() != 3)
        throw std::invalid_argument("denormalize_image: expected a {C,H,W} tensor, got " +
                                    shape_str(img.shape()));
    const int c = img.dim(0), h = img.dim(1), w = img.dim(2);
    std::vector<uint8_t> raw(static_cast<size_t>(h) * w * c);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int ch = 0; ch < c; ++ch) {
                // Half-away-from-zero; the domain is nonnegative after the +1 shift.
                double v = std::floor((img.at3(ch, y, x) + 1.0) * 127.5 + 0.5);
                v = std::fmin(255.0, std::fmax(0.0, v));
                raw[(static_cast<size_t>(y) * w + x) * c + ch] = static_cast<uint8_t>(v);
            }
    return raw;
}

Tensor differential(const Tensor& x, const Tensor& y) {
    if (!x.same_shape(y))
        throw std::invalid_argument("differential: shape mismatch " + shape_str(x.shape()) +
                                    " vs " + shape_str(y.shape()));
    return x - y;
}

void validate_label_code(const LabelCode& code) {
    for (double v : code)
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("label code entry " + std::to_string(v) +
                                        " outside [0,1]");
}

}  // namespace dgan
