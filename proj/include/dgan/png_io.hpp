#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dgan {

struct PngImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> rgb;  // interleaved, 3 bytes per pixel
};

// Reads any 8/16-bit gray/palette/rgb/rgba PNG and converts to 8-bit RGB.
PngImage read_png(const std::string& path);

// Writes 8-bit RGB, non-interlaced.
void write_png(const std::string& path, int width, int height,
               const std::vector<uint8_t>& rgb);

}  // namespace dgan
