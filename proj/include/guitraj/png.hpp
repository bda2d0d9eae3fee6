#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "guitraj/io.hpp"

namespace guitraj::png {

struct image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel
};

// Width/height from the IHDR chunk without decoding pixels.
std::optional<std::pair<int, int>> read_size(const fs::path& path);

image read(const fs::path& path);
void write(const fs::path& path, const image& img);

image filled(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b);

void draw_rect(image& img, int x1, int y1, int x2, int y2, std::uint8_t r, std::uint8_t g, std::uint8_t b);
void draw_cross(image& img, int x, int y, int arm, std::uint8_t r, std::uint8_t g, std::uint8_t b);

}  // namespace guitraj::png
