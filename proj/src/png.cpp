#include "guitraj/png.hpp"

#include <png.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>

#include "guitraj/error.hpp"

namespace guitraj::png {
namespace {

struct file_closer {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using file_ptr = std::unique_ptr<std::FILE, file_closer>;

void put(image& img, int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
    auto* px = &img.rgb[(static_cast<std::size_t>(y) * img.width + x) * 3];
    px[0] = r;
    px[1] = g;
    px[2] = b;
}

}  // namespace

std::optional<std::pair<int, int>> read_size(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    unsigned char head[24];
    if (!in.read(reinterpret_cast<char*>(head), sizeof head)) return std::nullopt;
    static constexpr unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (!std::equal(sig, sig + 8, head) || std::string_view(reinterpret_cast<char*>(head + 12), 4) != "IHDR") {
        return std::nullopt;
    }
    auto be32 = [&](int off) {
        return static_cast<int>((head[off] << 24) | (head[off + 1] << 16) | (head[off + 2] << 8) | head[off + 3]);
    };
    return std::make_pair(be32(16), be32(20));
}

image read(const fs::path& path) {
    png_image pi{};
    pi.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&pi, path.c_str())) {
        throw error(errc::io_error, "cannot read PNG " + path.string() + ": " + pi.message);
    }
    pi.format = PNG_FORMAT_RGB;
    image img;
    img.width = static_cast<int>(pi.width);
    img.height = static_cast<int>(pi.height);
    img.rgb.resize(PNG_IMAGE_SIZE(pi));
    if (!png_image_finish_read(&pi, nullptr, img.rgb.data(), 0, nullptr)) {
        png_image_free(&pi);
        throw error(errc::io_error, "cannot decode PNG " + path.string() + ": " + pi.message);
    }
    return img;
}

void write(const fs::path& path, const image& img) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    png_image pi{};
    pi.version = PNG_IMAGE_VERSION;
    pi.width = static_cast<png_uint_32>(img.width);
    pi.height = static_cast<png_uint_32>(img.height);
    pi.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&pi, tmp.c_str(), 0, img.rgb.data(), 0, nullptr)) {
        throw error(errc::io_error, "cannot write PNG " + tmp.string() + ": " + pi.message);
    }
    fs::rename(tmp, path);
}

image filled(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    if (width <= 0 || height <= 0) throw error(errc::invalid_argument, "image dimensions must be positive");
    image img{width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height * 3)};
    for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
        img.rgb[i] = r;
        img.rgb[i + 1] = g;
        img.rgb[i + 2] = b;
    }
    return img;
}

void draw_rect(image& img, int x1, int y1, int x2, int y2, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    for (int x = x1; x <= x2; ++x) {
        put(img, x, y1, r, g, b);
        put(img, x, y2, r, g, b);
    }
    for (int y = y1; y <= y2; ++y) {
        put(img, x1, y, r, g, b);
        put(img, x2, y, r, g, b);
    }
}

void draw_cross(image& img, int x, int y, int arm, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    for (int d = -arm; d <= arm; ++d) {
        put(img, x + d, y, r, g, b);
        put(img, x, y + d, r, g, b);
    }
}

}  // namespace guitraj::png
