#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <png.h>

#include "kinecluster/common.hpp"

namespace kinecluster {

// 8-bit grayscale raster, row 0 at the top (image convention).
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // row-major

    std::uint8_t at(int row, int col) const {
        return pixels[static_cast<std::size_t>(row) * width + col];
    }
};

struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::array<std::uint8_t, 3>> pixels;  // row-major

    const std::array<std::uint8_t, 3>& at(int row, int col) const {
        return pixels[static_cast<std::size_t>(row) * width + col];
    }
};

namespace detail {

inline int pnm_next_token(std::istream& in) {
    // skips whitespace and '#' comments, returns next integer
    char c;
    while (in.get(c)) {
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            in.unget();
            int v;
            if (!(in >> v)) break;
            return v;
        }
    }
    throw IoError("pnm: truncated header");
}

}  // namespace detail

inline GrayImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string magic;
    in >> magic;
    if (magic != "P5" && magic != "P2") throw IoError(path + ": not a PGM (P5/P2) file");
    GrayImage img;
    img.width = detail::pnm_next_token(in);
    img.height = detail::pnm_next_token(in);
    const int maxval = detail::pnm_next_token(in);
    if (img.width <= 0 || img.height <= 0 || maxval <= 0 || maxval > 255)
        throw IoError(path + ": unsupported PGM geometry or maxval");
    const std::size_t count = static_cast<std::size_t>(img.width) * img.height;
    img.pixels.resize(count);
    if (magic == "P5") {
        in.get();  // single whitespace after maxval
        in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(count));
        if (static_cast<std::size_t>(in.gcount()) != count) throw IoError(path + ": truncated PGM data");
    } else {
        for (std::size_t i = 0; i < count; ++i) img.pixels[i] = static_cast<std::uint8_t>(detail::pnm_next_token(in));
    }
    return img;
}

inline void write_pgm(const std::string& path, const GrayImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw IoError("write failed: " + path);
}

inline void write_ppm(const std::string& path, const RgbImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size() * 3));
    if (!out) throw IoError("write failed: " + path);
}

inline RgbImage read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string magic;
    in >> magic;
    if (magic != "P6") throw IoError(path + ": not a PPM (P6) file");
    RgbImage img;
    img.width = detail::pnm_next_token(in);
    img.height = detail::pnm_next_token(in);
    const int maxval = detail::pnm_next_token(in);
    if (img.width <= 0 || img.height <= 0 || maxval != 255)
        throw IoError(path + ": unsupported PPM geometry or maxval");
    in.get();
    const std::size_t count = static_cast<std::size_t>(img.width) * img.height;
    img.pixels.resize(count);
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(count * 3));
    if (static_cast<std::size_t>(in.gcount()) != count * 3) throw IoError(path + ": truncated PPM data");
    return img;
}

// Reads an 8-bit PNG and converts to grayscale (libpng handles palette/RGB/alpha).
inline GrayImage read_png_gray(const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw IoError("cannot open " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        std::fclose(fp);
        throw IoError("png: allocation failure");
    }
    GrayImage img;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw IoError(path + ": libpng decode error");
    }
    png_init_io(png, fp);
    png_read_info(png, info);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    const int color = png_get_color_type(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_COLOR) png_set_rgb_to_gray(png, 1, -1.0, -1.0);
    png_read_update_info(png, info);
    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    rows.resize(img.height);
    for (int r = 0; r < img.height; ++r)
        rows[r] = img.pixels.data() + static_cast<std::size_t>(r) * img.width;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return img;
}

inline void write_png_gray(const std::string& path, const GrayImage& img) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw IoError("cannot write " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        std::fclose(fp);
        throw IoError("png: allocation failure");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError(path + ": libpng encode error");
    }
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int r = 0; r < img.height; ++r)
        png_write_row(png, const_cast<png_bytep>(img.pixels.data() + static_cast<std::size_t>(r) * img.width));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

// Grayscale raster loader for pattern input: dispatches on file signature.
inline GrayImage read_gray_raster(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw IoError("cannot open " + path);
    std::array<unsigned char, 8> sig{};
    probe.read(reinterpret_cast<char*>(sig.data()), sig.size());
    probe.close();
    static const std::array<unsigned char, 8> png_sig = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    if (sig == png_sig) return read_png_gray(path);
    if (sig[0] == 'P' && (sig[1] == '5' || sig[1] == '2')) return read_pgm(path);
    throw IoError(path + ": unsupported raster format (expected PGM or PNG)");
}

}  // namespace kinecluster
