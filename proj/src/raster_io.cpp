#include "duskseg/raster_io.hpp"

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

#include <jpeglib.h>
#include <png.h>

#include "duskseg/errors.hpp"

namespace duskseg {
namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.string().c_str(), mode));
    if (!f)
        throw io_error("cannot open " + path.string());
    return f;
}

// Single-channel 8-bit PNG payload (palette indices pass through).
Plane<std::uint8_t> read_gray_png(const std::filesystem::path& path) {
    FilePtr f = open_file(path, "rb");

    png_byte sig[8];
    if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw validation_error(path.string() + ": not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw io_error("libpng init failed");
    }
    std::string error;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw io_error(path.string() + ": PNG decode failed");
    }
    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const png_byte color = png_get_color_type(png, info);
    const png_byte depth = png_get_bit_depth(png, info);
    if (depth == 16) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw validation_error(path.string() + ": 16-bit PNG; label rasters must be 8-bit");
    }
    if (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_PALETTE) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw validation_error(path.string() + ": label rasters must be single-channel");
    }
    if (depth < 8) png_set_packing(png);  // 1/2/4-bit files unpack to one byte per pixel

    png_read_update_info(png, info);
    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));

    Plane<std::uint8_t> plane(w, h);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = plane.row(y);
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return plane;
}

void write_gray_png(const std::filesystem::path& path, const Plane<std::uint8_t>& plane) {
    FilePtr f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw io_error("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw io_error(path.string() + ": PNG encode failed");
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, plane.width(), plane.height(), 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(plane.height());
    for (int y = 0; y < plane.height(); ++y)
        rows[y] = const_cast<png_bytep>(plane.row(y));
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

RgbImage read_rgb_png(const std::filesystem::path& path) {
    FilePtr f = open_file(path, "rb");
    png_byte sig[8];
    if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw validation_error(path.string() + ": not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw io_error("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw io_error(path.string() + ": PNG decode failed");
    }
    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    png_set_expand(png);          // palette -> rgb, gray<8 -> 8
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_read_update_info(png, info);

    if (png_get_channels(png, info) != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw validation_error(path.string() + ": unsupported PNG layout for camera frames");
    }
    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    RgbImage img{Plane<Rgb8>(w, h)};
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y)
        rows[y] = reinterpret_cast<png_bytep>(img.px.row(y));
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    std::longjmp(mgr->jump, 1);
}

RgbImage read_rgb_jpeg(const std::filesystem::path& path) {
    FilePtr f = open_file(path, "rb");
    jpeg_decompress_struct cinfo;
    JpegErrorMgr err;
    cinfo.err = jpeg_std_error(&err.pub);
    err.pub.error_exit = jpeg_error_exit;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw validation_error(path.string() + ": JPEG decode failed");
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, f.get());
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);

    const int w = static_cast<int>(cinfo.output_width);
    const int h = static_cast<int>(cinfo.output_height);
    RgbImage img{Plane<Rgb8>(w, h)};
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = reinterpret_cast<JSAMPROW>(img.px.row(cinfo.output_scanline));
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return img;
}

bool sniff_png(const std::filesystem::path& path) {
    FilePtr f = open_file(path, "rb");
    unsigned char sig[8] = {};
    const std::size_t n = std::fread(sig, 1, 8, f.get());
    return n == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

} // namespace

SemanticLabelMap read_label_map(const std::filesystem::path& path) {
    return SemanticLabelMap{read_gray_png(path)};
}

void write_label_map(const std::filesystem::path& path, const SemanticLabelMap& map) {
    write_gray_png(path, map.px);
}

InvalidMask read_invalid_mask(const std::filesystem::path& path) {
    Plane<std::uint8_t> plane = read_gray_png(path);
    for (int y = 0; y < plane.height(); ++y) {
        std::uint8_t* row = plane.row(y);
        for (int x = 0; x < plane.width(); ++x) {
            if (row[x] == 255) row[x] = 1;
            else if (row[x] > 1)
                throw validation_error(path.string() + ": invalid mask value " +
                                       std::to_string(int(row[x])) + " at (" + std::to_string(x) +
                                       "," + std::to_string(y) + "); expected 0, 1 or 255");
        }
    }
    return InvalidMask{std::move(plane)};
}

void write_invalid_mask(const std::filesystem::path& path, const InvalidMask& mask) {
    write_gray_png(path, mask.px);
}

RgbImage read_rgb_image(const std::filesystem::path& path) {
    if (sniff_png(path)) return read_rgb_png(path);
    return read_rgb_jpeg(path);
}

void write_rgb_png(const std::filesystem::path& path, const RgbImage& img) {
    FilePtr f = open_file(path, "wb");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw io_error("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw io_error(path.string() + ": PNG encode failed");
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, img.width(), img.height(), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_bytep> rows(img.height());
    for (int y = 0; y < img.height(); ++y)
        rows[y] = reinterpret_cast<png_bytep>(const_cast<Rgb8*>(img.px.row(y)));
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace duskseg
