// Copyright 2026 The ontoseg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "core/png_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>

#include "core/error.hpp"

namespace ontoseg::png_io {
namespace {

// libpng reports errors via longjmp. The guarded sections below construct no
// C++ objects after arming setjmp so that a jump never skips a destructor;
// buffers are allocated by the caller between phases.

void on_png_error(png_structp png, png_const_charp msg) {
    auto* slot = static_cast<std::string*>(png_get_error_ptr(png));
    if (slot != nullptr && slot->empty()) *slot = msg;
    longjmp(png_jmpbuf(png), 1);
}

void on_png_warning(png_structp, png_const_charp) {}

struct File {
    std::FILE* fp = nullptr;

    File(const std::string& path, const char* mode) : fp(std::fopen(path.c_str(), mode)) {
        if (fp == nullptr) throw io_error(path + ": cannot open");
    }
    ~File() {
        if (fp != nullptr) std::fclose(fp);
    }
    File(const File&) = delete;
    File& operator=(const File&) = delete;
};

struct Reader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::string message;

    Reader() {
        png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, on_png_error, on_png_warning);
        if (png == nullptr) throw io_error("png reader allocation failed");
        info = png_create_info_struct(png);
        if (info == nullptr) {
            png_destroy_read_struct(&png, nullptr, nullptr);
            throw io_error("png reader allocation failed");
        }
    }
    ~Reader() { png_destroy_read_struct(&png, &info, nullptr); }
    Reader(const Reader&) = delete;
    Reader& operator=(const Reader&) = delete;
};

struct Writer {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::string message;

    Writer() {
        png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, on_png_error, on_png_warning);
        if (png == nullptr) throw io_error("png writer allocation failed");
        info = png_create_info_struct(png);
        if (info == nullptr) {
            png_destroy_write_struct(&png, nullptr);
            throw io_error("png writer allocation failed");
        }
    }
    ~Writer() { png_destroy_write_struct(&png, &info); }
    Writer(const Writer&) = delete;
    Writer& operator=(const Writer&) = delete;
};

struct Header {
    png_uint_32 width = 0;
    png_uint_32 height = 0;
    int bit_depth = 0;
    int color_type = 0;
    int channels = 0;
};

bool read_header(Reader& r, std::FILE* fp, Header* out) {
    if (setjmp(png_jmpbuf(r.png))) return false;
    png_init_io(r.png, fp);
    png_read_info(r.png, r.info);
    out->width = png_get_image_width(r.png, r.info);
    out->height = png_get_image_height(r.png, r.info);
    out->bit_depth = png_get_bit_depth(r.png, r.info);
    out->color_type = png_get_color_type(r.png, r.info);
    out->channels = png_get_channels(r.png, r.info);
    return true;
}

bool read_rows(Reader& r, png_bytep* rows) {
    if (setjmp(png_jmpbuf(r.png))) return false;
    png_read_image(r.png, rows);
    png_read_end(r.png, nullptr);
    return true;
}

bool write_all(Writer& w, std::FILE* fp, const Header& h, png_bytep* rows) {
    if (setjmp(png_jmpbuf(w.png))) return false;
    png_init_io(w.png, fp);
    png_set_IHDR(w.png, w.info, h.width, h.height, 8, h.color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);
    png_write_image(w.png, rows);
    png_write_end(w.png, w.info);
    return true;
}

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw io_error(path + ": " + (message.empty() ? std::string("png error") : message));
}

void check_header(const std::string& path, const Header& h, int want_color, int want_channels,
                  const char* want_name) {
    if (h.bit_depth != 8)
        throw io_error(path + ": expected 8-bit png, got bit depth " + std::to_string(h.bit_depth));
    if (h.color_type != want_color || h.channels != want_channels)
        throw io_error(path + ": expected " + want_name + " png, got color type " +
                       std::to_string(h.color_type));
    if (h.width == 0 || h.height == 0) throw io_error(path + ": empty image");
    if (h.width > 1u << 20 || h.height > 1u << 20) throw io_error(path + ": image too large");
}

}  // namespace

Gray8 read_gray8(const std::string& path) {
    File file(path, "rb");
    Reader reader;
    Header header;
    if (!read_header(reader, file.fp, &header)) fail(path, reader.message);
    check_header(path, header, PNG_COLOR_TYPE_GRAY, 1, "grayscale");
    if (png_get_interlace_type(reader.png, reader.info) != PNG_INTERLACE_NONE)
        throw io_error(path + ": interlaced png not supported");

    Gray8 out;
    out.height = static_cast<int>(header.height);
    out.width = static_cast<int>(header.width);
    out.pixels.resize(static_cast<std::size_t>(out.height) * out.width);
    std::vector<png_bytep> rows(header.height);
    for (png_uint_32 y = 0; y < header.height; ++y)
        rows[y] = out.pixels.data() + static_cast<std::size_t>(y) * header.width;
    if (!read_rows(reader, rows.data())) fail(path, reader.message);
    return out;
}

Rgb8 read_rgb8(const std::string& path) {
    File file(path, "rb");
    Reader reader;
    Header header;
    if (!read_header(reader, file.fp, &header)) fail(path, reader.message);
    check_header(path, header, PNG_COLOR_TYPE_RGB, 3, "rgb");
    if (png_get_interlace_type(reader.png, reader.info) != PNG_INTERLACE_NONE)
        throw io_error(path + ": interlaced png not supported");

    Rgb8 out;
    out.height = static_cast<int>(header.height);
    out.width = static_cast<int>(header.width);
    out.pixels.resize(static_cast<std::size_t>(out.height) * out.width * 3);
    std::vector<png_bytep> rows(header.height);
    for (png_uint_32 y = 0; y < header.height; ++y)
        rows[y] = out.pixels.data() + static_cast<std::size_t>(y) * header.width * 3;
    if (!read_rows(reader, rows.data())) fail(path, reader.message);
    return out;
}

void write_gray8(const std::string& path, const Gray8& image) {
    if (image.height <= 0 || image.width <= 0 ||
        image.pixels.size() != static_cast<std::size_t>(image.height) * image.width)
        throw argument_error("write_gray8: inconsistent image dimensions");
    File file(path, "wb");
    Writer writer;
    Header header;
    header.width = static_cast<png_uint_32>(image.width);
    header.height = static_cast<png_uint_32>(image.height);
    header.color_type = PNG_COLOR_TYPE_GRAY;
    std::vector<png_bytep> rows(header.height);
    for (png_uint_32 y = 0; y < header.height; ++y)
        rows[y] = const_cast<png_bytep>(image.pixels.data()) +
                  static_cast<std::size_t>(y) * header.width;
    if (!write_all(writer, file.fp, header, rows.data())) fail(path, writer.message);
}

void write_rgb8(const std::string& path, const Rgb8& image) {
    if (image.height <= 0 || image.width <= 0 ||
        image.pixels.size() != static_cast<std::size_t>(image.height) * image.width * 3)
        throw argument_error("write_rgb8: inconsistent image dimensions");
    File file(path, "wb");
    Writer writer;
    Header header;
    header.width = static_cast<png_uint_32>(image.width);
    header.height = static_cast<png_uint_32>(image.height);
    header.color_type = PNG_COLOR_TYPE_RGB;
    std::vector<png_bytep> rows(header.height);
    for (png_uint_32 y = 0; y < header.height; ++y)
        rows[y] = const_cast<png_bytep>(image.pixels.data()) +
                  static_cast<std::size_t>(y) * header.width * 3;
    if (!write_all(writer, file.fp, header, rows.data())) fail(path, writer.message);
}

}  // namespace ontoseg::png_io
