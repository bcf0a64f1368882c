#pragma once

// Lossless PNG read/write for RGB images and 8-bit masks (libpng).

#include <png.h>

#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "gantrylab/errors.hpp"
#include "gantrylab/image.hpp"

namespace gantrylab::png {

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline void write_rows(const std::filesystem::path& path, int width, int height,
                       int color_type, const std::vector<png_bytep>& rows) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot open '" + path.string() + "' for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng: cannot allocate write structures");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng: error while writing '" + path.string() + "'");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace detail

inline void write(const std::filesystem::path& path, const Image& img) {
  static_assert(sizeof(Rgb) == 3);
  std::vector<png_bytep> rows(img.height());
  auto* base = reinterpret_cast<png_bytep>(const_cast<Rgb*>(img.pixels().data()));
  for (int y = 0; y < img.height(); ++y) rows[y] = base + static_cast<std::size_t>(y) * img.width() * 3;
  detail::write_rows(path, img.width(), img.height(), PNG_COLOR_TYPE_RGB, rows);
}

/// Writes a mask as grayscale; non-zero values become 255.
inline void write(const std::filesystem::path& path, const Mask& mask) {
  std::vector<std::uint8_t> gray(mask.size());
  for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = mask.data()[i] ? 255 : 0;
  std::vector<png_bytep> rows(mask.height());
  for (int y = 0; y < mask.height(); ++y)
    rows[y] = gray.data() + static_cast<std::size_t>(y) * mask.width();
  detail::write_rows(path, mask.width(), mask.height(), PNG_COLOR_TYPE_GRAY, rows);
}

/// Reads any 8/16-bit PNG and converts it to 8-bit RGB.
inline Image read(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw IoError("cannot read PNG '" + path.string() + "': " + image.message);
  image.format = PNG_FORMAT_RGB;
  Image out(static_cast<int>(image.width), static_cast<int>(image.height));
  if (!png_image_finish_read(&image, nullptr, out.pixels().data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw IoError("cannot decode PNG '" + path.string() + "': " + msg);
  }
  return out;
}

}  // namespace gantrylab::png
