// Copyright 2026 The Gadget Authors
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

#ifndef GADGET_STORE_PNG_IO_HPP
#define GADGET_STORE_PNG_IO_HPP

#include <png.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gadget/core/types.hpp"
#include "gadget/store/fs.hpp"

namespace gadget::store {

namespace detail {

struct PngState {
  std::span<const unsigned char> input;
  std::size_t pos = 0;
  std::vector<unsigned char>* output = nullptr;
  std::vector<unsigned char> raster;
  std::vector<png_bytep> rows;
  std::string message = "libpng error";
};

inline void png_error_fn(png_structp png, png_const_charp msg) {
  auto* st = static_cast<PngState*>(png_get_error_ptr(png));
  if (st != nullptr && msg != nullptr) st->message = msg;
  png_longjmp(png, 1);
}

inline void png_warning_fn(png_structp, png_const_charp) {}

inline void png_read_fn(png_structp png, png_bytep out, png_size_t n) {
  auto* st = static_cast<PngState*>(png_get_io_ptr(png));
  if (st->pos + n > st->input.size()) png_error(png, "unexpected end of PNG data");
  std::memcpy(out, st->input.data() + st->pos, n);
  st->pos += n;
}

inline void png_write_fn(png_structp png, png_bytep data, png_size_t n) {
  auto* st = static_cast<PngState*>(png_get_io_ptr(png));
  st->output->insert(st->output->end(), data, data + n);
}

inline void png_flush_fn(png_structp) {}

}  // namespace detail

/**
 * Decodes a PNG into a normalized GrayImage. Gray input maps value/max;
 * color input is converted with luma weights 0.299/0.587/0.114. Alpha is
 * dropped. Throws IoError on corrupt or truncated data.
 */
inline GrayImage decode_png(std::span<const unsigned char> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw IoError("not a PNG file");
  }
  auto st = std::make_unique<detail::PngState>();
  st->input = bytes;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, st.get(), detail::png_error_fn,
                                           detail::png_warning_fn);
  if (png == nullptr) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  // Nothing with a destructor is created between setjmp and the last libpng call.
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("PNG decode failed: " + st->message);
  }
  png_set_read_fn(png, st.get(), detail::png_read_fn);
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int channels = png_get_channels(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  st->raster.resize(rowbytes * height);
  st->rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) st->rows[y] = st->raster.data() + y * rowbytes;
  png_read_image(png, st->rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (channels != 1 && channels != 3) throw IoError("unsupported PNG channel layout");
  const double maxval = depth == 16 ? 65535.0 : 255.0;
  const std::size_t bps = depth == 16 ? 2 : 1;
  auto sample = [&](const unsigned char* p) -> double {
    return bps == 2 ? static_cast<double>((p[0] << 8) | p[1]) : static_cast<double>(p[0]);
  };
  std::vector<double> data(static_cast<std::size_t>(width) * height);
  for (png_uint_32 y = 0; y < height; ++y) {
    const unsigned char* r = st->rows[y];
    for (png_uint_32 x = 0; x < width; ++x) {
      const unsigned char* px = r + static_cast<std::size_t>(x) * channels * bps;
      double v;
      if (channels == 1) {
        v = sample(px) / maxval;
      } else {
        v = (0.299 * sample(px) + 0.587 * sample(px + bps) + 0.114 * sample(px + 2 * bps)) / maxval;
      }
      data[static_cast<std::size_t>(y) * width + x] = v;
    }
  }
  return GrayImage::clamped(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

/// Encodes as a gray PNG of the given bit depth (8 or 16), rounding to the
/// nearest code. No timestamps or text chunks, so output is byte-stable.
inline std::vector<unsigned char> encode_png(const GrayImage& img, int bit_depth = 8) {
  if (bit_depth != 8 && bit_depth != 16) throw InvalidArgument("PNG bit depth must be 8 or 16");
  std::vector<unsigned char> out;
  auto st = std::make_unique<detail::PngState>();
  st->output = &out;
  const std::size_t bps = bit_depth == 16 ? 2 : 1;
  const double maxval = bit_depth == 16 ? 65535.0 : 255.0;
  const std::size_t rowbytes = static_cast<std::size_t>(img.width()) * bps;
  st->raster.resize(rowbytes * img.height());
  st->rows.resize(img.height());
  for (int y = 0; y < img.height(); ++y) {
    unsigned char* r = st->raster.data() + y * rowbytes;
    st->rows[y] = r;
    for (int x = 0; x < img.width(); ++x) {
      const auto code = static_cast<unsigned>(std::lround(img.at(x, y) * maxval));
      if (bps == 2) {
        r[2 * x] = static_cast<unsigned char>(code >> 8);
        r[2 * x + 1] = static_cast<unsigned char>(code & 0xff);
      } else {
        r[x] = static_cast<unsigned char>(code);
      }
    }
  }
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, st.get(), detail::png_error_fn,
                                            detail::png_warning_fn);
  if (png == nullptr) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG encode failed: " + st->message);
  }
  png_set_write_fn(png, st.get(), detail::png_write_fn, detail::png_flush_fn);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
               static_cast<png_uint_32>(img.height()), bit_depth, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, st->rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

inline std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), {});
}

inline void write_file_bytes(const std::filesystem::path& path, std::span<const unsigned char> bytes) {
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

inline GrayImage read_png(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_png(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

inline void write_png(const std::filesystem::path& path, const GrayImage& img, int bit_depth = 8) {
  write_file_bytes(path, encode_png(img, bit_depth));
}

}  // namespace gadget::store

#endif  // GADGET_STORE_PNG_IO_HPP
