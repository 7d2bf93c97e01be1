// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/image_io.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

namespace duocolor::io {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

uint8_t quantize(float v) {
  float c = std::min(1.0f, std::max(0.0f, v));
  return static_cast<uint8_t>(std::lround(c * 255.0f));
}

RgbImage<float> from_rgb8(const std::vector<uint8_t>& bytes, int64_t h, int64_t w) {
  RgbImage<float> img{h, w, std::vector<float>(bytes.size())};
  for (size_t i = 0; i < bytes.size(); ++i) img.px[i] = bytes[i] / 255.0f;
  return img;
}

RgbImage<float> load_png(FILE* f, const std::string& path) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  check_runtime(png != nullptr, "png: failed to allocate reader");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw FatalError("png: failed to allocate info struct");
  }
  std::vector<uint8_t> pixels;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FatalError("png: decode failed for " + path);
  }
  png_init_io(png, f);
  png_read_info(png, info);

  png_uint_32 w = png_get_image_width(png, info);
  png_uint_32 h = png_get_image_height(png, info);
  png_byte color_type = png_get_color_type(png, info);
  png_byte bit_depth = png_get_bit_depth(png, info);

  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  pixels.resize(static_cast<size_t>(w) * h * 3);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = pixels.data() + static_cast<size_t>(y) * w * 3;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return from_rgb8(pixels, h, w);
}

struct JpegErrorMgr {
  jpeg_error_mgr base;
  jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  longjmp(mgr->jump, 1);
}

RgbImage<float> load_jpeg(FILE* f, const std::string& path) {
  jpeg_decompress_struct cinfo;
  JpegErrorMgr err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw FatalError("jpeg: decode failed for " + path);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, f);
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);

  int64_t w = cinfo.output_width, h = cinfo.output_height;
  std::vector<uint8_t> pixels(static_cast<size_t>(w) * h * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    uint8_t* row = pixels.data() + static_cast<size_t>(cinfo.output_scanline) * w * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return from_rgb8(pixels, h, w);
}

}  // namespace

RgbImage<float> load_rgb(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  check_runtime(f != nullptr, "cannot open image: ", path);
  uint8_t magic[4] = {0};
  size_t got = std::fread(magic, 1, 4, f.get());
  check_runtime(got >= 2, "file too short: ", path);
  std::rewind(f.get());
  if (magic[0] == 0x89 && magic[1] == 'P') return load_png(f.get(), path);
  if (magic[0] == 0xFF && magic[1] == 0xD8) return load_jpeg(f.get(), path);
  throw FatalError("unsupported image format: " + path);
}

void save_png_rgb(const std::string& path, const RgbImage<float>& img) {
  check_arg(img.h >= 1 && img.w >= 1, "save_png_rgb: empty image");
  FilePtr f(std::fopen(path.c_str(), "wb"));
  check_runtime(f != nullptr, "cannot open for write: ", path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  check_runtime(png != nullptr, "png: failed to allocate writer");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw FatalError("png: failed to allocate info struct");
  }
  std::vector<uint8_t> bytes(static_cast<size_t>(img.h) * img.w * 3);
  std::vector<png_bytep> rows(img.h);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw FatalError("png: encode failed for " + path);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.w), static_cast<png_uint_32>(img.h), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  for (size_t i = 0; i < bytes.size(); ++i) bytes[i] = quantize(img.px[i]);
  for (int64_t y = 0; y < img.h; ++y) rows[y] = bytes.data() + static_cast<size_t>(y) * img.w * 3;
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void save_png_gray(const std::string& path, const Tensor<float>& plane) {
  check_arg(plane.ndim() == 2 || (plane.ndim() == 3 && plane.dim(0) == 1),
            "save_png_gray: want (H,W) or (1,H,W)");
  int64_t h = plane.ndim() == 2 ? plane.dim(0) : plane.dim(1);
  int64_t w = plane.ndim() == 2 ? plane.dim(1) : plane.dim(2);
  FilePtr f(std::fopen(path.c_str(), "wb"));
  check_runtime(f != nullptr, "cannot open for write: ", path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  check_runtime(png != nullptr, "png: failed to allocate writer");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw FatalError("png: failed to allocate info struct");
  }
  std::vector<uint8_t> bytes(static_cast<size_t>(h) * w);
  std::vector<png_bytep> rows(h);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw FatalError("png: encode failed for " + path);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  for (int64_t i = 0; i < h * w; ++i) bytes[i] = quantize(plane[i]);
  for (int64_t y = 0; y < h; ++y) rows[y] = bytes.data() + static_cast<size_t>(y) * w;
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void save_jpeg_rgb(const std::string& path, const RgbImage<float>& img, int quality) {
  check_arg(img.h >= 1 && img.w >= 1, "save_jpeg_rgb: empty image");
  FilePtr f(std::fopen(path.c_str(), "wb"));
  check_runtime(f != nullptr, "cannot open for write: ", path);
  jpeg_compress_struct cinfo;
  JpegErrorMgr err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    throw FatalError("jpeg: encode failed for " + path);
  }
  jpeg_create_compress(&cinfo);
  jpeg_stdio_dest(&cinfo, f.get());
  cinfo.image_width = static_cast<JDIMENSION>(img.w);
  cinfo.image_height = static_cast<JDIMENSION>(img.h);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  if (quality >= 90) {  // no chroma subsampling at high quality
    for (int i = 0; i < cinfo.num_components; ++i) {
      cinfo.comp_info[i].h_samp_factor = 1;
      cinfo.comp_info[i].v_samp_factor = 1;
    }
  }
  jpeg_start_compress(&cinfo, TRUE);
  std::vector<uint8_t> row(static_cast<size_t>(img.w) * 3);
  while (cinfo.next_scanline < cinfo.image_height) {
    const float* src = img.px.data() + static_cast<size_t>(cinfo.next_scanline) * img.w * 3;
    for (int64_t i = 0; i < img.w * 3; ++i) row[i] = quantize(src[i]);
    uint8_t* rp = row.data();
    jpeg_write_scanlines(&cinfo, &rp, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
}

void write_npy(const std::string& path, const Shape& shape, const float* data) {
  std::string dims;
  for (size_t i = 0; i < shape.size(); ++i) dims += std::to_string(shape[i]) + ",";
  if (shape.size() > 1) dims.pop_back();
  std::string header = "{'descr': '<f4', 'fortran_order': False, 'shape': (" + dims + "), }";
  size_t unpadded = 10 + header.size() + 1;
  size_t padding = (64 - unpadded % 64) % 64;
  header += std::string(padding, ' ') + "\n";

  std::ofstream os(path, std::ios::binary);
  check_runtime(os.good(), "cannot open for write: ", path);
  os.write("\x93NUMPY\x01\x00", 8);
  uint16_t hlen = static_cast<uint16_t>(header.size());
  os.write(reinterpret_cast<const char*>(&hlen), 2);
  os.write(header.data(), static_cast<std::streamsize>(header.size()));
  os.write(reinterpret_cast<const char*>(data),
           static_cast<std::streamsize>(shape_numel(shape) * sizeof(float)));
  check_runtime(os.good(), "short write: ", path);
}

bool has_image_extension(const std::string& path) {
  auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return false;
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  return ext == "png" || ext == "jpg" || ext == "jpeg";
}

}  // namespace duocolor::io
