#include "fbg/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

// jpeglib.h needs FILE and size_t declared first.
#include <jpeglib.h>

#include "fbg/error.hpp"

namespace fbg {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) {
    if (mode[0] == 'r' && !std::filesystem::exists(path)) {
      throw Error(ErrorCode::kMissingFile, path.string());
    }
    throw Error(ErrorCode::kIo, "cannot open " + path.string());
  }
  return f;
}

bool has_jpeg_magic(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  unsigned char magic[2] = {0, 0};
  in.read(reinterpret_cast<char*>(magic), 2);
  return magic[0] == 0xFF && magic[1] == 0xD8;
}

// Raw 8-bit samples of a PNG. Gray and palette images return one channel;
// color images are reduced to luma by libpng.
struct RawPng {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> samples;
};

RawPng read_png_raw(const std::filesystem::path& path) {
  auto file = open_file(path, "rb");
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (png == nullptr) throw Error(ErrorCode::kIo, "libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorCode::kIo, "libpng init failed");
  }
  RawPng raw;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kIo, "malformed PNG: " + path.string());
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const auto color_type = png_get_color_type(png, info);
  const auto bit_depth = png_get_bit_depth(png, info);
  if (bit_depth == 16) png_set_strip_16(png);
  if (bit_depth < 8) png_set_packing(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color_type == PNG_COLOR_TYPE_RGB ||
      color_type == PNG_COLOR_TYPE_RGB_ALPHA) {
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  }
  png_read_update_info(png, info);
  raw.width = static_cast<int>(png_get_image_width(png, info));
  raw.height = static_cast<int>(png_get_image_height(png, info));
  const auto channels = png_get_channels(png, info);
  if (channels != 1) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kIo, "unsupported PNG layout: " + path.string());
  }
  raw.samples.resize(static_cast<std::size_t>(raw.width) * raw.height);
  std::vector<png_bytep> rows(raw.height);
  for (int y = 0; y < raw.height; ++y) {
    rows[y] = raw.samples.data() + static_cast<std::size_t>(y) * raw.width;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return raw;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  std::longjmp(err->jump, 1);
}

GrayImage read_jpeg_gray(const std::filesystem::path& path) {
  auto file = open_file(path, "rb");
  jpeg_decompress_struct cinfo{};
  JpegErrorManager jerr{};
  cinfo.err = jpeg_std_error(&jerr.base);
  jerr.base.error_exit = jpeg_error_exit;
  std::vector<double> values;
  int width = 0;
  int height = 0;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw Error(ErrorCode::kIo, "malformed JPEG: " + path.string());
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file.get());
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_GRAYSCALE;
  jpeg_start_decompress(&cinfo);
  width = static_cast<int>(cinfo.output_width);
  height = static_cast<int>(cinfo.output_height);
  values.resize(static_cast<std::size_t>(width) * height);
  std::vector<JSAMPLE> row(width);
  while (cinfo.output_scanline < cinfo.output_height) {
    const auto y = cinfo.output_scanline;
    JSAMPROW ptr = row.data();
    jpeg_read_scanlines(&cinfo, &ptr, 1);
    for (int x = 0; x < width; ++x) {
      values[static_cast<std::size_t>(y) * width + x] = row[x] / 255.0;
    }
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return GrayImage(width, height, std::move(values));
}

void write_png(const std::filesystem::path& path, png_image& image,
               const void* buffer, const void* colormap) {
  if (!png_image_write_to_file(&image, path.c_str(), 0, buffer, 0,
                               colormap)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kIo, "cannot write " + path.string() + ": " + msg);
  }
}

png_image make_png_header(int width, int height, png_uint_32 format) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  return image;
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

GrayImage load_gray(const std::filesystem::path& path) {
  if (has_jpeg_magic(path)) return read_jpeg_gray(path);
  const auto raw = read_png_raw(path);
  std::vector<double> values(raw.samples.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = raw.samples[i] / 255.0;
  }
  return GrayImage(raw.width, raw.height, std::move(values));
}

BinaryMask load_mask(const std::filesystem::path& path) {
  const auto raw = read_png_raw(path);
  BinaryMask mask(raw.width, raw.height);
  for (int y = 0; y < raw.height; ++y) {
    for (int x = 0; x < raw.width; ++x) {
      if (raw.samples[static_cast<std::size_t>(y) * raw.width + x] != 0) {
        mask.set(x, y);
      }
    }
  }
  return mask;
}

LabelMap load_label_map(const std::filesystem::path& path) {
  auto raw = read_png_raw(path);
  return LabelMap(raw.width, raw.height, std::move(raw.samples));
}

void save_gray_png(const std::filesystem::path& path, const GrayImage& image) {
  std::vector<std::uint8_t> bytes(image.size());
  const auto values = image.values();
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = to_byte(values[i]);
  auto header = make_png_header(image.width(), image.height(), PNG_FORMAT_GRAY);
  write_png(path, header, bytes.data(), nullptr);
}

void save_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
  std::vector<std::uint8_t> bytes(mask.bits().size());
  const auto bits = mask.bits();
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = bits[i] ? 255 : 0;
  auto header = make_png_header(mask.width(), mask.height(), PNG_FORMAT_GRAY);
  write_png(path, header, bytes.data(), nullptr);
}

void save_indexed_png(const std::filesystem::path& path, int width, int height,
                      std::span<const std::uint8_t> indices,
                      std::span<const Rgb> palette) {
  if (palette.empty() || palette.size() > 256) {
    throw Error(ErrorCode::kInvalidArgument, "palette must have 1..256 entries");
  }
  if (indices.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::kDimensionMismatch, "index buffer size mismatch");
  }
  auto header = make_png_header(width, height, PNG_FORMAT_RGB_COLORMAP);
  header.colormap_entries = static_cast<png_uint_32>(palette.size());
  write_png(path, header, indices.data(), palette.data());
}

void save_rgb_png(const std::filesystem::path& path, int width, int height,
                  std::span<const Rgb> pixels) {
  if (pixels.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::kDimensionMismatch, "pixel buffer size mismatch");
  }
  auto header = make_png_header(width, height, PNG_FORMAT_RGB);
  write_png(path, header, pixels.data(), nullptr);
}

void save_label_map_png(const std::filesystem::path& path,
                        const LabelMap& labels) {
  const auto palette = voc_palette();
  save_indexed_png(path, labels.width(), labels.height(), labels.labels(),
                   palette);
}

void save_gray_jpeg(const std::filesystem::path& path, const GrayImage& image,
                    int quality) {
  auto file = open_file(path, "wb");
  jpeg_compress_struct cinfo{};
  JpegErrorManager jerr{};
  cinfo.err = jpeg_std_error(&jerr.base);
  jerr.base.error_exit = jpeg_error_exit;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_compress(&cinfo);
    throw Error(ErrorCode::kIo, "cannot write " + path.string());
  }
  jpeg_create_compress(&cinfo);
  jpeg_stdio_dest(&cinfo, file.get());
  cinfo.image_width = static_cast<JDIMENSION>(image.width());
  cinfo.image_height = static_cast<JDIMENSION>(image.height());
  cinfo.input_components = 1;
  cinfo.in_color_space = JCS_GRAYSCALE;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  std::vector<JSAMPLE> row(image.width());
  while (cinfo.next_scanline < cinfo.image_height) {
    const int y = static_cast<int>(cinfo.next_scanline);
    for (int x = 0; x < image.width(); ++x) row[x] = to_byte(image.at(x, y));
    JSAMPROW ptr = row.data();
    jpeg_write_scanlines(&cinfo, &ptr, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
}

std::vector<Rgb> voc_palette() {
  std::vector<Rgb> palette(256);
  for (int i = 0; i < 256; ++i) {
    int r = 0, g = 0, b = 0;
    int c = i;
    for (int j = 0; j < 8; ++j) {
      r |= ((c >> 0) & 1) << (7 - j);
      g |= ((c >> 1) & 1) << (7 - j);
      b |= ((c >> 2) & 1) << (7 - j);
      c >>= 3;
    }
    palette[i] = {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                  static_cast<std::uint8_t>(b)};
  }
  return palette;
}

}  // namespace fbg
