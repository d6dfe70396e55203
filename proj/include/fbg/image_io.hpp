#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "fbg/label_map.hpp"
#include "fbg/raster.hpp"

namespace fbg {

using Rgb = std::array<std::uint8_t, 3>;

/// 8-bit PNG or baseline JPEG; value/255. Color inputs are converted to luma.
GrayImage load_gray(const std::filesystem::path& path);
/// Nonzero sample (palette index for indexed PNGs) means member.
BinaryMask load_mask(const std::filesystem::path& path);
/// Raw 8-bit samples: palette indices for indexed PNGs, values for gray PNGs.
LabelMap load_label_map(const std::filesystem::path& path);

void save_gray_png(const std::filesystem::path& path, const GrayImage& image);
void save_mask_png(const std::filesystem::path& path, const BinaryMask& mask);
void save_indexed_png(const std::filesystem::path& path, int width, int height,
                      std::span<const std::uint8_t> indices,
                      std::span<const Rgb> palette);
void save_rgb_png(const std::filesystem::path& path, int width, int height,
                  std::span<const Rgb> pixels);
/// VOC-style label map: indexed PNG with the standard Pascal palette.
void save_label_map_png(const std::filesystem::path& path,
                        const LabelMap& labels);
void save_gray_jpeg(const std::filesystem::path& path, const GrayImage& image,
                    int quality = 95);

/// The Pascal VOC colormap (bit-interleaved), 256 entries.
std::vector<Rgb> voc_palette();

}  // namespace fbg
