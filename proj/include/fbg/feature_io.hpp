#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fbg {

// Row dump layout, all little-endian:
//   bytes 0..3   magic "FBGD"
//   bytes 4..11  row count (uint64)
//   bytes 12..15 row dimension (uint32)
//   then count*dimension float32 values, row-major.
inline constexpr char kRowDumpMagic[4] = {'F', 'B', 'G', 'D'};

struct RowDump {
  std::uint32_t dimension = 0;
  std::vector<std::vector<float>> rows;
};

void write_row_dump(const std::filesystem::path& path,
                    std::span<const std::vector<double>> rows,
                    std::uint32_t dimension);
RowDump read_row_dump(const std::filesystem::path& path);

namespace le {

void put_u32(std::ostream& out, std::uint32_t v);
void put_u64(std::ostream& out, std::uint64_t v);
void put_f32(std::ostream& out, float v);
void put_f64(std::ostream& out, double v);
void put_string(std::ostream& out, const std::string& s);

std::uint32_t get_u32(std::istream& in);
std::uint64_t get_u64(std::istream& in);
float get_f32(std::istream& in);
double get_f64(std::istream& in);
std::string get_string(std::istream& in);

}  // namespace le

}  // namespace fbg
