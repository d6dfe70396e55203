#include "fbg/feature_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "fbg/error.hpp"

namespace fbg {

namespace le {

namespace {

template <typename U>
void put_unsigned(std::ostream& out, U v) {
  char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  }
  out.write(bytes, sizeof(U));
}

template <typename U>
U get_unsigned(std::istream& in) {
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) {
    throw Error(ErrorCode::kIo, "unexpected end of binary stream");
  }
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    v |= static_cast<U>(bytes[i]) << (8 * i);
  }
  return v;
}

}  // namespace

void put_u32(std::ostream& out, std::uint32_t v) { put_unsigned(out, v); }
void put_u64(std::ostream& out, std::uint64_t v) { put_unsigned(out, v); }
void put_f32(std::ostream& out, float v) {
  put_unsigned(out, std::bit_cast<std::uint32_t>(v));
}
void put_f64(std::ostream& out, double v) {
  put_unsigned(out, std::bit_cast<std::uint64_t>(v));
}
void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t get_u32(std::istream& in) {
  return get_unsigned<std::uint32_t>(in);
}
std::uint64_t get_u64(std::istream& in) {
  return get_unsigned<std::uint64_t>(in);
}
float get_f32(std::istream& in) {
  return std::bit_cast<float>(get_unsigned<std::uint32_t>(in));
}
double get_f64(std::istream& in) {
  return std::bit_cast<double>(get_unsigned<std::uint64_t>(in));
}
std::string get_string(std::istream& in) {
  const auto n = get_u32(in);
  std::string s(n, '\0');
  if (n > 0 && !in.read(s.data(), n)) {
    throw Error(ErrorCode::kIo, "unexpected end of binary stream");
  }
  return s;
}

}  // namespace le

void write_row_dump(const std::filesystem::path& path,
                    std::span<const std::vector<double>> rows,
                    std::uint32_t dimension) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(kRowDumpMagic, 4);
  le::put_u64(out, rows.size());
  le::put_u32(out, dimension);
  for (const auto& row : rows) {
    if (row.size() != dimension) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "row dump rows must share one dimension");
    }
    for (double v : row) le::put_f32(out, static_cast<float>(v));
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

RowDump read_row_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kRowDumpMagic, 4) != 0) {
    throw Error(ErrorCode::kIo, "not a row dump: " + path.string());
  }
  const auto count = le::get_u64(in);
  RowDump dump;
  dump.dimension = le::get_u32(in);
  dump.rows.resize(count);
  for (auto& row : dump.rows) {
    row.resize(dump.dimension);
    for (auto& v : row) v = le::get_f32(in);
  }
  return dump;
}

}  // namespace fbg
