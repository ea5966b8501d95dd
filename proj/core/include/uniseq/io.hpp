#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace uniseq::io {

// Binary formats in this project are little-endian regardless of host,
// so all multi-byte values go through these helpers.

void put_u8(std::string& out, std::uint8_t v);
void put_u32(std::string& out, std::uint32_t v);
void put_u64(std::string& out, std::uint64_t v);
void put_f64(std::string& out, double v);
void put_bytes(std::string& out, const std::string& bytes);  // u32 length prefix

class Reader {
 public:
  Reader(const std::string& buf, std::string where);

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string bytes();          // u32 length prefix
  std::string raw(std::size_t n);
  bool at_end() const { return pos_ == buf_.size(); }

 private:
  void need(std::size_t n) const;
  const std::string& buf_;
  std::size_t pos_ = 0;
  std::string where_;
};

std::string read_file(const std::filesystem::path& path);

/// Whole-file atomic write: temp file in the same directory, then rename.
void atomic_write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace uniseq::io
