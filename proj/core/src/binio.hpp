#pragma once

// Internal little-endian binary I/O helpers shared by the checkpoint,
// dataset and bundle writers. Not installed.

#include <array>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "ganshm/errors.hpp"

namespace ganshm::binio {

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint64_t offset() const { return offset_; }

  void raw(void* dst, std::size_t bytes, const char* what) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(in_.gcount()) != bytes) {
      throw FormatError(std::string("truncated file while reading ") + what,
                        static_cast<std::size_t>(offset_));
    }
    offset_ += bytes;
  }

  std::uint64_t u64(const char* what) {
    std::array<unsigned char, 8> b{};
    raw(b.data(), 8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
    return v;
  }

  double f64(const char* what) {
    const std::uint64_t bits = u64(what);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  float f32(const char* what) {
    std::array<unsigned char, 4> b{};
    raw(b.data(), 4, what);
    std::uint32_t bits = 0;
    for (int i = 3; i >= 0; --i) bits = (bits << 8) | b[static_cast<std::size_t>(i)];
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }

  std::string str(const char* what) {
    const std::uint64_t n = u64(what);
    std::string s(n, '\0');
    if (n > 0) raw(s.data(), n, what);
    return s;
  }

  void expect_magic(std::uint64_t magic, const char* what) {
    const std::uint64_t offset_before = offset_;
    const std::uint64_t got = u64(what);
    if (got != magic) {
      throw FormatError(std::string("bad magic for ") + what,
                        static_cast<std::size_t>(offset_before));
    }
  }

 private:
  std::istream& in_;
  std::uint64_t offset_ = 0;
};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void raw(const void* src, std::size_t bytes) {
    out_.write(static_cast<const char*>(src), static_cast<std::streamsize>(bytes));
  }

  void u64(std::uint64_t v) {
    std::array<unsigned char, 8> b{};
    for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<unsigned char>(v >> (8 * i));
    raw(b.data(), 8);
  }

  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }

  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    std::array<unsigned char, 4> b{};
    for (int i = 0; i < 4; ++i) b[static_cast<std::size_t>(i)] = static_cast<unsigned char>(bits >> (8 * i));
    raw(b.data(), 4);
  }

  void str(const std::string& s) {
    u64(s.size());
    raw(s.data(), s.size());
  }

 private:
  std::ostream& out_;
};

// Packs up to 8 ASCII chars into a u64 magic value (little-endian order).
constexpr std::uint64_t magic(const char (&tag)[9]) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(tag[i]);
  return v;
}

}  // namespace ganshm::binio
