#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nfsar/echo.hpp"
#include "nfsar/image.hpp"

namespace nfsar::io {

inline constexpr std::uint16_t kImageFormatVersion = 1;
inline constexpr std::uint16_t kEchoFormatVersion = 1;

/// NFSI image container:
///   "NFSI" | u16 version | u32 rows | u32 cols | f64 dx | f64 dy |
///   f64 origin_x | f64 origin_y | rows*cols x (f64 re, f64 im)
/// All fields little-endian, samples row-major.
std::vector<std::uint8_t> encode_image(const ComplexImage& img);
ComplexImage decode_image(const std::vector<std::uint8_t>& bytes);
void write_image(const std::filesystem::path& path, const ComplexImage& img);
ComplexImage read_image(const std::filesystem::path& path);

/// NFSE echo container:
///   "NFSE" | u16 version | u32 apertures | u32 frequencies |
///   apertures x f64 position | frequencies x f64 Hz | samples (f64 re, f64 im)
void write_echo(const std::filesystem::path& path, const EchoMatrix& echo);
EchoMatrix read_echo(const std::filesystem::path& path);

/// Magnitude in dB relative to the image peak, clipped at `floor_db`, mapped
/// linearly to 0..255. Row 0 of the file is the far-range edge (iy = ny-1).
std::vector<std::uint8_t> db_bytes(const ComplexImage& img, double floor_db = -60.0);
void write_pgm(const std::filesystem::path& path, const ComplexImage& img,
               double floor_db = -60.0);
/// Throws IoError when the toolkit was built without libpng.
void write_png(const std::filesystem::path& path, const ComplexImage& img,
               double floor_db = -60.0);
bool png_available();

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Little-endian byte writer/reader shared by the binary containers.
class ByteWriter {
 public:
  void bytes(const void* p, std::size_t n);
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  std::vector<std::uint8_t>& buffer() { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& buf) : buf_(buf) {}
  void bytes(void* p, std::size_t n);
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::size_t remaining() const { return buf_.size() - pos_; }

 private:
  const std::vector<std::uint8_t>& buf_;
  std::size_t pos_ = 0;
};

}  // namespace nfsar::io
