#include "nfsar/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "nfsar/errors.hpp"

#ifdef NFSAR_HAVE_PNG
#include <png.h>
#endif

namespace nfsar::io {

void ByteWriter::bytes(const void* p, std::size_t n) {
  const auto* b = static_cast<const std::uint8_t*>(p);
  buf_.insert(buf_.end(), b, b + n);
}

void ByteWriter::u16(std::uint16_t v) {
  for (int i = 0; i < 2; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteReader::bytes(void* p, std::size_t n) {
  if (remaining() < n) throw IoError("unexpected end of container");
  std::memcpy(p, buf_.data() + pos_, n);
  pos_ += n;
}

std::uint16_t ByteReader::u16() {
  std::uint8_t b[2];
  bytes(b, 2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t ByteReader::u32() {
  std::uint8_t b[4];
  bytes(b, 4);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::uint64_t ByteReader::u64() {
  std::uint8_t b[8];
  bytes(b, 8);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return data;
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::string read_text(const std::filesystem::path& path) {
  const auto b = read_file(path);
  return std::string(b.begin(), b.end());
}

std::vector<std::uint8_t> encode_image(const ComplexImage& img) {
  const auto& g = img.grid();
  ByteWriter w;
  w.bytes("NFSI", 4);
  w.u16(kImageFormatVersion);
  w.u32(static_cast<std::uint32_t>(g.ny));
  w.u32(static_cast<std::uint32_t>(g.nx));
  w.f64(g.dx_m);
  w.f64(g.dy_m);
  w.f64(g.origin_x_m);
  w.f64(g.origin_y_m);
  w.buffer().reserve(w.buffer().size() + 16 * img.size());
  for (const auto& v : img.vector()) {
    w.f64(v.real());
    w.f64(v.imag());
  }
  return std::move(w.buffer());
}

ComplexImage decode_image(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, "NFSI", 4) != 0) throw IoError("not an NFSI image container");
  const auto version = r.u16();
  if (version != kImageFormatVersion)
    throw IoError("unsupported NFSI version " + std::to_string(version));
  ImageGrid g;
  g.ny = r.u32();
  g.nx = r.u32();
  g.dx_m = r.f64();
  g.dy_m = r.f64();
  g.origin_x_m = r.f64();
  g.origin_y_m = r.f64();
  if (r.remaining() != 16 * g.nx * g.ny)
    throw IoError("NFSI payload length does not match its header");
  std::vector<cplx> samples(g.nx * g.ny);
  for (auto& v : samples) {
    const double re = r.f64();
    v = {re, r.f64()};
  }
  return ComplexImage(g, std::move(samples));
}

void write_image(const std::filesystem::path& path, const ComplexImage& img) {
  write_file(path, encode_image(img));
}

ComplexImage read_image(const std::filesystem::path& path) {
  try {
    return decode_image(read_file(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_echo(const std::filesystem::path& path, const EchoMatrix& echo) {
  echo.validate();
  ByteWriter w;
  w.bytes("NFSE", 4);
  w.u16(kEchoFormatVersion);
  w.u32(static_cast<std::uint32_t>(echo.aperture_count()));
  w.u32(static_cast<std::uint32_t>(echo.frequency_count()));
  for (double x : echo.aperture_positions_m) w.f64(x);
  for (double f : echo.frequencies_hz) w.f64(f);
  for (const auto& v : echo.samples) {
    w.f64(v.real());
    w.f64(v.imag());
  }
  write_file(path, w.buffer());
}

EchoMatrix read_echo(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  ByteReader r(bytes);
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, "NFSE", 4) != 0) throw IoError(path.string() + ": not an NFSE container");
  if (r.u16() != kEchoFormatVersion) throw IoError(path.string() + ": unsupported NFSE version");
  const std::size_t na = r.u32(), nf = r.u32();
  if (r.remaining() != 8 * (na + nf) + 16 * na * nf)
    throw IoError(path.string() + ": NFSE payload length does not match its header");
  EchoMatrix e;
  e.aperture_positions_m.resize(na);
  e.frequencies_hz.resize(nf);
  e.samples.resize(na * nf);
  for (auto& x : e.aperture_positions_m) x = r.f64();
  for (auto& f : e.frequencies_hz) f = r.f64();
  for (auto& v : e.samples) {
    const double re = r.f64();
    v = {re, r.f64()};
  }
  return e;
}

std::vector<std::uint8_t> db_bytes(const ComplexImage& img, double floor_db) {
  if (!(floor_db < 0.0)) throw InvalidArgument("dB floor must be negative");
  const std::size_t nx = img.nx(), ny = img.ny();
  const double peak = img.max_abs();
  std::vector<std::uint8_t> out(nx * ny, 0);
  if (peak == 0.0) return out;
  for (std::size_t r = 0; r < ny; ++r) {
    const std::size_t iy = ny - 1 - r;
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const double m = std::abs(img(ix, iy)) / peak;
      const double db = m > 0.0 ? std::max(20.0 * std::log10(m), floor_db) : floor_db;
      out[r * nx + ix] = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - db / floor_db)));
    }
  }
  return out;
}

void write_pgm(const std::filesystem::path& path, const ComplexImage& img, double floor_db) {
  const auto pixels = db_bytes(img, floor_db);
  const std::string header =
      "P5\n" + std::to_string(img.nx()) + " " + std::to_string(img.ny()) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), pixels.begin(), pixels.end());
  write_file(path, bytes);
}

bool png_available() {
#ifdef NFSAR_HAVE_PNG
  return true;
#else
  return false;
#endif
}

void write_png(const std::filesystem::path& path, const ComplexImage& img, double floor_db) {
#ifdef NFSAR_HAVE_PNG
  const auto pixels = db_bytes(img, floor_db);
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.nx());
  image.height = static_cast<png_uint_32>(img.ny());
  image.format = PNG_FORMAT_GRAY;
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  if (!png_image_write_to_file(&image, path.c_str(), 0, pixels.data(), 0, nullptr))
    throw IoError("cannot write " + path.string() + ": " + image.message);
#else
  (void)img;
  (void)floor_db;
  throw IoError("PNG export unavailable (built without libpng): " + path.string());
#endif
}

}  // namespace nfsar::io
