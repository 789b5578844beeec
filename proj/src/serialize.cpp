#include "glad/serialize.hpp"

#include <cstring>

namespace glad {

namespace {
constexpr char kMagic[8] = {'G', 'L', 'A', 'D', 'B', 'I', 'N', '\0'};

void encode_u64(uint64_t v, unsigned char* out) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
}

uint64_t decode_u64(const unsigned char* in) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(in[i]) << (8 * i);
  return v;
}
}  // namespace

BinWriter::BinWriter(const std::string& path) : out_(path, std::ios::binary), path_(path) {
  if (!out_) throw Error("cannot open for writing: " + path);
}

void BinWriter::raw(const void* data, size_t n) {
  out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out_) throw Error("write failed: " + path_);
}

void BinWriter::header(ModelKind kind) {
  raw(kMagic, sizeof(kMagic));
  u32(kContainerVersion);
  u32(static_cast<uint32_t>(kind));
}

void BinWriter::u32(uint32_t v) {
  unsigned char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFF);
  raw(buf, 4);
}

void BinWriter::u64(uint64_t v) {
  unsigned char buf[8];
  encode_u64(v, buf);
  raw(buf, 8);
}

void BinWriter::i64(int64_t v) { u64(static_cast<uint64_t>(v)); }

void BinWriter::f64(double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  u64(bits);
}

void BinWriter::str(const std::string& s) {
  u64(s.size());
  if (!s.empty()) raw(s.data(), s.size());
}

void BinWriter::matrix(const MatrixXd& m) {
  i64(m.rows());
  i64(m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
}

void BinWriter::vector(const VectorXd& v) {
  i64(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) f64(v(i));
}

BinReader::BinReader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
  if (!in_) throw Error("cannot open for reading: " + path);
}

void BinReader::raw(void* data, size_t n) {
  in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (!in_ || static_cast<size_t>(in_.gcount()) != n) throw Error("truncated file: " + path_);
}

uint32_t BinReader::header(ModelKind expected_kind) {
  char magic[8];
  raw(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) throw Error("bad magic in " + path_);
  uint32_t version = u32();
  if (version != kContainerVersion)
    throw Error("unsupported container version " + std::to_string(version) + " in " + path_);
  uint32_t kind = u32();
  if (kind != static_cast<uint32_t>(expected_kind))
    throw Error("unexpected model kind " + std::to_string(kind) + " in " + path_);
  return version;
}

uint32_t BinReader::u32() {
  unsigned char buf[4];
  raw(buf, 4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(buf[i]) << (8 * i);
  return v;
}

uint64_t BinReader::u64() {
  unsigned char buf[8];
  raw(buf, 8);
  return decode_u64(buf);
}

int64_t BinReader::i64() { return static_cast<int64_t>(u64()); }

double BinReader::f64() {
  uint64_t bits = u64();
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

std::string BinReader::str() {
  uint64_t n = u64();
  std::string s(n, '\0');
  if (n > 0) raw(s.data(), n);
  return s;
}

MatrixXd BinReader::matrix() {
  int64_t rows = i64();
  int64_t cols = i64();
  if (rows < 0 || cols < 0) throw Error("corrupt matrix header in " + path_);
  MatrixXd m(rows, cols);
  for (int64_t r = 0; r < rows; ++r)
    for (int64_t c = 0; c < cols; ++c) m(r, c) = f64();
  return m;
}

VectorXd BinReader::vector() {
  int64_t n = i64();
  if (n < 0) throw Error("corrupt vector header in " + path_);
  VectorXd v(n);
  for (int64_t i = 0; i < n; ++i) v(i) = f64();
  return v;
}

}  // namespace glad
