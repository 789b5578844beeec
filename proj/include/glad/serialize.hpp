#pragma once

#include "glad/common.hpp"

#include <cstdint>
#include <fstream>
#include <string>

namespace glad {

// Versioned little-endian binary container shared by every serialized model.
// Layout: 8-byte magic "GLADBIN\0", u32 container version, u32 model kind,
// then the model payload. Doubles are raw IEEE-754 bits, so a round trip is
// bit-exact.
enum class ModelKind : uint32_t {
  Pvdm = 1,
  NodeRepr = 2,
  Purpose = 3,
  Autoencoder = 4,
  Bundle = 5,
  Joint = 6,
};

inline constexpr uint32_t kContainerVersion = 1;

class BinWriter {
 public:
  explicit BinWriter(const std::string& path);

  void header(ModelKind kind);
  void u32(uint32_t v);
  void u64(uint64_t v);
  void i64(int64_t v);
  void f64(double v);
  void str(const std::string& s);
  void matrix(const MatrixXd& m);
  void vector(const VectorXd& v);

 private:
  void raw(const void* data, size_t n);
  std::ofstream out_;
  std::string path_;
};

class BinReader {
 public:
  explicit BinReader(const std::string& path);

  // Returns the container version; throws on magic or kind mismatch.
  uint32_t header(ModelKind expected_kind);
  uint32_t u32();
  uint64_t u64();
  int64_t i64();
  double f64();
  std::string str();
  MatrixXd matrix();
  VectorXd vector();

 private:
  void raw(void* data, size_t n);
  std::ifstream in_;
  std::string path_;
};

}  // namespace glad
