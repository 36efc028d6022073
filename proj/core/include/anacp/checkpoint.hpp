#pragma once

#include "anacp/types.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace anacp {

class Learner;

/// Little-endian binary stream used by checkpoints. Matrices are stored as
/// u64 rows, u64 cols, then column-major f64.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void u8(std::uint8_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void str(const std::string& s);
  void matrix(const Matrix& m);
  void ids(const std::vector<ClassId>& v);
  void counts(const std::vector<std::uint64_t>& v);

 private:
  std::ostream& out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in) : in_(in) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::string str();
  Matrix matrix();
  std::vector<ClassId> ids();
  std::vector<std::uint64_t> counts();

 private:
  void read(void* dst, std::size_t n);
  std::istream& in_;
};

inline constexpr char kCheckpointMagic[4] = {'A', 'C', 'P', 'K'};
inline constexpr std::uint8_t kCheckpointVersion = 1;

/// Header: magic, version, PRNG name + version, learner config (JSON), input
/// dimension, task class sets; then the learner's own state sections.
void save_checkpoint(const Learner& learner, const std::filesystem::path& path);
std::unique_ptr<Learner> load_checkpoint(const std::filesystem::path& path);

}  // namespace anacp
