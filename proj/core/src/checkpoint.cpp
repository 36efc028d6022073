#include "anacp/checkpoint.hpp"

#include "anacp/error.hpp"
#include "anacp/learner.hpp"
#include "anacp/rng.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace anacp {

void BinaryWriter::u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }

void BinaryWriter::u32(std::uint32_t v) {
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>(v >> (8 * i));
  out_.write(buf, 4);
}

void BinaryWriter::u64(std::uint64_t v) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>(v >> (8 * i));
  out_.write(buf, 8);
}

void BinaryWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::str(const std::string& s) {
  u64(s.size());
  out_.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void BinaryWriter::matrix(const Matrix& m) {
  u64(static_cast<std::uint64_t>(m.rows()));
  u64(static_cast<std::uint64_t>(m.cols()));
  for (Index i = 0; i < m.size(); ++i) f64(m.data()[i]);
}

void BinaryWriter::ids(const std::vector<ClassId>& v) {
  u64(v.size());
  for (ClassId id : v) u32(id);
}

void BinaryWriter::counts(const std::vector<std::uint64_t>& v) {
  u64(v.size());
  for (auto c : v) u64(c);
}

void BinaryReader::read(void* dst, std::size_t n) {
  in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in_.gcount()) != n) throw Error(Errc::truncated_file, "checkpoint ended early");
}

std::uint8_t BinaryReader::u8() {
  std::uint8_t v;
  read(&v, 1);
  return v;
}

std::uint32_t BinaryReader::u32() {
  unsigned char buf[4];
  read(buf, 4);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}

std::uint64_t BinaryReader::u64() {
  unsigned char buf[8];
  read(buf, 8);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}

double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

std::string BinaryReader::str() {
  const auto n = u64();
  if (n > (1ull << 32)) throw Error(Errc::parse_error, "implausible string length in checkpoint");
  std::string s(n, '\0');
  read(s.data(), n);
  return s;
}

Matrix BinaryReader::matrix() {
  const auto rows = u64();
  const auto cols = u64();
  if (rows > (1ull << 31) || cols > (1ull << 31)) throw Error(Errc::parse_error, "implausible matrix shape");
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = f64();
  return m;
}

std::vector<ClassId> BinaryReader::ids() {
  const auto n = u64();
  if (n > (1ull << 32)) throw Error(Errc::parse_error, "implausible id count");
  std::vector<ClassId> v(n);
  for (auto& id : v) id = u32();
  return v;
}

std::vector<std::uint64_t> BinaryReader::counts() {
  const auto n = u64();
  if (n > (1ull << 32)) throw Error(Errc::parse_error, "implausible count list");
  std::vector<std::uint64_t> v(n);
  for (auto& c : v) c = u64();
  return v;
}

void save_checkpoint(const Learner& learner, const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(Errc::io_error, "cannot write " + path.string());
  BinaryWriter out(file);
  file.write(kCheckpointMagic, 4);
  out.u8(kCheckpointVersion);
  out.str(std::string(Rng::kName));
  out.u32(Rng::kVersion);
  out.str(to_json(learner.config()).dump());
  out.u64(static_cast<std::uint64_t>(learner.dim()));
  learner.save(out);
  if (!file) throw Error(Errc::io_error, "short write to " + path.string());
}

std::unique_ptr<Learner> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(Errc::io_error, "cannot open " + path.string());
  char magic[4] = {};
  file.read(magic, 4);
  if (file.gcount() != 4 || std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw Error(Errc::bad_magic, path.string() + " is not a checkpoint");
  }
  BinaryReader in(file);
  if (const auto version = in.u8(); version != kCheckpointVersion) {
    throw Error(Errc::bad_magic, "unsupported checkpoint version " + std::to_string(version));
  }
  const std::string rng_name = in.str();
  const auto rng_version = in.u32();
  if (rng_name != Rng::kName || rng_version != Rng::kVersion) {
    throw Error(Errc::parse_error, "checkpoint was written with PRNG " + rng_name + " v" +
                                       std::to_string(rng_version) + "; seeds would not reproduce");
  }
  LearnerConfig config;
  try {
    config = config_from_json(nlohmann::json::parse(in.str()));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, std::string("checkpoint config: ") + e.what());
  }
  const auto dim = static_cast<Index>(in.u64());
  auto learner = make_learner(config, dim);
  learner->restore(in);
  return learner;
}

}  // namespace anacp
