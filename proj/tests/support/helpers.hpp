#pragma once

#include "anacp/anacp.hpp"

#include <cmath>
#include <filesystem>
#include <string>

namespace anacp::test {

inline Matrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

inline double rel_diff(const Matrix& a, const Matrix& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

inline Matrix random_spd(Index d, std::uint64_t seed) {
  const Matrix A = gaussian(d, d, seed);
  return A * A.transpose() / static_cast<double>(d) + Matrix::Identity(d, d);
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("anacp_" + tag + "_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

#define EXPECT_ANACP_ERROR(stmt, errc)                                   \
  do {                                                                   \
    try {                                                                \
      stmt;                                                              \
      ADD_FAILURE() << "expected " << ::anacp::to_string(errc);          \
    } catch (const ::anacp::Error& e) {                                  \
      EXPECT_EQ(e.code(), errc) << e.what();                             \
    }                                                                    \
  } while (0)

}  // namespace anacp::test
