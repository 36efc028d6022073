#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace anacp {

/// Seeded generator used for every random draw in the library.
///
/// std::mt19937_64 has a bit-exact output sequence mandated by the standard, but
/// the std distributions do not, so uniform and normal variates are derived here
/// by hand. The name/version pair is written into checkpoints; bump kVersion if
/// any derivation below changes.
class Rng {
 public:
  static constexpr std::string_view kName = "mt19937_64+box-muller";
  static constexpr std::uint32_t kVersion = 1;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, n), rejection sampled (no modulo bias).
  std::uint64_t below(std::uint64_t n);

  double normal();

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace anacp
