#pragma once

// Deterministic random streams.
//
// Generator: xorshift64* (Vigna 2016), one 64-bit word of state, output
// multiplier 0x2545F4914F6CDD1D. Seeding and stream derivation use the
// splitmix64 finalizer:
//
//   z += 0x9E3779B97F4A7C15
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   z ^= z >> 31
//
// rng_derive(seed, {l1, ..., ln}) folds each label into the running key:
// key = mix(seed); key = mix(key ^ h(l_i)) where integer labels hash to
// mix(value) and string labels to mix(FNV-1a-64(bytes)). Gaussians use the
// Marsaglia polar method with one cached spare.

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <type_traits>

#include <Eigen/Core>

namespace explab {

std::uint64_t splitmix64(std::uint64_t z) noexcept;

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept;
  /// Uniform on (0, 1).
  double uniform_open() noexcept;
  double normal() noexcept;
  /// Uniform on {-1, +1}.
  int sign() noexcept;
  /// Uniform on {0, ..., n - 1}; n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept;

  std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// One component of a stream-derivation path.
class SeedLabel {
 public:
  SeedLabel(std::string_view text) noexcept;  // NOLINT(google-explicit-constructor)
  SeedLabel(const char* text) noexcept : SeedLabel(std::string_view(text)) {}  // NOLINT
  SeedLabel(const std::string& text) noexcept : SeedLabel(std::string_view(text)) {}  // NOLINT
  template <typename Int, typename = std::enable_if_t<std::is_integral_v<Int>>>
  SeedLabel(Int value) noexcept  // NOLINT(google-explicit-constructor)
      : hash_(splitmix64(static_cast<std::uint64_t>(value))) {}

  std::uint64_t hash() const noexcept { return hash_; }

 private:
  std::uint64_t hash_;
};

std::uint64_t derive_seed(std::uint64_t master_seed, std::initializer_list<SeedLabel> labels);

/// Independent stream for a labelled sub-task. Throws std::invalid_argument on an empty label list.
RngStream rng_derive(std::uint64_t master_seed, std::initializer_list<SeedLabel> labels);

/// i.i.d. standard normal vector.
Eigen::VectorXd sample_normal(Eigen::Index dim, RngStream& rng);

/// Uniform on the unit sphere S^{dim-1}: a normalized Gaussian vector.
Eigen::VectorXd sample_unit_sphere(Eigen::Index dim, RngStream& rng);

/// Uniform in the unit ball: a sphere sample scaled by U^{1/dim}.
Eigen::VectorXd sample_unit_ball(Eigen::Index dim, RngStream& rng);

}  // namespace explab
