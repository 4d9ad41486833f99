#include "explab/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace explab {

namespace {

constexpr std::uint64_t kFnvOffset = 0xCBF29CE484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001B3ULL;
constexpr std::uint64_t kXorshiftMultiplier = 0x2545F4914F6CDD1DULL;
// xorshift64* must never hold the all-zero state.
constexpr std::uint64_t kZeroStateReplacement = 0x9E3779B97F4A7C15ULL;

}  // namespace

std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t seed) noexcept : state_(splitmix64(seed)) {
  if (state_ == 0) state_ = kZeroStateReplacement;
}

std::uint64_t RngStream::next_u64() noexcept {
  state_ ^= state_ >> 12;
  state_ ^= state_ << 25;
  state_ ^= state_ >> 27;
  return state_ * kXorshiftMultiplier;
}

double RngStream::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_open() noexcept {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * scale;
  has_spare_ = true;
  return u * scale;
}

int RngStream::sign() noexcept { return (next_u64() >> 63) != 0 ? 1 : -1; }

std::uint64_t RngStream::below(std::uint64_t n) noexcept {
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
  std::uint64_t r = next_u64();
  while (r >= limit) r = next_u64();
  return r % n;
}

SeedLabel::SeedLabel(std::string_view text) noexcept {
  std::uint64_t h = kFnvOffset;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnvPrime;
  }
  hash_ = splitmix64(h);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::initializer_list<SeedLabel> labels) {
  if (labels.size() == 0) throw std::invalid_argument("rng_derive: empty label list");
  std::uint64_t key = splitmix64(master_seed);
  for (const auto& label : labels) key = splitmix64(key ^ label.hash());
  return key;
}

RngStream rng_derive(std::uint64_t master_seed, std::initializer_list<SeedLabel> labels) {
  return RngStream(derive_seed(master_seed, labels));
}

Eigen::VectorXd sample_normal(Eigen::Index dim, RngStream& rng) {
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = rng.normal();
  return v;
}

Eigen::VectorXd sample_unit_sphere(Eigen::Index dim, RngStream& rng) {
  if (dim < 1) throw std::invalid_argument("sample_unit_sphere: dim must be >= 1");
  for (;;) {
    Eigen::VectorXd v = sample_normal(dim, rng);
    const double n = v.norm();
    if (n >= 1e-12) return v / n;
  }
}

Eigen::VectorXd sample_unit_ball(Eigen::Index dim, RngStream& rng) {
  Eigen::VectorXd v = sample_unit_sphere(dim, rng);
  return v * std::pow(rng.uniform_open(), 1.0 / static_cast<double>(dim));
}

}  // namespace explab
