#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

namespace longmem {

/// Identifier of the generator family, echoed into run metadata.
inline constexpr std::string_view kGeneratorName = "xoshiro256** seeded by splitmix64(seed, cell, replication)";

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

/// Identity of a random stream. Equal identities produce equal draw sequences.
struct StreamId {
  std::uint64_t master_seed = 0;
  std::uint64_t cell_id = 0;
  std::uint64_t replication = 0;

  friend bool operator==(const StreamId&, const StreamId&) = default;
};

/// Deterministic pseudo-random stream (xoshiro256**). The 256-bit state is
/// derived from the identity triple through chained splitmix64 mixing, so
/// distinct triples land on unrelated points of the generator's period.
/// Satisfies UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(StreamId id) noexcept : id_(id) {
    std::uint64_t mix = id.master_seed;
    mix = detail::splitmix64(mix) ^ id.cell_id;
    mix = detail::splitmix64(mix) ^ id.replication;
    std::uint64_t seeder = detail::splitmix64(mix);
    for (auto& word : state_) word = detail::splitmix64(seeder);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = detail::rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0, 1): 53 random bits, centred in their cell.
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via the Marsaglia polar method; the second variate of
  /// each accepted pair is kept for the next call.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

  const StreamId& id() const noexcept { return id_; }

 private:
  StreamId id_;
  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// 64-bit FNV-1a, used to turn canonical cell descriptions into cell ids.
inline constexpr std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

}  // namespace longmem
