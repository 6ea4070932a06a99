#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace twophase {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter apply(Counter ctr, Key key) noexcept {
    constexpr std::uint32_t kM0 = 0xD2511F53u;
    constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }
};

/// What a stream is used for. Different purposes never share counters.
enum class StreamPurpose : std::uint16_t {
  Gaussian = 1,
  Bridge = 2,
  Onset = 3,
  Auxiliary = 4,
};

/// Deterministic random stream addressed by (seed, stream id, purpose).
///
/// The block counter is 48 bits. Each block yields two 53-bit uniforms, so
/// draw k of a stream is a pure function of (seed, stream, purpose, k) and
/// any schedule over streams reproduces the serial numbers.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t stream, StreamPurpose purpose) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream),
        purpose_(static_cast<std::uint16_t>(purpose)) {}

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    if (slot_ == 2) refill();
    return cached_[slot_++];
  }

  /// Standard normal by Box-Muller on consecutive uniform pairs.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(th);
    has_spare_ = true;
    return r * std::cos(th);
  }

  double exponential() noexcept { return -std::log(uniform()); }

  /// Jumps to the start of block `block`, dropping cached values.
  void seek(std::uint64_t block) noexcept {
    block_ = block;
    slot_ = 2;
    has_spare_ = false;
  }
  std::uint64_t block() const noexcept { return block_; }

  static double to_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
    // 52 bits so that k + 0.5 is exact and the top value stays below 1
    const std::uint64_t k = (std::uint64_t{hi} << 20) | (lo >> 12);
    return (static_cast<double>(k) + 0.5) * 0x1p-52;
  }

 private:
  void refill() noexcept {
    const Philox4x32::Counter ctr{
        static_cast<std::uint32_t>(block_),
        static_cast<std::uint32_t>((block_ >> 32) & 0xFFFFu) |
            (static_cast<std::uint32_t>(purpose_) << 16),
        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    const auto r = Philox4x32::apply(ctr, key_);
    cached_[0] = to_unit(r[0], r[1]);
    cached_[1] = to_unit(r[2], r[3]);
    slot_ = 0;
    ++block_;
  }

  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint16_t purpose_;
  std::uint64_t block_ = 0;
  std::array<double, 2> cached_{};
  int slot_ = 2;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace twophase
