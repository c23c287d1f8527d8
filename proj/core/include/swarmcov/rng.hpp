#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace swarmcov {

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Distinguishes independent draws that share a (particle, step) pair.
enum class StreamPurpose : std::uint32_t { Switching = 1, Noise = 2, Initial = 3, Test = 255 };

/// Counter-based stream addressed by (seed, particle, step, purpose).
/// Two streams with different addresses are statistically independent, and a
/// stream's output does not depend on what other streams have drawn, so parallel
/// particle updates reproduce bit for bit regardless of scheduling.
class StreamRng {
 public:
  using result_type = std::uint32_t;

  StreamRng(std::uint64_t seed, std::uint64_t particle, std::uint64_t step,
            StreamPurpose purpose = StreamPurpose::Noise);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller.
  double normal();

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> buffer_{};
  int next_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace swarmcov
