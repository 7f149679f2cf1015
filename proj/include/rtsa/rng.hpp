// Reproducible random streams.
//
// Every trajectory owns one NormalStream. Its seed is derived from the
// experiment's master seed and the trajectory index by a counter-based mix,
// so a trajectory's draws never depend on which worker ran it or when.
#pragma once

#include <concepts>
#include <cstdint>
#include <random>
#include <span>

namespace rtsa {

/// SplitMix64 finalizer applied to a counter.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of trajectory `index` under `master_seed`.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index);

/// Anything that can fill a buffer with standard normal variates.
template <typename S>
concept NormalSource = requires(S& s, std::span<double> out) {
  { s.fill_standard_normals(out) };
};

/// Standard normals via Box–Muller over a 64-bit Mersenne Twister.
///
/// Draw accounting is fixed: filling k normals consumes 2*ceil(k/2)
/// uniforms. For odd k the last pair's second variate is discarded, so the
/// stream position after a call depends only on k.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  void fill_standard_normals(std::span<double> out);

  /// Number of uniforms consumed so far.
  std::uint64_t uniforms_drawn() const { return uniforms_drawn_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t uniforms_drawn_ = 0;
};

static_assert(NormalSource<NormalStream>);

}  // namespace rtsa
