#include "rtsa/rng.hpp"

#include <cmath>
#include <numbers>

namespace rtsa {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

double NormalStream::uniform() {
  ++uniforms_drawn_;
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

void NormalStream::fill_standard_normals(std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); i += 2) {
    // 1 - U keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    out[i] = r * std::cos(theta);
    if (i + 1 < out.size()) out[i + 1] = r * std::sin(theta);
  }
}

}  // namespace rtsa
