#include "lfsal/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace lfsal {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, Stream stream, std::uint64_t substream)
    : seed_(seed), stream_(stream), substream_(substream) {
  key_ = splitmix64(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(stream)) ^ substream);
}

RngStream RngStream::fork(std::uint64_t substream) const {
  return RngStream(seed_, stream_, splitmix64(substream_ ^ 0xa0761d6478bd642fULL) + substream);
}

RngStream RngStream::derive(Stream stream, std::uint64_t substream) const {
  return RngStream(seed_, stream, splitmix64(substream_ ^ 0xe7037ed1a0b428dbULL) + substream);
}

std::uint64_t RngStream::next_u64() { return splitmix64(key_ ^ splitmix64(counter_++)); }

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n <= 1) return 0;
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % n;
}

double RngStream::normal() {
  double u1 = uniform();
  const double u2 = uniform();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::size_t> shuffled_indices(std::size_t n, RngStream& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

}  // namespace lfsal
