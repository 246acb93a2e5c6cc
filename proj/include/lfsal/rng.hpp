#ifndef LFSAL_RNG_HPP
#define LFSAL_RNG_HPP

#include <cstdint>
#include <vector>

namespace lfsal {

enum class Stream : std::uint64_t { weights = 1, dropout = 2, crop = 3, noise = 4, shuffle = 5 };

/// Counter-based random stream. The value of draw `i` depends only on
/// (seed, stream, substream, i), so streams can be split per sample or per
/// iteration and replayed after a resume without carrying state.
class RngStream {
 public:
  RngStream(std::uint64_t seed, Stream stream, std::uint64_t substream = 0);

  /// Independent child stream (e.g. one per training iteration).
  RngStream fork(std::uint64_t substream) const;
  /// Child stream on a different stream id, keyed by this stream's lineage.
  RngStream derive(Stream stream, std::uint64_t substream) const;

  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller; consumes two draws.
  double normal();

  std::uint64_t seed() const noexcept { return seed_; }
  Stream stream() const noexcept { return stream_; }
  std::uint64_t draw_index() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  Stream stream_;
  std::uint64_t substream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Seeded Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> shuffled_indices(std::size_t n, RngStream& rng);

}  // namespace lfsal

#endif  // LFSAL_RNG_HPP
