#ifndef LFSAL_CHECKPOINT_HPP
#define LFSAL_CHECKPOINT_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "lfsal/config.hpp"
#include "lfsal/network.hpp"

namespace lfsal {

/// `<base>.index` is a text table (name, dtype, offset, shape) preceded by the
/// iteration counter and the embedded run config; `<base>.bin` holds the
/// tensors as little-endian float32, concatenated in index order. Momentum
/// buffers are stored as `<name>.velocity` so training resumes exactly.
struct Checkpoint {
  long long iteration = 0;
  RunConfig config;
  std::vector<std::pair<std::string, Tensor<float>>> tensors;
};

std::filesystem::path checkpoint_index_path(const std::filesystem::path& base);
std::filesystem::path checkpoint_blob_path(const std::filesystem::path& base);
/// Accepts either the base path or the .index file.
std::filesystem::path checkpoint_base(const std::filesystem::path& path);

void save_checkpoint(const std::filesystem::path& base, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

template <typename T>
Checkpoint capture_checkpoint(const SaliencyNet<T>& net, const RunConfig& cfg, long long iteration);

/// Copies values (and velocities when present) into a net of matching layout.
template <typename T>
void restore_checkpoint(SaliencyNet<T>& net, const Checkpoint& ckpt);

}  // namespace lfsal

#endif  // LFSAL_CHECKPOINT_HPP
