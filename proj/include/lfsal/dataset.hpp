#ifndef LFSAL_DATASET_HPP
#define LFSAL_DATASET_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "lfsal/augment.hpp"

namespace lfsal {

struct ManifestEntry {
  std::filesystem::path array;  // absolute after load
  std::filesystem::path mask;
};

/// JSON list of (array, mask) image pairs. Paths are stored relative to the
/// manifest's directory.
struct Manifest {
  Index angular_res = 9;
  std::vector<ManifestEntry> entries;
};

/// Resolves paths and checks that every referenced file exists.
Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Reads one entry and checks its dims against A.
template <typename T>
Sample<T> load_sample(const ManifestEntry& entry, Index angular_res);

template <typename T>
std::vector<Sample<T>> load_samples(const Manifest& manifest);

/// Per-channel mean of the array pixels over a set of entries.
std::vector<double> channel_means(const Manifest& manifest);

/// File stem used for per-entry outputs; unique within a manifest.
std::vector<std::string> entry_stems(const Manifest& manifest);

}  // namespace lfsal

#endif  // LFSAL_DATASET_HPP
