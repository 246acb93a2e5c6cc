#ifndef LFSAL_COMMANDS_HPP
#define LFSAL_COMMANDS_HPP

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "lfsal/checkpoint.hpp"
#include "lfsal/dataset.hpp"

namespace lfsal {

namespace fs = std::filesystem;

/// Reads `view_{v}_{u}` images (.ppm or .pgm, zero-based) from a directory.
LightField4D<float> load_view_grid(const fs::path& dir);

/// Centre-samples (or pads with the central view) the grid to A_target views
/// per axis and writes the assembled micro-lens array.
MicroLensArray<float> cmd_convert(const fs::path& view_dir, const fs::path& out_array, Index angular_res);

/// Seeded shuffle into k folds. Writes fold_<i>/{train.json,test.json,config.txt};
/// each config carries the training split's per-channel mean. Returns the
/// fold directories.
std::vector<fs::path> cmd_split(const fs::path& manifest, Index k, std::uint64_t seed, const fs::path& out_dir,
                                const RunConfig& base = {});

struct TrainResult {
  std::vector<double> losses;  // one per iteration run in this call
  long long first_iteration = 0;
  fs::path final_checkpoint;
};

/// Iterates the augmented dataset in a per-epoch seeded order. With `resume`
/// the run continues from a checkpoint using its embedded config; only the
/// iteration target comes from `cfg`.
TrainResult cmd_train(const RunConfig& cfg, const fs::path& manifest, const fs::path& out_dir,
                      const std::optional<fs::path>& resume = std::nullopt,
                      const std::function<void(long long, double, double)>& on_step = {});

/// One 8-bit map per entry, written as <out_dir>/<array stem>.pgm.
std::vector<fs::path> cmd_predict(const fs::path& checkpoint, const fs::path& manifest, const fs::path& out_dir);

/// Scores <pred_dir>/<array stem>.pgm against the manifest masks and writes
/// the JSON report and the PR curve.
MetricsReport cmd_eval(const fs::path& pred_dir, const fs::path& manifest, const fs::path& report_path,
                       const fs::path& curve_path, const MetricsConfig& metrics = {});

/// Materializes every variant as <stem>_vNN files plus a manifest.
Manifest cmd_augment(const fs::path& manifest, const fs::path& out_dir, const RunConfig& cfg);

/// Path of the PR curve written next to a report.
fs::path default_curve_path(const fs::path& report_path);

}  // namespace lfsal

#endif  // LFSAL_COMMANDS_HPP
