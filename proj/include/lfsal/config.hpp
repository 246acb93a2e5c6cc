#ifndef LFSAL_CONFIG_HPP
#define LFSAL_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lfsal/augment.hpp"
#include "lfsal/metrics.hpp"
#include "lfsal/network.hpp"

namespace lfsal {

/// Every knob of a run. Serialized as `key = value` lines; `#` starts a
/// comment. Lists are comma-separated.
struct RunConfig {
  std::string profile = "desk";  // desk | paper
  Index angular_res = 9;
  MacVariant mac_variant = MacVariant::mac9x9;
  FrontEnd front_end = FrontEnd::mac;
  std::vector<Index> channels;     // empty: profile default
  std::vector<Index> aspp_rates;   // empty: profile default
  Index aspp_channels = 0;         // 0: profile default
  std::vector<double> dropout;     // empty: profile default
  std::vector<double> input_mean{0.0, 0.0, 0.0};

  TrainSchedule schedule;
  long long iterations = 0;  // iterations to run; 0 means schedule.max_iter
  long long checkpoint_every = 1000;
  std::uint64_t seed = 0;

  Index fold_index = 0;
  Index fold_count = 5;

  bool augment = true;
  bool crop_auto = true;  // crop size scaled to each array
  AugmentationSpec augmentation;

  MetricsConfig metrics;

  NetConfig net_config() const;
  /// Augmentation spec for an array of the given size.
  AugmentationSpec augmentation_for(Index width, Index height) const;
  long long total_iterations() const { return iterations > 0 ? iterations : schedule.max_iter; }
  void validate() const;
};

RunConfig parse_config(const std::string& text);
std::string config_text(const RunConfig& cfg);
RunConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const RunConfig& cfg);

/// Applies one `key=value` override; throws ConfigError on unknown keys.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace lfsal

#endif  // LFSAL_CONFIG_HPP
