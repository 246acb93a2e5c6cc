#include "lfsal/dataset.hpp"

#include <set>

#include <json.hpp>

#include "lfsal/config.hpp"
#include "lfsal/raster.hpp"

namespace lfsal {

namespace fs = std::filesystem;

Manifest load_manifest(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest " + path.string() + ": " + e.what());
  }
  Manifest m;
  const fs::path root = path.parent_path();
  try {
    m.angular_res = j.at("angular_res").get<Index>();
    for (const auto& e : j.at("entries")) {
      ManifestEntry entry{root / e.at("array").get<std::string>(), root / e.at("mask").get<std::string>()};
      for (const auto& p : {entry.array, entry.mask}) {
        if (!fs::exists(p)) throw IoError("manifest " + path.string() + ": missing file " + p.string());
      }
      m.entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest " + path.string() + ": " + e.what());
  }
  if (m.angular_res < 1) throw ConfigError("manifest " + path.string() + ": angular_res must be >= 1");
  return m;
}

void save_manifest(const fs::path& path, const Manifest& manifest) {
  const fs::path root = fs::absolute(path).parent_path();
  nlohmann::ordered_json j;
  j["angular_res"] = manifest.angular_res;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : manifest.entries) {
    j["entries"].push_back({{"array", fs::relative(fs::absolute(e.array), root).generic_string()},
                            {"mask", fs::relative(fs::absolute(e.mask), root).generic_string()}});
  }
  write_text_file(path, j.dump(2) + "\n");
}

template <typename T>
Sample<T> load_sample(const ManifestEntry& entry, Index angular_res) {
  Image<T> pixels = read_image<T>(entry.array);
  require_divisible(pixels.height(), pixels.width(), angular_res);
  Sample<T> s{MicroLensArray<T>{std::move(pixels), angular_res}, read_mask<T>(entry.mask)};
  try {
    validate_sample(s);
  } catch (const DataError& e) {
    throw DataError(entry.array.string() + ": " + e.what());
  }
  return s;
}

template <typename T>
std::vector<Sample<T>> load_samples(const Manifest& manifest) {
  std::vector<Sample<T>> out;
  out.reserve(manifest.entries.size());
  for (const auto& e : manifest.entries) out.push_back(load_sample<T>(e, manifest.angular_res));
  return out;
}

template Sample<float> load_sample(const ManifestEntry&, Index);
template Sample<double> load_sample(const ManifestEntry&, Index);
template std::vector<Sample<float>> load_samples(const Manifest&);
template std::vector<Sample<double>> load_samples(const Manifest&);

std::vector<double> channel_means(const Manifest& manifest) {
  std::vector<double> sum;
  double count = 0;
  for (const auto& e : manifest.entries) {
    const Image<double> img = read_image<double>(e.array);
    if (sum.empty()) sum.assign(static_cast<std::size_t>(img.channels()), 0.0);
    if (static_cast<std::size_t>(img.channels()) != sum.size()) {
      throw DataError(e.array.string() + ": channel count differs from the rest of the set");
    }
    for (Index i = 0; i < img.height() * img.width(); ++i)
      for (Index c = 0; c < img.channels(); ++c) sum[static_cast<std::size_t>(c)] += img.values()[i * img.channels() + c];
    count += static_cast<double>(img.height() * img.width());
  }
  for (double& s : sum) s /= count;
  return sum;
}

std::vector<std::string> entry_stems(const Manifest& manifest) {
  std::vector<std::string> stems;
  std::set<std::string> seen;
  for (const auto& e : manifest.entries) {
    std::string stem = e.array.stem().string();
    if (!seen.insert(stem).second) throw DataError("manifest: duplicate array name '" + stem + "'");
    stems.push_back(std::move(stem));
  }
  return stems;
}

}  // namespace lfsal
