#include "lfsal/commands.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "lfsal/raster.hpp"

namespace lfsal {

LightField4D<float> load_view_grid(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("view directory " + dir.string() + " does not exist");
  const std::regex pattern(R"(view_(\d+)_(\d+)\.(ppm|pgm))");
  std::map<std::pair<Index, Index>, fs::path> files;
  Index n = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = e.path().filename().string();
    if (!std::regex_match(name, m, pattern)) continue;
    const Index v = std::stol(m[1]), u = std::stol(m[2]);
    files[{v, u}] = e.path();
    n = std::max({n, v + 1, u + 1});
  }
  if (n == 0) throw DataError(dir.string() + ": no view_{v}_{u} images");
  std::optional<LightField4D<float>> lf;
  for (Index v = 0; v < n; ++v)
    for (Index u = 0; u < n; ++u) {
      const auto it = files.find({v, u});
      if (it == files.end()) {
        throw DataError(dir.string() + ": missing view_" + std::to_string(v) + "_" + std::to_string(u) + " of a " +
                        std::to_string(n) + "x" + std::to_string(n) + " grid");
      }
      const Image<float> img = read_image<float>(it->second);
      if (!lf) lf.emplace(n, n, img.height(), img.width(), img.channels());
      if (img.height() != lf->ny() || img.width() != lf->nx() || img.channels() != lf->channels()) {
        throw DataError(it->second.string() + ": view size differs from view_0_0");
      }
      insert_subaperture(*lf, SubApertureImage<float>{img, u, v});
    }
  return *lf;
}

MicroLensArray<float> cmd_convert(const fs::path& view_dir, const fs::path& out_array, Index angular_res) {
  LightField4D<float> lf = load_view_grid(view_dir);
  if (angular_res < 1) throw ConfigError("convert: angular resolution must be >= 1");
  if (lf.angular() >= angular_res) {
    lf = sample_viewpoints(lf, angular_res);
  } else {
    lf = pad_angular(lf, angular_res, central_view(lf).image);
  }
  MicroLensArray<float> arr = assemble_microlens_array(lf);
  write_image(out_array, arr.pixels);
  return arr;
}

std::vector<fs::path> cmd_split(const fs::path& manifest_path, Index k, std::uint64_t seed, const fs::path& out_dir,
                                const RunConfig& base) {
  const Manifest manifest = load_manifest(manifest_path);
  if (k < 2) throw ConfigError("split: k must be >= 2");
  const auto n = static_cast<Index>(manifest.entries.size());
  if (n < k) throw DataError("split: " + std::to_string(n) + " entries cannot fill " + std::to_string(k) + " folds");
  RngStream rng(seed, Stream::shuffle);
  const std::vector<std::size_t> order = shuffled_indices(manifest.entries.size(), rng);
  std::vector<fs::path> dirs;
  for (Index f = 0; f < k; ++f) {
    const Index lo = f * n / k, hi = (f + 1) * n / k;
    Manifest train{manifest.angular_res, {}}, test{manifest.angular_res, {}};
    for (Index i = 0; i < n; ++i) {
      const auto& e = manifest.entries[order[static_cast<std::size_t>(i)]];
      (i >= lo && i < hi ? test : train).entries.push_back(e);
    }
    RunConfig cfg = base;
    cfg.angular_res = manifest.angular_res;
    cfg.seed = base.seed;
    cfg.fold_index = f;
    cfg.fold_count = k;
    cfg.input_mean = channel_means(train);
    const fs::path dir = out_dir / ("fold_" + std::to_string(f));
    save_manifest(dir / "train.json", train);
    save_manifest(dir / "test.json", test);
    save_config(dir / "config.txt", cfg);
    dirs.push_back(dir);
  }
  return dirs;
}

namespace {

fs::path checkpoint_name(const fs::path& out_dir, long long completed) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "ckpt_%08lld", completed);
  return out_dir / buf;
}

// Keeps log lines for iterations before `start` so a resumed run continues a
// consistent log.
void truncate_log(const fs::path& log, long long start) {
  std::string kept;
  if (start > 0 && fs::exists(log)) {
    std::istringstream in(read_text_file(log));
    std::string line;
    while (std::getline(in, line)) {
      long long it = -1;
      if (std::istringstream(line) >> it && it < start) kept += line + "\n";
    }
  }
  write_text_file(log, kept);
}

}  // namespace

TrainResult cmd_train(const RunConfig& requested, const fs::path& manifest_path, const fs::path& out_dir,
                      const std::optional<fs::path>& resume,
                      const std::function<void(long long, double, double)>& on_step) {
  std::optional<Checkpoint> ckpt;
  RunConfig cfg = requested;
  if (resume) {
    ckpt = load_checkpoint(*resume);
    cfg = ckpt->config;
    cfg.iterations = std::min(requested.total_iterations(), cfg.schedule.max_iter);
  }
  cfg.validate();
  const Manifest manifest = load_manifest(manifest_path);
  if (manifest.angular_res != cfg.angular_res) {
    throw ConfigError("train: manifest A=" + std::to_string(manifest.angular_res) + " but config A=" +
                      std::to_string(cfg.angular_res));
  }
  if (manifest.entries.empty()) throw DataError("train: manifest has no entries");
  std::vector<Sample<float>> samples = load_samples<float>(manifest);
  const AugmentationSpec spec =
      cfg.augmentation_for(samples.front().array.width(), samples.front().array.height());
  spec.validate(cfg.angular_res);
  const AugmentedDataset<float> data(std::move(samples), spec, cfg.seed);

  SaliencyNet<float> net(cfg.net_config(), cfg.seed);
  long long start = 0;
  if (ckpt) {
    restore_checkpoint(net, *ckpt);
    start = ckpt->iteration;
  }
  const long long total = cfg.total_iterations();
  if (start > total) throw ConfigError("train: checkpoint is past the requested iteration count");

  fs::create_directories(out_dir);
  const fs::path log_path = out_dir / "loss.log";
  truncate_log(log_path, start);
  std::ofstream log(log_path, std::ios::app);
  if (!log) throw IoError("cannot open " + log_path.string());
  save_config(out_dir / "config.txt", cfg);

  TrainResult result;
  result.first_iteration = start;
  const auto size = static_cast<std::uint64_t>(data.size());
  long long epoch = -1;
  std::vector<std::size_t> order;
  for (long long it = start; it < total; ++it) {
    const long long e = it / static_cast<long long>(size);
    if (e != epoch) {
      RngStream shuffle(cfg.seed, Stream::shuffle, static_cast<std::uint64_t>(e));
      order = shuffled_indices(size, shuffle);
      epoch = e;
    }
    const auto index = static_cast<Index>(order[static_cast<std::size_t>(it % static_cast<long long>(size))]);
    const double lr = poly_lr(cfg.schedule.base_lr, it, cfg.schedule.max_iter, cfg.schedule.power);
    double loss = 0;
    try {
      const Sample<float> s = data.at(index);
      loss = static_cast<double>(net.train_step(s.array, s.mask, cfg.schedule, it, cfg.seed));
    } catch (const Error& err) {
      const Index v = index % data.variants_per_sample();
      throw Error(err.kind(), "iteration " + std::to_string(it) + ", sample " +
                                  manifest.entries[static_cast<std::size_t>(index / data.variants_per_sample())]
                                      .array.string() +
                                  " variant " + std::to_string(v) + ": " + err.what());
    }
    char line[96];
    std::snprintf(line, sizeof line, "%lld %.9g %.9g\n", it, loss, lr);
    log << line << std::flush;
    result.losses.push_back(loss);
    if (on_step) on_step(it, loss, lr);
    const long long done = it + 1;
    if (done % cfg.checkpoint_every == 0 || done == total) {
      const Checkpoint c = capture_checkpoint(net, cfg, done);
      save_checkpoint(checkpoint_name(out_dir, done), c);
      save_checkpoint(out_dir / "latest", c);
    }
  }
  if (start == total) save_checkpoint(out_dir / "latest", capture_checkpoint(net, cfg, total));
  result.final_checkpoint = out_dir / "latest";
  return result;
}

std::vector<fs::path> cmd_predict(const fs::path& checkpoint, const fs::path& manifest_path, const fs::path& out_dir) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  const Manifest manifest = load_manifest(manifest_path);
  if (manifest.angular_res != ckpt.config.angular_res) {
    throw ConfigError("predict: manifest A=" + std::to_string(manifest.angular_res) + " but checkpoint A=" +
                      std::to_string(ckpt.config.angular_res));
  }
  SaliencyNet<float> net(ckpt.config.net_config(), ckpt.config.seed);
  restore_checkpoint(net, ckpt);
  const std::vector<std::string> stems = entry_stems(manifest);
  std::vector<fs::path> written;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const Sample<float> s = load_sample<float>(manifest.entries[i], manifest.angular_res);
    const Tensor<float> prob = net.predict(s.array);
    Image<float> map(prob.dim(0), prob.dim(1), 1);
    map.values() = prob.values();
    const fs::path out = out_dir / (stems[i] + ".pgm");
    write_image(out, map);
    written.push_back(out);
  }
  return written;
}

fs::path default_curve_path(const fs::path& report_path) {
  fs::path p = report_path;
  p.replace_extension(".pr.csv");
  return p;
}

MetricsReport cmd_eval(const fs::path& pred_dir, const fs::path& manifest_path, const fs::path& report_path,
                       const fs::path& curve_path, const MetricsConfig& metrics) {
  const Manifest manifest = load_manifest(manifest_path);
  const std::vector<std::string> stems = entry_stems(manifest);
  std::vector<SaliencyMap> preds, gts;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const fs::path p = pred_dir / (stems[i] + ".pgm");
    if (!fs::exists(p)) throw IoError("eval: missing prediction " + p.string());
    preds.push_back(to_map(read_image<double>(p)));
    gts.push_back(to_map(read_mask<double>(manifest.entries[i].mask)));
  }
  const MetricsReport report = evaluate_dataset(preds, gts, metrics);
  write_text_file(report_path, report_json(report));
  write_text_file(curve_path, pr_curve_csv(report.curve));
  return report;
}

Manifest cmd_augment(const fs::path& manifest_path, const fs::path& out_dir, const RunConfig& cfg) {
  const Manifest manifest = load_manifest(manifest_path);
  const std::vector<std::string> stems = entry_stems(manifest);
  Manifest out{manifest.angular_res, {}};
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const Sample<float> s = load_sample<float>(manifest.entries[i], manifest.angular_res);
    const AugmentationSpec spec = cfg.augmentation_for(s.array.width(), s.array.height());
    spec.validate(manifest.angular_res);
    const std::vector<Sample<float>> variants =
        enumerate_variants(s, spec, RngStream(cfg.seed, Stream::crop, static_cast<std::uint64_t>(i)));
    for (std::size_t v = 0; v < variants.size(); ++v) {
      char suffix[16];
      std::snprintf(suffix, sizeof suffix, "_v%02zu", v);
      const fs::path array = out_dir / (stems[i] + suffix + ".ppm");
      const fs::path mask = out_dir / (stems[i] + suffix + "_mask.pgm");
      write_image(array, variants[v].array.pixels);
      write_image(mask, variants[v].mask);
      out.entries.push_back({array, mask});
    }
  }
  save_manifest(out_dir / "manifest.json", out);
  return out;
}

}  // namespace lfsal
