#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lfsal/commands.hpp"

namespace {

using namespace lfsal;

RunConfig make_config(const std::string& path, const std::vector<std::string>& overrides,
                      const std::optional<std::uint64_t>& seed) {
  RunConfig cfg = path.empty() ? RunConfig{} : load_config(path);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (seed) cfg.seed = *seed;
  cfg.validate();
  return cfg;
}

int fail(const std::string& kind, std::string msg) {
  for (char& c : msg) {
    if (c == '"' || c == '\n') c = '\'';
  }
  std::cerr << "lfsal: error kind=" << kind << " message=\"" << msg << "\"\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Light-field saliency detection with micro-lens angular convolutions"};
  app.require_subcommand(1);

  std::string config_path, manifest, out, checkpoint, views, mask, predictions, report, curve, resume;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  Index angular_res = 9, folds = 5;
  long long iterations = 0;

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key=value run config");
    cmd->add_option("--set", overrides, "config override key=value (repeatable)");
    cmd->add_option("--seed", seed, "seed override");
  };

  auto* convert = app.add_subcommand("convert", "assemble a micro-lens array from view_{v}_{u} images");
  convert->add_option("--views", views, "directory of sub-aperture views")->required();
  convert->add_option("--out", out, "output array image")->required();
  convert->add_option("--angular-res", angular_res, "views per axis after sampling or padding");
  convert->add_option("--mask", mask, "ground-truth mask to pair with the array");
  convert->add_option("--manifest", manifest, "manifest to append the (array, mask) entry to");

  auto* split = app.add_subcommand("split", "seeded k-fold split with per-fold input means");
  common(split);
  split->add_option("--manifest", manifest)->required();
  split->add_option("--folds", folds, "k");
  split->add_option("--out", out, "output directory")->required();

  auto* augment = app.add_subcommand("augment", "write every augmentation variant to disk");
  common(augment);
  augment->add_option("--manifest", manifest)->required();
  augment->add_option("--out", out)->required();

  auto* train = app.add_subcommand("train", "train a saliency network");
  common(train);
  train->add_option("--manifest", manifest)->required();
  train->add_option("--out", out, "run directory")->required();
  train->add_option("--iterations", iterations, "iterations to run (default: config)");
  train->add_option("--resume", resume, "checkpoint to continue from");

  auto* predict = app.add_subcommand("predict", "write saliency maps");
  predict->add_option("--checkpoint", checkpoint)->required();
  predict->add_option("--manifest", manifest)->required();
  predict->add_option("--out", out)->required();

  auto* eval = app.add_subcommand("eval", "score saliency maps");
  common(eval);
  eval->add_option("--predictions", predictions)->required();
  eval->add_option("--manifest", manifest)->required();
  eval->add_option("--report", report)->required();
  eval->add_option("--curve", curve, "PR curve CSV (default: <report>.pr.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("usage", e.what());
  }

  try {
    if (*convert) {
      const MicroLensArray<float> arr = cmd_convert(views, out, angular_res);
      if (!manifest.empty()) {
        if (mask.empty()) throw ConfigError("convert: --manifest needs --mask");
        Manifest m{angular_res, {}};
        if (std::filesystem::exists(manifest)) m = load_manifest(manifest);
        if (m.angular_res != angular_res) throw ConfigError("convert: manifest has a different A");
        m.entries.push_back({std::filesystem::absolute(out), std::filesystem::absolute(mask)});
        save_manifest(manifest, m);
      }
      std::cout << "wrote " << out << " (" << arr.width() << "x" << arr.height() << ", A=" << angular_res << ")\n";
    } else if (*split) {
      const RunConfig cfg = make_config(config_path, overrides, seed);
      const auto dirs = cmd_split(manifest, folds, cfg.seed, out, cfg);
      for (const auto& d : dirs) std::cout << d.string() << "\n";
    } else if (*augment) {
      const RunConfig cfg = make_config(config_path, overrides, seed);
      const Manifest m = cmd_augment(manifest, out, cfg);
      std::cout << "wrote " << m.entries.size() << " variants to " << out << "\n";
    } else if (*train) {
      RunConfig cfg = make_config(config_path, overrides, seed);
      if (iterations > 0) cfg.iterations = iterations;
      cfg.validate();
      std::optional<std::filesystem::path> from;
      if (!resume.empty()) from = resume;
      const TrainResult r = cmd_train(cfg, manifest, out, from, [](long long it, double loss, double lr) {
        if (it % 100 == 0) std::cout << "iter " << it << " loss " << loss << " lr " << lr << "\n";
      });
      std::cout << "ran " << r.losses.size() << " iterations; checkpoint " << r.final_checkpoint.string() << "\n";
    } else if (*predict) {
      const auto files = cmd_predict(checkpoint, manifest, out);
      std::cout << "wrote " << files.size() << " maps to " << out << "\n";
    } else if (*eval) {
      const RunConfig cfg = make_config(config_path, overrides, seed);
      const auto curve_path = curve.empty() ? default_curve_path(report) : std::filesystem::path(curve);
      const MetricsReport r = cmd_eval(predictions, manifest, report, curve_path, cfg.metrics);
      for (const auto& w : r.warnings) std::cerr << "lfsal: warning " << w << "\n";
      std::cout << report_json(r);
    }
  } catch (const lfsal::Error& e) {
    return fail(to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
