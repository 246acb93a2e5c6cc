#include "lfsal/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

namespace lfsal {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

template <typename N>
N parse_number(const std::string& key, const std::string& v) {
  N out{};
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end) throw ConfigError("config: " + key + ": cannot parse '" + v + "'");
  return out;
}

template <typename N>
std::string number_text(N v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename N>
std::vector<N> parse_list(const std::string& key, const std::string& v) {
  std::vector<N> out;
  for (const auto& item : split(v, ',')) out.push_back(parse_number<N>(key, item));
  return out;
}

template <typename N>
std::string list_text(const std::vector<N>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + number_text(v[i]);
  return s;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: " + key + ": expected true or false, got '" + v + "'");
}

std::optional<double> parse_optional(const std::string& key, const std::string& v) {
  if (v == "none") return std::nullopt;
  return parse_number<double>(key, v);
}

std::string optional_text(const std::optional<double>& v) { return v ? number_text(*v) : "none"; }

struct Field {
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define LFSAL_NUM_FIELD(KEY, MEMBER, TYPE)                                                      \
  Field {                                                                                        \
    KEY, [](RunConfig& c, const std::string& v) { c.MEMBER = parse_number<TYPE>(KEY, v); },     \
        [](const RunConfig& c) { return number_text(c.MEMBER); }                                 \
  }
#define LFSAL_LIST_FIELD(KEY, MEMBER, TYPE)                                                     \
  Field {                                                                                        \
    KEY, [](RunConfig& c, const std::string& v) { c.MEMBER = parse_list<TYPE>(KEY, v); },       \
        [](const RunConfig& c) { return list_text(c.MEMBER); }                                   \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      {"profile", [](RunConfig& c, const std::string& v) { c.profile = v; },
       [](const RunConfig& c) { return c.profile; }},
      LFSAL_NUM_FIELD("angular_res", angular_res, Index),
      {"mac_variant", [](RunConfig& c, const std::string& v) { c.mac_variant = parse_mac_variant(v); },
       [](const RunConfig& c) { return std::string(to_string(c.mac_variant)); }},
      {"front_end",
       [](RunConfig& c, const std::string& v) {
         if (v == "mac") c.front_end = FrontEnd::mac;
         else if (v == "central_view") c.front_end = FrontEnd::central_view;
         else throw ConfigError("config: front_end: expected mac or central_view, got '" + v + "'");
       },
       [](const RunConfig& c) { return std::string(c.front_end == FrontEnd::mac ? "mac" : "central_view"); }},
      LFSAL_LIST_FIELD("channels", channels, Index),
      LFSAL_LIST_FIELD("aspp_rates", aspp_rates, Index),
      LFSAL_NUM_FIELD("aspp_channels", aspp_channels, Index),
      LFSAL_LIST_FIELD("dropout", dropout, double),
      LFSAL_LIST_FIELD("input_mean", input_mean, double),
      LFSAL_NUM_FIELD("base_lr", schedule.base_lr, double),
      LFSAL_NUM_FIELD("momentum", schedule.momentum, double),
      LFSAL_NUM_FIELD("weight_decay", schedule.weight_decay, double),
      LFSAL_NUM_FIELD("max_iter", schedule.max_iter, long long),
      LFSAL_NUM_FIELD("poly_power", schedule.power, double),
      LFSAL_NUM_FIELD("new_layer_lr_multiplier", schedule.new_layer_lr_multiplier, double),
      LFSAL_NUM_FIELD("iterations", iterations, long long),
      LFSAL_NUM_FIELD("checkpoint_every", checkpoint_every, long long),
      LFSAL_NUM_FIELD("seed", seed, std::uint64_t),
      LFSAL_NUM_FIELD("fold_index", fold_index, Index),
      LFSAL_NUM_FIELD("fold_count", fold_count, Index),
      {"augment", [](RunConfig& c, const std::string& v) { c.augment = parse_bool("augment", v); },
       [](const RunConfig& c) { return std::string(c.augment ? "true" : "false"); }},
      {"aug.rotations", [](RunConfig& c, const std::string& v) { c.augmentation.rotations = parse_list<int>("aug.rotations", v); },
       [](const RunConfig& c) { return list_text(c.augmentation.rotations); }},
      {"aug.flips",
       [](RunConfig& c, const std::string& v) {
         c.augmentation.flips.clear();
         for (const auto& f : split(v, ',')) {
           if (f == "horizontal") c.augmentation.flips.push_back(FlipAxis::horizontal);
           else if (f == "vertical") c.augmentation.flips.push_back(FlipAxis::vertical);
           else throw ConfigError("config: aug.flips: unknown axis '" + f + "'");
         }
       },
       [](const RunConfig& c) {
         std::string s;
         for (std::size_t i = 0; i < c.augmentation.flips.size(); ++i) {
           s += (i ? "," : "");
           s += c.augmentation.flips[i] == FlipAxis::horizontal ? "horizontal" : "vertical";
         }
         return s;
       }},
      {"aug.crop",
       [](RunConfig& c, const std::string& v) {
         if (v == "auto") {
           c.crop_auto = true;
           return;
         }
         const auto x = v.find('x');
         if (x == std::string::npos) throw ConfigError("config: aug.crop: expected auto or WxH, got '" + v + "'");
         c.crop_auto = false;
         c.augmentation.crop_size = {parse_number<Index>("aug.crop", v.substr(0, x)),
                                     parse_number<Index>("aug.crop", v.substr(x + 1))};
       },
       [](const RunConfig& c) {
         return c.crop_auto ? std::string("auto")
                            : number_text(c.augmentation.crop_size.width) + "x" +
                                  number_text(c.augmentation.crop_size.height);
       }},
      LFSAL_NUM_FIELD("aug.crop_count", augmentation.crop_count, Index),
      LFSAL_LIST_FIELD("aug.brightness", augmentation.brightness_factors, double),
      {"aug.chroma_contrast",
       [](RunConfig& c, const std::string& v) { c.augmentation.chroma_contrast_factor = parse_optional("aug.chroma_contrast", v); },
       [](const RunConfig& c) { return optional_text(c.augmentation.chroma_contrast_factor); }},
      {"aug.noise_variance",
       [](RunConfig& c, const std::string& v) { c.augmentation.noise_variance = parse_optional("aug.noise_variance", v); },
       [](const RunConfig& c) { return optional_text(c.augmentation.noise_variance); }},
      LFSAL_NUM_FIELD("aug.expected_count", augmentation.expected_count, Index),
      LFSAL_NUM_FIELD("metrics.beta2", metrics.beta2, double),
      LFSAL_NUM_FIELD("metrics.wf_sigma", metrics.wf.sigma, double),
      LFSAL_NUM_FIELD("metrics.wf_window", metrics.wf.window, Index),
      LFSAL_NUM_FIELD("metrics.wf_alpha", metrics.wf.alpha, double),
      LFSAL_NUM_FIELD("metrics.wf_beta2", metrics.wf.beta2, double),
  };
  return table;
}

#undef LFSAL_NUM_FIELD
#undef LFSAL_LIST_FIELD

}  // namespace

NetConfig RunConfig::net_config() const {
  NetConfig net;
  if (profile == "desk") {
    net = NetConfig::desk(angular_res, mac_variant);
  } else if (profile == "paper") {
    net = NetConfig::paper();
    net.mac.variant = mac_variant;
    net.mac.angular_res = angular_res;
    net.mac.star_rates.clear();
    for (Index r = 1; r <= std::min<Index>(4, (angular_res - 1) / 2); ++r) net.mac.star_rates.push_back(r);
  } else {
    throw ConfigError("config: profile must be desk or paper, got '" + profile + "'");
  }
  net.front_end = front_end;
  if (!channels.empty()) {
    net.backbone.channels = channels;
    net.mac.out_channels = channels.front();
  }
  if (!aspp_rates.empty()) net.aspp.rates = aspp_rates;
  if (aspp_channels > 0) net.aspp.branch_channels = aspp_channels;
  if (!dropout.empty()) net.backbone.dropout = dropout;
  net.input_mean = input_mean;
  net.in_channels = static_cast<Index>(input_mean.size());
  return net;
}

AugmentationSpec RunConfig::augmentation_for(Index width, Index height) const {
  if (!augment) return AugmentationSpec::identity();
  AugmentationSpec spec = augmentation;
  if (crop_auto) spec.crop_size = AugmentationSpec::scaled_to(width, height, angular_res).crop_size;
  return spec;
}

void RunConfig::validate() const {
  net_config().validate();
  const auto& s = schedule;
  if (!(s.base_lr >= 0)) throw ConfigError("config: base_lr must be >= 0");
  if (!(s.momentum >= 0 && s.momentum < 1)) throw ConfigError("config: momentum must lie in [0, 1)");
  if (!(s.weight_decay >= 0)) throw ConfigError("config: weight_decay must be >= 0");
  if (s.max_iter < 1) throw ConfigError("config: max_iter must be >= 1");
  if (!(s.power >= 0)) throw ConfigError("config: poly_power must be >= 0");
  if (!(s.new_layer_lr_multiplier > 0)) throw ConfigError("config: new_layer_lr_multiplier must be > 0");
  if (iterations < 0 || iterations > s.max_iter) throw ConfigError("config: iterations must lie in [0, max_iter]");
  if (checkpoint_every < 1) throw ConfigError("config: checkpoint_every must be >= 1");
  if (fold_count < 2 || fold_index < 0 || fold_index >= fold_count) {
    throw ConfigError("config: need fold_count >= 2 and 0 <= fold_index < fold_count");
  }
  if (augment && !crop_auto) augmentation.validate(angular_res);
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(cfg, value);
      return;
    }
  }
  throw ConfigError("config: unknown key '" + key + "'");
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: line " + std::to_string(lineno) + ": expected key = value");
    }
    set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

std::string config_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

RunConfig load_config(const std::filesystem::path& path) {
  try {
    return parse_config(read_text_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void save_config(const std::filesystem::path& path, const RunConfig& cfg) { write_text_file(path, config_text(cfg)); }

}  // namespace lfsal
