#include "lfsal/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace lfsal {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "checkpoint blobs assume a little-endian host");

namespace {

constexpr const char* kMagic = "lfsal-checkpoint 1";

}  // namespace

fs::path checkpoint_index_path(const fs::path& base) { return fs::path(base.string() + ".index"); }
fs::path checkpoint_blob_path(const fs::path& base) { return fs::path(base.string() + ".bin"); }

fs::path checkpoint_base(const fs::path& path) {
  if (path.extension() == ".index" || path.extension() == ".bin") return path.parent_path() / path.stem();
  return path;
}

void save_checkpoint(const fs::path& base, const Checkpoint& ckpt) {
  std::ostringstream index;
  const std::string cfg = config_text(ckpt.config);
  std::size_t cfg_lines = 0;
  for (char c : cfg) cfg_lines += c == '\n';
  index << kMagic << "\n";
  index << "iteration " << ckpt.iteration << "\n";
  index << "config " << cfg_lines << "\n" << cfg;
  index << "tensors " << ckpt.tensors.size() << "\n";
  std::string blob;
  std::size_t offset = 0;
  for (const auto& [name, t] : ckpt.tensors) {
    if (name.empty() || name.find_first_of(" \t\n") != std::string::npos) {
      throw ConfigError("checkpoint: tensor name '" + name + "' must be non-empty without whitespace");
    }
    index << name << " float32 " << offset << " " << t.rank();
    for (Index d : t.shape()) index << " " << d;
    index << "\n";
    const std::size_t bytes = static_cast<std::size_t>(t.size()) * sizeof(float);
    blob.append(reinterpret_cast<const char*>(t.data()), bytes);
    offset += bytes;
  }
  write_text_file(checkpoint_index_path(base), index.str());
  write_text_file(checkpoint_blob_path(base), blob);
}

Checkpoint load_checkpoint(const fs::path& path) {
  const fs::path base = checkpoint_base(path);
  std::istringstream in(read_text_file(checkpoint_index_path(base)));
  const std::string blob = read_text_file(checkpoint_blob_path(base));
  auto fail = [&](const std::string& why) { return DataError("checkpoint " + base.string() + ": " + why); };

  std::string line, word;
  if (!std::getline(in, line) || line != kMagic) throw fail("bad header");
  Checkpoint ckpt;
  std::size_t cfg_lines = 0, count = 0;
  if (!(in >> word >> ckpt.iteration) || word != "iteration") throw fail("missing iteration");
  if (!(in >> word >> cfg_lines) || word != "config") throw fail("missing config");
  std::getline(in, line);
  std::string cfg;
  for (std::size_t i = 0; i < cfg_lines; ++i) {
    if (!std::getline(in, line)) throw fail("truncated config");
    cfg += line + "\n";
  }
  ckpt.config = parse_config(cfg);
  if (!(in >> word >> count) || word != "tensors") throw fail("missing tensor table");
  std::size_t expected_offset = 0;
  for (std::size_t i = 0; i < count; ++i) {
    std::string name, dtype;
    std::size_t offset = 0;
    Index rank = 0;
    if (!(in >> name >> dtype >> offset >> rank) || dtype != "float32" || rank < 0) throw fail("bad tensor row");
    Shape shape(static_cast<std::size_t>(rank));
    for (auto& d : shape) {
      if (!(in >> d) || d < 0) throw fail("bad shape for " + name);
    }
    if (offset != expected_offset) throw fail("non-contiguous offset for " + name);
    Tensor<float> t(shape);
    const std::size_t bytes = static_cast<std::size_t>(t.size()) * sizeof(float);
    if (offset + bytes > blob.size()) throw fail("blob too short for " + name);
    std::memcpy(t.data(), blob.data() + offset, bytes);
    expected_offset += bytes;
    ckpt.tensors.emplace_back(std::move(name), std::move(t));
  }
  if (expected_offset != blob.size()) throw fail("blob has " + std::to_string(blob.size()) + " bytes, index needs " +
                                                 std::to_string(expected_offset));
  return ckpt;
}

template <typename T>
Checkpoint capture_checkpoint(const SaliencyNet<T>& net, const RunConfig& cfg, long long iteration) {
  Checkpoint ckpt{iteration, cfg, {}};
  const auto params = net.parameters();
  const auto& names = net.parameter_names();
  for (std::size_t i = 0; i < params.size(); ++i) ckpt.tensors.emplace_back(names[i], params[i].value.template cast<float>());
  for (std::size_t i = 0; i < params.size(); ++i) {
    ckpt.tensors.emplace_back(names[i] + ".velocity", params[i].velocity.template cast<float>());
  }
  return ckpt;
}

template <typename T>
void restore_checkpoint(SaliencyNet<T>& net, const Checkpoint& ckpt) {
  std::map<std::string, const Tensor<float>*> by_name;
  for (const auto& [name, t] : ckpt.tensors) by_name[name] = &t;
  const auto params = net.parameters();
  const auto& names = net.parameter_names();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto it = by_name.find(names[i]);
    if (it == by_name.end()) throw ConfigError("checkpoint: missing tensor " + names[i]);
    if (it->second->shape() != params[i].value.shape()) {
      throw ConfigError("checkpoint: " + names[i] + " has shape " + shape_string(it->second->shape()) +
                        ", net expects " + shape_string(params[i].value.shape()));
    }
    params[i].value = it->second->template cast<T>();
    const auto v = by_name.find(names[i] + ".velocity");
    params[i].velocity = v == by_name.end() ? Tensor<T>(params[i].value.shape()) : v->second->template cast<T>();
    params[i].grad.set_zero();
  }
}

template Checkpoint capture_checkpoint(const SaliencyNet<float>&, const RunConfig&, long long);
template Checkpoint capture_checkpoint(const SaliencyNet<double>&, const RunConfig&, long long);
template void restore_checkpoint(SaliencyNet<float>&, const Checkpoint&);
template void restore_checkpoint(SaliencyNet<double>&, const Checkpoint&);

}  // namespace lfsal
