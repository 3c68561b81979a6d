#include "hcn/dm/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "hcn/common/error.hpp"
#include "hcn/common/hash.hpp"
#include "hcn/common/io.hpp"
#include "json.hpp"

namespace hcn::dm {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFormat = "hcn-checkpoint";

std::string tensor_bytes(const Tensor<float>& t) {
  std::string out(t.size() * sizeof(float), '\0');
  std::memcpy(out.data(), t.data().data(), out.size());
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < out.size(); i += 4) {
      std::swap(out[i], out[i + 3]);
      std::swap(out[i + 1], out[i + 2]);
    }
  }
  return out;
}

void read_tensor(std::string bytes, Tensor<float>& t) {
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i + 3 < bytes.size(); i += 4) {
      std::swap(bytes[i], bytes[i + 3]);
      std::swap(bytes[i + 1], bytes[i + 2]);
    }
  }
  std::memcpy(t.data().data(), bytes.data(), bytes.size());
}

std::string tensor_file(const std::string& name) { return "tensors/" + name + ".bin"; }

template <typename T>
T field(const json& j, const char* key, const fs::path& where) {
  if (!j.contains(key)) throw FormatError(where.string() + ": manifest lacks '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw FormatError(where.string() + ": manifest field '" + key + "' has the wrong type");
  }
}

}  // namespace

void save_checkpoint(const fs::path& dir, const HcnModel& model, const text::Vocabulary& vocab,
                     const text::ActionSet& actions, const embed::EmbeddingTable& embeddings,
                     const CheckpointInfo& info) {
  if (model.action_count() != actions.size()) throw ConfigError("model and action set sizes differ");
  if (model.embedding_dim() != embeddings.dim()) throw ConfigError("model and embedding dimensions differ");
  fs::create_directories(dir / "tensors");
  json tensors = json::array();
  const auto& params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    const std::string bytes = tensor_bytes(p.value);
    write_file(dir / tensor_file(p.name), bytes);
    tensors.push_back({{"name", p.name},
                       {"shape", p.value.shape()},
                       {"dtype", "float32-le"},
                       {"file", tensor_file(p.name)},
                       {"offset", 0},
                       {"bytes", bytes.size()},
                       {"hash", fingerprint(bytes)}});
  }
  write_file(dir / "vocab.txt", vocab.serialize());
  write_file(dir / "templates.txt", actions.serialize());
  embed::write_text_vectors(embeddings, dir / "embeddings.txt");

  json manifest = {
      {"format", kFormat},
      {"version", kCheckpointVersion},
      {"config", model.config().serialize()},
      {"dimensions",
       {{"embedding", model.embedding_dim()}, {"vocabulary", model.vocab_size()}, {"actions", model.action_count()}}},
      {"fingerprints",
       {{"vocabulary", vocab.fingerprint()}, {"actions", actions.fingerprint()}, {"embeddings", embeddings.checksum()}}},
      {"metrics", {{"epoch", info.epoch}, {"best_dev_turn_accuracy", info.best_dev_accuracy}}},
      {"tensors", tensors},
  };
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

Checkpoint load_checkpoint(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) throw FormatError(dir.string() + ": not a checkpoint (no manifest.json)");
  const std::string manifest_text = read_file(manifest_path);
  json m;
  try {
    m = json::parse(manifest_text);
  } catch (const json::exception& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }
  if (field<std::string>(m, "format", manifest_path) != kFormat) {
    throw FormatError(manifest_path.string() + ": unknown format");
  }
  if (const int v = field<int>(m, "version", manifest_path); v != kCheckpointVersion) {
    throw FormatError(manifest_path.string() + ": unsupported checkpoint version " + std::to_string(v));
  }
  const ModelConfig config = ModelConfig::parse(field<std::string>(m, "config", manifest_path));
  const json dims = field<json>(m, "dimensions", manifest_path);
  const json prints = field<json>(m, "fingerprints", manifest_path);
  const json metrics = field<json>(m, "metrics", manifest_path);

  text::Vocabulary vocab = text::Vocabulary::parse(read_file(dir / "vocab.txt"));
  text::ActionSet actions = text::ActionSet::parse(read_file(dir / "templates.txt"));
  embed::EmbeddingTable embeddings = embed::load_text_vectors(dir / "embeddings.txt");
  if (vocab.fingerprint() != field<std::string>(prints, "vocabulary", manifest_path)) {
    throw CompatibilityError(dir.string() + ": vocabulary does not match the manifest fingerprint");
  }
  if (actions.fingerprint() != field<std::string>(prints, "actions", manifest_path)) {
    throw CompatibilityError(dir.string() + ": templates do not match the manifest fingerprint");
  }
  if (embeddings.checksum() != field<std::string>(prints, "embeddings", manifest_path)) {
    throw CompatibilityError(dir.string() + ": embeddings do not match the manifest fingerprint");
  }

  HcnModel model(config, field<std::size_t>(dims, "embedding", manifest_path),
                 field<std::size_t>(dims, "vocabulary", manifest_path),
                 field<std::size_t>(dims, "actions", manifest_path));
  if (model.action_count() != actions.size()) {
    throw CompatibilityError(dir.string() + ": model has " + std::to_string(model.action_count()) +
                             " actions, templates.txt has " + std::to_string(actions.size()));
  }
  if (config.featurizer == Featurizer::baseline && model.vocab_size() != vocab.size()) {
    throw CompatibilityError(dir.string() + ": model vocabulary size differs from vocab.txt");
  }

  const json tensors = field<json>(m, "tensors", manifest_path);
  auto& params = model.parameters();
  if (tensors.size() != params.size()) {
    throw FormatError(manifest_path.string() + ": lists " + std::to_string(tensors.size()) + " tensors, model has " +
                      std::to_string(params.size()));
  }
  for (const auto& entry : tensors) {
    const auto name = field<std::string>(entry, "name", manifest_path);
    auto* p = params.find(name);
    if (!p) throw FormatError(manifest_path.string() + ": unexpected tensor " + name);
    if (field<std::string>(entry, "dtype", manifest_path) != "float32-le") {
      throw FormatError(manifest_path.string() + ": tensor " + name + " has unsupported dtype");
    }
    const auto shape = field<grad::Shape>(entry, "shape", manifest_path);
    if (shape != p->value.shape()) {
      throw FormatError(manifest_path.string() + ": tensor " + name + " has shape " + grad::to_string(shape) +
                        ", config implies " + grad::to_string(p->value.shape()));
    }
    const fs::path file = dir / field<std::string>(entry, "file", manifest_path);
    if (!fs::exists(file)) throw FormatError(file.string() + ": missing tensor file");
    std::string bytes = read_file(file);
    const auto offset = field<std::size_t>(entry, "offset", manifest_path);
    const auto length = field<std::size_t>(entry, "bytes", manifest_path);
    if (length != p->value.size() * sizeof(float) || offset + length > bytes.size()) {
      throw FormatError(file.string() + ": truncated tensor data");
    }
    bytes = bytes.substr(offset, length);
    if (fingerprint(bytes) != field<std::string>(entry, "hash", manifest_path)) {
      throw FormatError(file.string() + ": tensor data does not match its hash");
    }
    read_tensor(std::move(bytes), p->value);
    if (!p->value.all_finite()) throw FormatError(file.string() + ": non-finite weights");
  }

  CheckpointInfo info{field<std::size_t>(metrics, "epoch", manifest_path),
                      field<double>(metrics, "best_dev_turn_accuracy", manifest_path)};
  return Checkpoint{std::move(model), std::move(vocab), std::move(actions), std::move(embeddings), info,
                    fingerprint(manifest_text)};
}

void check_compatible(const Checkpoint& checkpoint, const text::Vocabulary& vocab, const text::ActionSet& actions) {
  if (checkpoint.vocab.fingerprint() != vocab.fingerprint()) {
    throw CompatibilityError("checkpoint vocabulary " + checkpoint.vocab.fingerprint() +
                             " does not match the corpus vocabulary " + vocab.fingerprint());
  }
  if (checkpoint.actions.fingerprint() != actions.fingerprint()) {
    throw CompatibilityError("checkpoint action set " + checkpoint.actions.fingerprint() +
                             " does not match the corpus action set " + actions.fingerprint());
  }
}

}  // namespace hcn::dm
