#ifndef ETRIG_MODEL_IO_HPP
#define ETRIG_MODEL_IO_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "etrig/baseline.hpp"
#include "etrig/decoder.hpp"
#include "etrig/embeddings.hpp"
#include "etrig/network.hpp"

namespace etrig {

// Binary archive: magic "ETRIG", little-endian integers, 64-bit floats.
// One archive per artifact kind; the CLI composes them.

enum class ModelKind { dnn, maxent, embeddings, transitions };

std::string model_kind_name(ModelKind kind);
ModelKind model_kind_from_name(const std::string& name);

struct NamedTensor {
  std::string name;
  std::vector<uint64_t> shape;
  std::vector<double> values;  // row-major

  bool operator==(const NamedTensor&) const = default;
};

struct ModelArchive {
  static constexpr uint32_t kCurrentVersion = 1;

  uint32_t version = kCurrentVersion;
  ModelKind kind = ModelKind::dnn;
  std::map<std::string, std::string> config;  // sorted => canonical bytes
  std::vector<std::string> strings;  // vocabulary tokens or feature names
  std::vector<NamedTensor> tensors;

  const NamedTensor& tensor(const std::string& name) const;  // throws FormatError
  bool has_tensor(const std::string& name) const;
  std::string config_at(const std::string& key) const;  // throws FormatError
};

// Atomic: writes a temporary file and renames it over `path`.
void save_model(const std::string& path, const ModelArchive& archive);

ModelArchive load_model_any(const std::string& path);
ModelArchive load_model(const std::string& path, ModelKind expected);

// --- Converters between archives and the trained artifacts -----------------

ModelArchive archive_from_embeddings(const EmbeddingTable& table);
EmbeddingTable embeddings_from_archive(const ModelArchive& archive);

ModelArchive archive_from_transitions(const TransitionModel& tm);
TransitionModel transitions_from_archive(const ModelArchive& archive);

// The DNN archive carries the transition model it was trained with, so a
// single file is enough to tag new text.
ModelArchive archive_from_dnn(const MLPParams& params, const TransitionModel& tm,
                              const std::map<std::string, std::string>& extra_config = {});
struct DnnModel {
  MLPParams params;
  TransitionModel transitions;
};
DnnModel dnn_from_archive(const ModelArchive& archive);

ModelArchive archive_from_maxent(const MaxEntModel& model, const TransitionModel& tm,
                                 const std::map<std::string, std::string>& extra_config = {});
struct MaxEntWithTransitions {
  MaxEntModel model;
  TransitionModel transitions;
};
MaxEntWithTransitions maxent_from_archive(const ModelArchive& archive);

}  // namespace etrig

#endif  // ETRIG_MODEL_IO_HPP
