#include "etrig/model_io.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "etrig/errors.hpp"

namespace etrig {

namespace {

constexpr char kMagic[5] = {'E', 'T', 'R', 'I', 'G'};

void put_u32(std::ostream& out, uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 4);
}

void put_u64(std::ostream& out, uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 8);
}

void put_f64(std::ostream& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

struct Reader {
  std::istream& in;
  std::string context = "archive header";

  void fail(const std::string& what) const {
    throw FormatError("corrupt archive: " + what + " (" + context + ")");
  }

  void bytes(char* dst, size_t n, const std::string& what) {
    in.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<size_t>(in.gcount()) != n) fail("truncated " + what);
  }

  uint32_t u32(const std::string& what) {
    char b[4];
    bytes(b, 4, what);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    }
    return v;
  }

  uint64_t u64(const std::string& what) {
    char b[8];
    bytes(b, 8, what);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    }
    return v;
  }

  double f64(const std::string& what) {
    uint64_t bits = u64(what);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  std::string str(const std::string& what) {
    uint32_t n = u32(what + " length");
    if (n > (1u << 28)) fail("unreasonable " + what + " length");
    std::string s(n, '\0');
    if (n > 0) bytes(s.data(), n, what);
    return s;
  }
};

}  // namespace

std::string model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::dnn: return "dnn";
    case ModelKind::maxent: return "maxent";
    case ModelKind::embeddings: return "embeddings";
    case ModelKind::transitions: return "transitions";
  }
  throw Error("corrupt model kind value");
}

ModelKind model_kind_from_name(const std::string& name) {
  if (name == "dnn") return ModelKind::dnn;
  if (name == "maxent") return ModelKind::maxent;
  if (name == "embeddings") return ModelKind::embeddings;
  if (name == "transitions") return ModelKind::transitions;
  throw FormatError("unknown model kind '" + name + "'");
}

const NamedTensor& ModelArchive::tensor(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t;
  }
  throw FormatError("corrupt archive: missing tensor " + name);
}

bool ModelArchive::has_tensor(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return true;
  }
  return false;
}

std::string ModelArchive::config_at(const std::string& key) const {
  auto it = config.find(key);
  if (it == config.end()) {
    throw FormatError("corrupt archive: missing config key " + key);
  }
  return it->second;
}

void save_model(const std::string& path, const ModelArchive& archive) {
  namespace fs = std::filesystem;
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write model file: " + tmp);
    out.write(kMagic, sizeof(kMagic));
    put_u32(out, archive.version);
    put_string(out, model_kind_name(archive.kind));

    put_u32(out, static_cast<uint32_t>(archive.config.size()));
    for (const auto& [k, v] : archive.config) {  // std::map: sorted, canonical
      put_string(out, k);
      put_string(out, v);
    }

    put_u32(out, static_cast<uint32_t>(archive.strings.size()));
    for (const auto& s : archive.strings) put_string(out, s);

    put_u32(out, static_cast<uint32_t>(archive.tensors.size()));
    for (const auto& t : archive.tensors) {
      put_string(out, t.name);
      put_u32(out, static_cast<uint32_t>(t.shape.size()));
      uint64_t expect = 1;
      for (uint64_t d : t.shape) {
        put_u64(out, d);
        expect *= d;
      }
      if (expect != t.values.size()) {
        throw Error("tensor " + t.name + " shape does not match its value count");
      }
      for (double v : t.values) put_f64(out, v);
    }
    if (!out) throw IoError("write failed: " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move model file into place: " + path);
  }
}

ModelArchive load_model_any(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file: " + path);
  Reader r{in};

  char magic[5];
  r.bytes(magic, 5, "magic");
  if (std::memcmp(magic, kMagic, 5) != 0) {
    throw FormatError("unsupported format: bad magic in " + path);
  }
  ModelArchive a;
  a.version = r.u32("version");
  if (a.version != ModelArchive::kCurrentVersion) {
    throw FormatError("unsupported format: version " + std::to_string(a.version) +
                      " (reader supports " +
                      std::to_string(ModelArchive::kCurrentVersion) + ")");
  }
  a.kind = model_kind_from_name(r.str("kind"));

  r.context = "config block";
  const uint32_t nconfig = r.u32("config count");
  for (uint32_t i = 0; i < nconfig; ++i) {
    std::string k = r.str("config key");
    std::string v = r.str("config value");
    a.config[k] = v;
  }

  r.context = "string table";
  const uint32_t nstrings = r.u32("string count");
  a.strings.reserve(nstrings);
  for (uint32_t i = 0; i < nstrings; ++i) a.strings.push_back(r.str("string"));

  r.context = "tensor block";
  const uint32_t ntensors = r.u32("tensor count");
  for (uint32_t i = 0; i < ntensors; ++i) {
    NamedTensor t;
    t.name = r.str("tensor name");
    r.context = "tensor " + t.name;
    const uint32_t ndim = r.u32("rank");
    if (ndim > 8) r.fail("rank too large");
    uint64_t count = 1;
    for (uint32_t d = 0; d < ndim; ++d) {
      t.shape.push_back(r.u64("shape"));
      count *= t.shape.back();
    }
    if (count > (1ull << 32)) r.fail("element count too large");
    t.values.resize(count);
    for (uint64_t v = 0; v < count; ++v) t.values[v] = r.f64("values");
    a.tensors.push_back(std::move(t));
    r.context = "tensor block";
  }

  char extra;
  if (in.read(&extra, 1)) {
    throw FormatError("corrupt archive: trailing bytes after tensor block");
  }
  return a;
}

ModelArchive load_model(const std::string& path, ModelKind expected) {
  ModelArchive a = load_model_any(path);
  if (a.kind != expected) {
    throw FormatError("wrong model kind: expected " + model_kind_name(expected) +
                      ", file holds " + model_kind_name(a.kind));
  }
  return a;
}

// ---------------------------------------------------------------------------
// Converters
// ---------------------------------------------------------------------------

namespace {

std::string to_string_exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int config_int(const ModelArchive& a, const std::string& key) {
  try {
    return std::stoi(a.config_at(key));
  } catch (const std::exception&) {
    throw FormatError("corrupt archive: bad integer for config key " + key);
  }
}

uint64_t config_u64(const ModelArchive& a, const std::string& key) {
  try {
    return std::stoull(a.config_at(key));
  } catch (const std::exception&) {
    throw FormatError("corrupt archive: bad integer for config key " + key);
  }
}

double config_double(const ModelArchive& a, const std::string& key) {
  try {
    return std::stod(a.config_at(key));
  } catch (const std::exception&) {
    throw FormatError("corrupt archive: bad number for config key " + key);
  }
}

void expect_shape(const NamedTensor& t, const std::vector<uint64_t>& shape) {
  if (t.shape != shape) {
    std::ostringstream os;
    os << "corrupt archive: tensor " << t.name << " has shape (";
    for (size_t i = 0; i < t.shape.size(); ++i) {
      os << (i ? "," : "") << t.shape[i];
    }
    os << "), expected (";
    for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ")";
    throw FormatError(os.str());
  }
}

NamedTensor start_tensor(const TransitionModel& tm) {
  NamedTensor t;
  t.name = "trans_start";
  t.shape = {3};
  t.values = {tm.start[0], tm.start[1], tm.start[2]};
  return t;
}

NamedTensor trans_tensor(const TransitionModel& tm) {
  NamedTensor t;
  t.name = "trans_matrix";
  t.shape = {3, 3};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) t.values.push_back(tm.trans[i][j]);
  }
  return t;
}

void transitions_into_config(const TransitionModel& tm, ModelArchive& a) {
  a.config["lambda_t"] = to_string_exact(tm.lambda_t);
  a.config["constrained"] = tm.constrained ? "1" : "0";
}

TransitionModel transitions_from_tensors(const ModelArchive& a) {
  TransitionModel tm;
  const auto& start = a.tensor("trans_start");
  expect_shape(start, {3});
  for (int i = 0; i < 3; ++i) tm.start[i] = start.values[i];
  const auto& trans = a.tensor("trans_matrix");
  expect_shape(trans, {3, 3});
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) tm.trans[i][j] = trans.values[3 * i + j];
  }
  tm.lambda_t = config_double(a, "lambda_t");
  tm.constrained = config_int(a, "constrained") != 0;
  return tm;
}

void vocab_into_archive(const Vocabulary& vocab, ModelArchive& a) {
  a.strings = vocab.tokens();
  a.config["vocab_min_count"] = std::to_string(vocab.min_count());
}

Vocabulary vocab_from_archive(const ModelArchive& a) {
  try {
    return Vocabulary::from_tokens(a.strings, config_int(a, "vocab_min_count"));
  } catch (const FormatError& e) {
    throw FormatError("corrupt archive: " + std::string(e.what()));
  }
}

}  // namespace

ModelArchive archive_from_embeddings(const EmbeddingTable& table) {
  ModelArchive a;
  a.kind = ModelKind::embeddings;
  vocab_into_archive(table.vocab, a);
  a.config["dim"] = std::to_string(table.dim);
  NamedTensor t;
  t.name = "embedding";
  t.shape = {static_cast<uint64_t>(table.rows()), static_cast<uint64_t>(table.dim)};
  t.values = table.matrix;
  a.tensors.push_back(std::move(t));
  return a;
}

EmbeddingTable embeddings_from_archive(const ModelArchive& a) {
  EmbeddingTable t;
  t.dim = config_int(a, "dim");
  if (t.dim < 1) throw FormatError("corrupt archive: dim must be >= 1");
  t.vocab = vocab_from_archive(a);
  const auto& emb = a.tensor("embedding");
  expect_shape(emb, {static_cast<uint64_t>(t.vocab.size()),
                     static_cast<uint64_t>(t.dim)});
  t.matrix = emb.values;
  return t;
}

ModelArchive archive_from_transitions(const TransitionModel& tm) {
  ModelArchive a;
  a.kind = ModelKind::transitions;
  transitions_into_config(tm, a);
  a.tensors.push_back(start_tensor(tm));
  a.tensors.push_back(trans_tensor(tm));
  return a;
}

TransitionModel transitions_from_archive(const ModelArchive& a) {
  return transitions_from_tensors(a);
}

ModelArchive archive_from_dnn(const MLPParams& params, const TransitionModel& tm,
                              const std::map<std::string, std::string>& extra_config) {
  params.validate();
  ModelArchive a;
  a.kind = ModelKind::dnn;
  a.config.insert(extra_config.begin(), extra_config.end());
  vocab_into_archive(params.embedding.vocab, a);
  a.config["dim"] = std::to_string(params.embedding.dim);
  a.config["window_radius"] = std::to_string(params.window_radius);
  a.config["hidden_layers"] = std::to_string(params.hidden.size());
  transitions_into_config(tm, a);

  NamedTensor emb;
  emb.name = "embedding";
  emb.shape = {static_cast<uint64_t>(params.embedding.rows()),
               static_cast<uint64_t>(params.embedding.dim)};
  emb.values = params.embedding.matrix;
  a.tensors.push_back(std::move(emb));

  for (size_t l = 0; l < params.hidden.size(); ++l) {
    NamedTensor w;
    w.name = "hidden" + std::to_string(l) + ".W";
    w.shape = {static_cast<uint64_t>(params.hidden[l].out),
               static_cast<uint64_t>(params.hidden[l].in)};
    w.values = params.hidden[l].W;
    a.tensors.push_back(std::move(w));
    NamedTensor b;
    b.name = "hidden" + std::to_string(l) + ".b";
    b.shape = {static_cast<uint64_t>(params.hidden[l].out)};
    b.values = params.hidden[l].b;
    a.tensors.push_back(std::move(b));
  }
  NamedTensor w;
  w.name = "output.W";
  w.shape = {3, static_cast<uint64_t>(params.output.in)};
  w.values = params.output.W;
  a.tensors.push_back(std::move(w));
  NamedTensor b;
  b.name = "output.b";
  b.shape = {3};
  b.values = params.output.b;
  a.tensors.push_back(std::move(b));

  a.tensors.push_back(start_tensor(tm));
  a.tensors.push_back(trans_tensor(tm));
  return a;
}

DnnModel dnn_from_archive(const ModelArchive& a) {
  DnnModel m;
  m.params.window_radius = config_int(a, "window_radius");
  m.params.embedding.dim = config_int(a, "dim");
  m.params.embedding.vocab = vocab_from_archive(a);

  const auto& emb = a.tensor("embedding");
  expect_shape(emb, {static_cast<uint64_t>(m.params.embedding.vocab.size()),
                     static_cast<uint64_t>(m.params.embedding.dim)});
  m.params.embedding.matrix = emb.values;

  const int layers = config_int(a, "hidden_layers");
  if (layers < 0 || layers > 64) {
    throw FormatError("corrupt archive: implausible hidden layer count");
  }
  int in = m.params.input_dim();
  for (int l = 0; l < layers; ++l) {
    const auto& wt = a.tensor("hidden" + std::to_string(l) + ".W");
    if (wt.shape.size() != 2 || wt.shape[1] != static_cast<uint64_t>(in)) {
      throw FormatError("corrupt archive: tensor " + wt.name +
                        " does not chain with input " + std::to_string(in));
    }
    const auto& bt = a.tensor("hidden" + std::to_string(l) + ".b");
    expect_shape(bt, {wt.shape[0]});
    DenseLayer layer;
    layer.in = in;
    layer.out = static_cast<int>(wt.shape[0]);
    layer.W = wt.values;
    layer.b = bt.values;
    in = layer.out;
    m.params.hidden.push_back(std::move(layer));
  }
  const auto& wt = a.tensor("output.W");
  expect_shape(wt, {3, static_cast<uint64_t>(in)});
  const auto& bt = a.tensor("output.b");
  expect_shape(bt, {3});
  m.params.output.in = in;
  m.params.output.out = 3;
  m.params.output.W = wt.values;
  m.params.output.b = bt.values;
  m.params.validate();

  m.transitions = transitions_from_tensors(a);
  return m;
}

ModelArchive archive_from_maxent(const MaxEntModel& model, const TransitionModel& tm,
                                 const std::map<std::string, std::string>& extra_config) {
  ModelArchive a;
  a.kind = ModelKind::maxent;
  a.config.insert(extra_config.begin(), extra_config.end());
  a.strings = model.feature_names;
  a.config["window_radius"] = std::to_string(model.config.window_radius);
  a.config["lr"] = to_string_exact(model.config.lr);
  a.config["epochs"] = std::to_string(model.config.epochs);
  a.config["l2"] = to_string_exact(model.config.l2);
  a.config["seed"] = std::to_string(model.config.seed);
  transitions_into_config(tm, a);

  NamedTensor w;
  w.name = "weights";
  w.shape = {static_cast<uint64_t>(model.num_features()), 3};
  w.values = model.weights;
  a.tensors.push_back(std::move(w));
  a.tensors.push_back(start_tensor(tm));
  a.tensors.push_back(trans_tensor(tm));
  return a;
}

MaxEntWithTransitions maxent_from_archive(const ModelArchive& a) {
  MaxEntWithTransitions m;
  m.model.config.window_radius = config_int(a, "window_radius");
  m.model.config.lr = config_double(a, "lr");
  m.model.config.epochs = config_int(a, "epochs");
  m.model.config.l2 = config_double(a, "l2");
  m.model.config.seed = config_u64(a, "seed");
  m.model.feature_names = a.strings;
  for (size_t i = 0; i < a.strings.size(); ++i) {
    auto [it, inserted] = m.model.feature_ids.emplace(a.strings[i],
                                                      static_cast<int>(i));
    if (!inserted) {
      throw FormatError("corrupt archive: duplicate feature '" + a.strings[i] + "'");
    }
  }
  const auto& w = a.tensor("weights");
  expect_shape(w, {static_cast<uint64_t>(m.model.feature_names.size()), 3});
  m.model.weights = w.values;
  m.transitions = transitions_from_tensors(a);
  return m;
}

}  // namespace etrig
