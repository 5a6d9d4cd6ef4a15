#include "etrig/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "etrig/errors.hpp"
#include "etrig/rng.hpp"
#include "etrig/utf8.hpp"

namespace etrig {

EmbeddingTable init_embeddings(const Vocabulary& vocab, int dim, uint64_t seed) {
  if (dim < 1) throw ConfigError("embedding dim must be >= 1");
  EmbeddingTable t;
  t.dim = dim;
  t.vocab = vocab;
  t.matrix.resize(static_cast<size_t>(t.rows()) * dim);
  Rng rng(seed);
  const double bound = 0.5 / dim;
  for (auto& x : t.matrix) x = rng.uniform(-bound, bound);
  return t;
}

void lookup_concat_into(const EmbeddingTable& table, const Window& w,
                        std::vector<double>& out) {
  out.resize(w.token_indices.size() * static_cast<size_t>(table.dim));
  double* dst = out.data();
  for (int idx : w.token_indices) {
    if (idx < 0 || idx >= table.rows()) {
      throw Error("window token index " + std::to_string(idx) +
                  " outside embedding table with " + std::to_string(table.rows()) +
                  " rows");
    }
    const double* src = table.row(idx);
    std::copy(src, src + table.dim, dst);
    dst += table.dim;
  }
}

std::vector<double> lookup_concat(const EmbeddingTable& table, const Window& w) {
  std::vector<double> out;
  lookup_concat_into(table, w, out);
  return out;
}

std::vector<double> neg_sampling_dist(const std::vector<uint64_t>& counts) {
  std::vector<double> p(counts.size(), 0.0);
  double total = 0.0;
  for (size_t i = 2; i < counts.size(); ++i) {
    if (counts[i] > 0) total += std::pow(static_cast<double>(counts[i]), 0.75);
  }
  if (total <= 0.0) {
    throw Error("negative-sampling distribution needs at least one counted token");
  }
  for (size_t i = 2; i < counts.size(); ++i) {
    if (counts[i] > 0) {
      p[i] = std::pow(static_cast<double>(counts[i]), 0.75) / total;
    }
  }
  return p;
}

std::vector<double> neg_sampling_dist(const Vocabulary& vocab) {
  return neg_sampling_dist(vocab.counts());
}

void SGNSConfig::validate() const {
  if (dim < 1) throw ConfigError("dim must be >= 1");
  if (context < 1) throw ConfigError("context radius must be >= 1");
  if (negatives < 0) throw ConfigError("negatives must be >= 0");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (lr <= 0.0) throw ConfigError("learning rate must be positive");
  if (min_count < 1) throw ConfigError("min_count must be >= 1");
  if (subsample < 0.0) throw ConfigError("subsample threshold must be >= 0");
}

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

SgnsPairScalars sgns_pair_scalars(std::span<const double> v_center,
                                  std::span<const double> u_context,
                                  const std::vector<std::span<const double>>& u_negs) {
  if (u_context.size() != v_center.size()) {
    throw Error("SGNS vector dimension mismatch");
  }
  for (const auto& n : u_negs) {
    if (n.size() != v_center.size()) throw Error("SGNS vector dimension mismatch");
  }
  SgnsPairScalars out;
  const double pos = dot(v_center, u_context);
  out.loss = softplus(-pos);
  out.a_context = sigmoid(pos) - 1.0;
  out.a_negs.reserve(u_negs.size());
  for (const auto& n : u_negs) {
    const double neg = dot(v_center, n);
    out.loss += softplus(neg);
    out.a_negs.push_back(sigmoid(neg));
  }
  return out;
}

SgnsPairGrad sgns_pair_loss_grad(std::span<const double> v_center,
                                 std::span<const double> u_context,
                                 const std::vector<std::span<const double>>& u_negs) {
  const SgnsPairScalars s = sgns_pair_scalars(v_center, u_context, u_negs);
  const size_t d = v_center.size();
  SgnsPairGrad g;
  g.loss = s.loss;
  g.d_center.assign(d, 0.0);
  g.d_context.resize(d);
  for (size_t i = 0; i < d; ++i) {
    g.d_center[i] = s.a_context * u_context[i];
    g.d_context[i] = s.a_context * v_center[i];
  }
  g.d_negs.resize(u_negs.size());
  for (size_t j = 0; j < u_negs.size(); ++j) {
    g.d_negs[j].resize(d);
    for (size_t i = 0; i < d; ++i) {
      g.d_negs[j][i] = s.a_negs[j] * v_center[i];
      g.d_center[i] += s.a_negs[j] * u_negs[j][i];
    }
  }
  return g;
}

EmbeddingTable skipgram_train(const std::vector<std::string>& sentences,
                              const SGNSConfig& config) {
  config.validate();

  std::vector<std::vector<std::string>> tokenized;
  tokenized.reserve(sentences.size());
  for (const auto& line : sentences) tokenized.push_back(utf8_split(line));

  Vocabulary vocab = Vocabulary::build(tokenized, config.min_count);
  if (vocab.size() <= 2) {
    throw Error("pretraining corpus is empty after min_count filtering");
  }

  // Encoded sentences with out-of-vocabulary tokens removed; reserved ids
  // never enter training.
  std::vector<std::vector<int>> encoded;
  encoded.reserve(tokenized.size());
  uint64_t corpus_tokens = 0;
  for (const auto& toks : tokenized) {
    std::vector<int> ids;
    ids.reserve(toks.size());
    for (const auto& tok : toks) {
      if (vocab.contains(tok)) ids.push_back(vocab.index(tok));
    }
    corpus_tokens += ids.size();
    if (!ids.empty()) encoded.push_back(std::move(ids));
  }
  if (corpus_tokens == 0) {
    throw Error("pretraining corpus is empty after min_count filtering");
  }

  EmbeddingTable center = init_embeddings(vocab, config.dim, config.seed);
  if (config.epochs == 0) return center;

  std::vector<double> context(center.matrix.size(), 0.0);

  // Cumulative unigram^0.75 table for negative sampling by binary search.
  const std::vector<double> dist = neg_sampling_dist(vocab);
  std::vector<double> cumulative(dist.size(), 0.0);
  double acc = 0.0;
  for (size_t i = 0; i < dist.size(); ++i) {
    acc += dist[i];
    cumulative[i] = acc;
  }

  // word2vec-style keep probability per token id.
  std::vector<double> keep(vocab.size(), 1.0);
  if (config.subsample > 0.0) {
    const double total = static_cast<double>(corpus_tokens);
    for (int i = 2; i < vocab.size(); ++i) {
      const double f = static_cast<double>(vocab.counts()[i]) / total;
      const double k = (std::sqrt(f / config.subsample) + 1.0) * config.subsample / f;
      keep[i] = std::min(1.0, k);
    }
  }

  Rng rng(config.seed);
  const double total_positions =
      static_cast<double>(corpus_tokens) * config.epochs;
  const double lr_floor = config.lr * 1e-4;
  uint64_t processed = 0;
  double lr = config.lr;

  std::vector<int> kept;
  const int d = config.dim;
  std::vector<double> d_center(d);
  std::vector<std::span<const double>> neg_spans;
  std::vector<double*> neg_rows;

  auto sample_negative = [&](int positive) -> int {
    for (int tries = 0; tries < 64; ++tries) {
      const double r = rng.real();
      const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), r);
      int id = static_cast<int>(it - cumulative.begin());
      if (id >= vocab.size()) id = vocab.size() - 1;
      if (id != positive && id >= 2) return id;
    }
    return -1;  // degenerate distribution (single token); skip the draw
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& sent : encoded) {
      kept.clear();
      for (int id : sent) {
        ++processed;
        if (keep[id] >= 1.0 || rng.real() < keep[id]) kept.push_back(id);
      }
      lr = std::max(lr_floor,
                    config.lr * (1.0 - static_cast<double>(processed) /
                                           (total_positions + 1.0)));
      const int n = static_cast<int>(kept.size());
      for (int pos = 0; pos < n; ++pos) {
        const int center_id = kept[pos];
        const int radius = 1 + static_cast<int>(rng.below(config.context));
        for (int off = -radius; off <= radius; ++off) {
          if (off == 0) continue;
          const int cpos = pos + off;
          if (cpos < 0 || cpos >= n) continue;
          const int context_id = kept[cpos];

          double* v = center.row(center_id);
          double* u = context.data() + static_cast<size_t>(context_id) * d;
          neg_spans.clear();
          neg_rows.clear();
          for (int k = 0; k < config.negatives; ++k) {
            const int neg_id = sample_negative(context_id);
            if (neg_id < 0) continue;
            double* un = context.data() + static_cast<size_t>(neg_id) * d;
            neg_rows.push_back(un);
            neg_spans.emplace_back(un, static_cast<size_t>(d));
          }

          const SgnsPairScalars s = sgns_pair_scalars(
              {v, static_cast<size_t>(d)}, {u, static_cast<size_t>(d)}, neg_spans);

          for (int i = 0; i < d; ++i) d_center[i] = s.a_context * u[i];
          for (size_t j = 0; j < neg_rows.size(); ++j) {
            const double a = s.a_negs[j];
            double* un = neg_rows[j];
            for (int i = 0; i < d; ++i) {
              d_center[i] += a * un[i];
              un[i] -= lr * a * v[i];
            }
          }
          for (int i = 0; i < d; ++i) u[i] -= lr * s.a_context * v[i];
          for (int i = 0; i < d; ++i) v[i] -= lr * d_center[i];
        }
      }
    }
  }
  return center;
}

// ---------------------------------------------------------------------------
// Interchange format
// ---------------------------------------------------------------------------

namespace {

bool has_whitespace(const std::string& s) {
  return s.find_first_of(" \t\r\n") != std::string::npos;
}

void write_row(std::ofstream& out, const std::string& token, const double* row,
               int dim) {
  out << token;
  char buf[40];
  for (int i = 0; i < dim; ++i) {
    std::snprintf(buf, sizeof(buf), " %.17g", row[i]);
    out << buf;
  }
  out << '\n';
}

}  // namespace

void save_embeddings(const EmbeddingTable& table, const std::string& path) {
  for (const auto& tok : table.vocab.tokens()) {
    if (has_whitespace(tok)) {
      throw ValidationError("token with whitespace cannot be serialized: '" +
                            tok + "'");
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write embeddings file: " + path);
  out << table.rows() << ' ' << table.dim << '\n';
  for (int i = 2; i < table.rows(); ++i) {
    write_row(out, table.vocab.token(i), table.row(i), table.dim);
  }
  write_row(out, Vocabulary::kPadToken, table.row(Vocabulary::kPad), table.dim);
  write_row(out, Vocabulary::kUnkToken, table.row(Vocabulary::kUnk), table.dim);
  if (!out) throw IoError("write failed: " + path);
}

EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embeddings file: " + path);
  std::string header;
  if (!std::getline(in, header)) throw FormatError("empty embeddings file: " + path);
  std::istringstream hs(header);
  long long rows = 0;
  int dim = 0;
  if (!(hs >> rows >> dim) || rows < 2 || dim < 1) {
    throw FormatError("bad embeddings header: '" + header + "'");
  }

  std::vector<std::string> tokens;
  std::vector<std::vector<double>> vectors;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string token;
    ls >> token;
    std::vector<double> vec(dim);
    for (int i = 0; i < dim; ++i) {
      if (!(ls >> vec[i])) {
        throw FormatError("embeddings row for '" + token + "' has fewer than " +
                          std::to_string(dim) + " values");
      }
    }
    double extra;
    if (ls >> extra) {
      throw FormatError("embeddings row for '" + token + "' has more than " +
                        std::to_string(dim) + " values");
    }
    tokens.push_back(token);
    vectors.push_back(std::move(vec));
  }
  if (static_cast<long long>(tokens.size()) != rows) {
    throw FormatError("embeddings header declares " + std::to_string(rows) +
                      " rows but file has " + std::to_string(tokens.size()));
  }
  const size_t n = tokens.size();
  if (tokens[n - 2] != Vocabulary::kPadToken || tokens[n - 1] != Vocabulary::kUnkToken) {
    throw FormatError("embeddings file must end with the <PAD> and <UNK> rows");
  }

  std::vector<std::string> ordered;
  ordered.reserve(n);
  ordered.push_back(Vocabulary::kPadToken);
  ordered.push_back(Vocabulary::kUnkToken);
  for (size_t i = 0; i + 2 < n; ++i) ordered.push_back(tokens[i]);

  EmbeddingTable t;
  t.dim = dim;
  t.vocab = Vocabulary::from_tokens(ordered, 1);
  t.matrix.resize(n * static_cast<size_t>(dim));
  for (size_t i = 0; i + 2 < n; ++i) {
    std::copy(vectors[i].begin(), vectors[i].end(),
              t.row(static_cast<int>(i) + 2));
  }
  std::copy(vectors[n - 2].begin(), vectors[n - 2].end(), t.row(Vocabulary::kPad));
  std::copy(vectors[n - 1].begin(), vectors[n - 1].end(), t.row(Vocabulary::kUnk));
  return t;
}

}  // namespace etrig
