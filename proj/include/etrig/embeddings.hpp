#ifndef ETRIG_EMBEDDINGS_HPP
#define ETRIG_EMBEDDINGS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "etrig/corpus.hpp"

namespace etrig {

// Vocabulary-aligned matrix of character vectors. Row order follows the
// vocabulary index order, including the PAD and UNK rows.
struct EmbeddingTable {
  int dim = 0;
  Vocabulary vocab;
  std::vector<double> matrix;  // rows() x dim, row-major

  int rows() const { return vocab.size(); }
  double* row(int i) { return matrix.data() + static_cast<size_t>(i) * dim; }
  const double* row(int i) const {
    return matrix.data() + static_cast<size_t>(i) * dim;
  }
};

// Entries i.i.d. uniform on [-0.5/d, +0.5/d]; deterministic per (vocab, d, seed).
EmbeddingTable init_embeddings(const Vocabulary& vocab, int dim, uint64_t seed);

// Concatenation of the window's rows in left-to-right order.
std::vector<double> lookup_concat(const EmbeddingTable& table, const Window& w);
void lookup_concat_into(const EmbeddingTable& table, const Window& w,
                        std::vector<double>& out);

// Smoothed unigram distribution for negative sampling:
// p(i) = count(i)^0.75 / sum_j count(j)^0.75 over non-reserved tokens.
// Returned vector is aligned to vocabulary indices; reserved rows hold 0.
std::vector<double> neg_sampling_dist(const Vocabulary& vocab);
std::vector<double> neg_sampling_dist(const std::vector<uint64_t>& counts);

struct SGNSConfig {
  int dim = 50;
  int context = 5;    // maximum context radius; per pair the effective
                      // radius is drawn uniform in [1, context]
  int negatives = 5;
  int epochs = 5;
  double lr = 0.025;  // linearly decayed to 1e-4 of itself over training
  int min_count = 5;
  double unigram_power = 0.75;
  double subsample = 1e-3;  // 0 disables
  uint64_t seed = 1;

  void validate() const;  // throws ConfigError
};

// Loss and exact analytic gradients of the negative-sampling objective
//   L = -log s(u_ctx . v) - sum_neg log s(-u_neg . v)
// for one (center, context, negatives) triple.
struct SgnsPairGrad {
  double loss = 0.0;
  std::vector<double> d_center;
  std::vector<double> d_context;
  std::vector<std::vector<double>> d_negs;
};

SgnsPairGrad sgns_pair_loss_grad(std::span<const double> v_center,
                                 std::span<const double> u_context,
                                 const std::vector<std::span<const double>>& u_negs);

// Scalar form shared by the trainer: full gradients are
//   dL/dv      = a_ctx * u_ctx + sum_j a_neg[j] * u_neg[j]
//   dL/du_ctx  = a_ctx * v
//   dL/du_neg_j= a_neg[j] * v
// with a_ctx = s(u_ctx.v) - 1 and a_neg[j] = s(u_neg_j.v).
struct SgnsPairScalars {
  double loss = 0.0;
  double a_context = 0.0;
  std::vector<double> a_negs;
};

SgnsPairScalars sgns_pair_scalars(std::span<const double> v_center,
                                  std::span<const double> u_context,
                                  const std::vector<std::span<const double>>& u_negs);

// Skip-gram with negative sampling over raw sentences. Deterministic per
// (sentences, config) in this single-threaded implementation. The returned
// table holds the input (center) vectors; the context table is discarded.
EmbeddingTable skipgram_train(const std::vector<std::string>& sentences,
                              const SGNSConfig& config);

// Text interchange format:
//   <vocab_size> <dim>
//   <token> <v1> ... <vd>          (index order starting at 2;
//                                   <PAD> and <UNK> rows last)
void save_embeddings(const EmbeddingTable& table, const std::string& path);
EmbeddingTable load_embeddings(const std::string& path);

}  // namespace etrig

#endif  // ETRIG_EMBEDDINGS_HPP
