#ifndef ETRIG_NETWORK_HPP
#define ETRIG_NETWORK_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "etrig/corpus.hpp"
#include "etrig/decoder.hpp"
#include "etrig/embeddings.hpp"
#include "etrig/emission.hpp"

namespace etrig {

struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<double> W;  // out x in, row-major
  std::vector<double> b;  // out
};

// Window MLP: embedding concatenation -> tanh hidden layer(s) -> 3-way softmax.
// The embedding table is owned here and fine-tuned with the other weights.
struct MLPParams {
  EmbeddingTable embedding;
  std::vector<DenseLayer> hidden;
  DenseLayer output;  // 3 x H_last
  int window_radius = 2;

  int input_dim() const { return (2 * window_radius + 1) * embedding.dim; }
  void validate() const;  // dimension chain and finiteness
};

MLPParams init_mlp(EmbeddingTable embedding, const std::vector<int>& hidden_sizes,
                   int window_radius, uint64_t seed);

std::array<double, 3> softmax3(const std::array<double, 3>& logits);

struct ForwardCache {
  std::vector<double> input;
  std::vector<std::vector<double>> hidden_act;
  std::array<double, 3> logits{};
  std::array<double, 3> probs{};
};

std::array<double, 3> forward(const MLPParams& params, const Window& window,
                              ForwardCache* cache = nullptr);

// -ln p[gold]; probabilities below 1e-300 are clamped and flagged.
double nll_loss(const std::array<double, 3>& probs, Tag gold,
                bool* clamped = nullptr);

struct Gradients {
  std::vector<DenseLayer> hidden;  // same shapes as the parameters
  DenseLayer output;
  std::map<int, std::vector<double>> embedding_rows;  // row index -> d(dim)

  void init_shapes(const MLPParams& params);
  void zero();
};

// Accumulates exact NLL gradients into `grads` (L2 is applied by sgd_step).
// Embedding gradients are sparse: only rows present in the window appear.
void backward(const MLPParams& params, const Window& window, Tag gold,
              const ForwardCache& cache, Gradients& grads);

// theta <- theta - lr*(g + l2*theta) for hidden/output weight matrices;
// theta <- theta - lr*g for biases and embedding rows.
void sgd_step(MLPParams& params, const Gradients& grads, double lr, double l2);

EmissionMatrix emissions(const MLPParams& params, const std::vector<int>& indices);

struct TrainConfig {
  int window_radius = 2;
  std::vector<int> hidden_sizes = {300};
  int emb_dim = 50;  // used only when the caller random-initializes
  double lr = 0.01;
  int epochs = 30;
  double l2 = 1e-4;
  bool shuffle = true;
  uint64_t seed = 1;
  int patience = 5;  // early stop on dev F1; 0 disables

  void validate() const;
};

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  double dev_precision = 0.0;
  double dev_recall = 0.0;
  double dev_f1 = 0.0;
};

struct TrainResult {
  MLPParams params;
  TransitionModel transitions;  // estimated from the training labels
  std::vector<EpochStats> log;
  int best_epoch = 0;
};

// Per-character SGD in shuffled order; embeddings fine-tune jointly. Dev F1
// is computed each epoch via Viterbi decoding and exact-match scoring; with
// early stopping enabled the parameters of the best dev-F1 epoch are returned.
TrainResult train_supervised(const std::vector<TaggedSentence>& train,
                             const std::vector<TaggedSentence>& dev,
                             EmbeddingTable init, const TrainConfig& config);

// emissions -> viterbi -> spans.
std::vector<TriggerSpan> decode_sentence(const MLPParams& params,
                                         const TransitionModel& tm,
                                         const std::vector<int>& indices);

// One labeled training example.
struct Example {
  Window window;
  Tag gold = Tag::O;
};

struct GradCheckTensor {
  std::string name;
  double max_rel_error = 0.0;
  bool pass = true;
};

struct GradCheckReport {
  std::vector<GradCheckTensor> tensors;
  double step = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

using GradFn = std::function<void(const MLPParams&, const std::vector<Example>&,
                                  Gradients&)>;

// Compares analytic gradients against central finite differences of the
// summed NLL over `sample`, on a deterministic subsample of at least 20
// coordinates per tensor. Relative error uses max(|a|, |b|, 1e-8).
// `analytic` defaults to the library backward pass; tests may inject faults.
GradCheckReport grad_check(const MLPParams& params,
                           const std::vector<Example>& sample, double step,
                           double tolerance, const GradFn& analytic = nullptr);

}  // namespace etrig

#endif  // ETRIG_NETWORK_HPP
