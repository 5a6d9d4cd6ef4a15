#include "etrig/network.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "etrig/errors.hpp"
#include "etrig/eval.hpp"
#include "etrig/rng.hpp"

namespace etrig {

namespace {

// Seed offsets keep the weight-init stream distinct from the embedding-init
// and shuffle streams even when the user passes the same base seed everywhere.
constexpr uint64_t kInitStream = 0x57EA11CE5EEDULL;
constexpr uint64_t kShuffleStream = 0x5AFF1E5EEDULL;

}  // namespace

void MLPParams::validate() const {
  if (window_radius < 1) throw ConfigError("window radius must be >= 1");
  if (embedding.dim < 1) throw ConfigError("embedding dim must be >= 1");
  int expect = input_dim();
  for (size_t l = 0; l < hidden.size(); ++l) {
    const auto& layer = hidden[l];
    if (layer.in != expect || layer.out < 1 ||
        layer.W.size() != static_cast<size_t>(layer.in) * layer.out ||
        layer.b.size() != static_cast<size_t>(layer.out)) {
      throw ConfigError("hidden layer " + std::to_string(l) +
                        " does not chain: expected input " + std::to_string(expect));
    }
    expect = layer.out;
  }
  if (output.in != expect || output.out != kNumTags ||
      output.W.size() != static_cast<size_t>(output.in) * kNumTags ||
      output.b.size() != static_cast<size_t>(kNumTags)) {
    throw ConfigError("output layer must be 3 x " + std::to_string(expect));
  }
  auto all_finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(),
                       [](double x) { return std::isfinite(x); });
  };
  for (const auto& layer : hidden) {
    if (!all_finite(layer.W) || !all_finite(layer.b)) {
      throw ValidationError("non-finite hidden parameter");
    }
  }
  if (!all_finite(output.W) || !all_finite(output.b) ||
      !all_finite(embedding.matrix)) {
    throw ValidationError("non-finite parameter");
  }
}

MLPParams init_mlp(EmbeddingTable embedding, const std::vector<int>& hidden_sizes,
                   int window_radius, uint64_t seed) {
  MLPParams p;
  p.embedding = std::move(embedding);
  p.window_radius = window_radius;

  Rng rng(seed ^ kInitStream);
  int in = p.input_dim();
  auto make_layer = [&](int out) {
    DenseLayer layer;
    layer.in = in;
    layer.out = out;
    layer.W.resize(static_cast<size_t>(in) * out);
    layer.b.assign(out, 0.0);
    const double bound = std::sqrt(6.0 / (in + out));
    for (auto& w : layer.W) w = rng.uniform(-bound, bound);
    in = out;
    return layer;
  };
  for (int h : hidden_sizes) {
    if (h < 1) throw ConfigError("hidden layer size must be >= 1");
    p.hidden.push_back(make_layer(h));
  }
  p.output = make_layer(kNumTags);
  p.validate();
  return p;
}

std::array<double, 3> softmax3(const std::array<double, 3>& logits) {
  const double m = std::max(logits[0], std::max(logits[1], logits[2]));
  std::array<double, 3> p;
  double z = 0.0;
  for (int i = 0; i < 3; ++i) {
    p[i] = std::exp(logits[i] - m);
    z += p[i];
  }
  for (int i = 0; i < 3; ++i) p[i] /= z;
  return p;
}

namespace {

// y = W x + b
void affine(const DenseLayer& layer, const std::vector<double>& x,
            std::vector<double>& y) {
  y.resize(layer.out);
  for (int o = 0; o < layer.out; ++o) {
    const double* w = layer.W.data() + static_cast<size_t>(o) * layer.in;
    double s = layer.b[o];
    for (int i = 0; i < layer.in; ++i) s += w[i] * x[i];
    y[o] = s;
  }
}

}  // namespace

std::array<double, 3> forward(const MLPParams& params, const Window& window,
                              ForwardCache* cache) {
  if (static_cast<int>(window.token_indices.size()) != 2 * params.window_radius + 1) {
    throw Error("window width does not match the model's radius");
  }
  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;

  lookup_concat_into(params.embedding, window, c.input);
  c.hidden_act.resize(params.hidden.size());

  const std::vector<double>* x = &c.input;
  std::vector<double> pre;
  for (size_t l = 0; l < params.hidden.size(); ++l) {
    affine(params.hidden[l], *x, pre);
    auto& act = c.hidden_act[l];
    act.resize(pre.size());
    for (size_t i = 0; i < pre.size(); ++i) act[i] = std::tanh(pre[i]);
    x = &act;
  }

  if (static_cast<int>(x->size()) != params.output.in) {
    throw Error("hidden/output dimension mismatch");
  }
  std::vector<double> logits;
  affine(params.output, *x, logits);
  for (int i = 0; i < 3; ++i) c.logits[i] = logits[i];
  c.probs = softmax3(c.logits);
  return c.probs;
}

double nll_loss(const std::array<double, 3>& probs, Tag gold, bool* clamped) {
  double p = probs[static_cast<int>(gold)];
  if (clamped) *clamped = false;
  if (p < 1e-300) {
    p = 1e-300;
    if (clamped) *clamped = true;
  }
  return -std::log(p);
}

void Gradients::init_shapes(const MLPParams& params) {
  hidden.resize(params.hidden.size());
  for (size_t l = 0; l < params.hidden.size(); ++l) {
    hidden[l].in = params.hidden[l].in;
    hidden[l].out = params.hidden[l].out;
    hidden[l].W.assign(params.hidden[l].W.size(), 0.0);
    hidden[l].b.assign(params.hidden[l].b.size(), 0.0);
  }
  output.in = params.output.in;
  output.out = params.output.out;
  output.W.assign(params.output.W.size(), 0.0);
  output.b.assign(params.output.b.size(), 0.0);
  embedding_rows.clear();
}

void Gradients::zero() {
  for (auto& layer : hidden) {
    std::fill(layer.W.begin(), layer.W.end(), 0.0);
    std::fill(layer.b.begin(), layer.b.end(), 0.0);
  }
  std::fill(output.W.begin(), output.W.end(), 0.0);
  std::fill(output.b.begin(), output.b.end(), 0.0);
  embedding_rows.clear();
}

void backward(const MLPParams& params, const Window& window, Tag gold,
              const ForwardCache& cache, Gradients& grads) {
  if (cache.input.size() != static_cast<size_t>(params.input_dim()) ||
      cache.hidden_act.size() != params.hidden.size()) {
    throw Error("stale forward cache (shape mismatch)");
  }
  if (grads.hidden.size() != params.hidden.size() ||
      grads.output.W.size() != params.output.W.size()) {
    throw Error("gradient buffers not initialized for this model");
  }

  // d(loss)/d(logit) = p - onehot(gold)
  std::array<double, 3> dlogits = cache.probs;
  dlogits[static_cast<int>(gold)] -= 1.0;

  const std::vector<double>& last_act =
      params.hidden.empty() ? cache.input : cache.hidden_act.back();
  for (int o = 0; o < 3; ++o) {
    double* gw = grads.output.W.data() + static_cast<size_t>(o) * params.output.in;
    for (int i = 0; i < params.output.in; ++i) gw[i] += dlogits[o] * last_act[i];
    grads.output.b[o] += dlogits[o];
  }

  std::vector<double> dh(params.output.in, 0.0);
  for (int i = 0; i < params.output.in; ++i) {
    double s = 0.0;
    for (int o = 0; o < 3; ++o) {
      s += params.output.W[static_cast<size_t>(o) * params.output.in + i] * dlogits[o];
    }
    dh[i] = s;
  }

  std::vector<double> dprev;
  for (size_t l = params.hidden.size(); l-- > 0;) {
    const DenseLayer& layer = params.hidden[l];
    const auto& act = cache.hidden_act[l];
    const std::vector<double>& below =
        l == 0 ? cache.input : cache.hidden_act[l - 1];
    // tanh' = 1 - act^2, applied in place on the incoming gradient
    for (int o = 0; o < layer.out; ++o) dh[o] *= 1.0 - act[o] * act[o];
    for (int o = 0; o < layer.out; ++o) {
      double* gw = grads.hidden[l].W.data() + static_cast<size_t>(o) * layer.in;
      const double g = dh[o];
      for (int i = 0; i < layer.in; ++i) gw[i] += g * below[i];
      grads.hidden[l].b[o] += g;
    }
    dprev.assign(layer.in, 0.0);
    for (int o = 0; o < layer.out; ++o) {
      const double* w = layer.W.data() + static_cast<size_t>(o) * layer.in;
      const double g = dh[o];
      for (int i = 0; i < layer.in; ++i) dprev[i] += w[i] * g;
    }
    dh = dprev;
  }

  // dh now holds the gradient of the concatenated embedding input; scatter it
  // onto the touched rows (repeated indices accumulate).
  const int d = params.embedding.dim;
  for (size_t slot = 0; slot < window.token_indices.size(); ++slot) {
    const int row = window.token_indices[slot];
    auto [it, inserted] = grads.embedding_rows.try_emplace(row);
    if (inserted) it->second.assign(d, 0.0);
    const double* src = dh.data() + slot * d;
    for (int i = 0; i < d; ++i) it->second[i] += src[i];
  }
}

namespace {

void check_finite(const std::vector<double>& v, const std::string& name) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw Error("non-finite gradient in tensor " + name);
    }
  }
}

void apply_dense(DenseLayer& layer, const DenseLayer& grad, double lr, double l2,
                 const std::string& name) {
  check_finite(grad.W, name + ".W");
  check_finite(grad.b, name + ".b");
  for (size_t i = 0; i < layer.W.size(); ++i) {
    layer.W[i] -= lr * (grad.W[i] + l2 * layer.W[i]);
  }
  for (size_t i = 0; i < layer.b.size(); ++i) {
    layer.b[i] -= lr * grad.b[i];
  }
}

}  // namespace

void sgd_step(MLPParams& params, const Gradients& grads, double lr, double l2) {
  for (size_t l = 0; l < params.hidden.size(); ++l) {
    apply_dense(params.hidden[l], grads.hidden[l], lr, l2,
                "hidden" + std::to_string(l));
  }
  apply_dense(params.output, grads.output, lr, l2, "output");
  const int d = params.embedding.dim;
  for (const auto& [row, g] : grads.embedding_rows) {
    if (row < 0 || row >= params.embedding.rows()) {
      throw Error("embedding gradient row out of range");
    }
    check_finite(g, "embedding[" + std::to_string(row) + "]");
    double* dst = params.embedding.row(row);
    for (int i = 0; i < d; ++i) dst[i] -= lr * g[i];
  }
}

EmissionMatrix emissions(const MLPParams& params, const std::vector<int>& indices) {
  EmissionMatrix em;
  em.rows.reserve(indices.size());
  ForwardCache cache;
  for (size_t t = 0; t < indices.size(); ++t) {
    Window w = window_at(indices, static_cast<int>(t), params.window_radius);
    const auto probs = forward(params, w, &cache);
    std::array<double, 3> row;
    for (int j = 0; j < 3; ++j) row[j] = std::log(probs[j]);
    em.rows.push_back(row);
  }
  return em;
}

std::vector<TriggerSpan> decode_sentence(const MLPParams& params,
                                         const TransitionModel& tm,
                                         const std::vector<int>& indices) {
  if (indices.empty()) return {};
  const DecodeResult r = viterbi(emissions(params, indices), tm);
  return tags_to_spans(r.tags);
}

// ---------------------------------------------------------------------------
// Supervised training
// ---------------------------------------------------------------------------

void TrainConfig::validate() const {
  if (window_radius < 1) throw ConfigError("window radius must be >= 1");
  if (hidden_sizes.empty()) throw ConfigError("at least one hidden layer required");
  for (int h : hidden_sizes) {
    if (h < 1) throw ConfigError("hidden sizes must be >= 1");
  }
  if (emb_dim < 1) throw ConfigError("embedding dim must be >= 1");
  if (lr <= 0.0) throw ConfigError("learning rate must be positive");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (l2 < 0.0) throw ConfigError("l2 must be >= 0");
  if (patience < 0) throw ConfigError("patience must be >= 0");
}

namespace {

struct EncodedSentence {
  std::vector<int> indices;
  std::vector<Tag> tags;
};

double sentence_unk_fraction(const std::vector<EncodedSentence>& sents) {
  uint64_t unk = 0, total = 0;
  for (const auto& s : sents) {
    for (int idx : s.indices) {
      total++;
      if (idx == Vocabulary::kUnk) unk++;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(unk) / static_cast<double>(total);
}

}  // namespace

TrainResult train_supervised(const std::vector<TaggedSentence>& train,
                             const std::vector<TaggedSentence>& dev,
                             EmbeddingTable init, const TrainConfig& config) {
  config.validate();
  if (train.empty()) throw Error("training set is empty");
  if (init.dim < 1 || init.rows() < 2) {
    throw Error("init embedding table is empty");
  }

  std::vector<EncodedSentence> enc_train(train.size());
  for (size_t s = 0; s < train.size(); ++s) {
    enc_train[s].indices = encode(train[s].chars, init.vocab);
    enc_train[s].tags = train[s].tags;
  }
  // A table built for a different corpus maps most characters to UNK; refuse
  // to train on what would effectively be an unreadable corpus.
  if (sentence_unk_fraction(enc_train) > 0.5) {
    throw Error("vocabulary mismatch: most training characters are unknown "
                "to the provided embedding table");
  }

  std::vector<EncodedSentence> enc_dev(dev.size());
  std::vector<std::vector<TriggerSpan>> dev_gold(dev.size());
  for (size_t s = 0; s < dev.size(); ++s) {
    enc_dev[s].indices = encode(dev[s].chars, init.vocab);
    enc_dev[s].tags = dev[s].tags;
    dev_gold[s] = tags_to_spans(dev[s].tags);
  }

  std::vector<std::vector<Tag>> train_tags;
  train_tags.reserve(train.size());
  for (const auto& s : train) train_tags.push_back(s.tags);

  TrainResult result;
  result.transitions = estimate_transitions(train_tags, 1.0, true);
  result.params =
      init_mlp(std::move(init), config.hidden_sizes, config.window_radius,
               config.seed);

  std::vector<std::pair<int, int>> order;  // (sentence, position)
  for (size_t s = 0; s < enc_train.size(); ++s) {
    for (size_t t = 0; t < enc_train[s].indices.size(); ++t) {
      order.emplace_back(static_cast<int>(s), static_cast<int>(t));
    }
  }
  if (order.empty()) throw Error("training set is empty");

  Rng shuffle_rng(config.seed ^ kShuffleStream);
  Gradients grads;
  grads.init_shapes(result.params);
  ForwardCache cache;

  auto dev_score = [&](const MLPParams& params) -> Score {
    if (enc_dev.empty()) return Score::from_counts(0, 0, 0);
    std::vector<std::vector<TriggerSpan>> pred(enc_dev.size());
    for (size_t s = 0; s < enc_dev.size(); ++s) {
      pred[s] = decode_sentence(params, result.transitions, enc_dev[s].indices);
    }
    return score_spans(pred, dev_gold);
  };

  MLPParams best_params = result.params;
  double best_f1 = -1.0;
  int best_epoch = 0;
  int since_best = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.shuffle) shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    for (const auto& [s, t] : order) {
      const auto& sent = enc_train[s];
      Window w = window_at(sent.indices, t, config.window_radius);
      const auto probs = forward(result.params, w, &cache);
      loss_sum += nll_loss(probs, sent.tags[t]);
      grads.zero();
      backward(result.params, w, sent.tags[t], cache, grads);
      sgd_step(result.params, grads, config.lr, config.l2);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_loss = loss_sum / static_cast<double>(order.size());
    const Score score = dev_score(result.params);
    stats.dev_precision = score.precision;
    stats.dev_recall = score.recall;
    stats.dev_f1 = score.f1;
    result.log.push_back(stats);

    if (score.f1 > best_f1) {
      best_f1 = score.f1;
      best_params = result.params;
      best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
    }
    if (config.patience > 0 && since_best >= config.patience) break;
  }

  if (config.patience > 0 && !dev.empty()) {
    result.params = std::move(best_params);
    result.best_epoch = best_epoch;
  } else {
    result.best_epoch = result.log.empty() ? 0 : result.log.back().epoch;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Gradient verification
// ---------------------------------------------------------------------------

namespace {

double total_loss(const MLPParams& params, const std::vector<Example>& sample) {
  double sum = 0.0;
  ForwardCache cache;
  for (const auto& ex : sample) {
    const auto probs = forward(params, ex.window, &cache);
    sum += nll_loss(probs, ex.gold);
  }
  return sum;
}

double rel_error(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-8});
}

// Evenly spread deterministic subsample of [0, n).
std::vector<size_t> pick_coords(size_t n, size_t want) {
  std::vector<size_t> out;
  if (n == 0) return out;
  if (n <= want) {
    out.resize(n);
    for (size_t i = 0; i < n; ++i) out[i] = i;
    return out;
  }
  out.reserve(want);
  for (size_t j = 0; j < want; ++j) out.push_back(j * n / want);
  return out;
}

}  // namespace

GradCheckReport grad_check(const MLPParams& params,
                           const std::vector<Example>& sample, double step,
                           double tolerance, const GradFn& analytic) {
  if (step <= 0.0) throw ConfigError("finite-difference step must be positive");

  Gradients grads;
  grads.init_shapes(params);
  if (analytic) {
    analytic(params, sample, grads);
  } else {
    ForwardCache cache;
    for (const auto& ex : sample) {
      forward(params, ex.window, &cache);
      backward(params, ex.window, ex.gold, cache, grads);
    }
  }

  MLPParams probe = params;
  GradCheckReport report;
  report.step = step;
  report.tolerance = tolerance;

  auto check_tensor = [&](const std::string& name, std::vector<double>& theta,
                          const std::vector<double>& analytic_grad) {
    GradCheckTensor tr;
    tr.name = name;
    for (size_t i : pick_coords(theta.size(), 20)) {
      const double saved = theta[i];
      theta[i] = saved + step;
      const double up = total_loss(probe, sample);
      theta[i] = saved - step;
      const double down = total_loss(probe, sample);
      theta[i] = saved;
      const double fd = (up - down) / (2.0 * step);
      tr.max_rel_error = std::max(tr.max_rel_error, rel_error(fd, analytic_grad[i]));
    }
    tr.pass = tr.max_rel_error < tolerance;
    report.tensors.push_back(tr);
    report.pass = report.pass && tr.pass;
  };

  for (size_t l = 0; l < probe.hidden.size(); ++l) {
    check_tensor("hidden" + std::to_string(l) + ".W", probe.hidden[l].W,
                 grads.hidden[l].W);
    check_tensor("hidden" + std::to_string(l) + ".b", probe.hidden[l].b,
                 grads.hidden[l].b);
  }
  check_tensor("output.W", probe.output.W, grads.output.W);
  check_tensor("output.b", probe.output.b, grads.output.b);

  // Embedding coordinates are meaningful only on rows the sample touches;
  // other rows have exactly zero gradient on both routes.
  {
    GradCheckTensor tr;
    tr.name = "embedding";
    std::vector<std::pair<int, size_t>> candidates;  // (row, column)
    for (const auto& [row, g] : grads.embedding_rows) {
      for (size_t i = 0; i < g.size(); ++i) candidates.emplace_back(row, i);
    }
    for (size_t k : pick_coords(candidates.size(), 20)) {
      const auto [row, col] = candidates[k];
      double* cell = probe.embedding.row(row) + col;
      const double saved = *cell;
      *cell = saved + step;
      const double up = total_loss(probe, sample);
      *cell = saved - step;
      const double down = total_loss(probe, sample);
      *cell = saved;
      const double fd = (up - down) / (2.0 * step);
      const double an = grads.embedding_rows.at(row)[col];
      tr.max_rel_error = std::max(tr.max_rel_error, rel_error(fd, an));
    }
    tr.pass = tr.max_rel_error < tolerance;
    report.tensors.push_back(tr);
    report.pass = report.pass && tr.pass;
  }

  return report;
}

}  // namespace etrig
