#include "etrig/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "etrig/errors.hpp"
#include "etrig/network.hpp"
#include "etrig/rng.hpp"

namespace etrig {

void MaxEntConfig::validate() const {
  if (window_radius < 1) throw ConfigError("feature window radius must be >= 1");
  if (lr <= 0.0) throw ConfigError("learning rate must be positive");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (l2 < 0.0) throw ConfigError("l2 must be >= 0");
}

std::vector<std::string> extract_features(const std::vector<std::string>& chars,
                                          int t, int w) {
  if (w < 1) throw ConfigError("feature window radius must be >= 1");
  const int n = static_cast<int>(chars.size());
  auto at = [&](int i) -> const std::string& {
    static const std::string pad = "<PAD>";
    return (i < 0 || i >= n) ? pad : chars[i];
  };
  auto offset_label = [](int off) {
    if (off == 0) return std::string("0");
    return off > 0 ? "+" + std::to_string(off) : std::to_string(off);
  };

  std::vector<std::string> feats;
  feats.reserve(4 * w + 1);
  for (int off = -w; off <= w; ++off) {
    feats.push_back("U" + offset_label(off) + "=" + at(t + off));
  }
  for (int off = -w; off < w; ++off) {
    feats.push_back("B" + offset_label(off) + "=" + at(t + off) + at(t + off + 1));
  }
  return feats;
}

int MaxEntModel::feature_id(const std::string& name) const {
  auto it = feature_ids.find(name);
  return it == feature_ids.end() ? -1 : it->second;
}

namespace {

std::array<double, 3> predict_ids(const MaxEntModel& model,
                                  const std::vector<int>& ids) {
  std::array<double, 3> logits{0.0, 0.0, 0.0};
  for (int f : ids) {
    const double* w = model.weights.data() + static_cast<size_t>(f) * 3;
    for (int c = 0; c < 3; ++c) logits[c] += w[c];
  }
  return softmax3(logits);
}

}  // namespace

std::array<double, 3> maxent_predict(const MaxEntModel& model,
                                     const std::vector<std::string>& chars,
                                     int t) {
  std::vector<int> ids;
  for (const auto& f : extract_features(chars, t, model.config.window_radius)) {
    const int id = model.feature_id(f);
    if (id >= 0) ids.push_back(id);  // unseen features are dropped
  }
  return predict_ids(model, ids);
}

EmissionMatrix maxent_emissions(const MaxEntModel& model,
                                const std::vector<std::string>& chars) {
  EmissionMatrix em;
  em.rows.reserve(chars.size());
  for (size_t t = 0; t < chars.size(); ++t) {
    const auto p = maxent_predict(model, chars, static_cast<int>(t));
    std::array<double, 3> row;
    for (int c = 0; c < 3; ++c) row[c] = std::log(p[c]);
    em.rows.push_back(row);
  }
  return em;
}

MaxEntModel maxent_train(const std::vector<TaggedSentence>& train,
                         const MaxEntConfig& config) {
  config.validate();
  if (train.empty()) throw Error("training set is empty");

  MaxEntModel model;
  model.config = config;

  // Pre-extract features once; the dictionary is frozen over the train set.
  struct Position {
    std::vector<int> ids;
    Tag gold;
  };
  std::vector<Position> positions;
  for (const auto& sent : train) {
    validate_sentence(sent);
    for (size_t t = 0; t < sent.size(); ++t) {
      Position p;
      p.gold = sent.tags[t];
      for (const auto& f :
           extract_features(sent.chars, static_cast<int>(t), config.window_radius)) {
        auto [it, inserted] =
            model.feature_ids.try_emplace(f, model.num_features());
        if (inserted) model.feature_names.push_back(f);
        p.ids.push_back(it->second);
      }
      positions.push_back(std::move(p));
    }
  }
  model.weights.assign(static_cast<size_t>(model.num_features()) * 3, 0.0);

  std::vector<size_t> order(positions.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  Rng rng(config.seed);
  double lr = config.lr;
  double prev_loss = std::numeric_limits<double>::infinity();
  std::vector<double> snapshot;

  int epoch = 0;
  while (epoch < config.epochs) {
    if (lr < 1e-12) break;
    snapshot = model.weights;
    rng.shuffle(order);

    double loss_sum = 0.0;
    for (size_t k : order) {
      const Position& p = positions[k];
      const auto probs = predict_ids(model, p.ids);
      loss_sum += nll_loss(probs, p.gold);
      for (int f : p.ids) {
        double* w = model.weights.data() + static_cast<size_t>(f) * 3;
        for (int c = 0; c < 3; ++c) {
          const double g = probs[c] - (c == static_cast<int>(p.gold) ? 1.0 : 0.0);
          w[c] -= lr * (g + config.l2 * w[c]);
        }
      }
    }
    const double mean_loss = loss_sum / static_cast<double>(positions.size());

    if (mean_loss > prev_loss) {
      // Reject the epoch: restore the weights and retry at half the rate.
      model.weights = snapshot;
      lr *= 0.5;
      continue;
    }
    prev_loss = mean_loss;
    model.epoch_losses.push_back(mean_loss);
    ++epoch;
  }
  return model;
}

}  // namespace etrig
