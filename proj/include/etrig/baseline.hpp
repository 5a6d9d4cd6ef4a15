#ifndef ETRIG_BASELINE_HPP
#define ETRIG_BASELINE_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "etrig/corpus.hpp"
#include "etrig/emission.hpp"

namespace etrig {

// Lexical feature templates around position t: unigrams U-w..U+w and
// bigrams B-w..B+(w-1); out-of-bounds slots yield the literal <PAD> token.
std::vector<std::string> extract_features(const std::vector<std::string>& chars,
                                          int t, int w);

struct MaxEntConfig {
  int window_radius = 2;
  double lr = 0.5;
  int epochs = 30;
  double l2 = 1e-6;
  uint64_t seed = 1;

  void validate() const;
};

// Per-position multinomial logistic regression over the lexical templates.
// Features unseen at training time are dropped at prediction time.
struct MaxEntModel {
  std::vector<std::string> feature_names;           // id order
  std::unordered_map<std::string, int> feature_ids;
  std::vector<double> weights;                      // F x 3, row-major
  MaxEntConfig config;
  std::vector<double> epoch_losses;  // accepted epochs, non-increasing

  int num_features() const { return static_cast<int>(feature_names.size()); }
  int feature_id(const std::string& name) const;  // -1 when unseen
};

// SGD on per-position NLL with L2, shuffled each epoch. An epoch whose mean
// loss increases is rolled back and retried with the learning rate halved.
MaxEntModel maxent_train(const std::vector<TaggedSentence>& train,
                         const MaxEntConfig& config);

std::array<double, 3> maxent_predict(const MaxEntModel& model,
                                     const std::vector<std::string>& chars,
                                     int t);

EmissionMatrix maxent_emissions(const MaxEntModel& model,
                                const std::vector<std::string>& chars);

}  // namespace etrig

#endif  // ETRIG_BASELINE_HPP
