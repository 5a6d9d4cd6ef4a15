#ifndef ETRIG_EVAL_HPP
#define ETRIG_EVAL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "etrig/corpus.hpp"

namespace etrig {

// Exact-match span counts with derived percentage metrics.
struct Score {
  uint64_t tp = 0;
  uint64_t fp = 0;
  uint64_t fn = 0;
  double precision = 0.0;  // percentages in [0, 100]
  double recall = 0.0;
  double f1 = 0.0;

  static Score from_counts(uint64_t tp, uint64_t fp, uint64_t fn);
};

// Harmonic mean of precision and recall percentages; 0 when both are 0.
double f1_from_pr(double precision, double recall);

// A prediction is a true positive iff a gold span in the same sentence has
// identical (start, length); each gold span matches at most one prediction.
Score score_spans(const std::vector<std::vector<TriggerSpan>>& pred,
                  const std::vector<std::vector<TriggerSpan>>& gold);

// `label  R=<r> P=<p> F1=<f>` with two decimals, rounded half-up.
std::string score_report(const Score& score, const std::string& label);

// Half-up rounding to two decimals, rendered as text.
std::string format_pct(double value);

}  // namespace etrig

#endif  // ETRIG_EVAL_HPP
