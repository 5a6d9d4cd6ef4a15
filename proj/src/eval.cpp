#include "etrig/eval.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "etrig/errors.hpp"

namespace etrig {

double f1_from_pr(double precision, double recall) {
  const double pr = precision + recall;
  return pr > 0.0 ? 2.0 * precision * recall / pr : 0.0;
}

Score Score::from_counts(uint64_t tp, uint64_t fp, uint64_t fn) {
  Score s;
  s.tp = tp;
  s.fp = fp;
  s.fn = fn;
  const double dtp = static_cast<double>(tp);
  s.precision = tp + fp > 0 ? 100.0 * dtp / static_cast<double>(tp + fp) : 0.0;
  s.recall = tp + fn > 0 ? 100.0 * dtp / static_cast<double>(tp + fn) : 0.0;
  s.f1 = f1_from_pr(s.precision, s.recall);
  return s;
}

Score score_spans(const std::vector<std::vector<TriggerSpan>>& pred,
                  const std::vector<std::vector<TriggerSpan>>& gold) {
  if (pred.size() != gold.size()) {
    throw ValidationError("prediction/gold sentence counts differ (" +
                          std::to_string(pred.size()) + " vs " +
                          std::to_string(gold.size()) + ")");
  }
  uint64_t tp = 0, fp = 0, fn = 0;
  for (size_t s = 0; s < pred.size(); ++s) {
    std::map<std::pair<int, int>, uint64_t> remaining;
    for (const auto& g : gold[s]) remaining[{g.start, g.length}]++;
    for (const auto& p : pred[s]) {
      auto it = remaining.find({p.start, p.length});
      if (it != remaining.end() && it->second > 0) {
        it->second--;
        ++tp;
      } else {
        ++fp;
      }
    }
    for (const auto& kv : remaining) fn += kv.second;
  }
  return Score::from_counts(tp, fp, fn);
}

std::string format_pct(double value) {
  // printf would round half-to-even; the report format rounds half-up.
  double scaled = std::floor(value * 100.0 + 0.5) / 100.0;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", scaled);
  return buf;
}

std::string score_report(const Score& score, const std::string& label) {
  return label + "  R=" + format_pct(score.recall) + " P=" +
         format_pct(score.precision) + " F1=" + format_pct(score.f1);
}

}  // namespace etrig
