#ifndef ETRIG_DECODER_HPP
#define ETRIG_DECODER_HPP

#include <array>
#include <string>
#include <vector>

#include "etrig/corpus.hpp"
#include "etrig/emission.hpp"

namespace etrig {

// Tag-bigram model combined with emissions at decode time. Entries are
// natural-log probabilities; forbidden cells are -inf.
struct TransitionModel {
  std::array<double, 3> start{};
  std::array<std::array<double, 3>, 3> trans{};  // trans[i][j] = log p(j | i)
  double lambda_t = 1.0;  // weight on start+transition scores
  bool constrained = true;

  void validate() const;  // row normalization and constraint cells
};

// Smoothed bigram MLE over training tag sequences:
//   p(j|i) = (count(i->j) + alpha) / (count(i->.) + alpha * |admissible(i)|)
// When `constrained`, start[I] and trans[O][I] are forced to -inf before
// normalization.
TransitionModel estimate_transitions(const std::vector<std::vector<Tag>>& sequences,
                                     double alpha, bool constrained);

struct DecodeResult {
  std::vector<Tag> tags;
  double score = 0.0;
};

// Argmax tag sequence under
//   lambda_t*start[y1] + sum_t em[t][yt] + lambda_t*sum_{t>=2} trans[y_{t-1}][y_t].
// Ties are broken by preferring the lower tag code at each backtrack step.
// Throws Error when every path scores -inf.
DecodeResult viterbi(const EmissionMatrix& emissions, const TransitionModel& tm);

// Brute-force maximum over all 3^T sequences with the same scoring function
// and tie-break as viterbi. Test oracle; refuses T > 12.
DecodeResult exhaustive_decode(const EmissionMatrix& emissions,
                               const TransitionModel& tm);

// Transition text file: line 1 holds the three start log-probs, lines 2-4 the
// rows of the 3x3 log matrix. The token `-inf` is accepted and written.
TransitionModel read_transition_file(const std::string& path);
void write_transition_file(const TransitionModel& tm, const std::string& path);

}  // namespace etrig

#endif  // ETRIG_DECODER_HPP
