#ifndef ETRIG_EMISSION_HPP
#define ETRIG_EMISSION_HPP

#include <array>
#include <vector>

namespace etrig {

// Per-position log-probabilities over {B, I, O}. Produced by the taggers,
// consumed by the decoder. Rows of a well-formed matrix are normalized
// log-distributions (logsumexp(row) == 0 within 1e-9).
struct EmissionMatrix {
  std::vector<std::array<double, 3>> rows;

  size_t length() const { return rows.size(); }
};

}  // namespace etrig

#endif  // ETRIG_EMISSION_HPP
