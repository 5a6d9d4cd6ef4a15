#include "etrig/decoder.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "etrig/errors.hpp"

namespace etrig {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp3(const std::array<double, 3>& v) {
  double m = std::max(v[0], std::max(v[1], v[2]));
  if (m == kNegInf) return kNegInf;
  return m + std::log(std::exp(v[0] - m) + std::exp(v[1] - m) + std::exp(v[2] - m));
}

bool admissible_start(int tag, bool constrained) {
  return !constrained || tag != static_cast<int>(Tag::I);
}

bool admissible_step(int from, int to, bool constrained) {
  return !constrained ||
         !(from == static_cast<int>(Tag::O) && to == static_cast<int>(Tag::I));
}

// lambda_t * x with the convention 0 * -inf = 0, so a zero interpolation
// weight really removes the transition scores instead of producing NaN.
double scaled(double weight, double x) {
  return weight == 0.0 ? 0.0 : weight * x;
}

}  // namespace

void TransitionModel::validate() const {
  for (int i = 0; i < 3; ++i) {
    if (std::isnan(start[i]) || start[i] > 0.0 + 1e-12 || start[i] == +INFINITY) {
      throw ValidationError("start log-probability out of range");
    }
    for (int j = 0; j < 3; ++j) {
      if (std::isnan(trans[i][j]) || trans[i][j] == +INFINITY) {
        throw ValidationError("transition entry is NaN or +inf");
      }
    }
  }
  if (constrained) {
    if (start[static_cast<int>(Tag::I)] != kNegInf) {
      throw ValidationError("constrained model requires start[I] = -inf");
    }
    if (trans[static_cast<int>(Tag::O)][static_cast<int>(Tag::I)] != kNegInf) {
      throw ValidationError("constrained model requires trans[O][I] = -inf");
    }
  }
  if (std::abs(logsumexp3(start)) > 1e-9) {
    throw ValidationError("start distribution is not normalized");
  }
  for (int i = 0; i < 3; ++i) {
    if (std::abs(logsumexp3(trans[i])) > 1e-9) {
      throw ValidationError("transition row " + std::string(tag_to_string(Tag(i))) +
                            " is not normalized");
    }
  }
}

TransitionModel estimate_transitions(const std::vector<std::vector<Tag>>& sequences,
                                     double alpha, bool constrained) {
  if (alpha < 0.0) throw ConfigError("smoothing alpha must be >= 0");

  std::array<uint64_t, 3> start_count{};
  std::array<std::array<uint64_t, 3>, 3> bigram{};
  for (const auto& tags : sequences) {
    if (tags.empty()) continue;
    start_count[static_cast<int>(tags[0])]++;
    for (size_t t = 1; t < tags.size(); ++t) {
      bigram[static_cast<int>(tags[t - 1])][static_cast<int>(tags[t])]++;
    }
  }

  TransitionModel tm;
  tm.constrained = constrained;

  uint64_t start_total = 0;
  int start_adm = 0;
  for (int j = 0; j < 3; ++j) {
    if (admissible_start(j, constrained)) {
      start_total += start_count[j];
      ++start_adm;
    }
  }
  for (int j = 0; j < 3; ++j) {
    if (!admissible_start(j, constrained)) {
      tm.start[j] = kNegInf;
      continue;
    }
    const double denom = static_cast<double>(start_total) + alpha * start_adm;
    if (denom <= 0.0) {
      throw Error("cannot estimate start distribution: no data and alpha = 0");
    }
    tm.start[j] = std::log((static_cast<double>(start_count[j]) + alpha) / denom);
  }

  for (int i = 0; i < 3; ++i) {
    uint64_t row_total = 0;
    int adm = 0;
    for (int j = 0; j < 3; ++j) {
      if (admissible_step(i, j, constrained)) {
        row_total += bigram[i][j];
        ++adm;
      }
    }
    for (int j = 0; j < 3; ++j) {
      if (!admissible_step(i, j, constrained)) {
        tm.trans[i][j] = kNegInf;
        continue;
      }
      const double denom = static_cast<double>(row_total) + alpha * adm;
      if (denom <= 0.0) {
        throw Error("cannot estimate transitions out of " +
                    std::string(tag_to_string(Tag(i))) + ": no data and alpha = 0");
      }
      tm.trans[i][j] = std::log((static_cast<double>(bigram[i][j]) + alpha) / denom);
    }
  }
  return tm;
}

DecodeResult viterbi(const EmissionMatrix& emissions, const TransitionModel& tm) {
  const size_t T = emissions.length();
  if (T == 0) throw Error("viterbi requires at least one position");

  std::array<double, 3> delta;
  for (int j = 0; j < 3; ++j) {
    delta[j] = scaled(tm.lambda_t, tm.start[j]) + emissions.rows[0][j];
  }
  std::vector<std::array<int, 3>> back(T, {0, 0, 0});

  for (size_t t = 1; t < T; ++t) {
    std::array<double, 3> next;
    for (int j = 0; j < 3; ++j) {
      double best = kNegInf;
      int arg = 0;
      for (int i = 0; i < 3; ++i) {
        const double s = delta[i] + scaled(tm.lambda_t, tm.trans[i][j]);
        if (s > best) {  // strict: the lowest i wins ties
          best = s;
          arg = i;
        }
      }
      next[j] = best + emissions.rows[t][j];
      back[t][j] = arg;
    }
    delta = next;
  }

  double best = kNegInf;
  int arg = 0;
  for (int j = 0; j < 3; ++j) {
    if (delta[j] > best) {
      best = delta[j];
      arg = j;
    }
  }
  if (best == kNegInf) {
    throw Error("no admissible tag path (all sequences score -inf)");
  }

  DecodeResult r;
  r.score = best;
  r.tags.resize(T);
  int state = arg;
  for (size_t t = T; t-- > 0;) {
    r.tags[t] = Tag(state);
    state = back[t][state];
  }
  return r;
}

DecodeResult exhaustive_decode(const EmissionMatrix& emissions,
                               const TransitionModel& tm) {
  const size_t T = emissions.length();
  if (T == 0) throw Error("exhaustive decode requires at least one position");
  if (T > 12) {
    throw Error("exhaustive decode refuses sentences longer than 12 positions");
  }

  // Viterbi's backtrack tie-break (lowest code at each step, starting from
  // the end) selects the colexicographically smallest optimal sequence, so
  // the brute force must compare candidates from the last position backward.
  auto colex_less = [](const std::vector<int>& a, const std::vector<int>& b) {
    for (size_t t = a.size(); t-- > 0;) {
      if (a[t] != b[t]) return a[t] < b[t];
    }
    return false;
  };

  std::vector<int> current(T, 0);
  std::vector<int> best_tags;
  double best = kNegInf;
  bool found = false;

  const uint64_t total = [&] {
    uint64_t n = 1;
    for (size_t i = 0; i < T; ++i) n *= 3;
    return n;
  }();

  for (uint64_t code = 0; code < total; ++code) {
    uint64_t c = code;
    for (size_t t = 0; t < T; ++t) {
      current[t] = static_cast<int>(c % 3);
      c /= 3;
    }
    double score = scaled(tm.lambda_t, tm.start[current[0]]) +
                   emissions.rows[0][current[0]];
    for (size_t t = 1; t < T; ++t) {
      score += scaled(tm.lambda_t, tm.trans[current[t - 1]][current[t]]) +
               emissions.rows[t][current[t]];
    }
    if (score == kNegInf) continue;
    if (!found || score > best ||
        (score == best && colex_less(current, best_tags))) {
      found = true;
      best = score;
      best_tags = current;
    }
  }
  if (!found) {
    throw Error("no admissible tag path (all sequences score -inf)");
  }

  DecodeResult r;
  r.score = best;
  r.tags.reserve(T);
  for (int v : best_tags) r.tags.push_back(Tag(v));
  return r;
}

// ---------------------------------------------------------------------------
// Transition file format
// ---------------------------------------------------------------------------

namespace {

double parse_logprob(const std::string& tok, const std::string& where) {
  if (tok == "-inf") return kNegInf;
  try {
    size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError("transition file: bad value '" + tok + "' in " + where);
  }
}

std::string format_logprob(double v) {
  if (v == kNegInf) return "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

TransitionModel read_transition_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open transition file: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::vector<std::string> toks;
    std::string tok;
    while (ls >> tok) toks.push_back(tok);
    if (!toks.empty()) rows.push_back(std::move(toks));
  }
  if (rows.size() != 4) {
    throw ParseError("transition file must hold 4 non-empty lines, found " +
                     std::to_string(rows.size()));
  }
  TransitionModel tm;
  for (size_t r = 0; r < 4; ++r) {
    if (rows[r].size() != 3) {
      throw ParseError("transition file line " + std::to_string(r + 1) +
                       " must hold 3 values");
    }
  }
  for (int j = 0; j < 3; ++j) tm.start[j] = parse_logprob(rows[0][j], "line 1");
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      tm.trans[i][j] = parse_logprob(rows[i + 1][j], "line " + std::to_string(i + 2));
    }
  }
  tm.constrained = tm.start[static_cast<int>(Tag::I)] == kNegInf &&
                   tm.trans[static_cast<int>(Tag::O)][static_cast<int>(Tag::I)] == kNegInf;
  return tm;
}

void write_transition_file(const TransitionModel& tm, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write transition file: " + path);
  out << format_logprob(tm.start[0]) << ' ' << format_logprob(tm.start[1]) << ' '
      << format_logprob(tm.start[2]) << '\n';
  for (int i = 0; i < 3; ++i) {
    out << format_logprob(tm.trans[i][0]) << ' ' << format_logprob(tm.trans[i][1])
        << ' ' << format_logprob(tm.trans[i][2]) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace etrig
