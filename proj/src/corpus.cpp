#include "etrig/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "etrig/errors.hpp"
#include "etrig/rng.hpp"
#include "etrig/utf8.hpp"

namespace etrig {

Tag tag_from_string(const std::string& s) {
  if (s == "B") return Tag::B;
  if (s == "I") return Tag::I;
  if (s == "O") return Tag::O;
  throw ParseError("unknown tag '" + s + "'");
}

const char* tag_to_string(Tag t) {
  switch (t) {
    case Tag::B: return "B";
    case Tag::I: return "I";
    case Tag::O: return "O";
  }
  throw Error("corrupt tag value");
}

int first_bio_violation(const std::vector<Tag>& tags) {
  for (size_t i = 0; i < tags.size(); ++i) {
    if (tags[i] == Tag::I && (i == 0 || tags[i - 1] == Tag::O)) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

void validate_sentence(const TaggedSentence& s, const std::string& where) {
  const std::string at = where.empty() ? "" : " (" + where + ")";
  if (s.chars.empty()) {
    throw ValidationError("empty sentence" + at);
  }
  if (s.chars.size() != s.tags.size()) {
    throw ValidationError("character/tag length mismatch" + at);
  }
  int bad = first_bio_violation(s.tags);
  if (bad >= 0) {
    if (bad == 0) {
      throw ValidationError("I at sentence start" + at);
    }
    throw ValidationError("I after O at position " + std::to_string(bad) + at);
  }
}

std::vector<TriggerSpan> tags_to_spans(const std::vector<Tag>& tags) {
  int bad = first_bio_violation(tags);
  if (bad >= 0) {
    throw ValidationError("BIO-invalid tag sequence at position " +
                          std::to_string(bad));
  }
  std::vector<TriggerSpan> spans;
  for (size_t i = 0; i < tags.size(); ++i) {
    if (tags[i] == Tag::B) {
      spans.push_back({static_cast<int>(i), 1});
    } else if (tags[i] == Tag::I) {
      spans.back().length++;
    }
  }
  return spans;
}

std::vector<Tag> spans_to_tags(std::vector<TriggerSpan> spans, int len) {
  std::sort(spans.begin(), spans.end());
  int prev_end = 0;
  for (const auto& sp : spans) {
    if (sp.length < 1 || sp.start < 0 || sp.start + sp.length > len) {
      throw ValidationError("span (" + std::to_string(sp.start) + "," +
                            std::to_string(sp.length) + ") out of range for length " +
                            std::to_string(len));
    }
    if (sp.start < prev_end) {
      throw ValidationError("overlapping spans at offset " +
                            std::to_string(sp.start));
    }
    prev_end = sp.start + sp.length;
  }
  std::vector<Tag> tags(len, Tag::O);
  for (const auto& sp : spans) {
    tags[sp.start] = Tag::B;
    for (int i = 1; i < sp.length; ++i) tags[sp.start + i] = Tag::I;
  }
  return tags;
}

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

Vocabulary::Vocabulary() {
  list_ = {kPadToken, kUnkToken};
  map_ = {{kPadToken, kPad}, {kUnkToken, kUnk}};
  counts_ = {0, 0};
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& sequences,
                             int min_count) {
  if (min_count < 1) throw ConfigError("min_count must be >= 1");
  struct Entry {
    uint64_t count = 0;
    uint64_t first = 0;
  };
  std::unordered_map<std::string, Entry> freq;
  uint64_t position = 0;
  for (const auto& seq : sequences) {
    for (const auto& tok : seq) {
      auto [it, inserted] = freq.try_emplace(tok);
      if (inserted) it->second.first = position;
      it->second.count++;
      ++position;
    }
  }
  std::vector<std::pair<std::string, Entry>> entries;
  entries.reserve(freq.size());
  for (auto& kv : freq) {
    if (kv.second.count >= static_cast<uint64_t>(min_count)) {
      entries.emplace_back(kv.first, kv.second);
    }
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second.count != b.second.count) return a.second.count > b.second.count;
    return a.second.first < b.second.first;
  });

  Vocabulary v;
  v.min_count_ = min_count;
  for (auto& [tok, entry] : entries) {
    v.map_.emplace(tok, static_cast<int>(v.list_.size()));
    v.list_.push_back(tok);
    v.counts_.push_back(entry.count);
  }
  return v;
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens,
                                   int min_count) {
  if (tokens.size() < 2 || tokens[0] != kPadToken || tokens[1] != kUnkToken) {
    throw FormatError("token list must start with the reserved PAD/UNK entries");
  }
  Vocabulary v;
  v.min_count_ = min_count;
  for (size_t i = 2; i < tokens.size(); ++i) {
    auto [it, inserted] = v.map_.emplace(tokens[i], static_cast<int>(i));
    if (!inserted) throw FormatError("duplicate vocabulary token '" + tokens[i] + "'");
    v.list_.push_back(tokens[i]);
    v.counts_.push_back(0);
  }
  return v;
}

int Vocabulary::index(const std::string& token) const {
  auto it = map_.find(token);
  return it == map_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int index) const {
  if (index < 0 || index >= size()) {
    throw Error("vocabulary index " + std::to_string(index) + " out of range");
  }
  return list_[index];
}

bool Vocabulary::contains(const std::string& token) const {
  return map_.count(token) > 0;
}

std::vector<int> encode(const std::vector<std::string>& chars,
                        const Vocabulary& vocab) {
  std::vector<int> out;
  out.reserve(chars.size());
  for (const auto& c : chars) out.push_back(vocab.index(c));
  return out;
}

// ---------------------------------------------------------------------------
// Windows
// ---------------------------------------------------------------------------

Window window_at(const std::vector<int>& indices, int position, int radius) {
  if (radius < 1) throw ConfigError("window radius must be >= 1");
  Window w;
  w.center = position;
  w.radius = radius;
  w.token_indices.resize(2 * radius + 1, Vocabulary::kPad);
  const int n = static_cast<int>(indices.size());
  for (int off = -radius; off <= radius; ++off) {
    int t = position + off;
    if (t >= 0 && t < n) w.token_indices[off + radius] = indices[t];
  }
  return w;
}

std::vector<Window> windows(const std::vector<int>& indices, int radius) {
  std::vector<Window> out;
  out.reserve(indices.size());
  for (size_t t = 0; t < indices.size(); ++t) {
    out.push_back(window_at(indices, static_cast<int>(t), radius));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Labeled corpus format
// ---------------------------------------------------------------------------

std::vector<TaggedSentence> parse_corpus(std::istream& in) {
  std::vector<TaggedSentence> sentences;
  TaggedSentence current;
  std::string line;
  size_t line_no = 0;

  auto flush = [&]() {
    if (current.chars.empty()) return;
    validate_sentence(current, "sentence " + std::to_string(sentences.size() + 1));
    sentences.push_back(std::move(current));
    current = {};
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (current.chars.empty()) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": blank line without a preceding sentence");
      }
      flush();
      continue;
    }
    size_t tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected <char><TAB><tag>");
    }
    std::string ch = line.substr(0, tab);
    std::string tag = line.substr(tab + 1);
    if (utf8_length(ch) != 1) {
      throw ParseError("line " + std::to_string(line_no) +
                       ": character field must hold exactly one unicode scalar");
    }
    Tag t;
    try {
      t = tag_from_string(tag);
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    current.chars.push_back(std::move(ch));
    current.tags.push_back(t);
  }
  flush();
  return sentences;
}

std::vector<TaggedSentence> parse_corpus_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus file: " + path);
  return parse_corpus(in);
}

void serialize_corpus(const std::vector<TaggedSentence>& sentences,
                      std::ostream& out) {
  for (size_t s = 0; s < sentences.size(); ++s) {
    if (s > 0) out << '\n';
    const auto& sent = sentences[s];
    for (size_t i = 0; i < sent.size(); ++i) {
      out << sent.chars[i] << '\t' << tag_to_string(sent.tags[i]) << '\n';
    }
  }
}

void write_corpus_file(const std::vector<TaggedSentence>& sentences,
                       const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write corpus file: " + path);
  serialize_corpus(sentences, out);
  if (!out) throw IoError("write failed: " + path);
}

std::vector<std::string> read_raw_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open text file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

// ---------------------------------------------------------------------------
// Synthetic generator
// ---------------------------------------------------------------------------

namespace {

// Disjoint code-point blocks inside the CJK unified range.
constexpr char32_t kBackgroundBase = 0x4E00;
constexpr char32_t kExtraBase = 0x5E00;
constexpr char32_t kTriggerBase = 0x6E00;
constexpr char32_t kCueBase = 0x7E00;
constexpr int kMaxBlock = 0x1000;

}  // namespace

void GenConfig::validate() const {
  if (background_alphabet < 1 || background_alphabet > kMaxBlock) {
    throw ConfigError("background_alphabet out of range [1, 4096]");
  }
  if (trigger_alphabet < 1 || trigger_alphabet > kMaxBlock) {
    throw ConfigError("trigger_alphabet out of range [1, 4096]");
  }
  if (unlabeled_extra_alphabet < 0 || unlabeled_extra_alphabet > kMaxBlock) {
    throw ConfigError("unlabeled_extra_alphabet out of range [0, 4096]");
  }
  if (cue_count < 1 || cue_count > kMaxBlock) {
    throw ConfigError("cue_count out of range [1, 4096]");
  }
  if (lexicon_size < 1) throw ConfigError("lexicon must not be empty");
  if (trigger_min_len < 1 || trigger_max_len < trigger_min_len) {
    throw ConfigError("bad trigger length range");
  }
  if (len_min < 1 || len_max < len_min) throw ConfigError("bad sentence length range");
  if (trigger_max_len > len_min) {
    throw ConfigError("trigger_max_len must not exceed len_min");
  }
  if (cue_prob < 0.0 || cue_prob > 1.0) throw ConfigError("cue_prob outside [0,1]");
  if (trigger_prob < 0.0 || trigger_prob > 1.0) {
    throw ConfigError("trigger_prob outside [0,1]");
  }
  if (adjacent_trigger_prob < 0.0 || adjacent_trigger_prob > 1.0) {
    throw ConfigError("adjacent_trigger_prob outside [0,1]");
  }
  if (adjacent_trigger_prob > 0.0 && 2 * trigger_max_len > len_min) {
    throw ConfigError("adjacent triggers need 2*trigger_max_len <= len_min");
  }
  if (labeled_count < 0 || unlabeled_count < 0) {
    throw ConfigError("sentence counts must be >= 0");
  }
}

GenConfig parse_gen_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open generator config: " + path);
  GenConfig cfg;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    auto b = line.find_first_not_of(" \t");
    auto e = line.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    line = line.substr(b, e - b + 1);
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("generator config line " + std::to_string(line_no) +
                       ": expected key=value");
    }
    auto trim = [](std::string s) {
      auto b2 = s.find_first_not_of(" \t");
      auto e2 = s.find_last_not_of(" \t");
      return b2 == std::string::npos ? std::string() : s.substr(b2, e2 - b2 + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    auto as_int = [&]() { return std::stoi(value); };
    auto as_double = [&]() { return std::stod(value); };
    try {
      if (key == "background_alphabet") cfg.background_alphabet = as_int();
      else if (key == "trigger_alphabet") cfg.trigger_alphabet = as_int();
      else if (key == "lexicon_size") cfg.lexicon_size = as_int();
      else if (key == "trigger_min_len") cfg.trigger_min_len = as_int();
      else if (key == "trigger_max_len") cfg.trigger_max_len = as_int();
      else if (key == "cue_count") cfg.cue_count = as_int();
      else if (key == "cue_prob") cfg.cue_prob = as_double();
      else if (key == "len_min") cfg.len_min = as_int();
      else if (key == "len_max") cfg.len_max = as_int();
      else if (key == "trigger_prob") cfg.trigger_prob = as_double();
      else if (key == "adjacent_trigger_prob") cfg.adjacent_trigger_prob = as_double();
      else if (key == "labeled_count") cfg.labeled_count = as_int();
      else if (key == "unlabeled_count") cfg.unlabeled_count = as_int();
      else if (key == "unlabeled_extra_alphabet") cfg.unlabeled_extra_alphabet = as_int();
      else throw ParseError("generator config line " + std::to_string(line_no) +
                            ": unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw ParseError("generator config line " + std::to_string(line_no) +
                       ": bad value for '" + key + "'");
    }
  }
  return cfg;
}

namespace {

struct CharSets {
  std::vector<std::string> background;  // labeled distribution
  std::vector<std::string> background_ext;  // unlabeled distribution
  std::vector<std::string> trigger;
  std::vector<std::string> cue;
};

CharSets make_char_sets(const GenConfig& cfg) {
  CharSets s;
  for (int i = 0; i < cfg.background_alphabet; ++i) {
    s.background.push_back(utf8_encode(kBackgroundBase + i));
  }
  s.background_ext = s.background;
  for (int i = 0; i < cfg.unlabeled_extra_alphabet; ++i) {
    s.background_ext.push_back(utf8_encode(kExtraBase + i));
  }
  for (int i = 0; i < cfg.trigger_alphabet; ++i) {
    s.trigger.push_back(utf8_encode(kTriggerBase + i));
  }
  for (int i = 0; i < cfg.cue_count; ++i) {
    s.cue.push_back(utf8_encode(kCueBase + i));
  }
  return s;
}

std::vector<std::vector<std::string>> draw_lexicon(const GenConfig& cfg,
                                                   const CharSets& sets, Rng& rng) {
  std::vector<std::vector<std::string>> lexicon;
  std::vector<std::string> joined;
  const int span = cfg.trigger_max_len - cfg.trigger_min_len + 1;
  int attempts = 0;
  while (static_cast<int>(lexicon.size()) < cfg.lexicon_size) {
    if (++attempts > cfg.lexicon_size * 1000) {
      throw ConfigError("cannot draw a distinct trigger lexicon; "
                        "alphabet too small for the requested lexicon size");
    }
    int len = cfg.trigger_min_len + static_cast<int>(rng.below(span));
    std::vector<std::string> word;
    std::string key;
    for (int i = 0; i < len; ++i) {
      const std::string& c = sets.trigger[rng.below(sets.trigger.size())];
      word.push_back(c);
      key += c;
    }
    if (std::find(joined.begin(), joined.end(), key) != joined.end()) continue;
    joined.push_back(key);
    lexicon.push_back(std::move(word));
  }
  return lexicon;
}

TaggedSentence draw_sentence(const GenConfig& cfg, const CharSets& sets,
                             const std::vector<std::vector<std::string>>& lexicon,
                             const std::vector<std::string>& background, Rng& rng) {
  const int len = cfg.len_min + static_cast<int>(rng.below(cfg.len_max - cfg.len_min + 1));
  TaggedSentence sent;
  sent.chars.reserve(len);
  sent.tags.assign(len, Tag::O);
  for (int i = 0; i < len; ++i) {
    sent.chars.push_back(background[rng.below(background.size())]);
  }
  if (rng.real() < cfg.trigger_prob) {
    const auto& word = lexicon[rng.below(lexicon.size())];
    const std::vector<std::string>* second = nullptr;
    if (cfg.adjacent_trigger_prob > 0.0 &&
        rng.real() < cfg.adjacent_trigger_prob) {
      second = &lexicon[rng.below(lexicon.size())];
    }
    const int wl = static_cast<int>(word.size());
    const int wl2 = second ? static_cast<int>(second->size()) : 0;
    const int pos = static_cast<int>(rng.below(len - wl - wl2 + 1));
    for (int i = 0; i < wl; ++i) {
      sent.chars[pos + i] = word[i];
      sent.tags[pos + i] = i == 0 ? Tag::B : Tag::I;
    }
    for (int i = 0; i < wl2; ++i) {
      sent.chars[pos + wl + i] = (*second)[i];
      sent.tags[pos + wl + i] = i == 0 ? Tag::B : Tag::I;
    }
    if (pos >= 1 && rng.real() < cfg.cue_prob) {
      sent.chars[pos - 1] = sets.cue[rng.below(sets.cue.size())];
    }
  }
  return sent;
}

}  // namespace

SyntheticCorpus generate_synthetic(const GenConfig& config, uint64_t seed) {
  config.validate();
  Rng rng(seed);
  CharSets sets = make_char_sets(config);
  auto lexicon = draw_lexicon(config, sets, rng);

  SyntheticCorpus corpus;
  corpus.labeled.reserve(config.labeled_count);
  for (int i = 0; i < config.labeled_count; ++i) {
    corpus.labeled.push_back(
        draw_sentence(config, sets, lexicon, sets.background, rng));
  }
  corpus.unlabeled.reserve(config.unlabeled_count);
  for (int i = 0; i < config.unlabeled_count; ++i) {
    TaggedSentence s = draw_sentence(config, sets, lexicon, sets.background_ext, rng);
    std::string joined;
    for (const auto& c : s.chars) joined += c;
    corpus.unlabeled.push_back(std::move(joined));
  }
  return corpus;
}

}  // namespace etrig
