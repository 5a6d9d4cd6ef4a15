#ifndef ETRIG_CORPUS_HPP
#define ETRIG_CORPUS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace etrig {

// BIO tag. Integer codes are part of the on-disk and in-memory contracts
// and must never change.
enum class Tag : int { B = 0, I = 1, O = 2 };

constexpr int kNumTags = 3;

Tag tag_from_string(const std::string& s);  // throws ParseError on unknown tag
const char* tag_to_string(Tag t);

// One character sequence with its aligned BIO tags.
struct TaggedSentence {
  std::vector<std::string> chars;  // one unicode scalar per entry
  std::vector<Tag> tags;

  size_t size() const { return chars.size(); }
  bool operator==(const TaggedSentence&) const = default;
};

// Rejects length mismatch, empty sentences and BIO-invalid tag sequences.
// `where` is used to identify the sentence in error messages.
void validate_sentence(const TaggedSentence& s, const std::string& where = "");

// Checks I-never-at-start / I-never-after-O; returns the offending position
// or -1 when the sequence is valid.
int first_bio_violation(const std::vector<Tag>& tags);

// A contiguous trigger occurrence, addressed by character offset.
struct TriggerSpan {
  int start = 0;
  int length = 1;

  bool operator==(const TriggerSpan&) const = default;
  bool operator<(const TriggerSpan& o) const {
    return start != o.start ? start < o.start : length < o.length;
  }
};

std::vector<TriggerSpan> tags_to_spans(const std::vector<Tag>& tags);
std::vector<Tag> spans_to_tags(std::vector<TriggerSpan> spans, int len);

// Token dictionary with reserved PAD=0 / UNK=1 rows. Tokens are assigned
// indices 2,3,... by descending frequency, ties broken by first occurrence.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr const char* kPadToken = "<PAD>";
  static constexpr const char* kUnkToken = "<UNK>";

  Vocabulary();

  static Vocabulary build(const std::vector<std::vector<std::string>>& sequences,
                          int min_count);
  // Rebuilds a vocabulary from an index-ordered token list (indices 0 and 1
  // must be the reserved tokens). Used when loading persisted models.
  static Vocabulary from_tokens(const std::vector<std::string>& tokens,
                                int min_count);

  int index(const std::string& token) const;  // kUnk when absent
  const std::string& token(int index) const;
  bool contains(const std::string& token) const;
  int size() const { return static_cast<int>(list_.size()); }
  int min_count() const { return min_count_; }

  // Build-time frequency per index (0 for the reserved rows, and for
  // vocabularies restored from disk).
  const std::vector<uint64_t>& counts() const { return counts_; }

  const std::vector<std::string>& tokens() const { return list_; }

  bool operator==(const Vocabulary& o) const {
    return list_ == o.list_ && min_count_ == o.min_count_;
  }

 private:
  std::unordered_map<std::string, int> map_;
  std::vector<std::string> list_;
  std::vector<uint64_t> counts_;
  int min_count_ = 1;
};

std::vector<int> encode(const std::vector<std::string>& chars,
                        const Vocabulary& vocab);

// Fixed-width context around one position; out-of-sentence slots hold PAD.
struct Window {
  int center = 0;
  int radius = 1;
  std::vector<int> token_indices;  // length 2*radius+1
};

std::vector<Window> windows(const std::vector<int>& indices, int radius);
Window window_at(const std::vector<int>& indices, int position, int radius);

// ---------------------------------------------------------------------------
// Labeled corpus format: one `<char><TAB><B|I|O>` line per character,
// sentences separated by exactly one blank line.
// ---------------------------------------------------------------------------

std::vector<TaggedSentence> parse_corpus(std::istream& in);
std::vector<TaggedSentence> parse_corpus_file(const std::string& path);
void serialize_corpus(const std::vector<TaggedSentence>& sentences,
                      std::ostream& out);
void write_corpus_file(const std::vector<TaggedSentence>& sentences,
                       const std::string& path);

// Unlabeled corpus: one sentence per line, characters are the line's
// unicode scalars.
std::vector<std::string> read_raw_lines(const std::string& path);

// ---------------------------------------------------------------------------
// Synthetic corpus generator. Sentences are background characters; most carry
// one trigger word drawn from a lexicon over a disjoint alphabet, usually
// preceded by a cue character. Labels mark exactly the inserted words.
// ---------------------------------------------------------------------------

struct GenConfig {
  int background_alphabet = 200;
  int trigger_alphabet = 60;
  int lexicon_size = 30;
  int trigger_min_len = 1;
  int trigger_max_len = 3;
  int cue_count = 10;
  double cue_prob = 0.9;
  int len_min = 8;
  int len_max = 30;
  double trigger_prob = 0.7;
  // When a sentence carries a trigger, probability that a second lexicon
  // word follows it back-to-back. Segmenting the pair takes character
  // identity, not just alphabet membership.
  double adjacent_trigger_prob = 0.0;
  int labeled_count = 0;
  int unlabeled_count = 0;
  // Extra background characters that only the unlabeled stream uses, so
  // pretraining sees contexts beyond the labeled vocabulary.
  int unlabeled_extra_alphabet = 40;

  void validate() const;  // throws ConfigError
};

GenConfig parse_gen_config(const std::string& path);  // key=value file

struct SyntheticCorpus {
  std::vector<TaggedSentence> labeled;
  std::vector<std::string> unlabeled;  // raw sentences, one string each
};

// Pure function of (config, seed).
SyntheticCorpus generate_synthetic(const GenConfig& config, uint64_t seed);

}  // namespace etrig

#endif  // ETRIG_CORPUS_HPP
