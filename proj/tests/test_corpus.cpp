#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "etrig/corpus.hpp"
#include "etrig/errors.hpp"
#include "etrig/rng.hpp"
#include "etrig/utf8.hpp"
#include "testutil.hpp"

using namespace etrig;

TEST_CASE("parse_corpus reads one sentence") {
  std::istringstream in("\xe5\xa4\x8f\tB\n\xe8\xb4\xad\tI\n\xe7\xbd\x91\tO\n");
  auto sentences = parse_corpus(in);
  REQUIRE(sentences.size() == 1);
  CHECK(sentences[0].size() == 3);
  CHECK(sentences[0].tags == std::vector<Tag>{Tag::B, Tag::I, Tag::O});
  CHECK(sentences[0].chars[0] == "\xe5\xa4\x8f");
}

TEST_CASE("parse_corpus on empty input") {
  std::istringstream in("");
  CHECK(parse_corpus(in).empty());
}

TEST_CASE("parse_corpus rejects I at sentence start") {
  std::istringstream in("a\tI\n");
  CHECK_THROWS_WITH_AS(parse_corpus(in),
                       doctest::Contains("I at sentence start"), ValidationError);
}

TEST_CASE("parse_corpus rejects I after O") {
  std::istringstream in("a\tB\nb\tO\nc\tI\n");
  CHECK_THROWS_AS(parse_corpus(in), ValidationError);
}

TEST_CASE("parse_corpus reports malformed lines with their number") {
  SUBCASE("missing tab") {
    std::istringstream in("a\tB\nbO\n");
    CHECK_THROWS_WITH_AS(parse_corpus(in), doctest::Contains("line 2"), ParseError);
  }
  SUBCASE("unknown tag") {
    std::istringstream in("a\tX\n");
    CHECK_THROWS_WITH_AS(parse_corpus(in), doctest::Contains("unknown tag"),
                         ParseError);
  }
  SUBCASE("multi-character token") {
    std::istringstream in("ab\tB\n");
    CHECK_THROWS_AS(parse_corpus(in), ParseError);
  }
  SUBCASE("double blank line") {
    std::istringstream in("a\tB\n\n\nb\tO\n");
    CHECK_THROWS_WITH_AS(parse_corpus(in), doctest::Contains("line 3"), ParseError);
  }
}

TEST_CASE("corpus format round-trips through serialize/parse") {
  GenConfig cfg;
  cfg.labeled_count = 50;
  auto corpus = generate_synthetic(cfg, 7);
  std::ostringstream out;
  serialize_corpus(corpus.labeled, out);
  std::istringstream in(out.str());
  CHECK(parse_corpus(in) == corpus.labeled);
}

TEST_CASE("build_vocab ordering and min_count") {
  std::vector<std::vector<std::string>> seqs = {{"a", "b", "a"}};
  SUBCASE("min_count 1") {
    auto v = Vocabulary::build(seqs, 1);
    CHECK(v.size() == 4);
    CHECK(v.index("a") == 2);
    CHECK(v.index("b") == 3);
    CHECK(v.token(0) == "<PAD>");
    CHECK(v.token(1) == "<UNK>");
  }
  SUBCASE("min_count 2 drops b") {
    auto v = Vocabulary::build(seqs, 2);
    CHECK(v.size() == 3);
    CHECK(v.index("a") == 2);
    CHECK(v.index("b") == Vocabulary::kUnk);
  }
  SUBCASE("empty corpus keeps the reserved rows") {
    auto v = Vocabulary::build({}, 1);
    CHECK(v.size() == 2);
  }
  SUBCASE("frequency ties break by first occurrence") {
    auto v = Vocabulary::build({{"z", "y", "z", "y", "x"}}, 1);
    CHECK(v.index("z") == 2);
    CHECK(v.index("y") == 3);
    CHECK(v.index("x") == 4);
  }
}

TEST_CASE("encode maps unknown tokens to UNK") {
  auto v = Vocabulary::build({{"a"}}, 1);
  CHECK(encode({"a", "b"}, v) == std::vector<int>{2, 1});
  CHECK(encode({}, v).empty());
  CHECK(encode({"a", "a", "a"}, v) == std::vector<int>{2, 2, 2});
}

TEST_CASE("windows pad outside the sentence") {
  SUBCASE("length-1 sentence") {
    auto w = windows({5}, 2);
    REQUIRE(w.size() == 1);
    CHECK(w[0].token_indices == std::vector<int>{0, 0, 5, 0, 0});
  }
  SUBCASE("center of a length-5 sentence") {
    auto w = windows({2, 3, 4, 5, 6}, 2);
    CHECK(w[2].token_indices == std::vector<int>{2, 3, 4, 5, 6});
  }
  SUBCASE("start of a length-3 sentence") {
    auto w = windows({7, 8, 9}, 2);
    CHECK(w[0].token_indices == std::vector<int>{0, 0, 7, 8, 9});
  }
}

TEST_CASE("window center and PAD-count properties") {
  Rng rng(11);
  for (int round = 0; round < 200; ++round) {
    const int len = 1 + static_cast<int>(rng.below(12));
    const int radius = 1 + static_cast<int>(rng.below(4));
    std::vector<int> xs(len);
    for (auto& x : xs) x = 2 + static_cast<int>(rng.below(50));
    auto ws = windows(xs, radius);
    REQUIRE(ws.size() == static_cast<size_t>(len));
    for (int t = 0; t < len; ++t) {
      CHECK(ws[t].token_indices[radius] == xs[t]);
      int pads = 0;
      for (int idx : ws[t].token_indices) {
        if (idx == Vocabulary::kPad) ++pads;
      }
      const int expect = std::max(0, radius - t) +
                         std::max(0, radius - (len - 1 - t));
      CHECK(pads == expect);
    }
  }
}

TEST_CASE("tags_to_spans basics") {
  using T = Tag;
  CHECK(tags_to_spans({T::O, T::B, T::I, T::O}) ==
        std::vector<TriggerSpan>{{1, 2}});
  CHECK(tags_to_spans({T::O, T::O, T::O}).empty());
  CHECK(tags_to_spans({T::B, T::B, T::O}) ==
        std::vector<TriggerSpan>{{0, 1}, {1, 1}});
  CHECK_THROWS_AS(tags_to_spans({T::I}), ValidationError);
}

TEST_CASE("spans_to_tags basics") {
  using T = Tag;
  CHECK(spans_to_tags({{1, 2}}, 4) == std::vector<T>{T::O, T::B, T::I, T::O});
  CHECK(spans_to_tags({}, 3) == std::vector<T>{T::O, T::O, T::O});
  CHECK(spans_to_tags({{0, 1}, {1, 1}}, 2) == std::vector<T>{T::B, T::B});
  CHECK_THROWS_AS(spans_to_tags({{0, 2}, {1, 1}}, 4), ValidationError);
  CHECK_THROWS_AS(spans_to_tags({{3, 2}}, 4), ValidationError);
  CHECK_THROWS_AS(spans_to_tags({{-1, 1}}, 4), ValidationError);
}

TEST_CASE("tags<->spans round-trips on random valid inputs") {
  Rng rng(42);
  for (int round = 0; round < 2000; ++round) {
    const int len = 1 + static_cast<int>(rng.below(40));
    auto tags = testutil::random_tags(rng, len);
    auto spans = tags_to_spans(tags);
    CHECK(spans_to_tags(spans, len) == tags);
    CHECK(tags_to_spans(spans_to_tags(spans, len)) == spans);
  }
}

TEST_CASE("generate_synthetic is a pure function of config and seed") {
  GenConfig cfg;
  cfg.labeled_count = 30;
  cfg.unlabeled_count = 20;
  auto a = generate_synthetic(cfg, 123);
  auto b = generate_synthetic(cfg, 123);
  CHECK(a.labeled == b.labeled);
  CHECK(a.unlabeled == b.unlabeled);
  auto c = generate_synthetic(cfg, 124);
  CHECK(a.labeled != c.labeled);
}

TEST_CASE("generate_synthetic respects trigger probability zero") {
  GenConfig cfg;
  cfg.labeled_count = 40;
  cfg.trigger_prob = 0.0;
  auto corpus = generate_synthetic(cfg, 5);
  for (const auto& s : corpus.labeled) {
    for (Tag t : s.tags) CHECK(t == Tag::O);
  }
}

TEST_CASE("generate_synthetic keeps lengths in range") {
  GenConfig cfg;
  cfg.labeled_count = 100;
  auto corpus = generate_synthetic(cfg, 9);
  REQUIRE(corpus.labeled.size() == 100);
  for (const auto& s : corpus.labeled) {
    CHECK(s.size() >= 8);
    CHECK(s.size() <= 30);
    validate_sentence(s);
  }
}

TEST_CASE("generate_synthetic labels mark inserted trigger words only") {
  GenConfig cfg;
  cfg.labeled_count = 200;
  auto corpus = generate_synthetic(cfg, 31);
  // Trigger characters live in a block disjoint from background and cues;
  // a position is labeled B/I exactly when its character is from that block.
  int spans_seen = 0;
  for (const auto& s : corpus.labeled) {
    for (size_t i = 0; i < s.size(); ++i) {
      const auto cps = utf8_split(s.chars[i]);
      REQUIRE(cps.size() == 1);
      const bool labeled = s.tags[i] != Tag::O;
      const std::string& c = s.chars[i];
      const bool trigger_block = c >= utf8_encode(0x6E00) && c < utf8_encode(0x7E00);
      CHECK(labeled == trigger_block);
    }
    spans_seen += static_cast<int>(tags_to_spans(s.tags).size());
  }
  CHECK(spans_seen > 100);  // ~0.7 per sentence
}

TEST_CASE("unlabeled stream uses a superset alphabet") {
  GenConfig cfg;
  cfg.labeled_count = 200;
  cfg.unlabeled_count = 2000;
  auto corpus = generate_synthetic(cfg, 77);
  std::set<std::string> labeled_chars;
  for (const auto& s : corpus.labeled) {
    labeled_chars.insert(s.chars.begin(), s.chars.end());
  }
  bool extra_seen = false;
  for (const auto& line : corpus.unlabeled) {
    for (const auto& c : utf8_split(line)) {
      if (c >= utf8_encode(0x5E00) && c < utf8_encode(0x6E00)) extra_seen = true;
    }
  }
  CHECK(extra_seen);
}

TEST_CASE("generator rejects inconsistent configs") {
  GenConfig cfg;
  cfg.lexicon_size = 0;
  CHECK_THROWS_AS(generate_synthetic(cfg, 1), ConfigError);
  cfg = GenConfig{};
  cfg.len_min = 0;
  CHECK_THROWS_AS(generate_synthetic(cfg, 1), ConfigError);
  cfg = GenConfig{};
  cfg.trigger_prob = 1.5;
  CHECK_THROWS_AS(generate_synthetic(cfg, 1), ConfigError);
  cfg = GenConfig{};
  cfg.trigger_max_len = 10;
  cfg.len_min = 5;
  CHECK_THROWS_AS(generate_synthetic(cfg, 1), ConfigError);
}

TEST_CASE("generator config file parsing") {
  testutil::TempDir dir;
  const auto path = dir.file("gen.conf");
  testutil::write_file(path,
                       "# commented\nlabeled_count = 12\ntrigger_prob=0.5\n\n");
  auto cfg = parse_gen_config(path);
  CHECK(cfg.labeled_count == 12);
  CHECK(cfg.trigger_prob == doctest::Approx(0.5));
  testutil::write_file(path, "bogus_key=1\n");
  CHECK_THROWS_AS(parse_gen_config(path), ParseError);
}
