#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "etrig/embeddings.hpp"
#include "etrig/errors.hpp"
#include "etrig/rng.hpp"
#include "etrig/utf8.hpp"
#include "testutil.hpp"

using namespace etrig;

namespace {

double sgns_loss(const std::vector<double>& v, const std::vector<double>& u,
                 const std::vector<std::vector<double>>& negs) {
  auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
  };
  auto log_sigmoid = [](double x) {
    // log s(x), computed the slow safe way for the oracle
    return -std::log1p(std::exp(-x));
  };
  double loss = -log_sigmoid(dot(u, v));
  for (const auto& n : negs) loss -= log_sigmoid(-dot(n, v));
  return loss;
}

double rel_err(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-12});
}

std::vector<std::span<const double>> as_spans(const std::vector<std::vector<double>>& v) {
  std::vector<std::span<const double>> out;
  for (const auto& x : v) out.emplace_back(x.data(), x.size());
  return out;
}

double cosine(const double* a, const double* b, int d) {
  double num = 0, na = 0, nb = 0;
  for (int i = 0; i < d; ++i) {
    num += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return num / std::sqrt(na * nb);
}

}  // namespace

TEST_CASE("init_embeddings range, determinism and shape") {
  auto vocab = Vocabulary::build({{"a", "b", "c"}}, 1);
  auto t = init_embeddings(vocab, 50, 7);
  CHECK(t.rows() == 5);
  CHECK(t.matrix.size() == 250);
  for (double x : t.matrix) CHECK(std::fabs(x) <= 0.5 / 50);
  auto t2 = init_embeddings(vocab, 50, 7);
  CHECK(t.matrix == t2.matrix);
  auto t3 = init_embeddings(vocab, 50, 8);
  CHECK(t.matrix != t3.matrix);
}

TEST_CASE("neg_sampling_dist analytic values") {
  // counts {a:4, b:1}: p(a) = 4^0.75 / (4^0.75 + 1)
  std::vector<uint64_t> counts = {0, 0, 4, 1};
  auto p = neg_sampling_dist(counts);
  const double pa = std::pow(4.0, 0.75) / (std::pow(4.0, 0.75) + 1.0);
  CHECK(p[2] == doctest::Approx(pa).epsilon(1e-12));
  CHECK(p[2] == doctest::Approx(0.7388).epsilon(1e-4));
  CHECK(p[3] == doctest::Approx(1.0 - pa).epsilon(1e-12));

  CHECK(neg_sampling_dist(std::vector<uint64_t>{0, 0, 1, 1})[2] ==
        doctest::Approx(0.5).epsilon(1e-12));
  auto single = neg_sampling_dist(std::vector<uint64_t>{0, 0, 16});
  CHECK(single[2] == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(neg_sampling_dist(std::vector<uint64_t>{0, 0}), Error);
}

TEST_CASE("neg_sampling_dist sums to one") {
  Rng rng(3);
  for (int round = 0; round < 50; ++round) {
    std::vector<uint64_t> counts = {0, 0};
    const int n = 1 + static_cast<int>(rng.below(40));
    for (int i = 0; i < n; ++i) counts.push_back(1 + rng.below(1000));
    auto p = neg_sampling_dist(counts);
    CHECK(std::fabs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-12);
  }
}

TEST_CASE("sgns pair loss analytic spot checks") {
  SUBCASE("aligned unit vectors, no negatives") {
    std::vector<double> v = {1, 0}, u = {1, 0};
    auto g = sgns_pair_loss_grad({v.data(), 2}, {u.data(), 2}, {});
    const double sig1 = 1.0 / (1.0 + std::exp(-1.0));
    CHECK(g.loss == doctest::Approx(-std::log(sig1)).epsilon(1e-12));
    CHECK(g.loss == doctest::Approx(0.3133).epsilon(1e-3));
    CHECK(g.d_center[0] == doctest::Approx(sig1 - 1.0).epsilon(1e-12));
    CHECK(g.d_center[0] == doctest::Approx(-0.2689).epsilon(1e-3));
    CHECK(g.d_center[1] == 0.0);
  }
  SUBCASE("orthogonal vectors give ln 2") {
    std::vector<double> v = {1, 0}, u = {0, 1};
    auto g = sgns_pair_loss_grad({v.data(), 2}, {u.data(), 2}, {});
    CHECK(g.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }
  SUBCASE("dimension mismatch is rejected") {
    std::vector<double> v = {1, 0}, u = {1};
    CHECK_THROWS_AS(sgns_pair_loss_grad({v.data(), 2}, {u.data(), 1}, {}), Error);
  }
}

TEST_CASE("sgns gradients match central finite differences") {
  Rng rng(2024);
  const double step = 1e-5;
  double worst = 0.0;
  for (int round = 0; round < 100; ++round) {
    const int d = 2 + static_cast<int>(rng.below(8));
    const int k = static_cast<int>(rng.below(4));
    auto draw = [&]() {
      std::vector<double> x(d);
      for (auto& e : x) e = rng.uniform(-1.5, 1.5);
      return x;
    };
    auto v = draw();
    auto u = draw();
    std::vector<std::vector<double>> negs;
    for (int j = 0; j < k; ++j) negs.push_back(draw());

    auto g = sgns_pair_loss_grad({v.data(), v.size()}, {u.data(), u.size()},
                                 as_spans(negs));
    CHECK(g.loss == doctest::Approx(sgns_loss(v, u, negs)).epsilon(1e-12));

    auto fd_check = [&](std::vector<double>& theta, const std::vector<double>& an) {
      for (size_t i = 0; i < theta.size(); ++i) {
        const double saved = theta[i];
        theta[i] = saved + step;
        const double up = sgns_loss(v, u, negs);
        theta[i] = saved - step;
        const double down = sgns_loss(v, u, negs);
        theta[i] = saved;
        const double fd = (up - down) / (2 * step);
        worst = std::max(worst, rel_err(fd, an[i]));
      }
    };
    fd_check(v, g.d_center);
    fd_check(u, g.d_context);
    for (int j = 0; j < k; ++j) fd_check(negs[j], g.d_negs[j]);
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("skipgram_train with zero epochs returns the seeded init") {
  GenConfig gen;
  gen.unlabeled_count = 300;
  auto corpus = generate_synthetic(gen, 5);
  SGNSConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 0;
  cfg.seed = 42;
  auto trained = skipgram_train(corpus.unlabeled, cfg);

  std::vector<std::vector<std::string>> tokenized;
  for (const auto& line : corpus.unlabeled) {
    tokenized.push_back(utf8_split(line));
  }
  auto vocab = Vocabulary::build(tokenized, cfg.min_count);
  auto init = init_embeddings(vocab, cfg.dim, cfg.seed);
  CHECK(trained.matrix == init.matrix);
  CHECK(trained.vocab == init.vocab);
}

TEST_CASE("skipgram_train is deterministic and moves the table") {
  GenConfig gen;
  gen.unlabeled_count = 400;
  auto corpus = generate_synthetic(gen, 6);
  SGNSConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 1;
  cfg.seed = 9;
  auto a = skipgram_train(corpus.unlabeled, cfg);
  auto b = skipgram_train(corpus.unlabeled, cfg);
  CHECK(a.matrix == b.matrix);

  SGNSConfig zero = cfg;
  zero.epochs = 0;
  auto init = skipgram_train(corpus.unlabeled, zero);
  CHECK(a.matrix != init.matrix);
}

TEST_CASE("skipgram_train groups tokens by their contexts") {
  // a always adjoins b; c always adjoins d. After training, a sits closer
  // to b than to d.
  std::vector<std::string> corpus;
  for (int i = 0; i < 1000; ++i) {
    corpus.push_back(i % 2 == 0 ? "abab" : "cdcd");
  }
  SGNSConfig cfg;
  cfg.dim = 8;
  cfg.context = 2;
  cfg.negatives = 4;
  cfg.epochs = 20;
  cfg.min_count = 1;
  cfg.subsample = 0;  // tiny vocabulary; keep every token
  cfg.seed = 4;
  auto table = skipgram_train(corpus, cfg);
  const int ia = table.vocab.index("a");
  const int ib = table.vocab.index("b");
  const int id = table.vocab.index("d");
  REQUIRE(ia >= 2);
  REQUIRE(ib >= 2);
  REQUIRE(id >= 2);
  const double ab = cosine(table.row(ia), table.row(ib), table.dim);
  const double ad = cosine(table.row(ia), table.row(id), table.dim);
  CHECK(ab > ad);
}

TEST_CASE("skipgram_train rejects an empty effective corpus") {
  SGNSConfig cfg;
  cfg.min_count = 50;
  CHECK_THROWS_AS(skipgram_train({"ab", "cd"}, cfg), Error);
}

TEST_CASE("embedding interchange file round-trips") {
  auto vocab = Vocabulary::build({{"x", "y", "z", "x"}}, 1);
  auto table = init_embeddings(vocab, 7, 13);
  testutil::TempDir dir;
  const auto path = dir.file("emb.vec");
  save_embeddings(table, path);
  auto loaded = load_embeddings(path);
  CHECK(loaded.dim == table.dim);
  CHECK(loaded.matrix == table.matrix);
  CHECK(loaded.vocab.tokens() == table.vocab.tokens());
}

TEST_CASE("embedding file errors") {
  testutil::TempDir dir;
  SUBCASE("row count mismatch") {
    const auto path = dir.file("bad.vec");
    testutil::write_file(path, "3 2\na 1 2\n<PAD> 0 0\n");
    CHECK_THROWS_AS(load_embeddings(path), FormatError);
  }
  SUBCASE("missing reserved rows") {
    const auto path = dir.file("bad2.vec");
    testutil::write_file(path, "2 1\na 1\nb 2\n");
    CHECK_THROWS_AS(load_embeddings(path), FormatError);
  }
  SUBCASE("wrong column count") {
    const auto path = dir.file("bad3.vec");
    testutil::write_file(path, "3 2\na 1 2 3\n<PAD> 0 0\n<UNK> 0 0\n");
    CHECK_THROWS_AS(load_embeddings(path), FormatError);
  }
  SUBCASE("whitespace in a token is rejected at save time") {
    auto vocab = Vocabulary::build({{"a b"}}, 1);
    auto table = init_embeddings(vocab, 2, 1);
    CHECK_THROWS_AS(save_embeddings(table, dir.file("ws.vec")), ValidationError);
  }
}

TEST_CASE("lookup_concat layout") {
  auto vocab = Vocabulary::build({{"a", "b", "c"}}, 1);
  auto table = init_embeddings(vocab, 2, 3);
  SUBCASE("rows appear in window order") {
    Window w{1, 1, {3, 2, 4}};
    auto out = lookup_concat(table, w);
    REQUIRE(out.size() == 6);
    CHECK(out[0] == table.row(3)[0]);
    CHECK(out[1] == table.row(3)[1]);
    CHECK(out[2] == table.row(2)[0]);
    CHECK(out[4] == table.row(4)[0]);
  }
  SUBCASE("all-PAD window repeats the PAD row") {
    Window w{0, 2, {0, 0, 0, 0, 0}};
    auto out = lookup_concat(table, w);
    REQUIRE(out.size() == 10);
    for (int slot = 0; slot < 5; ++slot) {
      CHECK(out[2 * slot] == table.row(0)[0]);
      CHECK(out[2 * slot + 1] == table.row(0)[1]);
    }
  }
  SUBCASE("out-of-range index is rejected") {
    Window w{0, 1, {0, 99, 0}};
    CHECK_THROWS_AS(lookup_concat(table, w), Error);
  }
}
