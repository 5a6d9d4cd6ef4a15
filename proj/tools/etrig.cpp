// etrig — character-level event trigger identification toolkit.
//
// Subcommands: synth, pretrain, train, tag, eval, sweep. Every stochastic
// step is seeded, so any command run twice with the same inputs and flags
// writes identical outputs.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "etrig/baseline.hpp"
#include "etrig/corpus.hpp"
#include "etrig/decoder.hpp"
#include "etrig/embeddings.hpp"
#include "etrig/errors.hpp"
#include "etrig/eval.hpp"
#include "etrig/model_io.hpp"
#include "etrig/network.hpp"
#include "etrig/utf8.hpp"

namespace {

using namespace etrig;

// User-facing input problems that are not library errors (missing files,
// impossible flag combinations). Exit code 2, same as parse errors.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& msg) : Error(msg) {}
};

void require_readable(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + what + ": " + path);
}

std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError("bad " + what + " list entry '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError(what + " list is empty");
  return out;
}

std::string find_flag_value(const std::vector<std::string>& args,
                            const std::string& flag) {
  for (size_t i = 1; i < args.size(); ++i) {
    if (args[i] == flag && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind(flag + "=", 0) == 0) return args[i].substr(flag.size() + 1);
  }
  return {};
}

// ---------------------------------------------------------------------------
// Flat key=value config files (# comments). Keys are the long option names
// without the leading dashes. File values are injected as extra argv entries
// for options the command line did not set, so explicit flags always win.
// ---------------------------------------------------------------------------

std::map<std::string, std::string> read_flat_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t");
      auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config file line " + std::to_string(line_no) +
                       ": expected key=value");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::vector<std::string> merge_config_into_argv(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  const std::string config_path = find_flag_value(args, "--config");
  if (config_path.empty()) return args;

  auto kv = read_flat_config(config_path);
  auto given = [&](const std::string& flag) {
    for (size_t i = 1; i < args.size(); ++i) {
      if (args[i] == flag || args[i].rfind(flag + "=", 0) == 0) return true;
    }
    return false;
  };
  for (const auto& [key, value] : kv) {
    const std::string flag = "--" + key;
    if (given(flag)) continue;
    args.push_back(flag);
    args.push_back(value);
  }
  return args;
}

void log_config(const std::string& command,
                const std::vector<std::pair<std::string, std::string>>& kv) {
  std::cerr << "# resolved config for '" << command << "'\n";
  for (const auto& [k, v] : kv) std::cerr << "#   " << k << "=" << v << "\n";
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string out_dir;
  uint64_t seed = 1;
  int train = 2000;
  int dev = 200;
  int test = 200;
  int unlabeled = 50000;
  GenConfig gen;  // preloaded from --gen-config, then overwritten by flags
};

void run_synth(const SynthArgs& a) {
  GenConfig gen = a.gen;
  if (a.train < 1 || a.dev < 0 || a.test < 0 || a.unlabeled < 0) {
    throw UsageError("sentence counts must be non-negative (train >= 1)");
  }
  gen.labeled_count = a.train + a.dev + a.test;
  gen.unlabeled_count = a.unlabeled;

  log_config("synth",
             {{"out", a.out_dir},
              {"seed", std::to_string(a.seed)},
              {"train", std::to_string(a.train)},
              {"dev", std::to_string(a.dev)},
              {"test", std::to_string(a.test)},
              {"unlabeled", std::to_string(a.unlabeled)},
              {"background-alphabet", std::to_string(gen.background_alphabet)},
              {"trigger-alphabet", std::to_string(gen.trigger_alphabet)},
              {"lexicon-size", std::to_string(gen.lexicon_size)},
              {"trigger-min-len", std::to_string(gen.trigger_min_len)},
              {"trigger-max-len", std::to_string(gen.trigger_max_len)},
              {"cue-count", std::to_string(gen.cue_count)},
              {"cue-prob", fmt_double(gen.cue_prob)},
              {"len-min", std::to_string(gen.len_min)},
              {"len-max", std::to_string(gen.len_max)},
              {"trigger-prob", fmt_double(gen.trigger_prob)},
              {"adjacent-trigger-prob", fmt_double(gen.adjacent_trigger_prob)},
              {"unlabeled-extra-alphabet",
               std::to_string(gen.unlabeled_extra_alphabet)}});

  std::error_code ec;
  std::filesystem::create_directories(a.out_dir, ec);
  auto corpus = generate_synthetic(gen, a.seed);

  const auto begin = corpus.labeled.begin();
  std::vector<TaggedSentence> train_set(begin, begin + a.train);
  std::vector<TaggedSentence> dev_set(begin + a.train, begin + a.train + a.dev);
  std::vector<TaggedSentence> test_set(begin + a.train + a.dev,
                                       begin + a.train + a.dev + a.test);

  auto path = [&](const std::string& name) {
    return (std::filesystem::path(a.out_dir) / name).string();
  };
  write_corpus_file(train_set, path("train.tsv"));
  write_corpus_file(dev_set, path("dev.tsv"));
  write_corpus_file(test_set, path("test.tsv"));
  std::ofstream raw(path("unlabeled.txt"), std::ios::binary);
  if (!raw) throw IoError("cannot write " + path("unlabeled.txt"));
  for (const auto& line : corpus.unlabeled) raw << line << '\n';
  if (!raw) throw IoError("write failed: " + path("unlabeled.txt"));

  std::cout << "wrote " << train_set.size() << " train / " << dev_set.size()
            << " dev / " << test_set.size() << " test sentences and "
            << corpus.unlabeled.size() << " unlabeled lines to " << a.out_dir
            << "\n";
}

// ---------------------------------------------------------------------------
// pretrain
// ---------------------------------------------------------------------------

struct PretrainArgs {
  std::string input;
  std::string out;
  SGNSConfig cfg;
};

void run_pretrain(const PretrainArgs& a) {
  require_readable(a.input, "unlabeled corpus");
  log_config("pretrain", {{"input", a.input},
                          {"out", a.out},
                          {"dim", std::to_string(a.cfg.dim)},
                          {"context", std::to_string(a.cfg.context)},
                          {"negatives", std::to_string(a.cfg.negatives)},
                          {"epochs", std::to_string(a.cfg.epochs)},
                          {"lr", fmt_double(a.cfg.lr)},
                          {"min-count", std::to_string(a.cfg.min_count)},
                          {"subsample", fmt_double(a.cfg.subsample)},
                          {"seed", std::to_string(a.cfg.seed)}});

  auto sentences = read_raw_lines(a.input);
  auto table = skipgram_train(sentences, a.cfg);
  save_model(a.out, archive_from_embeddings(table));
  save_embeddings(table, a.out + ".vec");
  std::cout << "pretrained " << table.rows() << " x " << table.dim
            << " embeddings on " << sentences.size() << " sentences -> " << a.out
            << " (+ .vec)\n";
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string train_path;
  std::string dev_path;
  std::string out;
  std::string init_embeddings_path;
  std::string model_type = "dnn";
  std::string hidden = "300";
  std::string dump_transitions;
  TrainConfig cfg;
  bool lr_given = false;
  bool epochs_given = false;
  bool l2_given = false;
  double alpha = 1.0;
  double lambda_t = 1.0;
  bool unconstrained = false;
};

void write_epoch_log(const std::string& path, const std::vector<EpochStats>& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write epoch log: " + path);
  char buf[160];
  for (const auto& e : log) {
    std::snprintf(buf, sizeof(buf), "%d\t%.6f\t%.2f\t%.2f\t%.2f\n", e.epoch,
                  e.mean_loss, e.dev_precision, e.dev_recall, e.dev_f1);
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path);
}

void run_train(const TrainArgs& a) {
  require_readable(a.train_path, "training corpus");
  require_readable(a.dev_path, "dev corpus");
  auto train_set = parse_corpus_file(a.train_path);
  auto dev_set = parse_corpus_file(a.dev_path);
  if (train_set.empty()) throw UsageError("training corpus is empty");

  std::vector<std::vector<Tag>> train_tags;
  for (const auto& s : train_set) train_tags.push_back(s.tags);
  auto tm = estimate_transitions(train_tags, a.alpha, !a.unconstrained);
  tm.lambda_t = a.lambda_t;

  if (a.model_type == "dnn") {
    TrainConfig cfg = a.cfg;
    cfg.hidden_sizes = parse_int_list(a.hidden, "hidden sizes");

    EmbeddingTable init;
    std::string init_source = "random";
    if (!a.init_embeddings_path.empty()) {
      init = embeddings_from_archive(
          load_model(a.init_embeddings_path, ModelKind::embeddings));
      init_source = a.init_embeddings_path;
      cfg.emb_dim = init.dim;
    } else {
      std::vector<std::vector<std::string>> seqs;
      for (const auto& s : train_set) seqs.push_back(s.chars);
      init = init_embeddings(Vocabulary::build(seqs, 1), cfg.emb_dim, cfg.seed);
    }

    log_config("train", {{"train", a.train_path},
                         {"dev", a.dev_path},
                         {"out", a.out},
                         {"model-type", "dnn"},
                         {"init-embeddings", init_source},
                         {"window", std::to_string(cfg.window_radius)},
                         {"hidden", a.hidden},
                         {"emb-dim", std::to_string(cfg.emb_dim)},
                         {"lr", fmt_double(cfg.lr)},
                         {"epochs", std::to_string(cfg.epochs)},
                         {"l2", fmt_double(cfg.l2)},
                         {"patience", std::to_string(cfg.patience)},
                         {"alpha", fmt_double(a.alpha)},
                         {"lambda-t", fmt_double(a.lambda_t)},
                         {"seed", std::to_string(cfg.seed)}});

    auto result = train_supervised(train_set, dev_set, std::move(init), cfg);
    result.transitions.lambda_t = a.lambda_t;

    std::map<std::string, std::string> extra = {
        {"seed", std::to_string(cfg.seed)},
        {"lr", fmt_double(cfg.lr)},
        {"epochs", std::to_string(cfg.epochs)},
        {"l2", fmt_double(cfg.l2)},
        {"patience", std::to_string(cfg.patience)},
        {"init_embeddings", init_source},
        {"best_epoch", std::to_string(result.best_epoch)}};
    save_model(a.out, archive_from_dnn(result.params, result.transitions, extra));
    write_epoch_log(a.out + ".log", result.log);
    if (!a.dump_transitions.empty()) {
      save_model(a.dump_transitions, archive_from_transitions(result.transitions));
    }

    const auto& last = result.log.back();
    std::cout << "trained dnn for " << result.log.size() << " epochs (best epoch "
              << result.best_epoch << ") -> " << a.out << "\n";
    Score last_score;
    last_score.precision = last.dev_precision;
    last_score.recall = last.dev_recall;
    last_score.f1 = last.dev_f1;
    std::cout << score_report(last_score, "dev(last)") << "\n";
    return;
  }

  if (a.model_type != "maxent") {
    throw UsageError("unknown --model-type '" + a.model_type +
                     "' (expected dnn or maxent)");
  }

  MaxEntConfig cfg;  // its own defaults; explicit flags carry over
  cfg.window_radius = a.cfg.window_radius;
  cfg.seed = a.cfg.seed;
  if (a.lr_given) cfg.lr = a.cfg.lr;
  if (a.epochs_given) cfg.epochs = a.cfg.epochs;
  if (a.l2_given) cfg.l2 = a.cfg.l2;

  log_config("train", {{"train", a.train_path},
                       {"dev", a.dev_path},
                       {"out", a.out},
                       {"model-type", "maxent"},
                       {"window", std::to_string(cfg.window_radius)},
                       {"lr", fmt_double(cfg.lr)},
                       {"epochs", std::to_string(cfg.epochs)},
                       {"l2", fmt_double(cfg.l2)},
                       {"alpha", fmt_double(a.alpha)},
                       {"lambda-t", fmt_double(a.lambda_t)},
                       {"seed", std::to_string(cfg.seed)}});

  auto model = maxent_train(train_set, cfg);
  save_model(a.out, archive_from_maxent(model, tm));
  if (!a.dump_transitions.empty()) {
    save_model(a.dump_transitions, archive_from_transitions(tm));
  }

  std::vector<std::vector<TriggerSpan>> pred, gold;
  for (const auto& s : dev_set) {
    pred.push_back(tags_to_spans(viterbi(maxent_emissions(model, s.chars), tm).tags));
    gold.push_back(tags_to_spans(s.tags));
  }
  const Score dev_score = score_spans(pred, gold);

  std::vector<EpochStats> log;
  for (size_t i = 0; i < model.epoch_losses.size(); ++i) {
    EpochStats e;
    e.epoch = static_cast<int>(i + 1);
    e.mean_loss = model.epoch_losses[i];
    if (i + 1 == model.epoch_losses.size()) {
      e.dev_precision = dev_score.precision;
      e.dev_recall = dev_score.recall;
      e.dev_f1 = dev_score.f1;
    }
    log.push_back(e);
  }
  write_epoch_log(a.out + ".log", log);
  std::cout << "trained maxent (" << model.num_features() << " features) -> "
            << a.out << "\n";
  std::cout << score_report(dev_score, "dev") << "\n";
}

// ---------------------------------------------------------------------------
// tag
// ---------------------------------------------------------------------------

struct TagArgs {
  std::string model;
  std::string input;
  std::string out;
  std::string transitions_path;
  double lambda_t = -1.0;  // <0: keep the stored value
};

void run_tag(const TagArgs& a) {
  require_readable(a.input, "input text");
  auto archive = load_model_any(a.model);
  if (archive.kind != ModelKind::dnn && archive.kind != ModelKind::maxent) {
    throw UsageError("tag needs a dnn or maxent model; " + a.model + " holds a " +
                     model_kind_name(archive.kind) + " archive");
  }

  log_config("tag",
             {{"model", a.model},
              {"input", a.input},
              {"out", a.out},
              {"transitions",
               a.transitions_path.empty() ? "(stored)" : a.transitions_path}});

  auto lines = read_raw_lines(a.input);
  std::vector<TaggedSentence> tagged;
  tagged.reserve(lines.size());

  auto apply_overrides = [&](TransitionModel tm) {
    if (!a.transitions_path.empty()) tm = read_transition_file(a.transitions_path);
    if (a.lambda_t >= 0.0) tm.lambda_t = a.lambda_t;
    return tm;
  };

  if (archive.kind == ModelKind::dnn) {
    auto m = dnn_from_archive(archive);
    const auto tm = apply_overrides(m.transitions);
    for (const auto& line : lines) {
      TaggedSentence s;
      s.chars = utf8_split(line);
      auto em = emissions(m.params, encode(s.chars, m.params.embedding.vocab));
      s.tags = viterbi(em, tm).tags;
      tagged.push_back(std::move(s));
    }
  } else {
    auto m = maxent_from_archive(archive);
    const auto tm = apply_overrides(m.transitions);
    for (const auto& line : lines) {
      TaggedSentence s;
      s.chars = utf8_split(line);
      s.tags = viterbi(maxent_emissions(m.model, s.chars), tm).tags;
      tagged.push_back(std::move(s));
    }
  }

  write_corpus_file(tagged, a.out);
  std::cout << "tagged " << tagged.size() << " sentences -> " << a.out << "\n";
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string pred;
  std::string gold;
  std::string label = "eval";
};

void run_eval(const EvalArgs& a) {
  require_readable(a.pred, "prediction file");
  require_readable(a.gold, "gold file");
  auto pred_sents = parse_corpus_file(a.pred);
  auto gold_sents = parse_corpus_file(a.gold);
  log_config("eval", {{"pred", a.pred}, {"gold", a.gold}, {"label", a.label}});

  std::vector<std::vector<TriggerSpan>> pred, gold;
  for (const auto& s : pred_sents) pred.push_back(tags_to_spans(s.tags));
  for (const auto& s : gold_sents) gold.push_back(tags_to_spans(s.tags));
  const Score score = score_spans(pred, gold);
  std::cout << score_report(score, a.label) << "\n";
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepArgs {
  std::string train_path;
  std::string dev_path;
  std::string unlabeled_path;
  std::string out;
  std::string dims = "10,25,50,100,200";
  std::string hidden = "300";
  TrainConfig cfg;
};

void run_sweep(const SweepArgs& a) {
  require_readable(a.train_path, "training corpus");
  require_readable(a.dev_path, "dev corpus");
  const auto dims = parse_int_list(a.dims, "dims");

  auto train_set = parse_corpus_file(a.train_path);
  auto dev_set = parse_corpus_file(a.dev_path);

  log_config("sweep",
             {{"train", a.train_path},
              {"dev", a.dev_path},
              {"unlabeled",
               a.unlabeled_path.empty() ? "(none)" : a.unlabeled_path},
              {"out", a.out},
              {"dims", a.dims},
              {"hidden", a.hidden},
              {"lr", fmt_double(a.cfg.lr)},
              {"epochs", std::to_string(a.cfg.epochs)},
              {"l2", fmt_double(a.cfg.l2)},
              {"patience", std::to_string(a.cfg.patience)},
              {"seed", std::to_string(a.cfg.seed)}});

  std::vector<std::string> unlabeled;
  if (!a.unlabeled_path.empty()) unlabeled = read_raw_lines(a.unlabeled_path);

  std::ofstream out(a.out, std::ios::binary);
  if (!out) throw IoError("cannot write sweep table: " + a.out);

  for (int dim : dims) {
    if (dim < 1) throw UsageError("dims must be >= 1");
    TrainConfig cfg = a.cfg;
    cfg.hidden_sizes = parse_int_list(a.hidden, "hidden sizes");
    cfg.emb_dim = dim;

    EmbeddingTable init;
    if (!unlabeled.empty()) {
      SGNSConfig pre;
      pre.dim = dim;
      pre.seed = cfg.seed;
      init = skipgram_train(unlabeled, pre);
    } else {
      std::vector<std::vector<std::string>> seqs;
      for (const auto& s : train_set) seqs.push_back(s.chars);
      init = init_embeddings(Vocabulary::build(seqs, 1), dim, cfg.seed);
    }

    auto result = train_supervised(train_set, dev_set, std::move(init), cfg);
    double best_f1 = -1, p = 0, r = 0;
    for (const auto& e : result.log) {
      if (e.dev_f1 > best_f1) {
        best_f1 = e.dev_f1;
        p = e.dev_precision;
        r = e.dev_recall;
      }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d\t%.2f\t%.2f\t%.2f\n", dim, p, r, best_f1);
    out << buf;
    out.flush();
    std::cout << "dim " << dim << ": dev F1 " << format_pct(best_f1) << "\n";
  }
  std::cout << "sweep table -> " << a.out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"etrig: window-MLP event trigger tagger over character embeddings"};
  app.require_subcommand(1);

  SynthArgs synth;
  PretrainArgs pretrain;
  TrainArgs train;
  TagArgs tag;
  EvalArgs evalargs;
  SweepArgs sweep;
  std::string config_dummy;
  std::string gen_config_dummy;

  auto add_config_flag = [&](CLI::App* sub) {
    sub->add_option("--config", config_dummy,
                    "flat key=value config file; explicit flags win");
  };

  auto* s_synth = app.add_subcommand("synth", "generate a synthetic corpus");
  add_config_flag(s_synth);
  s_synth->add_option("--out", synth.out_dir, "output directory")->required();
  s_synth->add_option("--seed", synth.seed, "rng seed");
  s_synth->add_option("--train", synth.train, "training sentences");
  s_synth->add_option("--dev", synth.dev, "dev sentences");
  s_synth->add_option("--test", synth.test, "test sentences");
  s_synth->add_option("--unlabeled", synth.unlabeled, "unlabeled sentences");
  s_synth->add_option("--gen-config", gen_config_dummy,
                      "generator settings file (counts come from the flags)");
  s_synth->add_option("--background-alphabet", synth.gen.background_alphabet);
  s_synth->add_option("--trigger-alphabet", synth.gen.trigger_alphabet);
  s_synth->add_option("--lexicon-size", synth.gen.lexicon_size);
  s_synth->add_option("--trigger-min-len", synth.gen.trigger_min_len);
  s_synth->add_option("--trigger-max-len", synth.gen.trigger_max_len);
  s_synth->add_option("--cue-count", synth.gen.cue_count);
  s_synth->add_option("--cue-prob", synth.gen.cue_prob);
  s_synth->add_option("--len-min", synth.gen.len_min);
  s_synth->add_option("--len-max", synth.gen.len_max);
  s_synth->add_option("--trigger-prob", synth.gen.trigger_prob);
  s_synth->add_option("--adjacent-trigger-prob", synth.gen.adjacent_trigger_prob);
  s_synth->add_option("--unlabeled-extra-alphabet",
                      synth.gen.unlabeled_extra_alphabet);

  auto* s_pre =
      app.add_subcommand("pretrain", "skip-gram pretraining on unlabeled text");
  add_config_flag(s_pre);
  s_pre->add_option("--input", pretrain.input,
                    "unlabeled text, one sentence per line")
      ->required();
  s_pre->add_option("--out", pretrain.out, "embeddings archive path")->required();
  s_pre->add_option("--dim", pretrain.cfg.dim, "vector size");
  s_pre->add_option("--context", pretrain.cfg.context, "max context radius");
  s_pre->add_option("--negatives", pretrain.cfg.negatives, "negative samples");
  s_pre->add_option("--epochs", pretrain.cfg.epochs, "passes over the corpus");
  s_pre->add_option("--lr", pretrain.cfg.lr, "initial learning rate");
  s_pre->add_option("--min-count", pretrain.cfg.min_count, "frequency cutoff");
  s_pre->add_option("--subsample", pretrain.cfg.subsample,
                    "frequent-token subsample threshold (0 disables)");
  s_pre->add_option("--seed", pretrain.cfg.seed, "rng seed");

  auto* s_train = app.add_subcommand("train", "supervised tagger training");
  add_config_flag(s_train);
  s_train->add_option("--train", train.train_path, "labeled training corpus")
      ->required();
  s_train->add_option("--dev", train.dev_path, "labeled dev corpus")->required();
  s_train->add_option("--out", train.out, "model archive path")->required();
  s_train->add_option("--init-embeddings", train.init_embeddings_path,
                      "pretrained embeddings archive (omit for seeded-random)");
  s_train->add_option("--model-type", train.model_type, "dnn or maxent");
  s_train->add_option("--window", train.cfg.window_radius, "window radius");
  s_train->add_option("--hidden", train.hidden, "hidden sizes, comma-separated");
  s_train->add_option("--emb-dim", train.cfg.emb_dim,
                      "embedding size for random init");
  auto* lr_opt = s_train->add_option("--lr", train.cfg.lr, "learning rate");
  auto* ep_opt = s_train->add_option("--epochs", train.cfg.epochs, "max epochs");
  auto* l2_opt =
      s_train->add_option("--l2", train.cfg.l2, "L2 on weight matrices");
  s_train->add_option("--patience", train.cfg.patience,
                      "early-stop patience on dev F1 (0 disables)");
  s_train->add_option("--alpha", train.alpha, "transition smoothing");
  s_train->add_option("--lambda-t", train.lambda_t,
                      "transition weight in Viterbi");
  s_train->add_flag("--unconstrained", train.unconstrained,
                    "drop the hard BIO constraint");
  s_train->add_option("--dump-transitions", train.dump_transitions,
                      "also write a standalone transitions archive");
  s_train->add_option("--seed", train.cfg.seed, "rng seed");

  auto* s_tag = app.add_subcommand("tag", "tag raw text with a trained model");
  add_config_flag(s_tag);
  s_tag->add_option("--model", tag.model, "dnn or maxent archive")->required();
  s_tag->add_option("--input", tag.input, "raw text, one sentence per line")
      ->required();
  s_tag->add_option("--out", tag.out, "predictions in labeled-corpus format")
      ->required();
  s_tag->add_option("--transitions", tag.transitions_path,
                    "transition text file overriding the stored model");
  s_tag->add_option("--lambda-t", tag.lambda_t, "override the stored weight");

  auto* s_eval = app.add_subcommand("eval", "exact-match span scoring");
  add_config_flag(s_eval);
  s_eval->add_option("--pred", evalargs.pred, "predicted labeled corpus")
      ->required();
  s_eval->add_option("--gold", evalargs.gold, "gold labeled corpus")->required();
  s_eval->add_option("--label", evalargs.label, "report label");

  auto* s_sweep = app.add_subcommand("sweep", "train across embedding sizes");
  add_config_flag(s_sweep);
  s_sweep->add_option("--train", sweep.train_path, "labeled training corpus")
      ->required();
  s_sweep->add_option("--dev", sweep.dev_path, "labeled dev corpus")->required();
  s_sweep->add_option("--out", sweep.out, "TSV output: dim P R F1")->required();
  s_sweep->add_option("--dims", sweep.dims, "comma-separated vector sizes");
  s_sweep->add_option("--unlabeled", sweep.unlabeled_path,
                      "pretrain per dimension on this corpus");
  s_sweep->add_option("--hidden", sweep.hidden, "hidden sizes, comma-separated");
  s_sweep->add_option("--window", sweep.cfg.window_radius, "window radius");
  s_sweep->add_option("--lr", sweep.cfg.lr, "learning rate");
  s_sweep->add_option("--epochs", sweep.cfg.epochs, "max epochs");
  s_sweep->add_option("--l2", sweep.cfg.l2, "L2 on weight matrices");
  s_sweep->add_option("--patience", sweep.cfg.patience, "early-stop patience");
  s_sweep->add_option("--seed", sweep.cfg.seed, "shared rng seed");

  try {
    auto args = merge_config_into_argv(argc, argv);

    // The generator file loads before parsing so explicit flags overwrite it.
    if (args.size() > 1 && args[1] == "synth") {
      const std::string gen_path = find_flag_value(args, "--gen-config");
      if (!gen_path.empty()) synth.gen = parse_gen_config(gen_path);
    }

    std::vector<std::string> rargs(args.rbegin(), args.rend());
    rargs.pop_back();  // program name
    app.parse(rargs);

    train.lr_given = lr_opt->count() > 0;
    train.epochs_given = ep_opt->count() > 0;
    train.l2_given = l2_opt->count() > 0;

    if (s_synth->parsed()) {
      run_synth(synth);
    } else if (s_pre->parsed()) {
      run_pretrain(pretrain);
    } else if (s_train->parsed()) {
      run_train(train);
    } else if (s_tag->parsed()) {
      run_tag(tag);
    } else if (s_eval->parsed()) {
      run_eval(evalargs);
    } else if (s_sweep->parsed()) {
      run_sweep(sweep);
    }
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
