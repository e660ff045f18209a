// Command-line front end for the sandhi toolkit. Talks to the core strictly
// through the public C API in sandhi/sandhi.h.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sandhi/sandhi.h"

namespace {

struct RunConfig {
  // paths
  std::string corpus, vocab, checkpoint, rules, lexicon, report;
  std::string input, output, loss_out, lengths_csv, exclude;
  std::string predictions, gold;
  // generation
  uint64_t n = 1000;
  uint32_t min_words = 2;
  uint32_t max_words = 6;
  double apply_probability = 1.0;
  // vocabulary
  uint32_t vocab_size = 8000;
  double train_frac = 1.0;
  double test_frac = 0.0;
  // model
  uint32_t num_layers = 3;
  uint32_t embed_dim = 128;
  uint32_t hidden_dim = 128;
  bool attention = true;
  double dropout = 0.2;
  uint32_t max_seq_len = 35;
  uint32_t batch_size = 128;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  uint32_t epochs = 80;
  double grad_clip = 0.0;
  uint32_t threads = 0;
  uint32_t checkpoint_every = 0;  // 0: only at the end
  // global
  uint64_t seed = 42;
};

[[noreturn]] void die(const std::string& message) {
  std::cerr << "error: " << message << "\n";
  std::exit(1);
}

void check(sandhi_status status) {
  if (status != SANDHI_OK) die(sandhi_last_error());
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) die("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

std::vector<std::string> slurp_lines(const std::string& path) {
  std::vector<std::string> lines;
  std::string text = slurp(path);
  size_t start = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

void spit(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) die("cannot write " + path);
  out << contents;
}

std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Flat `key = value` file; unknown keys are rejected so typos do not pass
// silently. CLI flags parsed afterwards override these values.
void apply_config_file(const std::string& path, RunConfig& cfg) {
  std::map<std::string, std::function<void(const std::string&)>> setters;
  auto str = [](std::string& f) { return [&f](const std::string& v) { f = v; }; };
  auto u32 = [](uint32_t& f) {
    return [&f](const std::string& v) { f = static_cast<uint32_t>(std::stoul(v)); };
  };
  auto u64 = [](uint64_t& f) { return [&f](const std::string& v) { f = std::stoull(v); }; };
  auto dbl = [](double& f) { return [&f](const std::string& v) { f = std::stod(v); }; };
  auto flag = [](bool& f) {
    return [&f](const std::string& v) { f = v == "1" || v == "true" || v == "yes"; };
  };
  setters["corpus"] = str(cfg.corpus);
  setters["vocab"] = str(cfg.vocab);
  setters["checkpoint"] = str(cfg.checkpoint);
  setters["rules"] = str(cfg.rules);
  setters["lexicon"] = str(cfg.lexicon);
  setters["report"] = str(cfg.report);
  setters["input"] = str(cfg.input);
  setters["output"] = str(cfg.output);
  setters["loss_out"] = str(cfg.loss_out);
  setters["lengths_csv"] = str(cfg.lengths_csv);
  setters["exclude"] = str(cfg.exclude);
  setters["predictions"] = str(cfg.predictions);
  setters["gold"] = str(cfg.gold);
  setters["n"] = u64(cfg.n);
  setters["min_words"] = u32(cfg.min_words);
  setters["max_words"] = u32(cfg.max_words);
  setters["apply_probability"] = dbl(cfg.apply_probability);
  setters["vocab_size"] = u32(cfg.vocab_size);
  setters["train_frac"] = dbl(cfg.train_frac);
  setters["test_frac"] = dbl(cfg.test_frac);
  setters["num_layers"] = u32(cfg.num_layers);
  setters["embed_dim"] = u32(cfg.embed_dim);
  setters["hidden_dim"] = u32(cfg.hidden_dim);
  setters["attention"] = flag(cfg.attention);
  setters["dropout"] = dbl(cfg.dropout);
  setters["max_seq_len"] = u32(cfg.max_seq_len);
  setters["batch_size"] = u32(cfg.batch_size);
  setters["lr"] = dbl(cfg.lr);
  setters["beta1"] = dbl(cfg.beta1);
  setters["beta2"] = dbl(cfg.beta2);
  setters["epochs"] = u32(cfg.epochs);
  setters["grad_clip"] = dbl(cfg.grad_clip);
  setters["threads"] = u32(cfg.threads);
  setters["checkpoint_every"] = u32(cfg.checkpoint_every);
  setters["seed"] = u64(cfg.seed);

  size_t lineno = 0;
  for (const auto& raw : slurp_lines(path)) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      die(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto it = setters.find(key);
    if (it == setters.end()) {
      die(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    try {
      it->second(value);
    } catch (const std::exception&) {
      die(path + ":" + std::to_string(lineno) + ": bad value for '" + key + "'");
    }
  }
}

void echo_config(const std::string& command, const RunConfig& c) {
  auto& out = std::cerr;
  out << "# effective config (" << command << ")\n";
  auto kv = [&out](const char* k, const auto& v) { out << k << " = " << v << "\n"; };
  auto kvs = [&out](const char* k, const std::string& v) {
    if (!v.empty()) out << k << " = " << v << "\n";
  };
  kvs("corpus", c.corpus);
  kvs("vocab", c.vocab);
  kvs("checkpoint", c.checkpoint);
  kvs("rules", c.rules);
  kvs("lexicon", c.lexicon);
  kvs("report", c.report);
  kvs("input", c.input);
  kvs("output", c.output);
  kvs("loss_out", c.loss_out);
  kvs("lengths_csv", c.lengths_csv);
  kvs("exclude", c.exclude);
  kvs("predictions", c.predictions);
  kvs("gold", c.gold);
  if (command == "gen") {
    kv("n", c.n);
    kv("min_words", c.min_words);
    kv("max_words", c.max_words);
    kv("apply_probability", c.apply_probability);
  }
  if (command == "vocab") {
    kv("vocab_size", c.vocab_size);
    kv("train_frac", c.train_frac);
    kv("test_frac", c.test_frac);
  }
  if (command == "train") {
    kv("train_frac", c.train_frac);
    kv("test_frac", c.test_frac);
    kv("num_layers", c.num_layers);
    kv("embed_dim", c.embed_dim);
    kv("hidden_dim", c.hidden_dim);
    kv("attention", c.attention ? 1 : 0);
    kv("dropout", c.dropout);
    kv("max_seq_len", c.max_seq_len);
    kv("batch_size", c.batch_size);
    kv("lr", c.lr);
    kv("beta1", c.beta1);
    kv("beta2", c.beta2);
    kv("epochs", c.epochs);
    kv("grad_clip", c.grad_clip);
    kv("threads", c.threads);
    kv("checkpoint_every", c.checkpoint_every);
  }
  kv("seed", c.seed);
}

// Owning wrappers so error paths cannot leak handles.
template <typename T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  ~Handle() { Free(ptr); }
  T** slot() { return &ptr; }
  operator T*() const { return ptr; }
};
using RulesHandle = Handle<sandhi_rules, sandhi_rules_free>;
using LexiconHandle = Handle<sandhi_lexicon, sandhi_lexicon_free>;
using CorpusHandle = Handle<sandhi_corpus, sandhi_corpus_free>;
using VocabHandle = Handle<sandhi_vocab, sandhi_vocab_free>;
using ModelHandle = Handle<sandhi_model, sandhi_model_free>;
using ReportHandle = Handle<sandhi_report, sandhi_report_free>;

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { sandhi_string_free(ptr); }
  std::string str() const { return ptr ? std::string(ptr) : std::string(); }
};

// Applies exclusion and the train-side hash split; train_frac = 1 keeps the
// whole corpus (the separate-test-file workflow).
sandhi_corpus* training_subset(const RunConfig& cfg, const CorpusHandle& corpus) {
  sandhi_corpus* current = corpus.ptr;
  sandhi_corpus* owned = nullptr;
  if (!cfg.exclude.empty()) {
    std::vector<std::string> lines = slurp_lines(cfg.exclude);
    std::vector<const char*> raw;
    raw.reserve(lines.size());
    for (const auto& l : lines) raw.push_back(l.c_str());
    check(sandhi_corpus_exclude(current, raw.data(), raw.size(), &owned));
    current = owned;
  }
  if (cfg.train_frac < 1.0) {
    sandhi_corpus* train = nullptr;
    sandhi_corpus* test = nullptr;
    check(sandhi_corpus_split(current, cfg.train_frac, cfg.test_frac, cfg.seed, &train,
                              &test));
    sandhi_corpus_free(test);
    sandhi_corpus_free(owned);
    return train;
  }
  if (owned) return owned;
  // Copy so the caller can free uniformly.
  sandhi_corpus* copy = nullptr;
  check(sandhi_corpus_exclude(current, nullptr, 0, &copy));
  return copy;
}

int cmd_gen(const RunConfig& cfg) {
  if (cfg.lexicon.empty() || cfg.rules.empty() || cfg.corpus.empty()) {
    die("gen requires --lexicon, --rules and --corpus");
  }
  LexiconHandle lexicon;
  check(sandhi_lexicon_load(cfg.lexicon.c_str(), lexicon.slot()));
  RulesHandle rules;
  check(sandhi_rules_load(cfg.rules.c_str(), cfg.apply_probability, rules.slot()));
  CorpusHandle corpus;
  check(sandhi_corpus_generate(lexicon, rules, cfg.n, cfg.min_words, cfg.max_words,
                               cfg.seed, corpus.slot()));
  check(sandhi_corpus_save(corpus, cfg.corpus.c_str()));
  std::cout << sandhi_corpus_count(corpus) << " pairs written to " << cfg.corpus << "\n";
  return 0;
}

int cmd_vocab(const RunConfig& cfg) {
  if (cfg.corpus.empty() || cfg.vocab.empty()) die("vocab requires --corpus and --vocab");
  CorpusHandle corpus;
  check(sandhi_corpus_load(cfg.corpus.c_str(), corpus.slot()));
  CorpusHandle train;
  train.ptr = training_subset(cfg, corpus);
  VocabHandle vocab;
  check(sandhi_vocab_learn(train, cfg.vocab_size, vocab.slot()));
  check(sandhi_vocab_save(vocab, cfg.vocab.c_str()));
  uint32_t enc = 0, dec = 0;
  check(sandhi_vocab_realized_sizes(vocab, train, &enc, &dec));
  std::cout << "vocabulary size " << sandhi_vocab_size(vocab) << " written to " << cfg.vocab
            << "\n";
  std::cout << "realized encoder vocabulary: " << enc << "\n";
  std::cout << "realized decoder vocabulary: " << dec << "\n";
  return 0;
}

struct TrainContext {
  const RunConfig* cfg;
  std::string loss_lines;
};

int cmd_train(const RunConfig& cfg) {
  if (cfg.corpus.empty() || cfg.vocab.empty() || cfg.checkpoint.empty()) {
    die("train requires --corpus, --vocab and --checkpoint");
  }
  CorpusHandle corpus;
  check(sandhi_corpus_load(cfg.corpus.c_str(), corpus.slot()));
  CorpusHandle train;
  train.ptr = training_subset(cfg, corpus);
  VocabHandle vocab;
  check(sandhi_vocab_load(cfg.vocab.c_str(), vocab.slot()));

  sandhi_train_config tc;
  sandhi_train_config_init(&tc);
  tc.num_layers = cfg.num_layers;
  tc.embed_dim = cfg.embed_dim;
  tc.hidden_dim = cfg.hidden_dim;
  tc.attention = cfg.attention ? 1 : 0;
  tc.dropout_rate = cfg.dropout;
  tc.max_seq_len = cfg.max_seq_len;
  tc.batch_size = cfg.batch_size;
  tc.learning_rate = cfg.lr;
  tc.beta1 = cfg.beta1;
  tc.beta2 = cfg.beta2;
  tc.epochs = cfg.epochs;
  tc.seed = cfg.seed;
  tc.grad_clip_norm = cfg.grad_clip;
  tc.num_threads = cfg.threads;

  TrainContext ctx{&cfg, {}};
  auto on_epoch = [](uint32_t epoch, double mean_loss, const sandhi_model* model,
                     void* user) {
    auto* c = static_cast<TrainContext*>(user);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", mean_loss);
    std::cout << epoch << "\t" << buf << "\n";
    c->loss_lines += std::to_string(epoch);
    c->loss_lines += '\t';
    c->loss_lines += buf;
    c->loss_lines += '\n';
    const uint32_t every = c->cfg->checkpoint_every;
    if (every > 0 && epoch % every == 0) {
      if (sandhi_model_save(model, c->cfg->checkpoint.c_str()) != SANDHI_OK) {
        die(sandhi_last_error());
      }
    }
  };

  ModelHandle model;
  check(sandhi_model_train(train, vocab, &tc, on_epoch, &ctx, model.slot()));
  check(sandhi_model_save(model, cfg.checkpoint.c_str()));
  if (!cfg.loss_out.empty()) spit(cfg.loss_out, ctx.loss_lines);
  std::cout << "checkpoint written to " << cfg.checkpoint << "\n";
  return 0;
}

int cmd_segment(const RunConfig& cfg) {
  if (cfg.checkpoint.empty() || cfg.vocab.empty() || cfg.input.empty()) {
    die("segment requires --checkpoint, --vocab and --input");
  }
  ModelHandle model;
  check(sandhi_model_load(cfg.checkpoint.c_str(), model.slot()));
  VocabHandle vocab;
  check(sandhi_vocab_load(cfg.vocab.c_str(), vocab.slot()));

  std::string out_text;
  for (const auto& line : slurp_lines(cfg.input)) {
    OwnedString segmented;
    check(sandhi_model_segment(model, vocab, line.c_str(), &segmented.ptr));
    out_text += segmented.str();
    out_text += '\n';
  }
  if (cfg.output.empty()) {
    std::cout << out_text;
  } else {
    spit(cfg.output, out_text);
  }
  return 0;
}

int cmd_eval(const RunConfig& cfg) {
  if (cfg.predictions.empty() || cfg.gold.empty()) {
    die("eval requires --predictions and --gold");
  }
  CorpusHandle gold;
  check(sandhi_corpus_load(cfg.gold.c_str(), gold.slot()));
  std::vector<std::string> lines = slurp_lines(cfg.predictions);
  std::vector<const char*> raw;
  raw.reserve(lines.size());
  for (const auto& l : lines) raw.push_back(l.c_str());

  ReportHandle report;
  check(sandhi_eval(raw.data(), raw.size(), gold, report.slot()));
  OwnedString rendered;
  check(sandhi_report_render(report, &rendered.ptr));
  std::cout << rendered.str();
  if (!cfg.report.empty()) spit(cfg.report, rendered.str());
  if (!cfg.lengths_csv.empty()) {
    OwnedString csv;
    check(sandhi_report_lengths_csv(report, &csv.ptr));
    spit(cfg.lengths_csv, csv.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;

  // The config file loads before flag parsing so flags take precedence.
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") apply_config_file(argv[i + 1], cfg);
  }

  CLI::App app{"Sanskrit sandhi splitting toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "flat key = value config file");
  app.add_option("--seed", cfg.seed, "random seed");

  auto* gen = app.add_subcommand("gen", "generate a synthetic parallel corpus");
  gen->add_option("--lexicon", cfg.lexicon, "word list file");
  gen->add_option("--rules", cfg.rules, "sandhi rule table");
  gen->add_option("--corpus", cfg.corpus, "output corpus file");
  gen->add_option("--n", cfg.n, "number of pairs");
  gen->add_option("--min-words", cfg.min_words, "minimum words per sentence");
  gen->add_option("--max-words", cfg.max_words, "maximum words per sentence");
  gen->add_option("--apply-probability", cfg.apply_probability,
                  "per-boundary fusion probability");

  auto* vocab = app.add_subcommand("vocab", "learn the subword vocabulary");
  vocab->add_option("--corpus", cfg.corpus, "training corpus (TSV)");
  vocab->add_option("--vocab", cfg.vocab, "output vocabulary file");
  vocab->add_option("--vocab-size", cfg.vocab_size, "target vocabulary size");
  vocab->add_option("--train-frac", cfg.train_frac, "training split fraction");
  vocab->add_option("--test-frac", cfg.test_frac, "held-out split fraction");
  vocab->add_option("--exclude", cfg.exclude, "file of corpus lines to exclude");

  auto* train = app.add_subcommand("train", "train the segmentation model");
  train->add_option("--corpus", cfg.corpus, "training corpus (TSV)");
  train->add_option("--vocab", cfg.vocab, "vocabulary file");
  train->add_option("--checkpoint", cfg.checkpoint, "output checkpoint file");
  train->add_option("--train-frac", cfg.train_frac, "training split fraction");
  train->add_option("--test-frac", cfg.test_frac, "held-out split fraction");
  train->add_option("--exclude", cfg.exclude, "file of corpus lines to exclude");
  train->add_option("--num-layers", cfg.num_layers, "LSTM layers per side");
  train->add_option("--embed-dim", cfg.embed_dim, "embedding size");
  train->add_option("--hidden-dim", cfg.hidden_dim, "LSTM cells per layer");
  train->add_option("--attention", cfg.attention, "enable attention (0/1)");
  train->add_option("--dropout", cfg.dropout, "dropout rate");
  train->add_option("--max-seq-len", cfg.max_seq_len, "sequence length cap");
  train->add_option("--batch-size", cfg.batch_size, "batch size");
  train->add_option("--lr", cfg.lr, "initial learning rate");
  train->add_option("--beta1", cfg.beta1, "Adam beta1");
  train->add_option("--beta2", cfg.beta2, "Adam beta2");
  train->add_option("--epochs", cfg.epochs, "training epochs");
  train->add_option("--grad-clip", cfg.grad_clip, "max gradient norm (0 = off)");
  train->add_option("--threads", cfg.threads, "worker threads (0 = auto)");
  train->add_option("--checkpoint-every", cfg.checkpoint_every,
                    "also write the checkpoint every N epochs");
  train->add_option("--loss-out", cfg.loss_out, "write the loss curve to a file");

  auto* segment = app.add_subcommand("segment", "segment sandhied input lines");
  segment->add_option("--checkpoint", cfg.checkpoint, "model checkpoint");
  segment->add_option("--vocab", cfg.vocab, "vocabulary file");
  segment->add_option("--input", cfg.input, "input file, one sandhied line each");
  segment->add_option("--output", cfg.output, "output file (default: stdout)");

  auto* eval = app.add_subcommand("eval", "score predictions against gold");
  eval->add_option("--predictions", cfg.predictions, "predicted segmentations, one per line");
  eval->add_option("--gold", cfg.gold, "gold corpus (TSV)");
  eval->add_option("--report", cfg.report, "write the rendered report to a file");
  eval->add_option("--lengths-csv", cfg.lengths_csv, "write the per-length CSV to a file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      echo_config("gen", cfg);
      return cmd_gen(cfg);
    }
    if (vocab->parsed()) {
      echo_config("vocab", cfg);
      return cmd_vocab(cfg);
    }
    if (train->parsed()) {
      echo_config("train", cfg);
      return cmd_train(cfg);
    }
    if (segment->parsed()) {
      echo_config("segment", cfg);
      return cmd_segment(cfg);
    }
    if (eval->parsed()) {
      echo_config("eval", cfg);
      return cmd_eval(cfg);
    }
  } catch (const std::exception& e) {
    die(e.what());
  }
  return 0;
}
