// extern "C" surface: opaque handles over the core types, exceptions mapped
// to status codes with a thread-local message.

#include "sandhi/sandhi.h"

#include <cstring>
#include <string>

#include "corpus.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "model.hpp"
#include "rules.hpp"
#include "text.hpp"
#include "vocab.hpp"

struct sandhi_rules {
  sandhi::SandhiRuleSet rep;
};
struct sandhi_lexicon {
  sandhi::Lexicon rep;
};
struct sandhi_corpus {
  sandhi::ParallelCorpus rep;
};
struct sandhi_vocab {
  sandhi::SubwordVocab rep;
};
struct sandhi_model {
  sandhi::Seq2SeqModel rep;
};
struct sandhi_report {
  sandhi::EvalReport rep;
};

namespace {

thread_local std::string t_last_error;

sandhi_status status_of(sandhi::ErrorKind kind) {
  switch (kind) {
    case sandhi::ErrorKind::invalid_argument:
      return SANDHI_ERR_INVALID_ARGUMENT;
    case sandhi::ErrorKind::io:
      return SANDHI_ERR_IO;
    case sandhi::ErrorKind::parse:
      return SANDHI_ERR_PARSE;
    case sandhi::ErrorKind::format:
      return SANDHI_ERR_FORMAT;
    case sandhi::ErrorKind::numeric:
      return SANDHI_ERR_NUMERIC;
    case sandhi::ErrorKind::internal:
      return SANDHI_ERR_INTERNAL;
  }
  return SANDHI_ERR_INTERNAL;
}

template <typename Fn>
sandhi_status guarded(Fn&& fn) {
  try {
    fn();
    t_last_error.clear();
    return SANDHI_OK;
  } catch (const sandhi::Error& e) {
    t_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return SANDHI_ERR_INTERNAL;
  }
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

sandhi_status require_args(bool ok) {
  if (ok) return SANDHI_OK;
  t_last_error = "null argument";
  return SANDHI_ERR_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* sandhi_status_name(sandhi_status status) {
  switch (status) {
    case SANDHI_OK:
      return "ok";
    case SANDHI_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case SANDHI_ERR_IO:
      return "io error";
    case SANDHI_ERR_PARSE:
      return "parse error";
    case SANDHI_ERR_FORMAT:
      return "format error";
    case SANDHI_ERR_NUMERIC:
      return "numeric error";
    case SANDHI_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown";
}

const char* sandhi_last_error(void) { return t_last_error.c_str(); }

void sandhi_string_free(char* s) { delete[] s; }
void sandhi_ids_free(int32_t* ids) { delete[] ids; }

/* ---- rules / lexicon / corpus ---------------------------------------------- */

sandhi_status sandhi_rules_load(const char* path, double apply_probability,
                                sandhi_rules** out) {
  if (auto st = require_args(path && out)) return st;
  return guarded([&] {
    *out = new sandhi_rules{sandhi::SandhiRuleSet::load(path, apply_probability)};
  });
}

void sandhi_rules_free(sandhi_rules* rules) { delete rules; }

size_t sandhi_rules_count(const sandhi_rules* rules) {
  return rules ? rules->rep.rules().size() : 0;
}

sandhi_status sandhi_rules_apply(const sandhi_rules* rules, const char* left,
                                 const char* right, char** out) {
  if (auto st = require_args(rules && left && right && out)) return st;
  return guarded([&] { *out = copy_string(sandhi::apply_rule(left, right, rules->rep)); });
}

sandhi_status sandhi_lexicon_load(const char* path, sandhi_lexicon** out) {
  if (auto st = require_args(path && out)) return st;
  return guarded([&] { *out = new sandhi_lexicon{sandhi::Lexicon::load(path)}; });
}

void sandhi_lexicon_free(sandhi_lexicon* lexicon) { delete lexicon; }

size_t sandhi_lexicon_count(const sandhi_lexicon* lexicon) {
  return lexicon ? lexicon->rep.size() : 0;
}

sandhi_status sandhi_corpus_generate(const sandhi_lexicon* lexicon,
                                     const sandhi_rules* rules, size_t n_pairs,
                                     uint32_t min_words, uint32_t max_words,
                                     uint64_t seed, sandhi_corpus** out) {
  if (auto st = require_args(lexicon && rules && out)) return st;
  return guarded([&] {
    *out = new sandhi_corpus{sandhi::generate_corpus(lexicon->rep, n_pairs, min_words,
                                                     max_words, rules->rep, seed)};
  });
}

sandhi_status sandhi_corpus_load(const char* path, sandhi_corpus** out) {
  if (auto st = require_args(path && out)) return st;
  return guarded([&] { *out = new sandhi_corpus{sandhi::ParallelCorpus::load(path)}; });
}

sandhi_status sandhi_corpus_save(const sandhi_corpus* corpus, const char* path) {
  if (auto st = require_args(corpus && path)) return st;
  return guarded([&] { corpus->rep.save(path); });
}

void sandhi_corpus_free(sandhi_corpus* corpus) { delete corpus; }

size_t sandhi_corpus_count(const sandhi_corpus* corpus) {
  return corpus ? corpus->rep.size() : 0;
}

sandhi_status sandhi_corpus_get(const sandhi_corpus* corpus, size_t index,
                                char** sandhied, char** unsandhied) {
  if (auto st = require_args(corpus && sandhied && unsandhied)) return st;
  return guarded([&] {
    if (index >= corpus->rep.size()) {
      sandhi::fail(sandhi::ErrorKind::invalid_argument, "corpus index out of range");
    }
    const auto& p = corpus->rep.pair(index);
    *sandhied = copy_string(p.sandhied);
    *unsandhied = copy_string(p.unsandhied);
  });
}

sandhi_status sandhi_corpus_split(const sandhi_corpus* corpus, double train_frac,
                                  double test_frac, uint64_t seed,
                                  sandhi_corpus** train_out, sandhi_corpus** test_out) {
  if (auto st = require_args(corpus && train_out && test_out)) return st;
  return guarded([&] {
    auto [train, test] = corpus->rep.split_train_test(train_frac, test_frac, seed);
    *train_out = new sandhi_corpus{std::move(train)};
    *test_out = new sandhi_corpus{std::move(test)};
  });
}

sandhi_status sandhi_corpus_exclude(const sandhi_corpus* corpus,
                                    const char* const* lines, size_t n_lines,
                                    sandhi_corpus** out) {
  if (auto st = require_args(corpus && out && (n_lines == 0 || lines))) return st;
  return guarded([&] {
    std::vector<std::string> excluded(lines, lines + n_lines);
    *out = new sandhi_corpus{corpus->rep.without_lines(excluded)};
  });
}

/* ---- vocabulary -------------------------------------------------------------- */

sandhi_status sandhi_vocab_learn(const sandhi_corpus* corpus, uint32_t target_size,
                                 sandhi_vocab** out) {
  if (auto st = require_args(corpus && out)) return st;
  return guarded([&] {
    const auto lines = corpus->rep.all_lines();
    *out = new sandhi_vocab{sandhi::SubwordVocab::learn(lines, target_size)};
  });
}

sandhi_status sandhi_vocab_load(const char* path, sandhi_vocab** out) {
  if (auto st = require_args(path && out)) return st;
  return guarded([&] { *out = new sandhi_vocab{sandhi::SubwordVocab::load(path)}; });
}

sandhi_status sandhi_vocab_save(const sandhi_vocab* vocab, const char* path) {
  if (auto st = require_args(vocab && path)) return st;
  return guarded([&] { vocab->rep.save(path); });
}

void sandhi_vocab_free(sandhi_vocab* vocab) { delete vocab; }

uint32_t sandhi_vocab_size(const sandhi_vocab* vocab) {
  return vocab ? static_cast<uint32_t>(vocab->rep.size()) : 0;
}

sandhi_status sandhi_vocab_encode(const sandhi_vocab* vocab, const char* text,
                                  int32_t** ids, size_t* count) {
  if (auto st = require_args(vocab && text && ids && count)) return st;
  return guarded([&] {
    const auto encoded = vocab->rep.encode(text);
    auto* buf = new int32_t[encoded.size()];
    std::copy(encoded.begin(), encoded.end(), buf);
    *ids = buf;
    *count = encoded.size();
  });
}

sandhi_status sandhi_vocab_decode(const sandhi_vocab* vocab, const int32_t* ids,
                                  size_t count, char** text) {
  if (auto st = require_args(vocab && (count == 0 || ids) && text)) return st;
  return guarded([&] {
    *text = copy_string(vocab->rep.decode(std::span<const int32_t>(ids, count)));
  });
}

sandhi_status sandhi_vocab_realized_sizes(const sandhi_vocab* vocab,
                                          const sandhi_corpus* corpus,
                                          uint32_t* encoder_size,
                                          uint32_t* decoder_size) {
  if (auto st = require_args(vocab && corpus && encoder_size && decoder_size)) return st;
  return guarded([&] {
    std::vector<bool> enc_seen(static_cast<size_t>(vocab->rep.size()), false);
    std::vector<bool> dec_seen(enc_seen);
    auto tally = [&vocab](const std::string& line, std::vector<bool>& seen) {
      for (int32_t id : vocab->rep.encode(line)) {
        if (id >= sandhi::SubwordVocab::kNumSpecials) seen[static_cast<size_t>(id)] = true;
      }
    };
    for (const auto& p : corpus->rep.pairs()) {
      tally(p.sandhied, enc_seen);
      tally(p.unsandhied, dec_seen);
    }
    auto count = [](const std::vector<bool>& seen) {
      uint32_t n = 0;
      for (bool b : seen) n += b ? 1 : 0;
      return n;
    };
    *encoder_size = count(enc_seen);
    *decoder_size = count(dec_seen);
  });
}

/* ---- model -------------------------------------------------------------------- */

void sandhi_train_config_init(sandhi_train_config* config) {
  if (!config) return;
  *config = sandhi_train_config{
      .num_layers = 3,
      .embed_dim = 128,
      .hidden_dim = 128,
      .attention = 1,
      .dropout_rate = 0.2,
      .max_seq_len = 35,
      .batch_size = 128,
      .learning_rate = 0.001,
      .beta1 = 0.9,
      .beta2 = 0.999,
      .epochs = 80,
      .seed = 42,
      .grad_clip_norm = 0.0,
      .num_threads = 0,
  };
}

sandhi_status sandhi_model_train(const sandhi_corpus* corpus, const sandhi_vocab* vocab,
                                 const sandhi_train_config* config,
                                 sandhi_epoch_callback on_epoch, void* user,
                                 sandhi_model** out) {
  if (auto st = require_args(corpus && vocab && config && out)) return st;
  return guarded([&] {
    sandhi::ModelConfig mc;
    mc.num_layers = config->num_layers;
    mc.embed_dim = config->embed_dim;
    mc.hidden_dim = config->hidden_dim;
    mc.attention = config->attention != 0;
    mc.dropout_rate = config->dropout_rate;
    mc.max_seq_len = config->max_seq_len;
    mc.batch_size = config->batch_size;
    mc.lr = config->learning_rate;
    mc.beta1 = config->beta1;
    mc.beta2 = config->beta2;
    mc.epochs = config->epochs;
    mc.seed = config->seed;
    mc.grad_clip_norm = config->grad_clip_norm;
    mc.encoder_vocab_size = static_cast<uint32_t>(vocab->rep.size());
    mc.decoder_vocab_size = static_cast<uint32_t>(vocab->rep.size());

    auto* handle = new sandhi_model{sandhi::Seq2SeqModel(mc)};
    try {
      handle->rep.train(corpus->rep, vocab->rep, config->num_threads,
                        [&](uint32_t epoch, double mean_loss) {
                          if (on_epoch) on_epoch(epoch, mean_loss, handle, user);
                        });
    } catch (...) {
      delete handle;
      throw;
    }
    *out = handle;
  });
}

sandhi_status sandhi_model_save(const sandhi_model* model, const char* path) {
  if (auto st = require_args(model && path)) return st;
  return guarded([&] { model->rep.save(path); });
}

sandhi_status sandhi_model_load(const char* path, sandhi_model** out) {
  if (auto st = require_args(path && out)) return st;
  return guarded([&] { *out = new sandhi_model{sandhi::Seq2SeqModel::load(path)}; });
}

void sandhi_model_free(sandhi_model* model) { delete model; }

uint32_t sandhi_model_epoch(const sandhi_model* model) {
  return model ? model->rep.epoch() : 0;
}

sandhi_status sandhi_model_segment(const sandhi_model* model, const sandhi_vocab* vocab,
                                   const char* sandhied, char** segmented) {
  if (auto st = require_args(model && vocab && sandhied && segmented)) return st;
  return guarded([&] {
    const auto words = model->rep.segment(sandhied, vocab->rep);
    *segmented = copy_string(sandhi::join_words(words));
  });
}

/* ---- evaluation ----------------------------------------------------------------- */

sandhi_status sandhi_eval(const char* const* predictions, size_t n_predictions,
                          const sandhi_corpus* gold, sandhi_report** out) {
  if (auto st = require_args((n_predictions == 0 || predictions) && gold && out)) return st;
  return guarded([&] {
    std::vector<std::vector<std::string>> pred_words;
    pred_words.reserve(n_predictions);
    for (size_t i = 0; i < n_predictions; ++i) {
      pred_words.push_back(sandhi::split_words(predictions[i]));
    }
    *out = new sandhi_report{sandhi::evaluate_corpus(pred_words, gold->rep)};
  });
}

void sandhi_report_free(sandhi_report* report) { delete report; }

double sandhi_report_precision(const sandhi_report* report) {
  return report->rep.micro_precision;
}
double sandhi_report_recall(const sandhi_report* report) { return report->rep.micro_recall; }
double sandhi_report_f_score(const sandhi_report* report) { return report->rep.micro_f; }

sandhi_status sandhi_report_render(const sandhi_report* report, char** text) {
  if (auto st = require_args(report && text)) return st;
  return guarded([&] { *text = copy_string(sandhi::render_report(report->rep)); });
}

sandhi_status sandhi_report_lengths_csv(const sandhi_report* report, char** text) {
  if (auto st = require_args(report && text)) return st;
  return guarded([&] { *text = copy_string(sandhi::render_lengths_csv(report->rep)); });
}

}  // extern "C"
