/* Public C API for the sandhi toolkit.
 *
 * Every function returns a sandhi_status; on failure, sandhi_last_error()
 * yields a one-line message for the calling thread. Objects come back as
 * opaque handles and must be released with the matching *_free function.
 * Strings and id arrays returned through out-parameters are heap copies owned
 * by the caller; release them with sandhi_string_free / sandhi_ids_free.
 */
#ifndef SANDHI_SANDHI_H
#define SANDHI_SANDHI_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sandhi_status {
  SANDHI_OK = 0,
  SANDHI_ERR_INVALID_ARGUMENT = 1,
  SANDHI_ERR_IO = 2,
  SANDHI_ERR_PARSE = 3,
  SANDHI_ERR_FORMAT = 4,
  SANDHI_ERR_NUMERIC = 5,
  SANDHI_ERR_INTERNAL = 6,
} sandhi_status;

const char* sandhi_status_name(sandhi_status status);

/* Message for the most recent failure on this thread; empty string if none. */
const char* sandhi_last_error(void);

void sandhi_string_free(char* s);
void sandhi_ids_free(int32_t* ids);

/* ---- sandhi rules and synthetic generation -------------------------------- */

typedef struct sandhi_rules sandhi_rules;
typedef struct sandhi_lexicon sandhi_lexicon;
typedef struct sandhi_corpus sandhi_corpus;

/* Rule file: one `left<TAB>right<TAB>replacement<TAB>id` per line, `#` comments. */
sandhi_status sandhi_rules_load(const char* path, double apply_probability,
                                sandhi_rules** out);
void sandhi_rules_free(sandhi_rules* rules);
size_t sandhi_rules_count(const sandhi_rules* rules);

/* Fuses the boundary per the first matching rule or returns "left right". */
sandhi_status sandhi_rules_apply(const sandhi_rules* rules, const char* left,
                                 const char* right, char** out);

sandhi_status sandhi_lexicon_load(const char* path, sandhi_lexicon** out);
void sandhi_lexicon_free(sandhi_lexicon* lexicon);
size_t sandhi_lexicon_count(const sandhi_lexicon* lexicon);

/* Corpus file: one `sandhied<TAB>unsandhied` per line, LF endings. */
sandhi_status sandhi_corpus_generate(const sandhi_lexicon* lexicon,
                                     const sandhi_rules* rules, size_t n_pairs,
                                     uint32_t min_words, uint32_t max_words,
                                     uint64_t seed, sandhi_corpus** out);
sandhi_status sandhi_corpus_load(const char* path, sandhi_corpus** out);
sandhi_status sandhi_corpus_save(const sandhi_corpus* corpus, const char* path);
void sandhi_corpus_free(sandhi_corpus* corpus);
size_t sandhi_corpus_count(const sandhi_corpus* corpus);
sandhi_status sandhi_corpus_get(const sandhi_corpus* corpus, size_t index,
                                char** sandhied, char** unsandhied);

/* Seeded line-hash partition into train/test subsets. */
sandhi_status sandhi_corpus_split(const sandhi_corpus* corpus, double train_frac,
                                  double test_frac, uint64_t seed,
                                  sandhi_corpus** train_out, sandhi_corpus** test_out);

/* Drops pairs whose `sandhied<TAB>unsandhied` line matches one of `lines`. */
sandhi_status sandhi_corpus_exclude(const sandhi_corpus* corpus,
                                    const char* const* lines, size_t n_lines,
                                    sandhi_corpus** out);

/* ---- subword vocabulary ---------------------------------------------------- */

typedef struct sandhi_vocab sandhi_vocab;

/* Learns over both corpus columns. target_size caps the piece inventory
 * (4 specials + alphabet + merges). */
sandhi_status sandhi_vocab_learn(const sandhi_corpus* corpus, uint32_t target_size,
                                 sandhi_vocab** out);
sandhi_status sandhi_vocab_load(const char* path, sandhi_vocab** out);
sandhi_status sandhi_vocab_save(const sandhi_vocab* vocab, const char* path);
void sandhi_vocab_free(sandhi_vocab* vocab);
uint32_t sandhi_vocab_size(const sandhi_vocab* vocab);

sandhi_status sandhi_vocab_encode(const sandhi_vocab* vocab, const char* text,
                                  int32_t** ids, size_t* count);
sandhi_status sandhi_vocab_decode(const sandhi_vocab* vocab, const int32_t* ids,
                                  size_t count, char** text);

/* Distinct non-special pieces realized when encoding each corpus column
 * (sandhied -> encoder side, unsandhied -> decoder side). */
sandhi_status sandhi_vocab_realized_sizes(const sandhi_vocab* vocab,
                                          const sandhi_corpus* corpus,
                                          uint32_t* encoder_size,
                                          uint32_t* decoder_size);

/* ---- encoder-decoder model -------------------------------------------------- */

typedef struct sandhi_model sandhi_model;

typedef struct sandhi_train_config {
  uint32_t num_layers;    /* default 3 */
  uint32_t embed_dim;     /* default 128 */
  uint32_t hidden_dim;    /* default 128 */
  int attention;          /* default 1 */
  double dropout_rate;    /* default 0.2 */
  uint32_t max_seq_len;   /* default 35 */
  uint32_t batch_size;    /* default 128 */
  double learning_rate;   /* default 0.001 */
  double beta1;           /* default 0.9 */
  double beta2;           /* default 0.999 */
  uint32_t epochs;        /* default 80 */
  uint64_t seed;          /* default 42 */
  double grad_clip_norm;  /* default 0 (off) */
  uint32_t num_threads;   /* default 0 (auto) */
} sandhi_train_config;

void sandhi_train_config_init(sandhi_train_config* config);

/* Called after every epoch; `model` may be saved from inside the callback. */
typedef void (*sandhi_epoch_callback)(uint32_t epoch, double mean_loss,
                                      const sandhi_model* model, void* user);

sandhi_status sandhi_model_train(const sandhi_corpus* corpus, const sandhi_vocab* vocab,
                                 const sandhi_train_config* config,
                                 sandhi_epoch_callback on_epoch, void* user,
                                 sandhi_model** out);
sandhi_status sandhi_model_save(const sandhi_model* model, const char* path);
sandhi_status sandhi_model_load(const char* path, sandhi_model** out);
void sandhi_model_free(sandhi_model* model);
uint32_t sandhi_model_epoch(const sandhi_model* model);

/* Greedy decode + piece decoding; returns the predicted unsandhied words
 * joined by single spaces (empty string when the model emits nothing). */
sandhi_status sandhi_model_segment(const sandhi_model* model, const sandhi_vocab* vocab,
                                   const char* sandhied, char** segmented);

/* ---- evaluation -------------------------------------------------------------- */

typedef struct sandhi_report sandhi_report;

/* predictions[i] is a segmented sentence (words joined by spaces) matched
 * against the unsandhied side of gold pair i. */
sandhi_status sandhi_eval(const char* const* predictions, size_t n_predictions,
                          const sandhi_corpus* gold, sandhi_report** out);
void sandhi_report_free(sandhi_report* report);
double sandhi_report_precision(const sandhi_report* report);
double sandhi_report_recall(const sandhi_report* report);
double sandhi_report_f_score(const sandhi_report* report);

/* Human-readable table plus machine block of metric<TAB>value lines. */
sandhi_status sandhi_report_render(const sandhi_report* report, char** text);
/* Per-length CSV: gold_len,precision,recall,count. */
sandhi_status sandhi_report_lengths_csv(const sandhi_report* report, char** text);

#ifdef __cplusplus
}
#endif

#endif /* SANDHI_SANDHI_H */
