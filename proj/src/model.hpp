#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "corpus.hpp"
#include "optim.hpp"
#include "tape.hpp"
#include "tensor.hpp"
#include "vocab.hpp"

namespace sandhi {

struct ModelConfig {
  uint32_t num_layers = 3;
  uint32_t embed_dim = 128;
  uint32_t hidden_dim = 128;
  bool attention = true;
  double dropout_rate = 0.2;
  uint32_t max_seq_len = 35;
  uint32_t batch_size = 128;
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  uint32_t epochs = 80;
  uint32_t encoder_vocab_size = 0;
  uint32_t decoder_vocab_size = 0;
  uint64_t seed = 42;
  double grad_clip_norm = 0.0;  // <= 0 disables clipping

  void validate() const;
};

// One teacher-forcing example. src_ids holds the source pieces already
// reversed, real tokens first, padded to max_seq_len; tgt_ids is
// bos + pieces + eos padded likewise. Pad positions never enter the loss.
struct TrainingExample {
  std::vector<int32_t> src_ids;
  std::vector<int32_t> tgt_ids;

  size_t src_len() const;
  size_t target_steps() const;  // predicted tokens (pieces + eos)
};

TrainingExample prepare_example(std::string_view src_text, std::string_view tgt_text,
                                const SubwordVocab& vocab, uint32_t max_seq_len);

// Deep LSTM encoder-decoder over subword pieces: the encoder consumes the
// reversed source, the decoder starts from the final encoder state per layer
// and optionally attends over the encoder's top-layer states with global dot
// attention (context and hidden combined through a tanh projection).
class Seq2SeqModel {
 public:
  explicit Seq2SeqModel(const ModelConfig& cfg);

  // Checkpoint file: magic `SSEQ2`, u32 format version, named-tensor table,
  // then the config as a key=value text block.
  static Seq2SeqModel load(const std::string& path);
  void save(const std::string& path) const;

  const ModelConfig& config() const { return cfg_; }
  uint32_t epoch() const { return epoch_; }
  std::span<const std::string> param_names() const { return names_; }
  std::vector<Tensor>& params() { return params_; }
  const std::vector<Tensor>& params() const { return params_; }
  Tensor& param(std::string_view name);

  // Rejects a vocabulary whose size disagrees with the checkpoint config.
  void check_vocab(const SubwordVocab& vocab) const;

  using EpochCallback = std::function<void(uint32_t epoch, double mean_loss)>;

  // Teacher-forced training minimizing mean token-level NLL; shuffles with
  // the seeded rng each epoch and reports the per-epoch mean loss. The
  // gradient reduction runs over a fixed number of contiguous shards, so
  // results are bit-identical for any thread count.
  std::vector<double> train(const ParallelCorpus& corpus, const SubwordVocab& vocab,
                            uint32_t num_threads, const EpochCallback& on_epoch);

  // Mean token NLL of a batch; `training` enables dropout, with masks drawn
  // from dropout_seed so repeated calls see identical noise.
  double batch_mean_loss(std::span<const TrainingExample> batch, bool training,
                         uint64_t dropout_seed) const;
  std::pair<double, std::vector<Tensor>> loss_and_grads(std::span<const TrainingExample> batch,
                                                        bool training,
                                                        uint64_t dropout_seed) const;

  // Encodes and reverses the source, then feeds back the argmax token from
  // bos until eos or 2*max_seq_len emitted tokens. Returned pieces exclude
  // bos/eos.
  std::vector<int32_t> greedy_decode(std::string_view src_text,
                                     const SubwordVocab& vocab) const;

  // greedy_decode + decode_pieces + split on spaces.
  std::vector<std::string> segment(std::string_view raw_text,
                                   const SubwordVocab& vocab) const;

 private:
  struct ExampleLoss {
    int loss_node;
    size_t tokens;
  };

  Seq2SeqModel() = default;
  void build_params();
  int32_t param_index(std::string_view name) const;
  ExampleLoss build_example_loss(Tape& tape, const TrainingExample& ex, bool training,
                                 Rng& dropout_rng) const;

  ModelConfig cfg_;
  std::vector<std::string> names_;
  std::vector<Tensor> params_;
  AdamState adam_;
  uint32_t epoch_ = 0;
};

}  // namespace sandhi
