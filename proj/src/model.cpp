#include "model.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <map>
#include <thread>

#include "text.hpp"

namespace sandhi {

namespace {

constexpr char kMagic[5] = {'S', 'S', 'E', 'Q', '2'};
constexpr uint32_t kFormatVersion = 1;
// Gradients reduce over this fixed shard count in shard order, independent of
// how many threads execute the shards.
constexpr size_t kGradShards = 8;

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<uint64_t>(v)); }

struct ByteReader {
  std::string_view data;
  size_t pos = 0;

  void require(size_t n) const {
    if (pos + n > data.size()) fail(ErrorKind::format, "truncated checkpoint file");
  }
  std::string_view bytes(size_t n) {
    require(n);
    auto s = data.substr(pos, n);
    pos += n;
    return s;
  }
  uint32_t u32() {
    require(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<uint32_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
    }
    pos += 4;
    return v;
  }
  uint64_t u64() {
    require(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<uint64_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
    }
    pos += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
};

std::vector<std::pair<std::string, std::vector<size_t>>> param_schema(const ModelConfig& c) {
  std::vector<std::pair<std::string, std::vector<size_t>>> schema;
  const size_t e = c.embed_dim, h = c.hidden_dim;
  schema.push_back({"enc.embed", {c.encoder_vocab_size, e}});
  for (uint32_t l = 0; l < c.num_layers; ++l) {
    const std::string base = "enc.l" + std::to_string(l) + ".";
    schema.push_back({base + "W", {4 * h, l == 0 ? e : h}});
    schema.push_back({base + "U", {4 * h, h}});
    schema.push_back({base + "b", {4 * h}});
  }
  schema.push_back({"dec.embed", {c.decoder_vocab_size, e}});
  for (uint32_t l = 0; l < c.num_layers; ++l) {
    const std::string base = "dec.l" + std::to_string(l) + ".";
    schema.push_back({base + "W", {4 * h, l == 0 ? e : h}});
    schema.push_back({base + "U", {4 * h, h}});
    schema.push_back({base + "b", {4 * h}});
  }
  if (c.attention) {
    schema.push_back({"attn.proj.W", {h, 2 * h}});
    schema.push_back({"attn.proj.b", {h}});
  }
  schema.push_back({"out.W", {c.decoder_vocab_size, h}});
  schema.push_back({"out.b", {c.decoder_vocab_size}});
  return schema;
}

std::string config_to_text(const ModelConfig& c, uint32_t epoch, const AdamState* adam) {
  std::string out;
  auto kv = [&out](std::string_view k, const std::string& v) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  };
  kv("num_layers", std::to_string(c.num_layers));
  kv("embed_dim", std::to_string(c.embed_dim));
  kv("hidden_dim", std::to_string(c.hidden_dim));
  kv("attention", c.attention ? "1" : "0");
  kv("dropout_rate", format_double(c.dropout_rate));
  kv("max_seq_len", std::to_string(c.max_seq_len));
  kv("batch_size", std::to_string(c.batch_size));
  kv("lr", format_double(c.lr));
  kv("beta1", format_double(c.beta1));
  kv("beta2", format_double(c.beta2));
  kv("epochs", std::to_string(c.epochs));
  kv("encoder_vocab_size", std::to_string(c.encoder_vocab_size));
  kv("decoder_vocab_size", std::to_string(c.decoder_vocab_size));
  kv("seed", std::to_string(c.seed));
  kv("grad_clip_norm", format_double(c.grad_clip_norm));
  kv("epoch", std::to_string(epoch));
  if (adam && adam->initialized()) {
    kv("adam_t", std::to_string(adam->step_count()));
  }
  return out;
}

std::map<std::string, std::string, std::less<>> parse_kv_block(std::string_view text) {
  std::map<std::string, std::string, std::less<>> kv;
  for (const auto& line : split_lines(text)) {
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::format, "malformed config line: " + line);
    auto trim = [](std::string s) {
      const size_t a = s.find_first_not_of(" \t");
      const size_t b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

}  // namespace

void ModelConfig::validate() const {
  if (num_layers == 0 || embed_dim == 0 || hidden_dim == 0 || batch_size == 0 ||
      epochs == 0) {
    fail(ErrorKind::invalid_argument, "model config: counts must be positive");
  }
  if (max_seq_len < 2) {
    fail(ErrorKind::invalid_argument, "model config: max_seq_len must be at least 2");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    fail(ErrorKind::invalid_argument, "model config: dropout_rate must be in [0,1)");
  }
  if (encoder_vocab_size < SubwordVocab::kNumSpecials ||
      decoder_vocab_size < SubwordVocab::kNumSpecials) {
    fail(ErrorKind::invalid_argument, "model config: vocabulary sizes not set");
  }
  AdamHyper{lr, beta1, beta2, 1e-8}.validate();
}

size_t TrainingExample::src_len() const {
  size_t n = 0;
  while (n < src_ids.size() && src_ids[n] != SubwordVocab::kPadId) ++n;
  return n;
}

size_t TrainingExample::target_steps() const {
  size_t end = 0;
  while (end < tgt_ids.size() && tgt_ids[end] != SubwordVocab::kPadId) ++end;
  return end - 1;  // tgt_ids always starts with bos
}

TrainingExample prepare_example(std::string_view src_text, std::string_view tgt_text,
                                const SubwordVocab& vocab, uint32_t max_seq_len) {
  TrainingExample ex;
  ex.src_ids = vocab.encode(src_text);
  if (ex.src_ids.size() > max_seq_len) ex.src_ids.resize(max_seq_len);
  std::reverse(ex.src_ids.begin(), ex.src_ids.end());
  ex.src_ids.resize(max_seq_len, SubwordVocab::kPadId);

  std::vector<int32_t> tgt_pieces = vocab.encode(tgt_text);
  if (tgt_pieces.size() > static_cast<size_t>(max_seq_len) - 2) {
    tgt_pieces.resize(max_seq_len - 2);
  }
  ex.tgt_ids.reserve(max_seq_len);
  ex.tgt_ids.push_back(SubwordVocab::kBosId);
  ex.tgt_ids.insert(ex.tgt_ids.end(), tgt_pieces.begin(), tgt_pieces.end());
  ex.tgt_ids.push_back(SubwordVocab::kEosId);
  ex.tgt_ids.resize(max_seq_len, SubwordVocab::kPadId);
  return ex;
}

Seq2SeqModel::Seq2SeqModel(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  build_params();
  Rng rng(cfg_.seed);
  for (Tensor& p : params_) {
    for (double& v : p.values()) v = rng.uniform_range(-0.08, 0.08);
  }
}

void Seq2SeqModel::build_params() {
  names_.clear();
  params_.clear();
  for (auto& [name, shape] : param_schema(cfg_)) {
    names_.push_back(name);
    params_.emplace_back(shape);
  }
}

int32_t Seq2SeqModel::param_index(std::string_view name) const {
  for (size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int32_t>(i);
  }
  fail(ErrorKind::internal, "unknown parameter '" + std::string(name) + "'");
}

Tensor& Seq2SeqModel::param(std::string_view name) {
  return params_[static_cast<size_t>(param_index(name))];
}

void Seq2SeqModel::check_vocab(const SubwordVocab& vocab) const {
  const auto v = static_cast<uint32_t>(vocab.size());
  if (v != cfg_.encoder_vocab_size || v != cfg_.decoder_vocab_size) {
    fail(ErrorKind::invalid_argument,
         "vocabulary size " + std::to_string(v) + " does not match checkpoint config (" +
             std::to_string(cfg_.encoder_vocab_size) + "/" +
             std::to_string(cfg_.decoder_vocab_size) + ")");
  }
}

Seq2SeqModel::ExampleLoss Seq2SeqModel::build_example_loss(Tape& tape,
                                                           const TrainingExample& ex,
                                                           bool training,
                                                           Rng& dropout_rng) const {
  const uint32_t L = cfg_.num_layers;
  const bool drop = training && cfg_.dropout_rate > 0.0;

  const int enc_emb = tape.param(param_index("enc.embed"));
  const int dec_emb = tape.param(param_index("dec.embed"));
  std::vector<int> enc_w(L), enc_u(L), enc_b(L), dec_w(L), dec_u(L), dec_b(L);
  for (uint32_t l = 0; l < L; ++l) {
    const std::string el = "enc.l" + std::to_string(l) + ".";
    const std::string dl = "dec.l" + std::to_string(l) + ".";
    enc_w[l] = tape.param(param_index(el + "W"));
    enc_u[l] = tape.param(param_index(el + "U"));
    enc_b[l] = tape.param(param_index(el + "b"));
    dec_w[l] = tape.param(param_index(dl + "W"));
    dec_u[l] = tape.param(param_index(dl + "U"));
    dec_b[l] = tape.param(param_index(dl + "b"));
  }
  const int out_w = tape.param(param_index("out.W"));
  const int out_b = tape.param(param_index("out.b"));
  int attn_w = -1, attn_b = -1;
  if (cfg_.attention) {
    attn_w = tape.param(param_index("attn.proj.W"));
    attn_b = tape.param(param_index("attn.proj.b"));
  }

  const size_t src_len = ex.src_len();
  std::vector<int> prev(L, -1);
  std::vector<int> top_states;
  top_states.reserve(src_len);
  for (size_t t = 0; t < src_len; ++t) {
    int input = tape.embed_row(enc_emb, ex.src_ids[t]);
    for (uint32_t l = 0; l < L; ++l) {
      prev[l] = tape.lstm_cell_op(input, prev[l], enc_w[l], enc_u[l], enc_b[l]);
      input = prev[l];
      if (drop && l + 1 < L) input = tape.dropout_op(input, cfg_.dropout_rate, dropout_rng);
    }
    top_states.push_back(prev[L - 1]);
  }

  int enc_states = -1;
  if (cfg_.attention && src_len > 0) enc_states = tape.stack_rows(top_states);

  std::vector<int> dec_prev = prev;  // decoder starts from the final encoder state
  int zero_context = -1;
  const size_t steps = ex.target_steps();
  std::vector<int> step_losses;
  step_losses.reserve(steps);
  for (size_t t = 0; t < steps; ++t) {
    int input = tape.embed_row(dec_emb, ex.tgt_ids[t]);
    for (uint32_t l = 0; l < L; ++l) {
      dec_prev[l] = tape.lstm_cell_op(input, dec_prev[l], dec_w[l], dec_u[l], dec_b[l]);
      input = dec_prev[l];
      if (drop && l + 1 < L) input = tape.dropout_op(input, cfg_.dropout_rate, dropout_rng);
    }
    int feat = dec_prev[L - 1];
    if (cfg_.attention) {
      int context;
      if (enc_states >= 0) {
        const int scores = tape.matvec(enc_states, feat);
        const int weights = tape.softmax_op(scores);
        context = tape.mat_tvec(enc_states, weights);
      } else {
        // Empty source: nothing to attend over, the context is zero.
        if (zero_context < 0) zero_context = tape.zeros(cfg_.hidden_dim);
        context = zero_context;
      }
      feat = tape.tanh_op(tape.affine(attn_w, tape.concat(context, feat), attn_b));
    }
    const int logits = tape.affine(out_w, feat, out_b);
    step_losses.push_back(tape.softmax_xent_op(logits, ex.tgt_ids[t + 1]));
  }
  return {tape.sum_scalars(step_losses), steps};
}

double Seq2SeqModel::batch_mean_loss(std::span<const TrainingExample> batch, bool training,
                                     uint64_t dropout_seed) const {
  Tape tape(params_);
  double loss_sum = 0.0;
  size_t tokens = 0;
  for (size_t i = 0; i < batch.size(); ++i) {
    tape.reset();
    Rng rng(mix_seed(dropout_seed, i));
    const ExampleLoss el = build_example_loss(tape, batch[i], training, rng);
    loss_sum += tape.scalar(el.loss_node);
    tokens += el.tokens;
  }
  return loss_sum / static_cast<double>(tokens);
}

std::pair<double, std::vector<Tensor>> Seq2SeqModel::loss_and_grads(
    std::span<const TrainingExample> batch, bool training, uint64_t dropout_seed) const {
  Tape tape(params_);
  size_t tokens = 0;
  for (const TrainingExample& ex : batch) tokens += ex.target_steps();
  double loss_sum = 0.0;
  for (size_t i = 0; i < batch.size(); ++i) {
    tape.reset();
    Rng rng(mix_seed(dropout_seed, i));
    const ExampleLoss el = build_example_loss(tape, batch[i], training, rng);
    loss_sum += tape.scalar(el.loss_node);
    tape.backward(el.loss_node, 1.0 / static_cast<double>(tokens));
  }
  return {loss_sum / static_cast<double>(tokens), std::move(tape.param_grads())};
}

std::vector<double> Seq2SeqModel::train(const ParallelCorpus& corpus,
                                        const SubwordVocab& vocab, uint32_t num_threads,
                                        const EpochCallback& on_epoch) {
  if (corpus.empty()) fail(ErrorKind::invalid_argument, "train: corpus is empty");
  cfg_.validate();
  check_vocab(vocab);

  std::vector<TrainingExample> examples;
  examples.reserve(corpus.size());
  for (const auto& p : corpus.pairs()) {
    examples.push_back(prepare_example(p.sandhied, p.unsandhied, vocab, cfg_.max_seq_len));
  }

  if (!adam_.initialized()) {
    adam_ = AdamState(params_, AdamHyper{cfg_.lr, cfg_.beta1, cfg_.beta2, 1e-8});
  }

  size_t threads = num_threads == 0 ? std::thread::hardware_concurrency() : num_threads;
  threads = std::clamp<size_t>(threads, 1, kGradShards);

  std::vector<Tape> shard_tapes;
  shard_tapes.reserve(kGradShards);
  for (size_t s = 0; s < kGradShards; ++s) shard_tapes.emplace_back(params_);

  std::vector<Tensor> grads;
  grads.reserve(params_.size());
  for (const Tensor& p : params_) grads.emplace_back(p.shape());

  Rng shuffle_rng(mix_seed(cfg_.seed, 1));
  std::vector<size_t> order(examples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<double> curve;
  curve.reserve(cfg_.epochs);
  for (uint32_t epoch = 1; epoch <= cfg_.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss_sum = 0.0;
    size_t epoch_tokens = 0;
    size_t batch_index = 0;

    for (size_t start = 0; start < order.size(); start += cfg_.batch_size, ++batch_index) {
      const size_t bn = std::min<size_t>(cfg_.batch_size, order.size() - start);
      size_t batch_tokens = 0;
      for (size_t j = 0; j < bn; ++j) batch_tokens += examples[order[start + j]].target_steps();

      std::array<double, kGradShards> shard_loss{};
      std::array<std::exception_ptr, kGradShards> shard_error{};

      auto run_shard = [&](size_t s) {
        const size_t lo = s * bn / kGradShards;
        const size_t hi = (s + 1) * bn / kGradShards;
        Tape& tape = shard_tapes[s];
        tape.zero_param_grads();
        for (size_t j = lo; j < hi; ++j) {
          const size_t idx = order[start + j];
          tape.reset();
          Rng dropout_rng(mix_seed(mix_seed(mix_seed(cfg_.seed, 2), epoch), idx));
          const ExampleLoss el = build_example_loss(tape, examples[idx], true, dropout_rng);
          shard_loss[s] += tape.scalar(el.loss_node);
          tape.backward(el.loss_node, 1.0 / static_cast<double>(batch_tokens));
        }
      };
      auto worker = [&](size_t w) {
        for (size_t s = w; s < kGradShards; s += threads) {
          try {
            run_shard(s);
          } catch (...) {
            shard_error[s] = std::current_exception();
          }
        }
      };

      std::vector<std::thread> pool;
      for (size_t w = 1; w < threads; ++w) pool.emplace_back(worker, w);
      worker(0);
      for (auto& th : pool) th.join();
      for (auto& err : shard_error) {
        if (err) std::rethrow_exception(err);
      }

      double batch_loss_sum = 0.0;
      for (double s : shard_loss) batch_loss_sum += s;
      const double batch_mean = batch_loss_sum / static_cast<double>(batch_tokens);
      if (!std::isfinite(batch_mean)) {
        fail(ErrorKind::numeric, "non-finite loss at epoch " + std::to_string(epoch) +
                                     ", batch " + std::to_string(batch_index));
      }

      for (size_t p = 0; p < grads.size(); ++p) {
        grads[p].fill(0.0);
        for (size_t s = 0; s < kGradShards; ++s) {
          const Tensor& g = shard_tapes[s].param_grads()[p];
          double* dst = grads[p].data();
          const double* src = g.data();
          for (size_t i = 0; i < g.size(); ++i) dst[i] += src[i];
        }
      }
      clip_grad_norm(grads, cfg_.grad_clip_norm);
      adam_.step(params_, grads, names_);

      epoch_loss_sum += batch_loss_sum;
      epoch_tokens += batch_tokens;
    }

    const double epoch_mean = epoch_loss_sum / static_cast<double>(epoch_tokens);
    epoch_ = epoch;
    curve.push_back(epoch_mean);
    if (on_epoch) on_epoch(epoch, epoch_mean);
  }
  return curve;
}

std::vector<int32_t> Seq2SeqModel::greedy_decode(std::string_view src_text,
                                                 const SubwordVocab& vocab) const {
  check_vocab(vocab);
  const uint32_t L = cfg_.num_layers;
  const size_t h = cfg_.hidden_dim;

  std::vector<int32_t> src = vocab.encode(src_text);
  if (src.size() > cfg_.max_seq_len) src.resize(cfg_.max_seq_len);
  std::reverse(src.begin(), src.end());

  const Tensor& enc_embed = params_[static_cast<size_t>(param_index("enc.embed"))];
  const Tensor& dec_embed = params_[static_cast<size_t>(param_index("dec.embed"))];
  std::vector<LstmParamsRef> enc_p, dec_p;
  for (uint32_t l = 0; l < L; ++l) {
    const std::string el = "enc.l" + std::to_string(l) + ".";
    const std::string dl = "dec.l" + std::to_string(l) + ".";
    enc_p.push_back({params_[static_cast<size_t>(param_index(el + "W"))],
                     params_[static_cast<size_t>(param_index(el + "U"))],
                     params_[static_cast<size_t>(param_index(el + "b"))]});
    dec_p.push_back({params_[static_cast<size_t>(param_index(dl + "W"))],
                     params_[static_cast<size_t>(param_index(dl + "U"))],
                     params_[static_cast<size_t>(param_index(dl + "b"))]});
  }
  const Tensor& out_w = params_[static_cast<size_t>(param_index("out.W"))];
  const Tensor& out_b = params_[static_cast<size_t>(param_index("out.b"))];

  std::vector<Tensor> hs(L, Tensor::vec(h)), cs(L, Tensor::vec(h));
  Tensor enc_states;
  if (!src.empty()) {
    enc_states = Tensor::mat(src.size(), h);
    Tensor x = Tensor::vec(cfg_.embed_dim);
    std::vector<double> gates(4 * h);
    Tensor h_new = Tensor::vec(h), c_new = Tensor::vec(h);
    for (size_t t = 0; t < src.size(); ++t) {
      const double* row = enc_embed.row(static_cast<size_t>(src[t]));
      std::copy(row, row + cfg_.embed_dim, x.data());
      const double* input = x.data();
      size_t d = cfg_.embed_dim;
      for (uint32_t l = 0; l < L; ++l) {
        lstm_cell_forward(input, d, hs[l].data(), cs[l].data(), enc_p[l], h, gates.data(),
                          c_new.data(), h_new.data());
        std::swap(hs[l], h_new);
        std::swap(cs[l], c_new);
        input = hs[l].data();
        d = h;
      }
      std::copy(hs[L - 1].data(), hs[L - 1].data() + h, enc_states.row(t));
    }
  }

  std::vector<int32_t> emitted;
  int32_t prev_token = SubwordVocab::kBosId;
  Tensor x = Tensor::vec(cfg_.embed_dim);
  std::vector<double> gates(4 * h);
  Tensor h_new = Tensor::vec(h), c_new = Tensor::vec(h);
  Tensor logits = Tensor::vec(cfg_.decoder_vocab_size);
  const size_t max_steps = 2 * static_cast<size_t>(cfg_.max_seq_len);
  for (size_t step = 0; step < max_steps; ++step) {
    const double* row = dec_embed.row(static_cast<size_t>(prev_token));
    std::copy(row, row + cfg_.embed_dim, x.data());
    const double* input = x.data();
    size_t d = cfg_.embed_dim;
    for (uint32_t l = 0; l < L; ++l) {
      lstm_cell_forward(input, d, hs[l].data(), cs[l].data(), dec_p[l], h, gates.data(),
                        c_new.data(), h_new.data());
      std::swap(hs[l], h_new);
      std::swap(cs[l], c_new);
      input = hs[l].data();
      d = h;
    }

    const Tensor* feat = &hs[L - 1];
    Tensor attn_h;
    if (cfg_.attention) {
      Tensor cat = Tensor::vec(2 * h);
      if (enc_states.defined()) {
        AttentionResult att = attention(hs[L - 1], enc_states);
        std::copy(att.context.data(), att.context.data() + h, cat.data());
      }
      std::copy(hs[L - 1].data(), hs[L - 1].data() + h, cat.data() + h);
      const Tensor& aw = params_[static_cast<size_t>(param_index("attn.proj.W"))];
      const Tensor& ab = params_[static_cast<size_t>(param_index("attn.proj.b"))];
      attn_h = Tensor::vec(h);
      mat_vec(aw.data(), h, 2 * h, cat.data(), attn_h.data());
      for (size_t i = 0; i < h; ++i) attn_h[i] = std::tanh(attn_h[i] + ab[i]);
      feat = &attn_h;
    }

    mat_vec(out_w.data(), out_w.rows(), out_w.cols(), feat->data(), logits.data());
    size_t best = 0;
    double best_v = logits[0] + out_b[0];
    for (size_t i = 0; i < logits.size(); ++i) {
      const double v = logits[i] + out_b[i];
      if (v > best_v) {
        best_v = v;
        best = i;
      }
    }
    const auto token = static_cast<int32_t>(best);
    if (token == SubwordVocab::kEosId) break;
    emitted.push_back(token);
    prev_token = token;
  }
  return emitted;
}

std::vector<std::string> Seq2SeqModel::segment(std::string_view raw_text,
                                               const SubwordVocab& vocab) const {
  const std::vector<int32_t> pieces = greedy_decode(raw_text, vocab);
  return split_words(vocab.decode(pieces));
}

void Seq2SeqModel::save(const std::string& path) const {
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put_u32(out, kFormatVersion);

  const bool with_adam = adam_.initialized();
  const auto n_tensors =
      static_cast<uint32_t>(params_.size() * (with_adam ? 3 : 1));
  put_u32(out, n_tensors);

  auto put_tensor = [&out](const std::string& name, const Tensor& t) {
    put_u32(out, static_cast<uint32_t>(name.size()));
    out += name;
    put_u32(out, static_cast<uint32_t>(t.rank()));
    for (size_t d : t.shape()) put_u32(out, static_cast<uint32_t>(d));
    for (double v : t.values()) put_f64(out, v);
  };
  for (size_t i = 0; i < params_.size(); ++i) put_tensor(names_[i], params_[i]);
  if (with_adam) {
    for (size_t i = 0; i < params_.size(); ++i) {
      put_tensor("adam.m." + names_[i], adam_.first_moments()[i]);
    }
    for (size_t i = 0; i < params_.size(); ++i) {
      put_tensor("adam.v." + names_[i], adam_.second_moments()[i]);
    }
  }

  const std::string cfg_text = config_to_text(cfg_, epoch_, &adam_);
  put_u64(out, cfg_text.size());
  out += cfg_text;
  write_file(path, out);
}

Seq2SeqModel Seq2SeqModel::load(const std::string& path) {
  const std::string blob = read_file(path);
  ByteReader r{blob};

  if (r.bytes(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic))) {
    fail(ErrorKind::format, path + ": not a checkpoint (bad magic)");
  }
  const uint32_t version = r.u32();
  if (version != kFormatVersion) {
    fail(ErrorKind::format, path + ": unsupported checkpoint version " +
                                std::to_string(version));
  }

  const uint32_t n_tensors = r.u32();
  std::map<std::string, Tensor, std::less<>> tensors;
  for (uint32_t i = 0; i < n_tensors; ++i) {
    const uint32_t name_len = r.u32();
    std::string name(r.bytes(name_len));
    const uint32_t rank = r.u32();
    if (rank == 0 || rank > 2) fail(ErrorKind::format, path + ": bad tensor rank");
    std::vector<size_t> shape;
    for (uint32_t k = 0; k < rank; ++k) shape.push_back(r.u32());
    Tensor t(shape);
    for (double& v : t.values()) v = r.f64();
    if (!t.all_finite()) {
      fail(ErrorKind::format, path + ": non-finite values in tensor '" + name + "'");
    }
    if (!tensors.emplace(std::move(name), std::move(t)).second) {
      fail(ErrorKind::format, path + ": duplicate tensor");
    }
  }

  const uint64_t cfg_len = r.u64();
  const auto kv = parse_kv_block(r.bytes(cfg_len));
  auto get = [&kv, &path](std::string_view key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) {
      fail(ErrorKind::format, path + ": missing config key '" + std::string(key) + "'");
    }
    return it->second;
  };
  auto get_u64 = [&get, &path](std::string_view key) {
    uint64_t v = 0;
    if (!parse_uint64(get(key), v)) {
      fail(ErrorKind::format, path + ": malformed config value for '" + std::string(key) + "'");
    }
    return v;
  };

  Seq2SeqModel model;
  ModelConfig& c = model.cfg_;
  c.num_layers = static_cast<uint32_t>(get_u64("num_layers"));
  c.embed_dim = static_cast<uint32_t>(get_u64("embed_dim"));
  c.hidden_dim = static_cast<uint32_t>(get_u64("hidden_dim"));
  c.attention = get_u64("attention") != 0;
  c.dropout_rate = parse_double(get("dropout_rate"));
  c.max_seq_len = static_cast<uint32_t>(get_u64("max_seq_len"));
  c.batch_size = static_cast<uint32_t>(get_u64("batch_size"));
  c.lr = parse_double(get("lr"));
  c.beta1 = parse_double(get("beta1"));
  c.beta2 = parse_double(get("beta2"));
  c.epochs = static_cast<uint32_t>(get_u64("epochs"));
  c.encoder_vocab_size = static_cast<uint32_t>(get_u64("encoder_vocab_size"));
  c.decoder_vocab_size = static_cast<uint32_t>(get_u64("decoder_vocab_size"));
  c.seed = get_u64("seed");
  c.grad_clip_norm = parse_double(get("grad_clip_norm"));
  c.validate();
  model.epoch_ = static_cast<uint32_t>(get_u64("epoch"));

  model.build_params();
  for (size_t i = 0; i < model.names_.size(); ++i) {
    auto it = tensors.find(model.names_[i]);
    if (it == tensors.end()) {
      fail(ErrorKind::format, path + ": missing tensor '" + model.names_[i] + "'");
    }
    if (!it->second.same_shape(model.params_[i])) {
      fail(ErrorKind::format, path + ": tensor '" + model.names_[i] + "' has wrong shape");
    }
    model.params_[i] = std::move(it->second);
    tensors.erase(it);
  }

  if (kv.contains("adam_t")) {
    model.adam_ = AdamState(model.params_, AdamHyper{c.lr, c.beta1, c.beta2, 1e-8});
    model.adam_.set_step_count(get_u64("adam_t"));
    for (size_t i = 0; i < model.names_.size(); ++i) {
      for (auto [prefix, slot] :
           {std::pair{"adam.m.", &model.adam_.first_moments()},
            std::pair{"adam.v.", &model.adam_.second_moments()}}) {
        auto it = tensors.find(prefix + model.names_[i]);
        if (it == tensors.end()) {
          fail(ErrorKind::format, path + ": missing optimizer tensor for '" +
                                      model.names_[i] + "'");
        }
        (*slot)[i] = std::move(it->second);
        tensors.erase(it);
      }
    }
  }
  if (!tensors.empty()) {
    fail(ErrorKind::format, path + ": unexpected tensor '" + tensors.begin()->first + "'");
  }
  return model;
}

}  // namespace sandhi
