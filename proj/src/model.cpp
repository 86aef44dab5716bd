#include "model.hpp"

#include <cstring>
#include <fstream>

#include "rng.hpp"

namespace mlcl {

std::array<Tensor*, 6> EncoderParams::tensors() {
  return {&token_table, &label_table, &interaction, &interaction_bias, &readout, &readout_bias};
}

std::array<const Tensor*, 6> EncoderParams::tensors() const {
  return {&token_table, &label_table, &interaction, &interaction_bias, &readout, &readout_bias};
}

EncoderParams init_params(std::uint64_t seed, std::size_t vocab_size, std::size_t num_labels,
                          std::size_t hidden_dim, double scale) {
  if (vocab_size == 0 || num_labels == 0 || hidden_dim == 0) {
    fail(ErrorCode::kInvalidArgument, "init_params: extents must be at least 1");
  }
  if (!(scale > 0.0)) fail(ErrorCode::kInvalidArgument, "init_params: scale must be positive");

  EncoderParams p;
  p.vocab_size = vocab_size;
  p.num_labels = num_labels;
  p.hidden_dim = hidden_dim;
  p.init_seed = seed;
  p.init_scale = scale;
  p.token_table = Tensor({vocab_size, hidden_dim});
  p.label_table = Tensor({num_labels, hidden_dim});
  p.interaction = Tensor({2 * hidden_dim, hidden_dim});
  p.interaction_bias = Tensor({hidden_dim});
  p.readout = Tensor({hidden_dim});
  p.readout_bias = Tensor::scalar(0.0);

  Rng rng(seed);
  for (Tensor* t : p.tensors()) {
    for (double& v : t->values()) v = rng.uniform(-scale, scale);
  }
  return p;
}

ParamVars bind_trainable(Tape& tape, EncoderParams& params) {
  return {tape.leaf(params.token_table),      tape.leaf(params.label_table),
          tape.leaf(params.interaction),      tape.leaf(params.interaction_bias),
          tape.leaf(params.readout),          tape.leaf(params.readout_bias)};
}

ParamVars bind_frozen(Tape& tape, const EncoderParams& params) {
  return {tape.constant(params.token_table),      tape.constant(params.label_table),
          tape.constant(params.interaction),      tape.constant(params.interaction_bias),
          tape.constant(params.readout),          tape.constant(params.readout_bias)};
}

ModelOutput forward(Tape& tape, const ParamVars& params, std::span<const std::uint32_t> tokens) {
  if (tokens.empty()) fail(ErrorCode::kInvalidArgument, "forward: empty token sequence");
  const std::size_t vocab = params.token_table.shape()[0];
  const std::size_t num_labels = params.label_table.shape()[0];
  for (auto id : tokens) {
    if (id >= vocab) {
      fail(ErrorCode::kInvalidArgument,
           "forward: token id " + std::to_string(id) + " outside vocabulary");
    }
  }

  ModelOutput out;
  out.sentence_vector = tape.mean_axis(tape.rows(params.token_table, tokens), 0);
  out.label_vectors.reserve(num_labels);
  std::vector<Var> probs;
  probs.reserve(num_labels);
  for (std::size_t j = 0; j < num_labels; ++j) {
    Var joint = tape.concat(out.sentence_vector, tape.row(params.label_table, j));
    Var rep = tape.tanh(tape.add(tape.vecmat(joint, params.interaction), params.interaction_bias));
    out.label_vectors.push_back(rep);
    probs.push_back(tape.sigmoid(tape.add(tape.dot(params.readout, rep), params.readout_bias)));
  }
  out.probabilities = tape.stack(probs);
  return out;
}

namespace {

constexpr char kMagic[8] = {'M', 'L', 'C', 'L', 'M', 'D', 'L', '1'};
constexpr std::uint8_t kVersion = 1;

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(buf), 8);
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(os, bits);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char buf[8];
  is.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  const std::uint64_t bits = get_u64(is);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void save_checkpoint(const EncoderParams& params, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorCode::kIo, "cannot open checkpoint for writing: " + path);
  os.write(kMagic, sizeof(kMagic));
  os.put(static_cast<char>(kVersion));
  put_u64(os, params.init_seed);
  put_f64(os, params.init_scale);
  put_u64(os, params.vocab_size);
  put_u64(os, params.num_labels);
  put_u64(os, params.hidden_dim);
  for (const Tensor* t : params.tensors()) {
    for (double v : t->values()) put_f64(os, v);
  }
  if (!os) fail(ErrorCode::kIo, "short write to checkpoint: " + path);
}

EncoderParams load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::kIo, "cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    fail(ErrorCode::kParse, "not a model checkpoint: " + path);
  }
  const int version = is.get();
  if (version != kVersion) {
    fail(ErrorCode::kParse, "unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint64_t seed = get_u64(is);
  const double scale = get_f64(is);
  const std::uint64_t vocab = get_u64(is);
  const std::uint64_t labels = get_u64(is);
  const std::uint64_t dim = get_u64(is);
  if (!is || vocab == 0 || labels == 0 || dim == 0) {
    fail(ErrorCode::kParse, "corrupt checkpoint header: " + path);
  }

  EncoderParams p;
  p.vocab_size = vocab;
  p.num_labels = labels;
  p.hidden_dim = dim;
  p.init_seed = seed;
  p.init_scale = scale;
  p.token_table = Tensor({p.vocab_size, p.hidden_dim});
  p.label_table = Tensor({p.num_labels, p.hidden_dim});
  p.interaction = Tensor({2 * p.hidden_dim, p.hidden_dim});
  p.interaction_bias = Tensor({p.hidden_dim});
  p.readout = Tensor({p.hidden_dim});
  p.readout_bias = Tensor::scalar(0.0);
  for (Tensor* t : p.tensors()) {
    for (double& v : t->values()) v = get_f64(is);
  }
  if (!is) fail(ErrorCode::kParse, "truncated checkpoint: " + path);
  return p;
}

}  // namespace mlcl
