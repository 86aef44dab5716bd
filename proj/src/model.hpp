#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace mlcl {

/// Trainable weights of the encoder. The encoder mean-pools token
/// embeddings into a sentence vector e_t, forms a representation per label
/// via tanh(W·[e_t ; u_j] + b), and reads each label probability out of it
/// with a shared sigmoid head.
struct EncoderParams {
  std::size_t vocab_size = 0;
  std::size_t num_labels = 0;
  std::size_t hidden_dim = 0;
  std::uint64_t init_seed = 0;
  double init_scale = 0.0;

  Tensor token_table;       // V x d
  Tensor label_table;       // l x d
  Tensor interaction;       // 2d x d
  Tensor interaction_bias;  // d
  Tensor readout;           // d
  Tensor readout_bias;      // scalar

  std::array<Tensor*, 6> tensors();
  std::array<const Tensor*, 6> tensors() const;
  static constexpr std::array<const char*, 6> kTensorNames = {
      "token_table", "label_table", "interaction", "interaction_bias", "readout", "readout_bias"};
};

/// Uniform init in [−scale, scale]; the same seed gives bitwise-identical
/// tables.
EncoderParams init_params(std::uint64_t seed, std::size_t vocab_size, std::size_t num_labels,
                          std::size_t hidden_dim, double scale);

/// Parameter tensors bound onto a tape, either as trainable leaves or as
/// frozen constants.
struct ParamVars {
  Var token_table;
  Var label_table;
  Var interaction;
  Var interaction_bias;
  Var readout;
  Var readout_bias;
};

ParamVars bind_trainable(Tape& tape, EncoderParams& params);
ParamVars bind_frozen(Tape& tape, const EncoderParams& params);

/// Encoder outputs for one sample, recorded on the tape that bound the
/// parameters.
struct ModelOutput {
  Var sentence_vector;             // d
  std::vector<Var> label_vectors;  // l entries of d
  Var probabilities;               // l
};

ModelOutput forward(Tape& tape, const ParamVars& params, std::span<const std::uint32_t> tokens);

/// Checkpoint file layout (little-endian):
///   bytes 0..7   magic "MLCLMDL1"
///   byte  8      version (1)
///   u64          init seed
///   f64          init scale
///   u64 ×3       vocab size, label count, hidden dim
///   f64 arrays   token_table, label_table, interaction, interaction_bias,
///                readout, readout_bias (row-major)
void save_checkpoint(const EncoderParams& params, const std::string& path);
EncoderParams load_checkpoint(const std::string& path);

}  // namespace mlcl
