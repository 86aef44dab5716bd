#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "config.hpp"
#include "labelset.hpp"

namespace mlcl {

/// Reserved vocabulary id for tokens unseen at dataset-build time.
inline constexpr std::uint32_t kUnkTokenId = 0;

struct Example {
  std::vector<std::uint32_t> tokens;
  LabelSet labels;  // never empty
};

struct Dataset {
  std::vector<Example> examples;
  std::vector<std::string> label_names;
  std::vector<std::string> vocab;  // id -> token; vocab[0] is the UNK slot
  std::unordered_map<std::string, std::uint32_t> token_ids;

  std::size_t size() const { return examples.size(); }
  std::size_t num_labels() const { return label_names.size(); }
  std::size_t vocab_size() const { return vocab.size(); }
  std::vector<std::size_t> label_counts() const;
};

struct RawRecord {
  std::vector<std::string> tokens;
  std::vector<std::string> labels;
};

/// Builds a dataset from records: vocabulary and label space in first-seen
/// order, token ids starting at 1 (0 is UNK).
Dataset build_dataset(const std::vector<RawRecord>& records);

/// Re-encodes records under an existing vocabulary and label space.
/// Unknown tokens map to the UNK id; an unknown label is an error.
Dataset encode_with(const Dataset& reference, const std::vector<RawRecord>& records);

/// One JSON record per line with fields "text" (whitespace-tokenized) and
/// "labels" (non-empty string array). Errors carry the line number.
Dataset load_jsonl(const std::string& path);
void save_jsonl(const Dataset& dataset, const std::string& path);

std::vector<RawRecord> to_records(const Dataset& dataset);

struct SyntheticConfig {
  std::size_t n_labels = 0;
  std::size_t vocab_size = 0;
  std::size_t n_examples = 0;
  std::size_t tokens_per_example = 0;
  std::vector<double> cooccurrence;  // l x l row-major, symmetric, unit diagonal
  double multi_label_rate = 0.0;
  std::uint64_t seed = 0;

  /// Keys mirror the field names; `cooccurrence` is either a single number
  /// (uniform off-diagonal) or rows `a,b,...;c,d,...`.
  static SyntheticConfig from_config(const Config& cfg);
  void validate() const;
  double cooccurrence_at(std::size_t i, std::size_t j) const;
};

/// Each example draws a primary label uniformly; with probability
/// multi_label_rate every other label j joins independently with
/// probability cooccurrence[primary][j]. Tokens are drawn from per-label
/// partitions of the vocabulary, so the task is learnable from token
/// identity alone.
Dataset generate_synthetic(const SyntheticConfig& cfg);

struct Splits {
  Dataset train;
  Dataset valid;
  Dataset test;
};

/// Seeded-shuffle split into explicit counts (remainder is the test split).
/// Vocabulary and label space are rebuilt from the train subset; valid and
/// test are re-encoded under them.
Splits split_dataset(const Dataset& dataset, std::uint64_t seed, std::size_t n_train,
                     std::size_t n_valid);

/// Deterministic 70/10/20 split.
Splits split_dataset(const Dataset& dataset, std::uint64_t seed);

/// Partitions [0, n) into consecutive groups of batch_size (the final group
/// may be short), after an optional seeded shuffle.
std::vector<std::vector<std::size_t>> batch_iterator(std::size_t n, std::size_t batch_size,
                                                     std::uint64_t seed, bool shuffle);

}  // namespace mlcl
