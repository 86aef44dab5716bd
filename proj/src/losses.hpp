#pragma once

#include <span>
#include <string>
#include <vector>

#include "labelset.hpp"
#include "tensor.hpp"

namespace mlcl {

enum class LossKind { kScl, kJscl, kJspcl, kSlcl, kIcl, kNone };

/// Placement of the Jaccard weight in the JSCL/JSPCL contrast term.
/// kOutsideLog multiplies the log-softmax term by the weight, so partial
/// label matches are pulled proportionally; kInsideLog keeps the weight
/// inside the log, where it only shifts the term by a constant.
enum class JaccardMode { kOutsideLog, kInsideLog };

struct LossConfig {
  double tau = 1.0;
  double alpha = 0.0;
  LossKind kind = LossKind::kNone;
  JaccardMode jaccard_mode = JaccardMode::kOutsideLog;

  void validate() const;
};

LossKind loss_kind_from_string(const std::string& name);
const char* loss_kind_name(LossKind kind);
JaccardMode jaccard_mode_from_string(const std::string& name);
const char* jaccard_mode_name(JaccardMode mode);

/// One minibatch of model outputs, all recorded on the same tape.
/// sentence_embeddings[i] is the sentence vector of sample i (d),
/// label_embeddings[i][j] the representation of label j in sample i (d),
/// probabilities[i] the per-label probability vector of sample i (l).
struct Batch {
  std::vector<Var> sentence_embeddings;
  std::vector<std::vector<Var>> label_embeddings;
  std::vector<LabelSet> label_sets;
  std::vector<Var> probabilities;

  std::size_t size() const { return label_sets.size(); }
  std::size_t num_labels() const { return label_sets.empty() ? 0 : label_sets[0].width(); }
};

/// Strict contrast: positives are the other samples with exactly the same
/// label set. Anchors without a positive are skipped; the batch loss is the
/// mean over contributing anchors (0 when none contribute).
Var scl_loss(Tape& tape, const Batch& batch, const LossConfig& cfg);

/// Jaccard-weighted contrast over sentence embeddings: every other sample
/// is a candidate, weighted by the label-set Jaccard coefficient.
Var jscl_loss(Tape& tape, const Batch& batch, const LossConfig& cfg);

/// JSCL computed on the probability vectors instead of the sentence
/// embeddings.
Var jspcl_loss(Tape& tape, const Batch& batch, const LossConfig& cfg);

/// Per-label contrast: for each active label of the anchor, positives are
/// the samples sharing that label; a per-anchor loss averages the per-label
/// terms with non-empty positive sets.
Var slcl_loss(Tape& tape, const Batch& batch, const LossConfig& cfg);

/// Within-sample contrast between label representations: for each sample,
/// the active labels pull one another together against all l label slots.
Var icl_loss(Tape& tape, const Batch& batch, const LossConfig& cfg);

/// Mean binary cross-entropy over all K·l (probability, target-bit) pairs.
/// Probabilities must be strictly inside (0, 1).
Var bce_loss(Tape& tape, std::span<const Var> probabilities, std::span<const LabelSet> targets);

/// α·cl + (1−α)·bce, with α in [0, 1].
Var combined_objective(Tape& tape, Var cl, Var bce, double alpha);

/// Dispatches on cfg.kind; cfg.kind must not be kNone.
Var contrastive_loss(Tape& tape, const Batch& batch, const LossConfig& cfg);

}  // namespace mlcl
