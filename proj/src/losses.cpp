#include "losses.hpp"

#include <cmath>
#include <string>

namespace mlcl {

double jaccard_coefficient(const LabelSet& a, const LabelSet& b) {
  if (a.width() != b.width()) fail(ErrorCode::kInvalidArgument, "jaccard: label width mismatch");
  const std::size_t uni = union_count(a, b);
  if (uni == 0) fail(ErrorCode::kInvalidArgument, "jaccard undefined for two empty label sets");
  return static_cast<double>(intersection_count(a, b)) / static_cast<double>(uni);
}

void LossConfig::validate() const {
  if (!(tau > 0.0)) fail(ErrorCode::kInvalidArgument, "tau must be positive");
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorCode::kInvalidArgument, "alpha must be in [0, 1]");
}

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "scl") return LossKind::kScl;
  if (name == "jscl") return LossKind::kJscl;
  if (name == "jspcl") return LossKind::kJspcl;
  if (name == "slcl") return LossKind::kSlcl;
  if (name == "icl") return LossKind::kIcl;
  if (name == "none") return LossKind::kNone;
  fail(ErrorCode::kParse, "unknown loss kind '" + name + "'");
}

const char* loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::kScl: return "scl";
    case LossKind::kJscl: return "jscl";
    case LossKind::kJspcl: return "jspcl";
    case LossKind::kSlcl: return "slcl";
    case LossKind::kIcl: return "icl";
    case LossKind::kNone: return "none";
  }
  return "?";
}

JaccardMode jaccard_mode_from_string(const std::string& name) {
  if (name == "outside" || name == "outside_log") return JaccardMode::kOutsideLog;
  if (name == "inside" || name == "inside_log") return JaccardMode::kInsideLog;
  fail(ErrorCode::kParse, "unknown jaccard mode '" + name + "'");
}

const char* jaccard_mode_name(JaccardMode mode) {
  return mode == JaccardMode::kOutsideLog ? "outside_log" : "inside_log";
}

namespace {

void check_batch(const Batch& batch, std::size_t min_size) {
  if (batch.size() < min_size) {
    fail(ErrorCode::kInvalidArgument,
         "batch too small: need at least " + std::to_string(min_size) + " samples");
  }
}

void check_aligned(std::size_t field_size, std::size_t k, const char* field) {
  if (field_size != k) {
    fail(ErrorCode::kInvalidArgument, std::string("batch extents inconsistent: ") + field);
  }
}

void check_probabilities(std::span<const Var> probabilities) {
  for (const Var& p : probabilities) {
    for (double v : p.values()) {
      if (!(v > 0.0 && v < 1.0)) {
        fail(ErrorCode::kNumeric, "probability out of range (0, 1)");
      }
    }
  }
}

/// Pairwise cosine similarities of K vectors; entry (i, j) is computed once
/// per unordered pair, which keeps the matrix exactly symmetric.
class SimilarityTable {
 public:
  SimilarityTable(Tape& tape, std::span<const Var> vectors) : k_(vectors.size()), sims_(k_ * k_) {
    for (std::size_t i = 0; i < k_; ++i) {
      for (std::size_t j = i + 1; j < k_; ++j) {
        sims_[i * k_ + j] = tape.cosine_similarity(vectors[i], vectors[j]);
        sims_[j * k_ + i] = sims_[i * k_ + j];
      }
    }
  }

  Var at(std::size_t i, std::size_t j) const { return sims_[i * k_ + j]; }

 private:
  std::size_t k_;
  std::vector<Var> sims_;
};

/// log Σ_{k≠i} exp(sim(i,k)/τ) for each anchor i.
std::vector<Var> anchor_denominators(Tape& tape, const SimilarityTable& sims, std::size_t k,
                                     double tau) {
  std::vector<Var> out;
  out.reserve(k);
  std::vector<Var> scaled;
  for (std::size_t i = 0; i < k; ++i) {
    scaled.clear();
    for (std::size_t j = 0; j < k; ++j) {
      if (j != i) scaled.push_back(tape.scale(sims.at(i, j), 1.0 / tau));
    }
    out.push_back(tape.log_sum_exp(tape.stack(scaled)));
  }
  return out;
}

Var mean_or_zero(Tape& tape, std::span<const Var> terms) {
  if (terms.empty()) return tape.scalar_constant(0.0);
  return tape.scale(tape.sum(terms), 1.0 / static_cast<double>(terms.size()));
}

Var jaccard_weighted_loss(Tape& tape, std::span<const Var> features,
                          std::span<const LabelSet> label_sets, const LossConfig& cfg) {
  const std::size_t k = label_sets.size();
  SimilarityTable sims(tape, features);
  std::vector<Var> denominators = anchor_denominators(tape, sims, k, cfg.tau);

  std::vector<Var> anchor_terms;
  std::vector<Var> contributions;
  for (std::size_t i = 0; i < k; ++i) {
    contributions.clear();
    for (std::size_t s = 0; s < k; ++s) {
      if (s == i) continue;
      const double weight = jaccard_coefficient(label_sets[i], label_sets[s]);
      if (weight == 0.0) continue;  // zero contribution outside the log, undefined inside
      Var log_softmax = tape.sub(tape.scale(sims.at(i, s), 1.0 / cfg.tau), denominators[i]);
      if (cfg.jaccard_mode == JaccardMode::kOutsideLog) {
        contributions.push_back(tape.scale(log_softmax, weight));
      } else {
        contributions.push_back(tape.add_scalar(log_softmax, std::log(weight)));
      }
    }
    // Every anchor contributes, normalized by its K-1 candidates.
    anchor_terms.push_back(
        tape.scale(tape.sum(contributions), -1.0 / static_cast<double>(k - 1)));
  }
  return mean_or_zero(tape, anchor_terms);
}

}  // namespace

Var scl_loss(Tape& tape, const Batch& batch, const LossConfig& cfg) {
  cfg.validate();
  check_batch(batch, 2);
  const std::size_t k = batch.size();
  check_aligned(batch.sentence_embeddings.size(), k, "sentence_embeddings");
  SimilarityTable sims(tape, batch.sentence_embeddings);
  std::vector<Var> denominators = anchor_denominators(tape, sims, k, cfg.tau);

  std::vector<Var> anchor_terms;
  std::vector<Var> positive_terms;
  for (std::size_t i = 0; i < k; ++i) {
    positive_terms.clear();
    for (std::size_t s = 0; s < k; ++s) {
      if (s == i || !(batch.label_sets[s] == batch.label_sets[i])) continue;
      positive_terms.push_back(
          tape.sub(tape.scale(sims.at(i, s), 1.0 / cfg.tau), denominators[i]));
    }
    if (positive_terms.empty()) continue;
    anchor_terms.push_back(
        tape.scale(tape.sum(positive_terms), -1.0 / static_cast<double>(positive_terms.size())));
  }
  return mean_or_zero(tape, anchor_terms);
}

Var jscl_loss(Tape& tape, const Batch& batch, const LossConfig& cfg) {
  cfg.validate();
  check_batch(batch, 2);
  check_aligned(batch.sentence_embeddings.size(), batch.size(), "sentence_embeddings");
  return jaccard_weighted_loss(tape, batch.sentence_embeddings, batch.label_sets, cfg);
}

Var jspcl_loss(Tape& tape, const Batch& batch, const LossConfig& cfg) {
  cfg.validate();
  check_batch(batch, 2);
  check_aligned(batch.probabilities.size(), batch.size(), "probabilities");
  check_probabilities(batch.probabilities);
  return jaccard_weighted_loss(tape, batch.probabilities, batch.label_sets, cfg);
}

Var slcl_loss(Tape& tape, const Batch& batch, const LossConfig& cfg) {
  cfg.validate();
  check_batch(batch, 2);
  const std::size_t k = batch.size();
  check_aligned(batch.sentence_embeddings.size(), k, "sentence_embeddings");
  SimilarityTable sims(tape, batch.sentence_embeddings);
  std::vector<Var> denominators = anchor_denominators(tape, sims, k, cfg.tau);

  std::vector<Var> anchor_terms;
  std::vector<Var> label_terms;
  std::vector<Var> positive_terms;
  for (std::size_t i = 0; i < k; ++i) {
    label_terms.clear();
    for (std::size_t j : batch.label_sets[i].active()) {
      positive_terms.clear();
      for (std::size_t s = 0; s < k; ++s) {
        if (s == i || !batch.label_sets[s].test(j)) continue;
        positive_terms.push_back(
            tape.sub(tape.scale(sims.at(i, s), 1.0 / cfg.tau), denominators[i]));
      }
      if (positive_terms.empty()) continue;
      label_terms.push_back(
          tape.scale(tape.sum(positive_terms), -1.0 / static_cast<double>(positive_terms.size())));
    }
    if (label_terms.empty()) continue;
    anchor_terms.push_back(
        tape.scale(tape.sum(label_terms), 1.0 / static_cast<double>(label_terms.size())));
  }
  return mean_or_zero(tape, anchor_terms);
}

Var icl_loss(Tape& tape, const Batch& batch, const LossConfig& cfg) {
  cfg.validate();
  check_batch(batch, 1);
  check_aligned(batch.label_embeddings.size(), batch.size(), "label_embeddings");
  const std::size_t l = batch.num_labels();
  if (l < 2) fail(ErrorCode::kInvalidArgument, "icl requires a label space of at least 2");

  std::vector<Var> sample_terms;
  std::vector<Var> label_terms;
  std::vector<Var> scaled;
  std::vector<Var> positive_terms;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const std::vector<std::size_t> active = batch.label_sets[i].active();
    if (active.size() < 2) continue;  // no positive pair inside the sample
    const std::vector<Var>& reps = batch.label_embeddings[i];
    SimilarityTable sims(tape, reps);

    label_terms.clear();
    for (std::size_t j : active) {
      scaled.clear();
      for (std::size_t c = 0; c < l; ++c) {
        if (c != j) scaled.push_back(tape.scale(sims.at(j, c), 1.0 / cfg.tau));
      }
      Var denominator = tape.log_sum_exp(tape.stack(scaled));
      positive_terms.clear();
      for (std::size_t s : active) {
        if (s == j) continue;
        positive_terms.push_back(
            tape.sub(tape.scale(sims.at(j, s), 1.0 / cfg.tau), denominator));
      }
      label_terms.push_back(
          tape.scale(tape.sum(positive_terms), -1.0 / static_cast<double>(positive_terms.size())));
    }
    sample_terms.push_back(
        tape.scale(tape.sum(label_terms), 1.0 / static_cast<double>(label_terms.size())));
  }
  return mean_or_zero(tape, sample_terms);
}

Var bce_loss(Tape& tape, std::span<const Var> probabilities, std::span<const LabelSet> targets) {
  if (probabilities.empty() || probabilities.size() != targets.size()) {
    fail(ErrorCode::kInvalidArgument, "bce: probabilities and targets must align");
  }
  check_probabilities(probabilities);
  const std::size_t l = targets[0].width();
  std::vector<Var> per_sample;
  per_sample.reserve(probabilities.size());
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    if (probabilities[i].numel() != l) fail(ErrorCode::kInvalidArgument, "bce: width mismatch");
    std::vector<double> mask(l, 0.0), inverse(l, 0.0);
    for (std::size_t j = 0; j < l; ++j) {
      mask[j] = targets[i].test(j) ? 1.0 : 0.0;
      inverse[j] = 1.0 - mask[j];
    }
    Var log_p = tape.log(probabilities[i]);
    Var log_1p = tape.log(tape.add_scalar(tape.neg(probabilities[i]), 1.0));
    Var pos = tape.sum(tape.mul(tape.constant({l}, std::move(mask)), log_p));
    Var negv = tape.sum(tape.mul(tape.constant({l}, std::move(inverse)), log_1p));
    per_sample.push_back(tape.add(pos, negv));
  }
  const double n = static_cast<double>(probabilities.size() * l);
  return tape.scale(tape.sum(per_sample), -1.0 / n);
}

Var combined_objective(Tape& tape, Var cl, Var bce, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorCode::kInvalidArgument, "alpha must be in [0, 1]");
  return tape.add(tape.scale(cl, alpha), tape.scale(bce, 1.0 - alpha));
}

Var contrastive_loss(Tape& tape, const Batch& batch, const LossConfig& cfg) {
  switch (cfg.kind) {
    case LossKind::kScl: return scl_loss(tape, batch, cfg);
    case LossKind::kJscl: return jscl_loss(tape, batch, cfg);
    case LossKind::kJspcl: return jspcl_loss(tape, batch, cfg);
    case LossKind::kSlcl: return slcl_loss(tape, batch, cfg);
    case LossKind::kIcl: return icl_loss(tape, batch, cfg);
    case LossKind::kNone: break;
  }
  fail(ErrorCode::kInvalidArgument, "contrastive_loss called with kind none");
}

}  // namespace mlcl
