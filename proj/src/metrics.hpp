#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "data.hpp"
#include "model.hpp"

namespace mlcl {

/// Bit j is set iff p_j >= threshold; empty predictions are allowed.
std::vector<LabelSet> predict_labelsets(const EncoderParams& params, const Dataset& dataset,
                                        double threshold);

/// F1 over TP/FP/FN pooled across all labels. Zero-denominator F1 is 0.
double micro_f1(std::span<const LabelSet> preds, std::span<const LabelSet> golds);

/// Unweighted mean of per-label F1; labels never predicted nor present
/// contribute 0.
double macro_f1(std::span<const LabelSet> preds, std::span<const LabelSet> golds);
std::vector<double> per_label_f1(std::span<const LabelSet> preds, std::span<const LabelSet> golds);

/// Mean per-sample |pred ∩ gold| / |pred ∪ gold|; a sample with both sets
/// empty scores 1.
double jaccard_score(std::span<const LabelSet> preds, std::span<const LabelSet> golds);

struct ClusterAssignment {
  std::size_t dim = 0;
  std::vector<double> points;     // N x dim row-major
  std::vector<int> cluster_ids;   // N entries

  std::size_t size() const { return cluster_ids.size(); }
};

/// Calinski-Harabasz index [B/(k−1)] / [W/(N−k)]. nullopt when fewer than
/// 2 clusters, every point its own cluster, or zero within-cluster scatter.
std::optional<double> calinski_harabasz(const ClusterAssignment& assignment);

enum class SemanticDimension { kMulti, kSingle };

/// Embeds the dataset with the encoder's sentence vectors and scores how
/// separated the label-set clusters are. kMulti clusters the full set by
/// identical label sets; kSingle keeps only single-label samples and
/// clusters by that label. Clusters of size < 2 are dropped first.
std::optional<double> semantic_space_analysis(const EncoderParams& params, const Dataset& dataset,
                                              SemanticDimension dimension);

/// Sentence vectors for every example, one tape for the whole pass.
std::vector<std::vector<double>> embed_dataset(const EncoderParams& params, const Dataset& dataset);

/// Tab-separated export: header, then one row per example with its index,
/// semicolon-joined label names, and the full-precision embedding.
void export_embeddings(const EncoderParams& params, const Dataset& dataset,
                       const std::string& path);

struct MetricsReport {
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  double jaccard_score = 0.0;
  std::vector<double> per_label_f1;
  std::optional<double> ch_multi;
  std::optional<double> ch_single;
};

MetricsReport evaluate(const EncoderParams& params, const Dataset& dataset, double threshold,
                       bool with_semantic);

std::string format_report(const MetricsReport& report);
void write_report(const MetricsReport& report, const std::string& path);

}  // namespace mlcl
