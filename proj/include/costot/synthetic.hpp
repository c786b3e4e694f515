#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "costot/corpus.hpp"
#include "costot/matrix.hpp"
#include "costot/model.hpp"

namespace costot {

struct SyntheticConfig {
  std::size_t C = 5;
  std::size_t K = 30;
  std::size_t V = 100;
  std::size_t T = 30;
  std::size_t U = 250;
  std::size_t posts_per_user = 50;
  std::size_t words_per_post = 20;
  double p0 = 0.7;
  double p_slope = 0.3;
  double p_min = 0.1;
  double gauss_var = 1.0;

  void validate() const;
};

struct GroundTruth {
  Matrix topic_word;   // [K][V]
  Matrix comm_topic;   // [C][K]
  Matrix temporal;     // [K*C][T], row k*C + c
  std::vector<std::uint32_t> user_label;  // [U]
  Matrix link_prob;    // [C][C]

  std::span<const double> temporal_row(std::size_t k, std::size_t c) const {
    return temporal.row(k * comm_topic.rows() + c);
  }
};

// p[b] proportional to exp(-(b - mean)^2 / (2 var)) over bins 0..n_bins-1.
std::vector<double> discretized_gaussian(double mean, double var, std::size_t n_bins);

// max{P0 - P_slope * |i - j|, P_min}
double community_link_prob(std::size_t i, std::size_t j, const SyntheticConfig& config);

GroundTruth generate_ground_truth(const SyntheticConfig& config, std::uint64_t seed);

struct PostTruth {
  std::uint32_t community = 0;
  std::uint32_t topic = 0;
};

struct SyntheticCorpus {
  Corpus corpus;
  std::vector<PostTruth> post_truth;  // aligned with corpus.posts
};

// Words are named w0..w{V-1}; no background words are generated.
SyntheticCorpus generate_corpus(const GroundTruth& truth, const SyntheticConfig& config,
                                std::uint64_t seed);

// Estimates that reproduce the planted parameters exactly: one-hot
// memberships from user labels and eta equal to the planted link matrix.
ModelEstimates estimates_from_truth(const GroundTruth& truth);

struct RecoveryReport {
  std::vector<std::size_t> topic_alignment;      // true topic -> inferred topic
  std::vector<std::size_t> community_alignment;  // true community -> inferred community
  double topic_word_tv = 0.0;
  double comm_topic_tv = 0.0;
  double temporal_tv = 0.0;
  double link_mae = 0.0;
  // Mean TV of each planted row against the uniform distribution.
  double baseline_topic_word_tv = 0.0;
  double baseline_comm_topic_tv = 0.0;
  double baseline_temporal_tv = 0.0;
};

// Greedy cosine alignment of topics (on word distributions) and then of
// communities (on topic distributions, after mapping inferred topics
// through the topic alignment). Ties go to the lower index.
RecoveryReport evaluate_recovery(const GroundTruth& truth, const ModelEstimates& estimates);

double total_variation(std::span<const double> p, std::span<const double> q);

void write_ground_truth_json(std::ostream& out, const GroundTruth& truth,
                             const SyntheticConfig& config, std::uint64_t seed);
void write_recovery_json(std::ostream& out, const RecoveryReport& report);

}  // namespace costot
