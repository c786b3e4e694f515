#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "costot/corpus.hpp"
#include "costot/model.hpp"

namespace costot {

struct SplitOptions {
  double post_holdout = 0.2;
  double link_holdout = 0.2;
  double neg_link_holdout = 0.01;  // fraction of all absent ordered pairs
  // When set, overrides neg_link_holdout with an absolute count.
  std::optional<std::size_t> neg_link_count;
  // Drop held-out posts whose author has neither training posts nor training links.
  bool require_seen_authors = true;
  std::uint64_t seed = 1;
};

struct CorpusSplit {
  Corpus train;
  std::vector<Post> test_posts;
  std::vector<std::pair<UserId, UserId>> test_links;
  std::vector<std::pair<UserId, UserId>> test_negative_links;
  // Held-out posts whose author has no training posts and no training links.
  std::size_t excluded_unseen_posts = 0;
};

// Uniform random holdout of posts and positive links, plus a uniform sample
// of absent ordered pairs (excluding self-pairs) as negative test links.
// User ids and the vocabulary are shared with the input corpus.
CorpusSplit split_corpus(const Corpus& corpus, const SplitOptions& options);

// argmax_t sum_c pi_ic sum_k theta_ck psi_kc[t] prod_l mix(w_l); ties to the
// smallest t. Tokens outside the vocabulary are ignored.
std::uint32_t predict_timestamp(const Post& post, const ModelEstimates& estimates);

// Fraction of posts with |predicted - true| <= tolerance. Throws on empty input.
double time_prediction_accuracy(const std::vector<Post>& posts, const ModelEstimates& estimates,
                                std::uint32_t tolerance);

// Accuracy for every tolerance 0..max_tolerance from a single prediction pass.
std::vector<double> time_accuracy_curve(const std::vector<Post>& posts,
                                        const ModelEstimates& estimates,
                                        std::uint32_t max_tolerance);

// sum_{s,s'} pi_is pi_i's' eta_ss'
double link_probability(UserId src, UserId dst, const ModelEstimates& estimates);

// (#pos > neg + 0.5 #ties) / (|pos| |neg|). Throws if either list is empty.
double auc(const std::vector<double>& pos_scores, const std::vector<double>& neg_scores);

struct AucNull {
  double mean = 0.0;
  double stddev = 0.0;
};

// AUC distribution under random relabelling of the pooled scores.
AucNull auc_permutation_null(const std::vector<double>& pos_scores,
                             const std::vector<double>& neg_scores, std::size_t rounds,
                             std::uint64_t seed);

struct PerplexityResult {
  double perplexity = 0.0;
  std::size_t tokens = 0;
  std::size_t oov_tokens = 0;
};

// exp(-sum_d log p(w_d) / sum_d N_d), N_d counting in-vocabulary tokens.
// Throws when no in-vocabulary token remains.
PerplexityResult perplexity(const std::vector<Post>& posts, const ModelEstimates& estimates);

struct MetricRow {
  std::string metric;
  std::string config;
  double value = 0.0;
};

void write_metrics_csv(std::ostream& out, const std::vector<MetricRow>& rows, bool header = true);

}  // namespace costot
