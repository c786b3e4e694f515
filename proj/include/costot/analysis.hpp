#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "costot/corpus.hpp"
#include "costot/matrix.hpp"
#include "costot/model.hpp"

namespace costot {

// P(t | k) proportional to sum_c psi_kc[t] theta_ck mean_i(pi_ic).
std::vector<double> global_topic_dynamics(std::size_t k, const ModelEstimates& estimates);

// Rows are time slices, columns topics: P(k | t, c) by Bayes rule.
Matrix community_topic_over_time(std::size_t c, const ModelEstimates& estimates);

// pi_ic * ln |D_i|; zero for users without posts.
double user_contribution(std::size_t user, std::size_t c, const ModelEstimates& estimates,
                         const std::vector<std::size_t>& posts_per_user);

// (user, contribution) for every user, highest first, ties by user id.
std::vector<std::pair<std::size_t, double>> rank_contributions(
    std::size_t c, const ModelEstimates& estimates, const std::vector<std::size_t>& posts_per_user);

// Strict local maxima whose z-score (population stddev) is at least
// z_threshold. End points compare against their single neighbour.
std::vector<std::size_t> detect_peaks(const std::vector<double>& series, double z_threshold);

struct WordProb {
  WordId word = 0;
  double prob = 0.0;
};

// The n most probable words of topic k, descending, ties by word id.
std::vector<WordProb> top_words(std::size_t k, std::size_t n, const ModelEstimates& estimates);

}  // namespace costot
