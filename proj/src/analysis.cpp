#include "costot/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace costot {

std::vector<double> global_topic_dynamics(std::size_t k, const ModelEstimates& est) {
  const std::size_t C = est.num_communities(), T = est.num_slices(), U = est.num_users();
  if (k >= est.num_topics()) throw std::out_of_range("topic index out of range");
  // Users are weighted equally, so sum_i P(c | pi_i) reduces to the mean membership.
  std::vector<double> community_mass(C, 0.0);
  for (std::size_t i = 0; i < U; ++i)
    for (std::size_t c = 0; c < C; ++c) community_mass[c] += est.pi(i, c);
  std::vector<double> out(T, 0.0);
  for (std::size_t c = 0; c < C; ++c) {
    double w = est.theta(c, k) * community_mass[c];
    auto psi = est.psi_row(k, c);
    for (std::size_t t = 0; t < T; ++t) out[t] += w * psi[t];
  }
  double total = std::accumulate(out.begin(), out.end(), 0.0);
  if (total > 0.0)
    for (auto& x : out) x /= total;
  return out;
}

Matrix community_topic_over_time(std::size_t c, const ModelEstimates& est) {
  const std::size_t K = est.num_topics(), T = est.num_slices();
  if (c >= est.num_communities()) throw std::out_of_range("community index out of range");
  Matrix out(T, K);
  for (std::size_t t = 0; t < T; ++t) {
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      out(t, k) = est.psi_row(k, c)[t] * est.theta(c, k);
      total += out(t, k);
    }
    for (std::size_t k = 0; k < K; ++k) out(t, k) /= total;
  }
  return out;
}

double user_contribution(std::size_t user, std::size_t c, const ModelEstimates& est,
                         const std::vector<std::size_t>& posts_per_user) {
  std::size_t n = posts_per_user.at(user);
  if (n == 0) return 0.0;
  return est.pi(user, c) * std::log(static_cast<double>(n));
}

std::vector<std::pair<std::size_t, double>> rank_contributions(
    std::size_t c, const ModelEstimates& est, const std::vector<std::size_t>& posts_per_user) {
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(est.num_users());
  for (std::size_t i = 0; i < est.num_users(); ++i)
    out.emplace_back(i, user_contribution(i, c, est, posts_per_user));
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

std::vector<std::size_t> detect_peaks(const std::vector<double>& series, double z_threshold) {
  std::vector<std::size_t> peaks;
  const std::size_t n = series.size();
  if (n < 3) return peaks;
  double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : series) ss += (x - mean) * (x - mean);
  double stddev = std::sqrt(ss / static_cast<double>(n));
  if (stddev == 0.0) return peaks;
  for (std::size_t t = 0; t < n; ++t) {
    bool above_left = t == 0 || series[t] > series[t - 1];
    bool above_right = t + 1 == n || series[t] > series[t + 1];
    if (above_left && above_right && (series[t] - mean) / stddev >= z_threshold) peaks.push_back(t);
  }
  return peaks;
}

std::vector<WordProb> top_words(std::size_t k, std::size_t n, const ModelEstimates& est) {
  const std::size_t V = est.vocabulary_size();
  if (k >= est.num_topics()) throw std::out_of_range("topic index out of range");
  if (n == 0 || n > V) throw std::invalid_argument("top_words needs 1 <= n <= V");
  std::vector<WordProb> all(V);
  for (std::size_t v = 0; v < V; ++v) all[v] = {static_cast<WordId>(v), est.phi(k, v)};
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(),
                    [](const WordProb& a, const WordProb& b) {
                      return a.prob != b.prob ? a.prob > b.prob : a.word < b.word;
                    });
  all.resize(n);
  return all;
}

}  // namespace costot
