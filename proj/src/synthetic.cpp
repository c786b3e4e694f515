#include "costot/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>

#include "json.hpp"
#include "costot/random.hpp"

namespace costot {

void SyntheticConfig::validate() const {
  if (C == 0 || K == 0 || V == 0 || T == 0 || U == 0 || posts_per_user == 0 || words_per_post == 0)
    throw std::invalid_argument("synthetic sizes must all be at least 1");
  if (!(p_min >= 0.0 && p_min <= p0 && p0 <= 1.0) || p_slope < 0.0)
    throw std::invalid_argument("link probabilities need 0 <= P_min <= P0 <= 1 and P_slope >= 0");
  if (!(gauss_var > 0.0)) throw std::invalid_argument("gauss_var must be positive");
}

std::vector<double> discretized_gaussian(double mean, double var, std::size_t n_bins) {
  if (n_bins == 0) throw std::invalid_argument("n_bins must be at least 1");
  if (!(var > 0.0)) throw std::invalid_argument("variance must be positive");
  std::vector<double> p(n_bins);
  // Shift by the closest bin so the largest term is exp(0) and nothing underflows.
  double nearest = std::clamp(std::round(mean), 0.0, static_cast<double>(n_bins - 1));
  double shift = (nearest - mean) * (nearest - mean);
  for (std::size_t b = 0; b < n_bins; ++b) {
    double d = static_cast<double>(b) - mean;
    p[b] = std::exp(-(d * d - shift) / (2.0 * var));
  }
  double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& x : p) x /= total;
  return p;
}

double community_link_prob(std::size_t i, std::size_t j, const SyntheticConfig& config) {
  double gap = static_cast<double>(i > j ? i - j : j - i);
  return std::max(config.p0 - config.p_slope * gap, config.p_min);
}

GroundTruth generate_ground_truth(const SyntheticConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  const std::size_t C = config.C, K = config.K, V = config.V, T = config.T;
  GroundTruth truth;

  truth.topic_word = Matrix(K, V);
  for (std::size_t k = 0; k < K; ++k) {
    auto row = discretized_gaussian(rng.uniform() * static_cast<double>(V), config.gauss_var, V);
    std::copy(row.begin(), row.end(), truth.topic_word.row(k).begin());
  }
  truth.comm_topic = Matrix(C, K);
  for (std::size_t c = 0; c < C; ++c) {
    auto row = discretized_gaussian(rng.uniform() * static_cast<double>(K), config.gauss_var, K);
    std::copy(row.begin(), row.end(), truth.comm_topic.row(c).begin());
  }
  truth.temporal = Matrix(K * C, T);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t c = 0; c < C; ++c) {
      auto row = discretized_gaussian(rng.uniform() * static_cast<double>(T), config.gauss_var, T);
      std::copy(row.begin(), row.end(), truth.temporal.row(k * C + c).begin());
    }
  truth.user_label.resize(config.U);
  for (auto& label : truth.user_label) label = static_cast<std::uint32_t>(rng.uniform_int(C));
  truth.link_prob = Matrix(C, C);
  for (std::size_t i = 0; i < C; ++i)
    for (std::size_t j = 0; j < C; ++j) truth.link_prob(i, j) = community_link_prob(i, j, config);
  return truth;
}

SyntheticCorpus generate_corpus(const GroundTruth& truth, const SyntheticConfig& config,
                                std::uint64_t seed) {
  config.validate();
  const std::size_t C = config.C, K = config.K, V = config.V, T = config.T, U = config.U;
  if (truth.topic_word.rows() != K || truth.topic_word.cols() != V || truth.comm_topic.rows() != C ||
      truth.comm_topic.cols() != K || truth.temporal.rows() != K * C || truth.temporal.cols() != T ||
      truth.user_label.size() != U)
    throw std::invalid_argument("ground truth does not match the synthetic configuration");

  Rng rng(seed);
  // Post-level community draws are a Gaussian around the user's label,
  // truncated to the valid community range.
  std::vector<std::vector<double>> membership(C);
  for (std::size_t c = 0; c < C; ++c)
    membership[c] = discretized_gaussian(static_cast<double>(c), config.gauss_var, C);

  SyntheticCorpus out;
  std::vector<Post> posts;
  posts.reserve(U * config.posts_per_user);
  out.post_truth.reserve(U * config.posts_per_user);
  for (std::size_t i = 0; i < U; ++i) {
    const auto& member = membership[truth.user_label[i]];
    for (std::size_t j = 0; j < config.posts_per_user; ++j) {
      Post post;
      post.author = static_cast<UserId>(i);
      auto c = static_cast<std::uint32_t>(rng.categorical(member));
      auto k = static_cast<std::uint32_t>(rng.categorical(truth.comm_topic.row(c)));
      post.tokens.resize(config.words_per_post);
      for (auto& w : post.tokens) w = static_cast<WordId>(rng.categorical(truth.topic_word.row(k)));
      post.time_slice = static_cast<std::uint32_t>(rng.categorical(truth.temporal_row(k, c)));
      posts.push_back(std::move(post));
      out.post_truth.push_back({c, k});
    }
  }

  LinkSet links;
  links.out_links.assign(U, {});
  for (std::size_t i = 0; i < U; ++i)
    for (std::size_t j = 0; j < U; ++j) {
      if (i == j) continue;
      if (rng.bernoulli(truth.link_prob(truth.user_label[i], truth.user_label[j])))
        links.out_links[i].push_back(static_cast<UserId>(j));
    }

  std::vector<std::string> words(V);
  for (std::size_t v = 0; v < V; ++v) words[v] = "w" + std::to_string(v);
  out.corpus = assemble_corpus(std::move(posts), std::move(links), Vocabulary(std::move(words)), U, T);
  return out;
}

ModelEstimates estimates_from_truth(const GroundTruth& truth) {
  const std::size_t C = truth.comm_topic.rows(), V = truth.topic_word.cols();
  ModelEstimates est;
  est.pi = Matrix(truth.user_label.size(), C);
  for (std::size_t i = 0; i < truth.user_label.size(); ++i) est.pi(i, truth.user_label[i]) = 1.0;
  est.theta = truth.comm_topic;
  est.eta = truth.link_prob;
  est.phi = truth.topic_word;
  est.phi_bg.assign(V, 1.0 / static_cast<double>(V));
  est.psi = truth.temporal;
  est.chi = 1.0;
  return est;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("total_variation: size mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return 0.5 * sum;
}

namespace {

double cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

// similarity(i, j) for true row i and inferred row j; returns true -> inferred.
std::vector<std::size_t> greedy_align(const Matrix& similarity) {
  const std::size_t n = similarity.rows(), m = similarity.cols();
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  pairs.reserve(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) pairs.emplace_back(similarity(i, j), i, j);
  std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
    return std::get<2>(a) < std::get<2>(b);
  });
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> align(n, kUnset);
  std::vector<bool> used(m, false);
  std::size_t assigned = 0;
  for (const auto& [sim, i, j] : pairs) {
    if (align[i] != kUnset || used[j]) continue;
    align[i] = j;
    used[j] = true;
    if (++assigned == std::min(n, m)) break;
  }
  return align;
}

double mean_tv_to_uniform(const Matrix& rows) {
  if (rows.rows() == 0) return 0.0;
  std::vector<double> uniform(rows.cols(), 1.0 / static_cast<double>(rows.cols()));
  double sum = 0.0;
  for (std::size_t r = 0; r < rows.rows(); ++r) sum += total_variation(rows.row(r), uniform);
  return sum / static_cast<double>(rows.rows());
}

}  // namespace

RecoveryReport evaluate_recovery(const GroundTruth& truth, const ModelEstimates& est) {
  const std::size_t C = truth.comm_topic.rows(), K = truth.topic_word.rows(),
                    V = truth.topic_word.cols(), T = truth.temporal.cols(),
                    U = truth.user_label.size();
  if (est.num_communities() != C || est.num_topics() != K || est.vocabulary_size() != V ||
      est.num_slices() != T || est.num_users() != U || est.eta.rows() != C)
    throw std::invalid_argument("evaluate_recovery: estimate dimensions differ from the ground truth");

  RecoveryReport report;
  Matrix topic_sim(K, K);
  for (std::size_t a = 0; a < K; ++a)
    for (std::size_t b = 0; b < K; ++b)
      topic_sim(a, b) = cosine(truth.topic_word.row(a), est.phi.row(b));
  report.topic_alignment = greedy_align(topic_sim);

  // Inferred community-topic rows re-indexed into true topic order.
  Matrix theta_aligned(C, K);
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t k = 0; k < K; ++k) theta_aligned(c, k) = est.theta(c, report.topic_alignment[k]);
  Matrix comm_sim(C, C);
  for (std::size_t a = 0; a < C; ++a)
    for (std::size_t b = 0; b < C; ++b)
      comm_sim(a, b) = cosine(truth.comm_topic.row(a), theta_aligned.row(b));
  report.community_alignment = greedy_align(comm_sim);

  double sum = 0.0;
  for (std::size_t k = 0; k < K; ++k)
    sum += total_variation(truth.topic_word.row(k), est.phi.row(report.topic_alignment[k]));
  report.topic_word_tv = sum / static_cast<double>(K);

  sum = 0.0;
  for (std::size_t c = 0; c < C; ++c)
    sum += total_variation(truth.comm_topic.row(c), theta_aligned.row(report.community_alignment[c]));
  report.comm_topic_tv = sum / static_cast<double>(C);

  sum = 0.0;
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t c = 0; c < C; ++c)
      sum += total_variation(truth.temporal_row(k, c),
                             est.psi_row(report.topic_alignment[k], report.community_alignment[c]));
  report.temporal_tv = sum / static_cast<double>(K * C);

  // Link probabilities over ordered user pairs; independent of alignment.
  Matrix eta_pi(U, C);  // eta_pi(j, s) = sum_s' eta(s, s') pi(j, s')
  for (std::size_t j = 0; j < U; ++j)
    for (std::size_t s = 0; s < C; ++s) {
      double v = 0.0;
      for (std::size_t sp = 0; sp < C; ++sp) v += est.eta(s, sp) * est.pi(j, sp);
      eta_pi(j, s) = v;
    }
  double abs_err = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < U; ++i)
    for (std::size_t j = 0; j < U; ++j) {
      if (i == j) continue;
      double p = 0.0;
      for (std::size_t s = 0; s < C; ++s) p += est.pi(i, s) * eta_pi(j, s);
      abs_err += std::abs(p - truth.link_prob(truth.user_label[i], truth.user_label[j]));
      ++pairs;
    }
  report.link_mae = pairs == 0 ? 0.0 : abs_err / static_cast<double>(pairs);

  report.baseline_topic_word_tv = mean_tv_to_uniform(truth.topic_word);
  report.baseline_comm_topic_tv = mean_tv_to_uniform(truth.comm_topic);
  report.baseline_temporal_tv = mean_tv_to_uniform(truth.temporal);
  return report;
}

namespace {

nlohmann::json matrix_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

}  // namespace

void write_ground_truth_json(std::ostream& out, const GroundTruth& truth,
                             const SyntheticConfig& config, std::uint64_t seed) {
  nlohmann::json j;
  j["note"] = "post communities drawn from a Gaussian around the user label, truncated to [0, C)";
  j["seed"] = seed;
  j["config"] = {{"C", config.C},
                 {"K", config.K},
                 {"V", config.V},
                 {"T", config.T},
                 {"U", config.U},
                 {"posts_per_user", config.posts_per_user},
                 {"words_per_post", config.words_per_post},
                 {"P0", config.p0},
                 {"P_slope", config.p_slope},
                 {"P_min", config.p_min},
                 {"gauss_var", config.gauss_var}};
  j["topic_word"] = matrix_json(truth.topic_word);
  j["comm_topic"] = matrix_json(truth.comm_topic);
  j["temporal"] = matrix_json(truth.temporal);
  j["user_label"] = truth.user_label;
  j["link_prob"] = matrix_json(truth.link_prob);
  out << j.dump(1) << '\n';
}

void write_recovery_json(std::ostream& out, const RecoveryReport& r) {
  nlohmann::json j;
  j["alignment"] = "greedy cosine, ties to lower index";
  j["topic_alignment"] = r.topic_alignment;
  j["community_alignment"] = r.community_alignment;
  j["topic_word_tv"] = r.topic_word_tv;
  j["comm_topic_tv"] = r.comm_topic_tv;
  j["temporal_tv"] = r.temporal_tv;
  j["link_mae"] = r.link_mae;
  j["baseline_tv"] = {{"topic_word", r.baseline_topic_word_tv},
                      {"comm_topic", r.baseline_comm_topic_tv},
                      {"temporal", r.baseline_temporal_tv}};
  out << j.dump(1) << '\n';
}

}  // namespace costot
