#include "costot/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

#include "costot/random.hpp"
#include "costot/text.hpp"

namespace costot {

namespace {

// First `count` entries become a uniform random subset (partial Fisher-Yates).
template <typename T>
void partial_shuffle(std::vector<T>& items, std::size_t count, Rng& rng) {
  for (std::size_t i = 0; i < count && i + 1 < items.size(); ++i) {
    std::size_t j = i + rng.uniform_int(items.size() - i);
    std::swap(items[i], items[j]);
  }
}

std::size_t holdout_count(double frac, std::size_t n, const char* what) {
  if (!(frac >= 0.0 && frac <= 1.0))
    throw std::invalid_argument(std::string(what) + " holdout fraction must be in [0, 1]");
  return static_cast<std::size_t>(std::llround(frac * static_cast<double>(n)));
}

// log of sum_k a_k exp(l_k)
double log_weighted_sum_exp(const std::vector<double>& weights, const std::vector<double>& logs) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double l : logs) peak = std::max(peak, l);
  double sum = 0.0;
  for (std::size_t k = 0; k < logs.size(); ++k) sum += weights[k] * std::exp(logs[k] - peak);
  return peak + std::log(sum);
}

// Per-topic log-likelihood of the in-vocabulary tokens under the
// foreground/background mixture. Returns the number of tokens used.
std::size_t topic_word_loglik(const Post& post, const ModelEstimates& est,
                              std::vector<double>& out) {
  const std::size_t K = est.num_topics(), V = est.vocabulary_size();
  out.assign(K, 0.0);
  std::size_t used = 0;
  for (auto w : post.tokens) {
    if (w >= V) continue;
    ++used;
    double bg = (1.0 - est.chi) * est.phi_bg[w];
    for (std::size_t k = 0; k < K; ++k) out[k] += std::log(est.chi * est.phi(k, w) + bg);
  }
  return used;
}

void check_author(const Post& post, const ModelEstimates& est) {
  if (post.author >= est.num_users())
    throw std::invalid_argument("post author " + std::to_string(post.author) + " unknown to the model");
}

}  // namespace

CorpusSplit split_corpus(const Corpus& corpus, const SplitOptions& options) {
  Rng rng(options.seed);
  CorpusSplit split;

  const std::size_t n_posts = corpus.posts.size();
  std::size_t n_test_posts = holdout_count(options.post_holdout, n_posts, "post");
  std::vector<std::size_t> post_order(n_posts);
  for (std::size_t d = 0; d < n_posts; ++d) post_order[d] = d;
  partial_shuffle(post_order, n_test_posts, rng);
  std::vector<bool> post_is_test(n_posts, false);
  for (std::size_t i = 0; i < n_test_posts; ++i) post_is_test[post_order[i]] = true;

  auto edges = corpus.links.edges();
  std::size_t n_test_links = holdout_count(options.link_holdout, edges.size(), "link");
  std::vector<std::size_t> link_order(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) link_order[e] = e;
  partial_shuffle(link_order, n_test_links, rng);
  std::vector<bool> link_is_test(edges.size(), false);
  for (std::size_t i = 0; i < n_test_links; ++i) link_is_test[link_order[i]] = true;

  const std::uint64_t U = corpus.num_users;
  const std::uint64_t n_neg = count_negative_links(corpus);
  std::size_t n_test_neg = options.neg_link_count
                               ? *options.neg_link_count
                               : holdout_count(options.neg_link_holdout, n_neg, "negative link");
  if (n_test_neg > n_neg)
    throw std::invalid_argument("requested " + std::to_string(n_test_neg) +
                                " negative links but only " + std::to_string(n_neg) + " exist");
  if (n_test_neg > 0) {
    if (2 * static_cast<std::uint64_t>(n_test_neg) <= n_neg) {
      std::unordered_set<std::uint64_t> chosen;
      while (split.test_negative_links.size() < n_test_neg) {
        auto src = static_cast<UserId>(rng.uniform_int(U));
        auto dst = static_cast<UserId>(rng.uniform_int(U));
        if (src == dst || corpus.links.contains(src, dst)) continue;
        if (!chosen.insert(static_cast<std::uint64_t>(src) * U + dst).second) continue;
        split.test_negative_links.emplace_back(src, dst);
      }
    } else {
      std::vector<std::pair<UserId, UserId>> absent;
      absent.reserve(n_neg);
      for (UserId i = 0; i < U; ++i)
        for (UserId j = 0; j < U; ++j)
          if (i != j && !corpus.links.contains(i, j)) absent.emplace_back(i, j);
      partial_shuffle(absent, n_test_neg, rng);
      split.test_negative_links.assign(absent.begin(), absent.begin() + n_test_neg);
    }
    std::sort(split.test_negative_links.begin(), split.test_negative_links.end());
  }

  std::vector<Post> train_posts;
  train_posts.reserve(n_posts - n_test_posts);
  std::vector<bool> seen(U, false);
  for (std::size_t d = 0; d < n_posts; ++d) {
    if (post_is_test[d]) continue;
    train_posts.push_back(corpus.posts[d]);
    seen[corpus.posts[d].author] = true;
  }
  LinkSet train_links;
  train_links.out_links.assign(U, {});
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (link_is_test[e]) {
      split.test_links.push_back(edges[e]);
      continue;
    }
    train_links.out_links[edges[e].first].push_back(edges[e].second);
    seen[edges[e].first] = true;
    seen[edges[e].second] = true;
  }
  for (std::size_t d = 0; d < n_posts; ++d) {
    if (!post_is_test[d]) continue;
    if (!options.require_seen_authors || seen[corpus.posts[d].author])
      split.test_posts.push_back(corpus.posts[d]);
    else
      ++split.excluded_unseen_posts;
  }

  split.train = corpus;
  split.train.posts = std::move(train_posts);
  split.train.links = std::move(train_links);
  return split;
}

std::uint32_t predict_timestamp(const Post& post, const ModelEstimates& est) {
  check_author(post, est);
  const std::size_t C = est.num_communities(), K = est.num_topics(), T = est.num_slices();
  std::vector<double> loglik;
  topic_word_loglik(post, est, loglik);
  double peak = *std::max_element(loglik.begin(), loglik.end());
  std::vector<double> word_weight(K);
  for (std::size_t k = 0; k < K; ++k) word_weight[k] = std::exp(loglik[k] - peak);

  std::vector<double> score(T, 0.0);
  for (std::size_t c = 0; c < C; ++c) {
    double pi = est.pi(post.author, c);
    for (std::size_t k = 0; k < K; ++k) {
      double weight = pi * est.theta(c, k) * word_weight[k];
      auto psi = est.psi_row(k, c);
      for (std::size_t t = 0; t < T; ++t) score[t] += weight * psi[t];
    }
  }
  std::size_t best = 0;
  for (std::size_t t = 1; t < T; ++t)
    if (score[t] > score[best]) best = t;
  return static_cast<std::uint32_t>(best);
}

std::vector<double> time_accuracy_curve(const std::vector<Post>& posts, const ModelEstimates& est,
                                        std::uint32_t max_tolerance) {
  if (posts.empty()) throw std::invalid_argument("time prediction needs at least one test post");
  std::vector<std::size_t> hits(max_tolerance + 1, 0);
  for (const auto& post : posts) {
    std::uint32_t predicted = predict_timestamp(post, est);
    std::uint32_t err = predicted > post.time_slice ? predicted - post.time_slice
                                                     : post.time_slice - predicted;
    if (err <= max_tolerance) ++hits[err];
  }
  std::vector<double> curve(max_tolerance + 1);
  std::size_t cumulative = 0;
  for (std::size_t tol = 0; tol <= max_tolerance; ++tol) {
    cumulative += hits[tol];
    curve[tol] = static_cast<double>(cumulative) / static_cast<double>(posts.size());
  }
  return curve;
}

double time_prediction_accuracy(const std::vector<Post>& posts, const ModelEstimates& est,
                                std::uint32_t tolerance) {
  return time_accuracy_curve(posts, est, tolerance).back();
}

double link_probability(UserId src, UserId dst, const ModelEstimates& est) {
  if (src >= est.num_users() || dst >= est.num_users())
    throw std::invalid_argument("link endpoint unknown to the model");
  const std::size_t C = est.num_communities();
  double p = 0.0;
  for (std::size_t s = 0; s < C; ++s) {
    double inner = 0.0;
    for (std::size_t sp = 0; sp < C; ++sp) inner += est.pi(dst, sp) * est.eta(s, sp);
    p += est.pi(src, s) * inner;
  }
  return p;
}

double auc(const std::vector<double>& pos, const std::vector<double>& neg) {
  if (pos.empty() || neg.empty()) throw std::invalid_argument("auc needs non-empty score lists");
  std::vector<double> sorted = neg;
  std::sort(sorted.begin(), sorted.end());
  double wins = 0.0;
  for (double p : pos) {
    auto [lo, hi] = std::equal_range(sorted.begin(), sorted.end(), p);
    wins += static_cast<double>(lo - sorted.begin()) + 0.5 * static_cast<double>(hi - lo);
  }
  return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

AucNull auc_permutation_null(const std::vector<double>& pos, const std::vector<double>& neg,
                             std::size_t rounds, std::uint64_t seed) {
  if (rounds < 2) throw std::invalid_argument("permutation null needs at least 2 rounds");
  std::vector<double> pooled(pos);
  pooled.insert(pooled.end(), neg.begin(), neg.end());
  Rng rng(seed);
  std::vector<double> values;
  values.reserve(rounds);
  for (std::size_t r = 0; r < rounds; ++r) {
    partial_shuffle(pooled, pos.size(), rng);
    std::vector<double> a(pooled.begin(), pooled.begin() + static_cast<std::ptrdiff_t>(pos.size()));
    std::vector<double> b(pooled.begin() + static_cast<std::ptrdiff_t>(pos.size()), pooled.end());
    values.push_back(auc(a, b));
  }
  AucNull null;
  for (double v : values) null.mean += v;
  null.mean /= static_cast<double>(rounds);
  double ss = 0.0;
  for (double v : values) ss += (v - null.mean) * (v - null.mean);
  null.stddev = std::sqrt(ss / static_cast<double>(rounds - 1));
  return null;
}

PerplexityResult perplexity(const std::vector<Post>& posts, const ModelEstimates& est) {
  const std::size_t C = est.num_communities(), K = est.num_topics();
  PerplexityResult result;
  double total_log = 0.0;
  std::vector<double> loglik, topic_weight(K);
  for (const auto& post : posts) {
    check_author(post, est);
    std::size_t used = topic_word_loglik(post, est, loglik);
    result.tokens += used;
    result.oov_tokens += post.tokens.size() - used;
    if (used == 0) continue;
    std::fill(topic_weight.begin(), topic_weight.end(), 0.0);
    for (std::size_t c = 0; c < C; ++c) {
      double pi = est.pi(post.author, c);
      for (std::size_t k = 0; k < K; ++k) topic_weight[k] += pi * est.theta(c, k);
    }
    total_log += log_weighted_sum_exp(topic_weight, loglik);
  }
  if (result.tokens == 0) throw std::invalid_argument("perplexity needs at least one in-vocabulary token");
  result.perplexity = std::exp(-total_log / static_cast<double>(result.tokens));
  return result;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricRow>& rows, bool header) {
  if (header) out << "metric,config,value\n";
  for (const auto& r : rows) out << r.metric << ',' << r.config << ',' << format_double(r.value) << '\n';
}

}  // namespace costot
