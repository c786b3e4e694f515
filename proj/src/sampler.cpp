#include "costot/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "costot/text.hpp"

namespace costot {

GibbsSampler::GibbsSampler(const Corpus& corpus, const Hyperparameters& hyper, LatentState& state,
                           CountTables& tables)
    : corpus_(corpus), hyper_(hyper), state_(state), tables_(tables), edges_(corpus.links.edges()) {
  hyper.validate();
  check_state(corpus, hyper, state);
  token_offset_.reserve(corpus.posts.size() + 1);
  token_offset_.push_back(0);
  for (std::size_t d = 0; d < corpus.posts.size(); ++d) {
    for (auto w : corpus.posts[d].tokens) {
      token_word_.push_back(w);
      token_post_.push_back(static_cast<std::uint32_t>(d));
    }
    token_offset_.push_back(token_word_.size());
  }
  scratch_.resize(std::max({hyper.C * hyper.C, hyper.K, std::size_t{2}}));
  word_seen_.assign(hyper.V, 0);
}

void GibbsSampler::exclude_post_community(std::size_t d) {
  const Post& post = corpus_.posts[d];
  tables_.update_post_membership(post.author, state_.c[d], -1);
  tables_.update_post_topic(state_.c[d], state_.z[d], post.time_slice, -1);
}

void GibbsSampler::include_post_community(std::size_t d) {
  const Post& post = corpus_.posts[d];
  tables_.update_post_membership(post.author, state_.c[d], +1);
  tables_.update_post_topic(state_.c[d], state_.z[d], post.time_slice, +1);
}

void GibbsSampler::exclude_link(std::size_t e) {
  tables_.update_link(edges_[e].first, edges_[e].second, state_.s[e], state_.s_prime[e], -1);
}

void GibbsSampler::include_link(std::size_t e) {
  tables_.update_link(edges_[e].first, edges_[e].second, state_.s[e], state_.s_prime[e], +1);
}

void GibbsSampler::exclude_post_topic(std::size_t d) {
  const std::size_t k = state_.z[d];
  tables_.update_post_topic(state_.c[d], k, corpus_.posts[d].time_slice, -1);
  for (std::size_t n = token_offset_[d]; n < token_offset_[d + 1]; ++n)
    if (state_.f[n] != 0) tables_.update_token(true, k, token_word_[n], -1);
}

void GibbsSampler::include_post_topic(std::size_t d) {
  const std::size_t k = state_.z[d];
  tables_.update_post_topic(state_.c[d], k, corpus_.posts[d].time_slice, +1);
  for (std::size_t n = token_offset_[d]; n < token_offset_[d + 1]; ++n)
    if (state_.f[n] != 0) tables_.update_token(true, k, token_word_[n], +1);
}

void GibbsSampler::exclude_token(std::size_t n) {
  tables_.update_token(state_.f[n] != 0, state_.z[token_post_[n]], token_word_[n], -1);
}

void GibbsSampler::include_token(std::size_t n) {
  tables_.update_token(state_.f[n] != 0, state_.z[token_post_[n]], token_word_[n], +1);
}

void GibbsSampler::post_community_weights(std::size_t d, std::span<double> out) {
  const auto& h = hyper_;
  const auto& tb = tables_;
  const Post& post = corpus_.posts[d];
  const std::size_t k = state_.z[d];
  const std::size_t t = post.time_slice;
  const double user_denom = static_cast<double>(tb.user_total[post.author]) +
                            static_cast<double>(h.C) * h.rho;
  const double k_alpha = static_cast<double>(h.K) * h.alpha;
  const double t_eps = static_cast<double>(h.T) * h.epsilon;
  for (std::size_t c = 0; c < h.C; ++c) {
    double membership = (static_cast<double>(tb.n_user_comm(post.author, c)) + h.rho) / user_denom;
    double topic = (static_cast<double>(tb.n_comm_topic(c, k)) + h.alpha) /
                   (static_cast<double>(tb.comm_total[c]) + k_alpha);
    double time = (static_cast<double>(tb.n_ctt(c, k, t)) + h.epsilon) /
                  (static_cast<double>(tb.n_ct_total(c, k)) + t_eps);
    out[c] = membership * topic * time;
  }
  weight_evaluations_ += h.C;
}

void GibbsSampler::link_community_weights(std::size_t e, std::span<double> out) {
  const auto& h = hyper_;
  const auto& tb = tables_;
  const auto [src, dst] = edges_[e];
  const double c_rho = static_cast<double>(h.C) * h.rho;
  const double src_denom = static_cast<double>(tb.user_total[src]) + c_rho;
  const double dst_denom = static_cast<double>(tb.user_total[dst]) + c_rho;
  for (std::size_t s = 0; s < h.C; ++s) {
    double src_term = (static_cast<double>(tb.n_user_comm(src, s)) + h.rho) / src_denom;
    for (std::size_t sp = 0; sp < h.C; ++sp) {
      double dst_term = (static_cast<double>(tb.n_user_comm(dst, sp)) + h.rho) / dst_denom;
      double n = static_cast<double>(tb.n_link_comm(s, sp));
      double link = (n + h.lambda1) / (n + h.lambda0 + h.lambda1);
      out[s * h.C + sp] = src_term * dst_term * link;
    }
  }
  weight_evaluations_ += h.C * h.C;
}

void GibbsSampler::post_topic_log_weights(std::size_t d, std::span<double> out) {
  const auto& h = hyper_;
  const auto& tb = tables_;
  const std::size_t c = state_.c[d];
  const std::size_t t = corpus_.posts[d].time_slice;
  const std::size_t begin = token_offset_[d], end = token_offset_[d + 1];
  const double k_alpha = static_cast<double>(h.K) * h.alpha;
  const double t_eps = static_cast<double>(h.T) * h.epsilon;
  const double v_beta = static_cast<double>(h.V) * h.beta;
  const double log_topic_denom = std::log(static_cast<double>(tb.comm_total[c]) + k_alpha);

  // Each foreground token contributes (n_k^(v) + q_v + beta) / (n_k + q + V beta),
  // q_v being its occurrence index among equal foreground words of the post
  // and q its index among all foreground tokens of the post.
  auto& fg = fg_tokens_;
  fg.clear();
  for (std::size_t n = begin; n < end; ++n) {
    if (state_.f[n] == 0) continue;
    WordId w = token_word_[n];
    fg.push_back({w, static_cast<double>(word_seen_[w]++), static_cast<double>(fg.size())});
  }
  for (const auto& tok : fg) word_seen_[tok.word] = 0;

  for (std::size_t k = 0; k < h.K; ++k) {
    double lw = std::log(static_cast<double>(tb.n_comm_topic(c, k)) + h.alpha) - log_topic_denom;
    lw += std::log((static_cast<double>(tb.n_ctt(c, k, t)) + h.epsilon) /
                   (static_cast<double>(tb.n_ct_total(c, k)) + t_eps));
    const double topic_total = static_cast<double>(tb.topic_total[k]) + v_beta;
    const std::int64_t* row = tb.topic_word.data() + k * h.V;
    for (const auto& tok : fg)
      lw += std::log((static_cast<double>(row[tok.word]) + tok.repeat + h.beta) /
                     (topic_total + tok.position));
    out[k] = lw;
  }
  weight_evaluations_ += h.K;
}

std::array<double, 2> GibbsSampler::token_foreground_weights(std::size_t n) {
  const auto& h = hyper_;
  const auto& tb = tables_;
  const std::size_t k = state_.z[token_post_[n]];
  const WordId v = token_word_[n];
  const double v_beta = static_cast<double>(h.V) * h.beta;
  const double flag_denom = static_cast<double>(tb.n_fg + tb.n_bg) + h.delta0 + h.delta1;
  double fg = (static_cast<double>(tb.n_fg) + h.delta1) / flag_denom *
              (static_cast<double>(tb.n_topic_word(k, v)) + h.beta) /
              (static_cast<double>(tb.topic_total[k]) + v_beta);
  double bg = (static_cast<double>(tb.n_bg) + h.delta0) / flag_denom *
              (static_cast<double>(tb.bg_word[v]) + h.beta) /
              (static_cast<double>(tb.bg_total) + v_beta);
  weight_evaluations_ += 2;
  return {bg, fg};
}

std::uint32_t GibbsSampler::sample_post_community(std::size_t d, Rng& rng) {
  exclude_post_community(d);
  std::span<double> w(scratch_.data(), hyper_.C);
  post_community_weights(d, w);
  state_.c[d] = static_cast<std::uint32_t>(rng.categorical(w));
  include_post_community(d);
  return state_.c[d];
}

std::pair<std::uint32_t, std::uint32_t> GibbsSampler::sample_link_communities(std::size_t e,
                                                                              Rng& rng) {
  exclude_link(e);
  std::span<double> w(scratch_.data(), hyper_.C * hyper_.C);
  link_community_weights(e, w);
  std::size_t pick = rng.categorical(w);
  state_.s[e] = static_cast<std::uint32_t>(pick / hyper_.C);
  state_.s_prime[e] = static_cast<std::uint32_t>(pick % hyper_.C);
  include_link(e);
  return {state_.s[e], state_.s_prime[e]};
}

std::uint32_t GibbsSampler::sample_post_topic(std::size_t d, Rng& rng) {
  exclude_post_topic(d);
  std::span<double> w(scratch_.data(), hyper_.K);
  post_topic_log_weights(d, w);
  double peak = *std::max_element(w.begin(), w.end());
  for (auto& x : w) x = std::exp(x - peak);
  state_.z[d] = static_cast<std::uint32_t>(rng.categorical(w));
  include_post_topic(d);
  return state_.z[d];
}

std::uint8_t GibbsSampler::sample_word_foreground(std::size_t n, Rng& rng) {
  exclude_token(n);
  auto w = token_foreground_weights(n);
  state_.f[n] = rng.uniform() * (w[0] + w[1]) < w[1] ? 1 : 0;
  include_token(n);
  return state_.f[n];
}

void GibbsSampler::sweep(Rng& rng) {
  for (std::size_t d = 0; d < num_posts(); ++d) sample_post_community(d, rng);
  for (std::size_t e = 0; e < num_links(); ++e) sample_link_communities(e, rng);
  for (std::size_t d = 0; d < num_posts(); ++d) sample_post_topic(d, rng);
  for (std::size_t n = 0; n < num_tokens(); ++n) sample_word_foreground(n, rng);
}

TrainResult train(const Corpus& corpus, const Hyperparameters& hyper, const TrainOptions& options) {
  if (options.iterations == 0) throw std::invalid_argument("iterations must be at least 1");
  const std::uint64_t log_every = std::max<std::uint64_t>(1, options.log_every);
  Rng rng(options.seed);
  auto init = init_state(corpus, hyper, rng);
  TrainResult result;
  result.state = std::move(init.state);
  result.state.rng_seed = options.seed;
  result.tables = std::move(init.tables);

  GibbsSampler sampler(corpus, hyper, result.state, result.tables);
  const auto start = std::chrono::steady_clock::now();
  for (std::uint64_t it = 1; it <= options.iterations; ++it) {
    sampler.sweep(rng);
    if (it % log_every != 0 && it != options.iterations) continue;
    double ll = complete_log_likelihood(result.state, result.tables, corpus, hyper);
    result.trace.push_back({it, ll});
    if (options.progress != nullptr) {
      double seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      *options.progress << "iter=" << it << " loglik=" << format_double(ll)
                        << " seconds=" << seconds << '\n';
    }
  }
  result.estimates = estimate_parameters(result.tables, hyper);
  return result;
}

void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace) {
  out << "iter,loglik\n";
  for (const auto& p : trace) out << p.iteration << ',' << format_double(p.loglik) << '\n';
}

}  // namespace costot
