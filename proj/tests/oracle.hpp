#pragma once

#include <cmath>
#include <cstddef>
#include <map>

#include "costot/corpus.hpp"
#include "costot/model.hpp"
#include "costot/random.hpp"

namespace costot::testing {

// Collapsed joint of every assignment, written as sequential Polya urns
// straight from the raw indicator vectors. Shares no code with CountTables.
inline double oracle_log_joint(const Corpus& corpus, const Hyperparameters& h, const LatentState& st) {
  double lj = 0.0;
  // Each urn: key -> (per-outcome counts, total).
  struct Urn {
    std::map<std::size_t, double> counts;
    double total = 0.0;
    double draw(std::size_t outcome, double prior, double prior_total) {
      double p = (counts[outcome] + prior) / (total + prior_total);
      counts[outcome] += 1.0;
      total += 1.0;
      return std::log(p);
    }
  };
  std::map<std::size_t, Urn> membership, comm_topic, comm_topic_time, topic_word;
  Urn background, flags;
  std::map<std::size_t, double> link_pairs;

  const double C = static_cast<double>(h.C), K = static_cast<double>(h.K);
  const double T = static_cast<double>(h.T), V = static_cast<double>(h.V);
  std::size_t n = 0;
  for (std::size_t d = 0; d < corpus.posts.size(); ++d) {
    const Post& p = corpus.posts[d];
    lj += membership[p.author].draw(st.c[d], h.rho, C * h.rho);
    lj += comm_topic[st.c[d]].draw(st.z[d], h.alpha, K * h.alpha);
    lj += comm_topic_time[st.c[d] * h.K + st.z[d]].draw(p.time_slice, h.epsilon, T * h.epsilon);
    for (auto w : p.tokens) {
      // Flag urn: outcome 1 has prior delta1, outcome 0 prior delta0.
      double prior = st.f[n] ? h.delta1 : h.delta0;
      lj += flags.draw(st.f[n], prior, h.delta0 + h.delta1);
      if (st.f[n])
        lj += topic_word[st.z[d]].draw(w, h.beta, V * h.beta);
      else
        lj += background.draw(w, h.beta, V * h.beta);
      ++n;
    }
  }
  auto edges = corpus.links.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    lj += membership[edges[e].first].draw(st.s[e], h.rho, C * h.rho);
    lj += membership[edges[e].second].draw(st.s_prime[e], h.rho, C * h.rho);
    double& q = link_pairs[st.s[e] * h.C + st.s_prime[e]];
    lj += std::log((q + h.lambda1) / (q + h.lambda0 + h.lambda1));
    q += 1.0;
  }
  return lj;
}

inline Corpus tiny_corpus(Rng& rng) {
  // <= 4 users, <= 4 posts, <= 2 words per post, T = V = 2.
  std::size_t users = 2 + rng.uniform_int(3);
  std::vector<Post> posts;
  std::size_t n_posts = 1 + rng.uniform_int(4);
  for (std::size_t d = 0; d < n_posts; ++d) {
    Post p;
    p.author = static_cast<UserId>(rng.uniform_int(users));
    p.time_slice = static_cast<std::uint32_t>(rng.uniform_int(2));
    p.tokens.resize(rng.uniform_int(3));
    for (auto& w : p.tokens) w = static_cast<WordId>(rng.uniform_int(2));
    posts.push_back(p);
  }
  LinkSet links;
  links.out_links.assign(users, {});
  for (std::size_t i = 0; i < users; ++i)
    for (std::size_t j = 0; j < users; ++j)
      if (i != j && rng.bernoulli(0.3)) links.out_links[i].push_back(static_cast<UserId>(j));
  return assemble_corpus(posts, links, Vocabulary({"a", "b"}), users, 2);
}

inline Hyperparameters tiny_hyper(Rng& rng) {
  Hyperparameters h;
  h.C = h.K = h.T = h.V = 2;
  // Non-default concentrations so that mistakes in any one term show up.
  h.rho = 0.05 + rng.uniform();
  h.alpha = 0.05 + rng.uniform();
  h.beta = 0.05 + rng.uniform();
  h.epsilon = 0.05 + rng.uniform();
  h.delta0 = 0.05 + rng.uniform();
  h.delta1 = 0.05 + rng.uniform();
  h.lambda0 = 0.1 + 3.0 * rng.uniform();
  h.lambda1 = 0.05 + rng.uniform();
  return h;
}

}  // namespace costot::testing
