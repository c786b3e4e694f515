#pragma once

#include <string>
#include <vector>

#include "costot/corpus.hpp"
#include "costot/model.hpp"
#include "costot/random.hpp"

namespace costot::testing {

// Random corpus with every user id, slice and word id in range.
inline Corpus random_corpus(Rng& rng, std::size_t users, std::size_t max_posts_per_user,
                            std::size_t max_words, std::size_t vocab, std::size_t slices,
                            double link_density) {
  std::vector<std::string> words;
  for (std::size_t v = 0; v < vocab; ++v) words.push_back("w" + std::to_string(v));
  std::vector<Post> posts;
  for (std::size_t i = 0; i < users; ++i) {
    std::size_t n = rng.uniform_int(max_posts_per_user + 1);
    for (std::size_t j = 0; j < n; ++j) {
      Post p;
      p.author = static_cast<UserId>(i);
      p.time_slice = static_cast<std::uint32_t>(rng.uniform_int(slices));
      p.tokens.resize(rng.uniform_int(max_words + 1));
      for (auto& w : p.tokens) w = static_cast<WordId>(rng.uniform_int(vocab));
      posts.push_back(std::move(p));
    }
  }
  LinkSet links;
  links.out_links.assign(users, {});
  for (std::size_t i = 0; i < users; ++i)
    for (std::size_t j = 0; j < users; ++j)
      if (i != j && rng.bernoulli(link_density)) links.out_links[i].push_back(static_cast<UserId>(j));
  return assemble_corpus(std::move(posts), std::move(links), Vocabulary(words), users, slices);
}

// Estimates with every distribution uniform; eta filled with `link`.
inline ModelEstimates uniform_estimates(std::size_t U, std::size_t C, std::size_t K, std::size_t T,
                                        std::size_t V, double link = 0.5) {
  ModelEstimates est;
  est.pi = Matrix(U, C, 1.0 / static_cast<double>(C));
  est.theta = Matrix(C, K, 1.0 / static_cast<double>(K));
  est.eta = Matrix(C, C, link);
  est.phi = Matrix(K, V, 1.0 / static_cast<double>(V));
  est.phi_bg.assign(V, 1.0 / static_cast<double>(V));
  est.psi = Matrix(K * C, T, 1.0 / static_cast<double>(T));
  est.chi = 0.5;
  return est;
}

}  // namespace costot::testing
