#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "costot/corpus.hpp"
#include "costot/model.hpp"
#include "costot/random.hpp"

namespace costot {

// Collapsed Gibbs sampler over one chain. Operates in place on a
// LatentState and its CountTables; both must outlive the sampler and must
// not be touched by anyone else while it runs.
//
// Every sample_* call removes the item from the counters, evaluates the
// conditional weights, draws, and re-adds the item under the drawn value.
// The *_weights functions expose the middle step for callers that have
// already excluded the item themselves.
class GibbsSampler {
 public:
  GibbsSampler(const Corpus& corpus, const Hyperparameters& hyper, LatentState& state,
               CountTables& tables);

  std::size_t num_posts() const { return corpus_.posts.size(); }
  std::size_t num_links() const { return edges_.size(); }
  std::size_t num_tokens() const { return token_word_.size(); }
  std::size_t post_token_begin(std::size_t post) const { return token_offset_[post]; }
  std::size_t post_token_end(std::size_t post) const { return token_offset_[post + 1]; }
  const std::vector<std::pair<UserId, UserId>>& edges() const { return edges_; }

  // Exclusion helpers for the four variable blocks.
  void exclude_post_community(std::size_t post);
  void include_post_community(std::size_t post);
  void exclude_link(std::size_t link);
  void include_link(std::size_t link);
  void exclude_post_topic(std::size_t post);
  void include_post_topic(std::size_t post);
  void exclude_token(std::size_t token);
  void include_token(std::size_t token);

  // Community weights for a post with the post excluded; out.size() == C.
  void post_community_weights(std::size_t post, std::span<double> out);
  // Joint (s, s') weights with the link excluded; out[s * C + s'], size C*C.
  void link_community_weights(std::size_t link, std::span<double> out);
  // Unnormalized log weights over topics with the post excluded; size K.
  void post_topic_log_weights(std::size_t post, std::span<double> out);
  // {weight(f=0), weight(f=1)} with the token excluded.
  std::array<double, 2> token_foreground_weights(std::size_t token);

  std::uint32_t sample_post_community(std::size_t post, Rng& rng);
  std::pair<std::uint32_t, std::uint32_t> sample_link_communities(std::size_t link, Rng& rng);
  std::uint32_t sample_post_topic(std::size_t post, Rng& rng);
  std::uint8_t sample_word_foreground(std::size_t token, Rng& rng);

  // One sweep: all post communities, then all link community pairs, then
  // all post topics, then all foreground flags, each in corpus order.
  void sweep(Rng& rng);

  // Number of categorical outcomes evaluated so far.
  std::uint64_t weight_evaluations() const { return weight_evaluations_; }
  void reset_weight_evaluations() { weight_evaluations_ = 0; }

 private:
  const Corpus& corpus_;
  const Hyperparameters& hyper_;
  LatentState& state_;
  CountTables& tables_;

  std::vector<std::pair<UserId, UserId>> edges_;
  std::vector<std::size_t> token_offset_;  // size posts + 1
  std::vector<WordId> token_word_;
  std::vector<std::uint32_t> token_post_;

  struct FgToken {
    WordId word;
    double repeat;    // earlier foreground occurrences of the same word in the post
    double position;  // earlier foreground tokens in the post
  };

  std::vector<double> scratch_;
  std::vector<FgToken> fg_tokens_;
  std::vector<std::uint32_t> word_seen_;  // per-word occurrence counter, reset per post
  std::uint64_t weight_evaluations_ = 0;
};

struct TracePoint {
  std::uint64_t iteration = 0;
  double loglik = 0.0;
};

struct TrainOptions {
  std::uint64_t iterations = 500;
  std::uint64_t seed = 1;
  std::uint64_t log_every = 1;
  std::ostream* progress = nullptr;  // receives `iter=<n> loglik=<v> seconds=<t>` lines
};

struct TrainResult {
  LatentState state;
  CountTables tables;
  ModelEstimates estimates;
  std::vector<TracePoint> trace;
};

// init_state followed by `iterations` sweeps from a single generator seeded
// with `seed`. The log-likelihood is recorded after every `log_every`-th
// sweep and after the last one.
TrainResult train(const Corpus& corpus, const Hyperparameters& hyper, const TrainOptions& options);

void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace);

}  // namespace costot
