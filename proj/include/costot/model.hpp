#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "costot/corpus.hpp"
#include "costot/matrix.hpp"
#include "costot/random.hpp"

namespace costot {

struct Hyperparameters {
  double rho = 0.01;
  double alpha = 0.01;
  double beta = 0.01;
  double epsilon = 0.01;
  double delta0 = 0.01;
  double delta1 = 1.0;
  double lambda0 = 1.0;
  double lambda1 = 0.1;
  std::size_t C = 1;
  std::size_t K = 1;
  std::size_t T = 1;
  std::size_t V = 1;

  // Throws std::invalid_argument on a non-positive concentration or zero size.
  void validate() const;
  bool operator==(const Hyperparameters&) const = default;
};

// ln(n_neg / C^2). Throws when n_neg == 0.
double compute_lambda0(std::uint64_t n_neg, std::size_t C);

// compute_lambda0, replaced by `floor` when the log is not positive.
double clamped_lambda0(std::uint64_t n_neg, std::size_t C, double floor = 0.1);

// Number of absent ordered user pairs, U(U-1) - |E|.
std::uint64_t count_negative_links(const Corpus& corpus);

// Hyperparameters with the default fixed concentrations, dimensions taken
// from the corpus and lambda0 derived from its negative-link count.
Hyperparameters default_hyperparameters(const Corpus& corpus, std::size_t C, std::size_t K,
                                        double lambda0_floor = 0.1);

// Latent indicators. c and z are per post in corpus order, f per token in
// corpus order, s and s_prime per link in LinkSet::edges() order.
struct LatentState {
  std::vector<std::uint32_t> c;
  std::vector<std::uint32_t> z;
  std::vector<std::uint8_t> f;
  std::vector<std::uint32_t> s;
  std::vector<std::uint32_t> s_prime;
  std::uint64_t rng_seed = 0;

  bool operator==(const LatentState&) const = default;
};

// Sufficient statistics of a LatentState. All counters are 64-bit and laid
// out densely, so every conditional weight is a handful of table lookups.
struct CountTables {
  std::size_t U = 0, C = 0, K = 0, T = 0, V = 0;

  std::vector<std::int64_t> user_comm;        // [U][C]  posts and link endpoints
  std::vector<std::int64_t> user_total;       // [U]
  std::vector<std::int64_t> comm_topic;       // [C][K]  posts
  std::vector<std::int64_t> comm_total;       // [C]
  std::vector<std::int64_t> comm_topic_time;  // [C][K][T]
  std::vector<std::int64_t> comm_topic_time_total;  // [C][K]
  std::vector<std::int64_t> topic_word;       // [K][V]  foreground tokens
  std::vector<std::int64_t> topic_total;      // [K]
  std::vector<std::int64_t> bg_word;          // [V]
  std::int64_t bg_total = 0;
  std::int64_t n_fg = 0;
  std::int64_t n_bg = 0;
  std::vector<std::int64_t> link_comm;        // [C][C]

  CountTables() = default;
  CountTables(std::size_t users, const Hyperparameters& hyper);

  std::int64_t& n_user_comm(std::size_t i, std::size_t c) { return user_comm[i * C + c]; }
  std::int64_t n_user_comm(std::size_t i, std::size_t c) const { return user_comm[i * C + c]; }
  std::int64_t& n_comm_topic(std::size_t c, std::size_t k) { return comm_topic[c * K + k]; }
  std::int64_t n_comm_topic(std::size_t c, std::size_t k) const { return comm_topic[c * K + k]; }
  std::int64_t& n_ctt(std::size_t c, std::size_t k, std::size_t t) {
    return comm_topic_time[(c * K + k) * T + t];
  }
  std::int64_t n_ctt(std::size_t c, std::size_t k, std::size_t t) const {
    return comm_topic_time[(c * K + k) * T + t];
  }
  std::int64_t& n_ct_total(std::size_t c, std::size_t k) { return comm_topic_time_total[c * K + k]; }
  std::int64_t n_ct_total(std::size_t c, std::size_t k) const {
    return comm_topic_time_total[c * K + k];
  }
  std::int64_t& n_topic_word(std::size_t k, std::size_t v) { return topic_word[k * V + v]; }
  std::int64_t n_topic_word(std::size_t k, std::size_t v) const { return topic_word[k * V + v]; }
  std::int64_t& n_link_comm(std::size_t c, std::size_t cp) { return link_comm[c * C + cp]; }
  std::int64_t n_link_comm(std::size_t c, std::size_t cp) const { return link_comm[c * C + cp]; }

  // Incremental updates; `delta` is +1 or -1.
  void update_post_membership(std::size_t user, std::size_t c, std::int64_t delta);
  void update_post_topic(std::size_t c, std::size_t k, std::size_t t, std::int64_t delta);
  void update_token(bool foreground, std::size_t k, std::size_t v, std::int64_t delta);
  void update_link(std::size_t src, std::size_t dst, std::size_t s, std::size_t sp,
                   std::int64_t delta);

  bool operator==(const CountTables&) const = default;
};

// Full recount of the tables implied by `state`.
CountTables build_tables(const Corpus& corpus, const Hyperparameters& hyper,
                         const LatentState& state);

// Throws std::invalid_argument if state shapes or values disagree with the corpus.
void check_state(const Corpus& corpus, const Hyperparameters& hyper, const LatentState& state);

struct InitResult {
  LatentState state;
  CountTables tables;
};

// Uniform community/topic draws; foreground flags ~ Bernoulli(delta1/(delta0+delta1)).
InitResult init_state(const Corpus& corpus, const Hyperparameters& hyper, Rng& rng);
InitResult init_state(const Corpus& corpus, const Hyperparameters& hyper, std::uint64_t seed);

struct ModelEstimates {
  Matrix pi;      // [U][C]
  Matrix theta;   // [C][K]
  Matrix eta;     // [C][C]
  Matrix phi;     // [K][V]
  std::vector<double> phi_bg;  // [V]
  Matrix psi;     // [K*C][T], row k*C + c
  double chi = 0.0;

  std::size_t num_communities() const { return theta.rows(); }
  std::size_t num_topics() const { return theta.cols(); }
  std::size_t num_slices() const { return psi.cols(); }
  std::size_t vocabulary_size() const { return phi.cols(); }
  std::size_t num_users() const { return pi.rows(); }

  std::span<const double> psi_row(std::size_t k, std::size_t c) const {
    return psi.row(k * num_communities() + c);
  }
  std::span<double> psi_row(std::size_t k, std::size_t c) { return psi.row(k * num_communities() + c); }
};

// Smoothed posterior-mean point estimates from the count tables.
ModelEstimates estimate_parameters(const CountTables& tables, const Hyperparameters& hyper);

// Complete-data log-likelihood with parameters replaced by their point
// estimates: text, time and foreground flags of every post plus the
// membership draws and eta factor of every positive link.
double complete_log_likelihood(const LatentState& state, const CountTables& tables,
                               const Corpus& corpus, const Hyperparameters& hyper);

// Same quantity for explicitly supplied estimates.
double complete_log_likelihood(const LatentState& state, const ModelEstimates& estimates,
                               const Corpus& corpus);

// Text checkpoint: hyperparameters, assignments and seed. Estimates are
// re-derived from the assignments on load.
struct Checkpoint {
  Hyperparameters hyper;
  LatentState state;
  std::uint64_t iterations = 0;
  // Holdout used to derive the training corpus; all zero when trained on
  // the full corpus.
  double post_holdout = 0.0;
  double link_holdout = 0.0;
  double neg_link_holdout = 0.0;
  std::uint64_t split_seed = 0;
};

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(std::istream& in);

}  // namespace costot
