#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <sstream>

#include "costot/synthetic.hpp"
#include "json.hpp"

using namespace costot;
using doctest::Approx;

namespace {

void check_rows_normalized(const Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    CHECK(std::accumulate(row.begin(), row.end(), 0.0) == Approx(1.0).epsilon(1e-9));
    for (double x : row) CHECK(x >= 0.0);
  }
}

std::size_t local_maxima(std::span<const double> row) {
  std::size_t count = 0;
  for (std::size_t b = 0; b < row.size(); ++b) {
    bool left = b == 0 || row[b] > row[b - 1];
    bool right = b + 1 == row.size() || row[b] > row[b + 1];
    if (left && right) ++count;
  }
  return count;
}

SyntheticConfig small_config() {
  SyntheticConfig cfg;
  cfg.C = 3;
  cfg.K = 4;
  cfg.V = 12;
  cfg.T = 8;
  cfg.U = 20;
  cfg.posts_per_user = 3;
  cfg.words_per_post = 5;
  return cfg;
}

}  // namespace

TEST_CASE("discretized_gaussian values") {
  auto p = discretized_gaussian(0.0, 1.0, 3);
  CHECK(p[0] == Approx(0.57395).epsilon(1e-4));
  CHECK(p[1] == Approx(0.34810).epsilon(1e-4));
  CHECK(p[2] == Approx(0.07768).epsilon(1e-4));

  for (double var : {0.1, 1.0, 7.0}) {
    auto q = discretized_gaussian(1.0, var, 3);
    CHECK(q[0] == Approx(q[2]).epsilon(1e-12));
    CHECK(q[1] > q[0]);
  }
  auto d = discretized_gaussian(0.0, 2.0, 5);
  for (std::size_t b = 1; b < 5; ++b) CHECK(d[b] < d[b - 1]);

  // Means far outside the range still normalize.
  auto far = discretized_gaussian(500.0, 1.0, 4);
  CHECK(std::accumulate(far.begin(), far.end(), 0.0) == Approx(1.0));
  CHECK(far[3] == Approx(1.0));
  CHECK_THROWS(discretized_gaussian(0.0, 1.0, 0));
}

TEST_CASE("community_link_prob follows the banded formula") {
  SyntheticConfig cfg;
  CHECK(community_link_prob(2, 2, cfg) == Approx(0.7));
  CHECK(community_link_prob(1, 2, cfg) == Approx(0.4));
  CHECK(community_link_prob(3, 2, cfg) == Approx(0.4));
  CHECK(community_link_prob(0, 4, cfg) == Approx(0.1));
  for (std::size_t i = 0; i < cfg.C; ++i) {
    double prev = 1.0;
    for (std::size_t gap = 0; i + gap < cfg.C; ++gap) {
      double p = community_link_prob(i, i + gap, cfg);
      CHECK(p <= prev);
      CHECK((p >= cfg.p_min && p <= cfg.p0));
      prev = p;
    }
  }
}

TEST_CASE("ground truth rows are normalized and unimodal, and seeded") {
  SyntheticConfig cfg;
  auto truth = generate_ground_truth(cfg, 17);
  check_rows_normalized(truth.topic_word);
  check_rows_normalized(truth.comm_topic);
  check_rows_normalized(truth.temporal);
  CHECK(truth.topic_word.rows() == 30);
  CHECK(truth.temporal.rows() == 150);
  CHECK(truth.user_label.size() == 250);
  for (auto l : truth.user_label) CHECK(l < 5);
  for (std::size_t k = 0; k < cfg.K; ++k) CHECK(local_maxima(truth.topic_word.row(k)) == 1);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) CHECK(truth.link_prob(i, j) == community_link_prob(i, j, cfg));

  auto again = generate_ground_truth(cfg, 17);
  CHECK(again.topic_word == truth.topic_word);
  CHECK(again.temporal == truth.temporal);
  CHECK(again.user_label == truth.user_label);
  CHECK_FALSE(generate_ground_truth(cfg, 18).topic_word == truth.topic_word);
}

TEST_CASE("generated corpus shape") {
  auto cfg = small_config();
  auto truth = generate_ground_truth(cfg, 2);
  auto sc = generate_corpus(truth, cfg, 3);
  CHECK(sc.corpus.posts.size() == cfg.U * cfg.posts_per_user);
  CHECK(sc.post_truth.size() == sc.corpus.posts.size());
  CHECK(sc.corpus.num_users == cfg.U);
  CHECK(sc.corpus.num_slices == cfg.T);
  CHECK(sc.corpus.vocabulary.size() == cfg.V);
  CHECK(sc.corpus.vocabulary.word(0) == "w0");
  for (std::size_t d = 0; d < sc.corpus.posts.size(); ++d) {
    const auto& p = sc.corpus.posts[d];
    CHECK(p.tokens.size() == cfg.words_per_post);
    CHECK(p.time_slice < cfg.T);
    CHECK(sc.post_truth[d].community < cfg.C);
    CHECK(sc.post_truth[d].topic < cfg.K);
  }
  for (UserId i = 0; i < cfg.U; ++i) CHECK_FALSE(sc.corpus.links.contains(i, i));

  auto same = generate_corpus(truth, cfg, 3);
  CHECK(same.corpus == sc.corpus);

  cfg.U = 1;
  auto single = generate_corpus(generate_ground_truth(cfg, 2), cfg, 3);
  CHECK(single.corpus.links.size() == 0);
}

TEST_CASE("within-label link density is close to P0") {
  SyntheticConfig cfg;
  cfg.posts_per_user = 1;
  cfg.words_per_post = 1;
  auto truth = generate_ground_truth(cfg, 5);
  auto sc = generate_corpus(truth, cfg, 6);
  std::size_t pairs = 0, linked = 0;
  for (UserId i = 0; i < cfg.U; ++i)
    for (UserId j = 0; j < cfg.U; ++j) {
      if (i == j || truth.user_label[i] != truth.user_label[j]) continue;
      ++pairs;
      if (sc.corpus.links.contains(i, j)) ++linked;
    }
  double density = static_cast<double>(linked) / static_cast<double>(pairs);
  CHECK(density == Approx(0.7).epsilon(0.05 / 0.7));
}

TEST_CASE("post communities concentrate on the author's label") {
  SyntheticConfig cfg;
  cfg.words_per_post = 1;
  auto truth = generate_ground_truth(cfg, 8);
  auto sc = generate_corpus(truth, cfg, 9);
  std::size_t hits = 0;
  for (std::size_t d = 0; d < sc.corpus.posts.size(); ++d)
    if (sc.post_truth[d].community == truth.user_label[sc.corpus.posts[d].author]) ++hits;
  // Interior labels keep ~0.40 of the mass, edge labels ~0.55.
  double frac = static_cast<double>(hits) / static_cast<double>(sc.corpus.posts.size());
  CHECK((frac > 0.35 && frac < 0.60));
}

TEST_CASE("recovery of the truth against itself is exact") {
  auto cfg = small_config();
  auto truth = generate_ground_truth(cfg, 11);
  auto est = estimates_from_truth(truth);
  auto r = evaluate_recovery(truth, est);
  CHECK(r.topic_word_tv == Approx(0.0));
  CHECK(r.comm_topic_tv == Approx(0.0));
  CHECK(r.temporal_tv == Approx(0.0));
  CHECK(r.link_mae == Approx(0.0));
  for (std::size_t k = 0; k < cfg.K; ++k) CHECK(r.topic_alignment[k] == k);
  for (std::size_t c = 0; c < cfg.C; ++c) CHECK(r.community_alignment[c] == c);
}

TEST_CASE("recovery is invariant to relabelling topics and communities") {
  auto cfg = small_config();
  auto truth = generate_ground_truth(cfg, 12);
  auto est = estimates_from_truth(truth);
  const std::vector<std::size_t> topic_perm{2, 0, 3, 1}, comm_perm{1, 2, 0};
  ModelEstimates p = est;
  for (std::size_t k = 0; k < cfg.K; ++k) {
    for (std::size_t v = 0; v < cfg.V; ++v) p.phi(topic_perm[k], v) = est.phi(k, v);
    for (std::size_t c = 0; c < cfg.C; ++c) {
      p.theta(comm_perm[c], topic_perm[k]) = est.theta(c, k);
      auto src = est.psi_row(k, c);
      auto dst = p.psi_row(topic_perm[k], comm_perm[c]);
      std::copy(src.begin(), src.end(), dst.begin());
    }
  }
  for (std::size_t i = 0; i < cfg.U; ++i)
    for (std::size_t c = 0; c < cfg.C; ++c) p.pi(i, comm_perm[c]) = est.pi(i, c);
  for (std::size_t a = 0; a < cfg.C; ++a)
    for (std::size_t b = 0; b < cfg.C; ++b) p.eta(comm_perm[a], comm_perm[b]) = est.eta(a, b);

  auto r = evaluate_recovery(truth, p);
  CHECK(r.topic_word_tv == Approx(0.0));
  CHECK(r.comm_topic_tv == Approx(0.0));
  CHECK(r.temporal_tv == Approx(0.0));
  CHECK(r.link_mae == Approx(0.0));
  for (std::size_t k = 0; k < cfg.K; ++k) CHECK(r.topic_alignment[k] == topic_perm[k]);
  for (std::size_t c = 0; c < cfg.C; ++c) CHECK(r.community_alignment[c] == comm_perm[c]);
}

TEST_CASE("uniform estimates score the baseline distance") {
  SyntheticConfig cfg;
  auto truth = generate_ground_truth(cfg, 13);
  auto est = estimates_from_truth(truth);
  for (auto* m : {&est.phi, &est.theta, &est.psi}) {
    double u = 1.0 / static_cast<double>(m->cols());
    for (std::size_t r = 0; r < m->rows(); ++r)
      for (std::size_t c = 0; c < m->cols(); ++c) (*m)(r, c) = u;
  }
  auto r = evaluate_recovery(truth, est);
  CHECK(r.topic_word_tv == Approx(r.baseline_topic_word_tv).epsilon(1e-12));
  CHECK(r.comm_topic_tv == Approx(r.baseline_comm_topic_tv).epsilon(1e-12));
  CHECK(r.temporal_tv == Approx(r.baseline_temporal_tv).epsilon(1e-12));
  CHECK(r.baseline_topic_word_tv > 0.5);

  ModelEstimates wrong = est;
  wrong.phi = Matrix(3, 3);
  CHECK_THROWS(evaluate_recovery(truth, wrong));
}

TEST_CASE("total_variation") {
  std::vector<double> a{0.5, 0.5, 0.0}, b{0.0, 0.5, 0.5};
  CHECK(total_variation(a, b) == Approx(0.5));
  CHECK(total_variation(a, a) == 0.0);
  std::vector<double> c{1.0};
  CHECK_THROWS(total_variation(a, c));
}

TEST_CASE("ground truth and report serialize to JSON") {
  auto cfg = small_config();
  auto truth = generate_ground_truth(cfg, 4);
  std::ostringstream out;
  write_ground_truth_json(out, truth, cfg, 4);
  auto j = nlohmann::json::parse(out.str());
  CHECK(j["seed"] == 4);
  CHECK(j["topic_word"].size() == cfg.K);
  CHECK(j["user_label"].size() == cfg.U);

  std::ostringstream rep;
  write_recovery_json(rep, evaluate_recovery(truth, estimates_from_truth(truth)));
  auto r = nlohmann::json::parse(rep.str());
  CHECK(r.contains("baseline_tv"));
  CHECK(r["link_mae"] == 0.0);
}
