#include "costot/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "costot/text.hpp"

namespace costot {

void Hyperparameters::validate() const {
  for (double v : {rho, alpha, beta, epsilon, delta0, delta1, lambda0, lambda1})
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("hyperparameter concentrations must be positive and finite");
  if (C == 0 || K == 0 || T == 0 || V == 0)
    throw std::invalid_argument("C, K, T and V must all be at least 1");
}

double compute_lambda0(std::uint64_t n_neg, std::size_t C) {
  if (n_neg == 0) throw std::invalid_argument("lambda0 needs at least one negative link");
  if (C == 0) throw std::invalid_argument("C must be at least 1");
  double c = static_cast<double>(C);
  return std::log(static_cast<double>(n_neg) / (c * c));
}

double clamped_lambda0(std::uint64_t n_neg, std::size_t C, double floor) {
  double value = compute_lambda0(n_neg, C);
  return value <= 0.0 ? floor : value;
}

std::uint64_t count_negative_links(const Corpus& corpus) {
  std::uint64_t u = corpus.num_users;
  std::uint64_t pairs = u == 0 ? 0 : u * (u - 1);
  return pairs - corpus.links.size();
}

Hyperparameters default_hyperparameters(const Corpus& corpus, std::size_t C, std::size_t K,
                                        double lambda0_floor) {
  Hyperparameters h;
  h.C = C;
  h.K = K;
  h.T = std::max<std::size_t>(1, corpus.num_slices);
  h.V = std::max<std::size_t>(1, corpus.vocabulary.size());
  std::uint64_t n_neg = count_negative_links(corpus);
  h.lambda0 = n_neg == 0 ? lambda0_floor : clamped_lambda0(n_neg, C, lambda0_floor);
  h.lambda1 = 0.1;
  return h;
}

CountTables::CountTables(std::size_t users, const Hyperparameters& hyper)
    : U(users), C(hyper.C), K(hyper.K), T(hyper.T), V(hyper.V),
      user_comm(U * C, 0), user_total(U, 0), comm_topic(C * K, 0), comm_total(C, 0),
      comm_topic_time(C * K * T, 0), comm_topic_time_total(C * K, 0), topic_word(K * V, 0),
      topic_total(K, 0), bg_word(V, 0), link_comm(C * C, 0) {}

void CountTables::update_post_membership(std::size_t user, std::size_t c, std::int64_t delta) {
  n_user_comm(user, c) += delta;
  user_total[user] += delta;
}

void CountTables::update_post_topic(std::size_t c, std::size_t k, std::size_t t,
                                    std::int64_t delta) {
  n_comm_topic(c, k) += delta;
  comm_total[c] += delta;
  n_ctt(c, k, t) += delta;
  n_ct_total(c, k) += delta;
}

void CountTables::update_token(bool foreground, std::size_t k, std::size_t v, std::int64_t delta) {
  if (foreground) {
    n_topic_word(k, v) += delta;
    topic_total[k] += delta;
    n_fg += delta;
  } else {
    bg_word[v] += delta;
    bg_total += delta;
    n_bg += delta;
  }
}

void CountTables::update_link(std::size_t src, std::size_t dst, std::size_t s, std::size_t sp,
                              std::int64_t delta) {
  n_user_comm(src, s) += delta;
  user_total[src] += delta;
  n_user_comm(dst, sp) += delta;
  user_total[dst] += delta;
  n_link_comm(s, sp) += delta;
}

void check_state(const Corpus& corpus, const Hyperparameters& hyper, const LatentState& state) {
  std::size_t n_links = corpus.links.size();
  if (state.c.size() != corpus.posts.size() || state.z.size() != corpus.posts.size() ||
      state.f.size() != corpus.num_tokens() || state.s.size() != n_links ||
      state.s_prime.size() != n_links)
    throw std::invalid_argument("latent state shape does not match the corpus");
  for (auto c : state.c)
    if (c >= hyper.C) throw std::invalid_argument("community indicator out of range");
  for (auto z : state.z)
    if (z >= hyper.K) throw std::invalid_argument("topic indicator out of range");
  for (auto f : state.f)
    if (f > 1) throw std::invalid_argument("foreground flag must be 0 or 1");
  for (std::size_t e = 0; e < n_links; ++e)
    if (state.s[e] >= hyper.C || state.s_prime[e] >= hyper.C)
      throw std::invalid_argument("link community indicator out of range");
  for (const auto& p : corpus.posts)
    if (p.time_slice >= hyper.T) throw std::invalid_argument("time slice outside [0, T)");
  if (corpus.vocabulary.size() > hyper.V) throw std::invalid_argument("vocabulary larger than V");
}

CountTables build_tables(const Corpus& corpus, const Hyperparameters& hyper,
                         const LatentState& state) {
  check_state(corpus, hyper, state);
  CountTables tables(corpus.num_users, hyper);
  std::size_t token = 0;
  for (std::size_t d = 0; d < corpus.posts.size(); ++d) {
    const Post& post = corpus.posts[d];
    tables.update_post_membership(post.author, state.c[d], +1);
    tables.update_post_topic(state.c[d], state.z[d], post.time_slice, +1);
    for (auto w : post.tokens) tables.update_token(state.f[token++] != 0, state.z[d], w, +1);
  }
  auto edges = corpus.links.edges();
  for (std::size_t e = 0; e < edges.size(); ++e)
    tables.update_link(edges[e].first, edges[e].second, state.s[e], state.s_prime[e], +1);
  return tables;
}

InitResult init_state(const Corpus& corpus, const Hyperparameters& hyper, Rng& rng) {
  hyper.validate();
  InitResult out;
  LatentState& st = out.state;
  std::size_t n_posts = corpus.posts.size();
  st.c.resize(n_posts);
  st.z.resize(n_posts);
  for (std::size_t d = 0; d < n_posts; ++d) {
    st.c[d] = static_cast<std::uint32_t>(rng.uniform_int(hyper.C));
    st.z[d] = static_cast<std::uint32_t>(rng.uniform_int(hyper.K));
  }
  std::size_t n_links = corpus.links.size();
  st.s.resize(n_links);
  st.s_prime.resize(n_links);
  for (std::size_t e = 0; e < n_links; ++e) {
    st.s[e] = static_cast<std::uint32_t>(rng.uniform_int(hyper.C));
    st.s_prime[e] = static_cast<std::uint32_t>(rng.uniform_int(hyper.C));
  }
  double p_fg = hyper.delta1 / (hyper.delta0 + hyper.delta1);
  st.f.resize(corpus.num_tokens());
  for (auto& f : st.f) f = rng.bernoulli(p_fg) ? 1 : 0;
  out.tables = build_tables(corpus, hyper, st);
  return out;
}

InitResult init_state(const Corpus& corpus, const Hyperparameters& hyper, std::uint64_t seed) {
  Rng rng(seed);
  auto out = init_state(corpus, hyper, rng);
  out.state.rng_seed = seed;
  return out;
}

ModelEstimates estimate_parameters(const CountTables& tables, const Hyperparameters& h) {
  const std::size_t U = tables.U, C = h.C, K = h.K, T = h.T, V = h.V;
  const double dC = static_cast<double>(C), dK = static_cast<double>(K),
               dT = static_cast<double>(T), dV = static_cast<double>(V);
  ModelEstimates est;

  est.pi = Matrix(U, C);
  for (std::size_t i = 0; i < U; ++i) {
    double denom = static_cast<double>(tables.user_total[i]) + dC * h.rho;
    for (std::size_t c = 0; c < C; ++c)
      est.pi(i, c) = (static_cast<double>(tables.n_user_comm(i, c)) + h.rho) / denom;
  }

  est.theta = Matrix(C, K);
  for (std::size_t c = 0; c < C; ++c) {
    double denom = static_cast<double>(tables.comm_total[c]) + dK * h.alpha;
    for (std::size_t k = 0; k < K; ++k)
      est.theta(c, k) = (static_cast<double>(tables.n_comm_topic(c, k)) + h.alpha) / denom;
  }

  est.psi = Matrix(K * C, T);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t c = 0; c < C; ++c) {
      double denom = static_cast<double>(tables.n_ct_total(c, k)) + dT * h.epsilon;
      auto row = est.psi_row(k, c);
      for (std::size_t t = 0; t < T; ++t)
        row[t] = (static_cast<double>(tables.n_ctt(c, k, t)) + h.epsilon) / denom;
    }

  est.phi = Matrix(K, V);
  for (std::size_t k = 0; k < K; ++k) {
    double denom = static_cast<double>(tables.topic_total[k]) + dV * h.beta;
    for (std::size_t v = 0; v < V; ++v)
      est.phi(k, v) = (static_cast<double>(tables.n_topic_word(k, v)) + h.beta) / denom;
  }

  est.phi_bg.resize(V);
  double bg_denom = static_cast<double>(tables.bg_total) + dV * h.beta;
  for (std::size_t v = 0; v < V; ++v)
    est.phi_bg[v] = (static_cast<double>(tables.bg_word[v]) + h.beta) / bg_denom;

  est.chi = (static_cast<double>(tables.n_fg) + h.delta1) /
            (static_cast<double>(tables.n_fg + tables.n_bg) + h.delta0 + h.delta1);

  // Beta form with the link count on both sides, as used by the sampler.
  est.eta = Matrix(C, C);
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t cp = 0; cp < C; ++cp) {
      double n = static_cast<double>(tables.n_link_comm(c, cp));
      est.eta(c, cp) = (n + h.lambda1) / (n + h.lambda0 + h.lambda1);
    }
  return est;
}

double complete_log_likelihood(const LatentState& state, const ModelEstimates& est,
                               const Corpus& corpus) {
  double text = 0.0;
  const double log_chi = std::log(est.chi);
  const double log_not_chi = std::log1p(-est.chi);
  std::size_t token = 0;
  for (std::size_t d = 0; d < corpus.posts.size(); ++d) {
    const Post& post = corpus.posts[d];
    std::size_t c = state.c[d], k = state.z[d];
    text += std::log(est.pi(post.author, c)) + std::log(est.theta(c, k)) +
            std::log(est.psi_row(k, c)[post.time_slice]);
    for (auto w : post.tokens) {
      if (state.f[token++] != 0)
        text += log_chi + std::log(est.phi(k, w));
      else
        text += log_not_chi + std::log(est.phi_bg[w]);
    }
  }
  double links = 0.0;
  std::size_t e = 0;
  for (std::size_t i = 0; i < corpus.links.out_links.size(); ++i)
    for (auto j : corpus.links.out_links[i]) {
      std::size_t s = state.s[e], sp = state.s_prime[e];
      links += std::log(est.pi(i, s)) + std::log(est.pi(j, sp)) + std::log(est.eta(s, sp));
      ++e;
    }
  return text + links;
}

double complete_log_likelihood(const LatentState& state, const CountTables& tables,
                               const Corpus& corpus, const Hyperparameters& hyper) {
  return complete_log_likelihood(state, estimate_parameters(tables, hyper), corpus);
}

namespace {

constexpr const char* kCheckpointMagic = "costot-checkpoint";
constexpr int kCheckpointVersion = 1;

template <typename T>
void write_array(std::ostream& out, const char* name, const std::vector<T>& values) {
  out << name << ' ' << values.size();
  for (auto v : values) out << ' ' << static_cast<std::uint64_t>(v);
  out << '\n';
}

template <typename T>
std::vector<T> read_array(std::istream& in, const char* name) {
  std::string tag;
  std::size_t n = 0;
  if (!(in >> tag >> n) || tag != name)
    throw std::runtime_error(std::string("checkpoint: expected section '") + name + "'");
  std::vector<T> values(n);
  for (auto& v : values) {
    std::uint64_t x = 0;
    if (!(in >> x)) throw std::runtime_error(std::string("checkpoint: truncated section ") + name);
    v = static_cast<T>(x);
  }
  return values;
}

void expect(std::istream& in, const char* tag) {
  std::string got;
  if (!(in >> got) || got != tag)
    throw std::runtime_error(std::string("checkpoint: expected '") + tag + "'");
}

double read_real(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw std::runtime_error("checkpoint: missing number");
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw std::runtime_error("checkpoint: invalid number '" + token + "'");
  return value;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& cp) {
  const auto& h = cp.hyper;
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "seed " << cp.state.rng_seed << '\n';
  out << "iterations " << cp.iterations << '\n';
  out << "split " << format_double(cp.post_holdout) << ' ' << format_double(cp.link_holdout) << ' '
      << format_double(cp.neg_link_holdout) << ' ' << cp.split_seed << '\n';
  out << "dims " << h.C << ' ' << h.K << ' ' << h.T << ' ' << h.V << '\n';
  out << "hyper";
  for (double v : {h.rho, h.alpha, h.beta, h.epsilon, h.delta0, h.delta1, h.lambda0, h.lambda1})
    out << ' ' << format_double(v);
  out << '\n';
  write_array(out, "c", cp.state.c);
  write_array(out, "z", cp.state.z);
  write_array(out, "f", cp.state.f);
  write_array(out, "s", cp.state.s);
  write_array(out, "sp", cp.state.s_prime);
}

Checkpoint read_checkpoint(std::istream& in) {
  Checkpoint cp;
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kCheckpointMagic)
    throw std::runtime_error("not a checkpoint file");
  if (version != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  expect(in, "seed");
  in >> cp.state.rng_seed;
  expect(in, "iterations");
  in >> cp.iterations;
  expect(in, "split");
  cp.post_holdout = read_real(in);
  cp.link_holdout = read_real(in);
  cp.neg_link_holdout = read_real(in);
  in >> cp.split_seed;
  auto& h = cp.hyper;
  expect(in, "dims");
  in >> h.C >> h.K >> h.T >> h.V;
  expect(in, "hyper");
  for (double* v : {&h.rho, &h.alpha, &h.beta, &h.epsilon, &h.delta0, &h.delta1, &h.lambda0,
                    &h.lambda1})
    *v = read_real(in);
  if (!in) throw std::runtime_error("checkpoint: malformed header");
  h.validate();
  cp.state.c = read_array<std::uint32_t>(in, "c");
  cp.state.z = read_array<std::uint32_t>(in, "z");
  cp.state.f = read_array<std::uint8_t>(in, "f");
  cp.state.s = read_array<std::uint32_t>(in, "s");
  cp.state.s_prime = read_array<std::uint32_t>(in, "sp");
  return cp;
}

}  // namespace costot
