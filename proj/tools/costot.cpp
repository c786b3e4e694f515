// costot: synthesize, train, evaluate and analyze the community/topic/time model.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "costot/analysis.hpp"
#include "costot/corpus.hpp"
#include "costot/eval.hpp"
#include "costot/model.hpp"
#include "costot/sampler.hpp"
#include "costot/synthetic.hpp"
#include "costot/text.hpp"

namespace fs = std::filesystem;
using namespace costot;

namespace {

const std::vector<std::string> kMetrics{"time_acc", "auc", "perplexity"};

struct CorpusFlags {
  std::string posts;
  std::string links;
  std::string vocab;
  std::uint64_t slice_width = 0;  // 0: raw time is already a slice index
  std::size_t min_word_count = 1;
  std::size_t min_posts = 0;
  std::size_t users = 0;
  std::size_t slices = 0;
};

struct ModelFlags {
  std::size_t C = 5;
  std::size_t K = 30;
  std::uint64_t iters = 500;
  std::uint64_t seed = 1;
  std::uint64_t log_every = 1;
  std::optional<double> rho, alpha, beta, epsilon, delta0, delta1, lambda1;
};

struct SplitFlags {
  double post_holdout = 0.2;
  double link_holdout = 0.2;
  double neg_holdout = 0.01;
  std::optional<std::size_t> neg_count;
  std::uint64_t split_seed = 1;
};

struct EvalFlags {
  std::vector<std::string> metrics = kMetrics;
  std::uint32_t tolerance = 10;
};

std::string out_dir = "costot_out";

const CLI::Validator kAtLeastOne(
    [](std::string& value) -> std::string {
      long long v = 0;
      try {
        v = std::stoll(value);
      } catch (const std::exception&) {
        return "expected an integer, got '" + value + "'";
      }
      return v >= 1 ? std::string() : "must be at least 1, got " + value;
    },
    "INT>=1");

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void add_corpus_flags(CLI::App* app, CorpusFlags& f) {
  app->add_option("--posts", f.posts, "posts file: user<TAB>time<TAB>tokens")->required();
  app->add_option("--links", f.links, "links file: src<TAB>dst");
  app->add_option("--vocab", f.vocab, "fixed vocabulary, one token per line");
  app->add_option("--slice-width", f.slice_width, "bucket raw times into slices of this width");
  app->add_option("--min-word-count", f.min_word_count, "drop rarer tokens when building the vocabulary")
      ->capture_default_str();
  app->add_option("--min-posts", f.min_posts, "drop users with fewer posts (0 keeps all)")
      ->capture_default_str();
  app->add_option("--users", f.users, "minimum number of users (ids beyond the posts file)");
  app->add_option("--slices", f.slices, "minimum number of time slices");
}

void add_model_flags(CLI::App* app, ModelFlags& f) {
  app->add_option("-C,--communities", f.C, "number of communities")
      ->check(kAtLeastOne)
      ->capture_default_str();
  app->add_option("-K,--topics", f.K, "number of topics")->check(kAtLeastOne)->capture_default_str();
  app->add_option("--iters", f.iters, "Gibbs sweeps")->check(kAtLeastOne)->capture_default_str();
  app->add_option("--seed", f.seed, "sampler seed")->capture_default_str();
  app->add_option("--log-every", f.log_every, "record the log-likelihood every n sweeps")
      ->check(kAtLeastOne)
      ->capture_default_str();
  app->add_option("--rho", f.rho, "membership concentration (default 0.01)")->check(CLI::PositiveNumber);
  app->add_option("--alpha", f.alpha, "topic concentration (default 0.01)")->check(CLI::PositiveNumber);
  app->add_option("--beta", f.beta, "word concentration (default 0.01)")->check(CLI::PositiveNumber);
  app->add_option("--epsilon", f.epsilon, "time concentration (default 0.01)")->check(CLI::PositiveNumber);
  app->add_option("--delta0", f.delta0, "background prior (default 0.01)")->check(CLI::PositiveNumber);
  app->add_option("--delta1", f.delta1, "foreground prior (default 1)")->check(CLI::PositiveNumber);
  app->add_option("--lambda1", f.lambda1, "link prior pseudo-count (default 0.1)")
      ->check(CLI::PositiveNumber);
}

void add_split_flags(CLI::App* app, SplitFlags& f, bool training_only) {
  if (training_only) f = SplitFlags{0.0, 0.0, 0.0, std::nullopt, 1};
  app->add_option("--post-holdout", f.post_holdout, "fraction of posts held out")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app->add_option("--link-holdout", f.link_holdout, "fraction of links held out")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app->add_option("--neg-holdout", f.neg_holdout, "fraction of absent pairs sampled as negatives")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  if (!training_only)
    app->add_option("--neg-count", f.neg_count, "absolute number of negatives (overrides --neg-holdout)");
  app->add_option("--split-seed", f.split_seed, "holdout seed")->capture_default_str();
}

void add_eval_flags(CLI::App* app, EvalFlags& f) {
  auto known = CLI::Validator(
      [](std::string& name) -> std::string {
        if (std::find(kMetrics.begin(), kMetrics.end(), name) != kMetrics.end()) return {};
        return "unknown metric '" + name + "'; valid metrics: time_acc, auc, perplexity";
      },
      "METRIC");
  app->add_option("--metrics", f.metrics, "comma separated: time_acc,auc,perplexity")
      ->delimiter(',')
      ->check(known)
      ->capture_default_str();
  app->add_option("--tolerance", f.tolerance, "time-stamp tolerance in slices")->capture_default_str();
}

void add_out_flag(CLI::App* app) {
  app->add_option("--out", out_dir, "output directory")->envname("COSTOT_OUT")->capture_default_str();
}

Corpus load_corpus(const CorpusFlags& f) {
  std::optional<Vocabulary> fixed;
  if (!f.vocab.empty()) {
    auto in = open_in(f.vocab);
    fixed = read_vocabulary(in);
  }
  PostIngestResult ingested;
  {
    auto in = open_in(f.posts);
    try {
      ingested = ingest_posts(in, fixed ? &*fixed : nullptr, f.min_word_count);
    } catch (const ParseError& e) {
      throw std::runtime_error(f.posts + ": " + e.what());
    }
  }
  if (f.slice_width > 0) {
    std::vector<std::uint64_t> raw;
    raw.reserve(ingested.posts.size());
    for (const auto& p : ingested.posts) raw.push_back(p.time_slice);
    auto slices = discretize_time(raw, f.slice_width);
    for (std::size_t d = 0; d < slices.size(); ++d) ingested.posts[d].time_slice = slices[d];
  }
  std::size_t users = f.users;
  for (const auto& p : ingested.posts) users = std::max<std::size_t>(users, p.author + 1);

  LinkSet links;
  links.out_links.assign(users, {});
  if (!f.links.empty()) {
    auto in = open_in(f.links);
    try {
      links = ingest_links(in, users).links;
    } catch (const ParseError& e) {
      throw std::runtime_error(f.links + ": " + e.what() + " (use --users for users without posts)");
    }
  }
  auto corpus = assemble_corpus(std::move(ingested.posts), std::move(links),
                                std::move(ingested.vocabulary), users, f.slices);
  if (f.min_posts > 0) corpus = filter_low_activity(corpus, f.min_posts);
  std::cerr << "corpus ";
  write_summary(std::cerr, corpus);
  if (ingested.summary.dropped_tokens > 0)
    std::cerr << "dropped_tokens=" << ingested.summary.dropped_tokens << '\n';
  return corpus;
}

Hyperparameters make_hyper(const Corpus& train, const ModelFlags& f) {
  Hyperparameters h = default_hyperparameters(train, f.C, f.K);
  if (f.rho) h.rho = *f.rho;
  if (f.alpha) h.alpha = *f.alpha;
  if (f.beta) h.beta = *f.beta;
  if (f.epsilon) h.epsilon = *f.epsilon;
  if (f.delta0) h.delta0 = *f.delta0;
  if (f.delta1) h.delta1 = *f.delta1;
  if (f.lambda1) h.lambda1 = *f.lambda1;
  h.validate();
  return h;
}

void echo_hyper(std::ostream& out, const Hyperparameters& h) {
  out << "hyper rho=" << format_double(h.rho) << " alpha=" << format_double(h.alpha)
      << " beta=" << format_double(h.beta) << " epsilon=" << format_double(h.epsilon)
      << " delta0=" << format_double(h.delta0) << " delta1=" << format_double(h.delta1)
      << " lambda0=" << format_double(h.lambda0) << " lambda1=" << format_double(h.lambda1)
      << " C=" << h.C << " K=" << h.K << " T=" << h.T << " V=" << h.V << '\n';
}

SplitOptions split_options(const SplitFlags& f) {
  SplitOptions o;
  o.post_holdout = f.post_holdout;
  o.link_holdout = f.link_holdout;
  o.neg_link_holdout = f.neg_holdout;
  o.neg_link_count = f.neg_count;
  o.seed = f.split_seed;
  return o;
}

void echo_split(std::ostream& out, const SplitOptions& o, const CorpusSplit& s) {
  out << "split post_holdout=" << format_double(o.post_holdout)
      << " link_holdout=" << format_double(o.link_holdout)
      << " neg_holdout=" << format_double(o.neg_link_holdout) << " seed=" << o.seed
      << " train_posts=" << s.train.posts.size() << " test_posts=" << s.test_posts.size()
      << " train_links=" << s.train.links.size() << " test_links=" << s.test_links.size()
      << " test_negatives=" << s.test_negative_links.size()
      << " excluded_unseen=" << s.excluded_unseen_posts << '\n';
}

std::string config_label(std::size_t C, std::size_t K) {
  return "C" + std::to_string(C) + "_K" + std::to_string(K);
}

struct EvalOutput {
  std::vector<MetricRow> rows;
  std::vector<double> curve;
};

EvalOutput evaluate(const CorpusSplit& split, const ModelEstimates& est, const EvalFlags& f,
                    const std::string& label) {
  EvalOutput out;
  for (const auto& m : f.metrics) {
    if (m == "time_acc") {
      std::uint32_t max_tol = std::max<std::uint32_t>(
          f.tolerance, static_cast<std::uint32_t>(est.num_slices() > 0 ? est.num_slices() - 1 : 0));
      out.curve = time_accuracy_curve(split.test_posts, est, max_tol);
      out.rows.push_back({"time_acc_tol" + std::to_string(f.tolerance), label, out.curve[f.tolerance]});
    } else if (m == "auc") {
      std::vector<double> pos, neg;
      for (auto [a, b] : split.test_links) pos.push_back(link_probability(a, b, est));
      for (auto [a, b] : split.test_negative_links) neg.push_back(link_probability(a, b, est));
      out.rows.push_back({"auc", label, auc(pos, neg)});
    } else if (m == "perplexity") {
      out.rows.push_back({"perplexity", label, perplexity(split.test_posts, est).perplexity});
    }
  }
  return out;
}

void write_metrics(const EvalOutput& result) {
  fs::path path = fs::path(out_dir) / "metrics.csv";
  auto out = open_out(path);
  write_metrics_csv(out, result.rows);
  finish(out, path);
  write_metrics_csv(std::cout, result.rows);
  if (!result.curve.empty()) {
    fs::path curve_path = fs::path(out_dir) / "time_curve.csv";
    auto curve = open_out(curve_path);
    curve << "tolerance,accuracy\n";
    for (std::size_t t = 0; t < result.curve.size(); ++t)
      curve << t << ',' << format_double(result.curve[t]) << '\n';
    finish(curve, curve_path);
  }
}

struct LoadedModel {
  Checkpoint checkpoint;
  CorpusSplit split;
  ModelEstimates estimates;
};

LoadedModel load_checkpoint(const std::string& path, const Corpus& corpus) {
  LoadedModel m;
  {
    auto in = open_in(path);
    try {
      m.checkpoint = read_checkpoint(in);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ": " + e.what());
    }
  }
  SplitOptions o;
  o.post_holdout = m.checkpoint.post_holdout;
  o.link_holdout = m.checkpoint.link_holdout;
  o.neg_link_holdout = m.checkpoint.neg_link_holdout;
  o.seed = m.checkpoint.split_seed;
  m.split = split_corpus(corpus, o);
  try {
    auto tables = build_tables(m.split.train, m.checkpoint.hyper, m.checkpoint.state);
    m.estimates = estimate_parameters(tables, m.checkpoint.hyper);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + " does not match the corpus: " + e.what());
  }
  return m;
}

TrainResult run_training(const Corpus& corpus, const Hyperparameters& h, const ModelFlags& f,
                         std::ostream* progress) {
  TrainOptions opt;
  opt.iterations = f.iters;
  opt.seed = f.seed;
  opt.log_every = f.log_every;
  opt.progress = progress;
  return costot::train(corpus, h, opt);
}

int cmd_synth(const SyntheticConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  auto truth = generate_ground_truth(cfg, seed);
  auto sc = generate_corpus(truth, cfg, seed + 1);
  const fs::path dir(out_dir);
  std::cout << "synth C=" << cfg.C << " K=" << cfg.K << " V=" << cfg.V << " T=" << cfg.T
            << " U=" << cfg.U << " posts_per_user=" << cfg.posts_per_user
            << " words_per_post=" << cfg.words_per_post << " P0=" << format_double(cfg.p0)
            << " P_slope=" << format_double(cfg.p_slope) << " P_min=" << format_double(cfg.p_min)
            << " gauss_var=" << format_double(cfg.gauss_var) << " seed=" << seed << '\n';
  auto write = [&](const char* name, auto&& fn) {
    fs::path path = dir / name;
    auto out = open_out(path);
    fn(out);
    finish(out, path);
  };
  write("posts.tsv", [&](std::ostream& o) { write_posts(o, sc.corpus); });
  write("links.tsv", [&](std::ostream& o) { write_links(o, sc.corpus.links); });
  write("vocab.txt", [&](std::ostream& o) { write_vocabulary(o, sc.corpus.vocabulary); });
  write("ground_truth.json", [&](std::ostream& o) { write_ground_truth_json(o, truth, cfg, seed); });
  write("post_truth.tsv", [&](std::ostream& o) {
    o << "post\tcommunity\ttopic\n";
    for (std::size_t d = 0; d < sc.post_truth.size(); ++d)
      o << d << '\t' << sc.post_truth[d].community << '\t' << sc.post_truth[d].topic << '\n';
  });
  write_summary(std::cout, sc.corpus);
  return 0;
}

int cmd_train(const CorpusFlags& cf, const ModelFlags& mf, const SplitFlags& sf) {
  auto corpus = load_corpus(cf);
  auto opts = split_options(sf);
  auto split = split_corpus(corpus, opts);
  echo_split(std::cout, opts, split);
  auto h = make_hyper(split.train, mf);
  echo_hyper(std::cout, h);
  auto result = run_training(split.train, h, mf, &std::cerr);

  Checkpoint cp;
  cp.hyper = h;
  cp.state = result.state;
  cp.iterations = mf.iters;
  cp.post_holdout = sf.post_holdout;
  cp.link_holdout = sf.link_holdout;
  cp.neg_link_holdout = sf.neg_holdout;
  cp.split_seed = sf.split_seed;
  const fs::path dir(out_dir);
  {
    auto out = open_out(dir / "checkpoint.txt");
    write_checkpoint(out, cp);
    finish(out, dir / "checkpoint.txt");
  }
  {
    auto out = open_out(dir / "trace.csv");
    write_trace_csv(out, result.trace);
    finish(out, dir / "trace.csv");
  }
  std::cout << "final loglik=" << format_double(result.trace.back().loglik) << '\n';
  return 0;
}

int cmd_eval(const CorpusFlags& cf, const ModelFlags& mf, const SplitFlags& sf, const EvalFlags& ef,
             const std::string& checkpoint_path) {
  auto corpus = load_corpus(cf);
  EvalOutput result;
  if (!checkpoint_path.empty()) {
    auto model = load_checkpoint(checkpoint_path, corpus);
    SplitOptions o;
    o.post_holdout = model.checkpoint.post_holdout;
    o.link_holdout = model.checkpoint.link_holdout;
    o.neg_link_holdout = model.checkpoint.neg_link_holdout;
    o.seed = model.checkpoint.split_seed;
    echo_split(std::cout, o, model.split);
    echo_hyper(std::cout, model.checkpoint.hyper);
    result = evaluate(model.split, model.estimates, ef,
                      config_label(model.checkpoint.hyper.C, model.checkpoint.hyper.K));
  } else {
    auto opts = split_options(sf);
    auto split = split_corpus(corpus, opts);
    echo_split(std::cout, opts, split);
    auto h = make_hyper(split.train, mf);
    echo_hyper(std::cout, h);
    auto trained = run_training(split.train, h, mf, &std::cerr);
    result = evaluate(split, trained.estimates, ef, config_label(h.C, h.K));
  }
  write_metrics(result);
  return 0;
}

std::vector<std::size_t> parse_grid(const std::vector<std::size_t>& values, const char* name) {
  if (values.empty()) throw CLI::ValidationError(name, "grid must not be empty");
  return values;
}

int cmd_sweep(const CorpusFlags& cf, const ModelFlags& mf, const SplitFlags& sf, const EvalFlags& ef,
              const std::vector<std::size_t>& grid_c, const std::vector<std::size_t>& grid_k,
              std::size_t jobs) {
  auto corpus = load_corpus(cf);
  auto opts = split_options(sf);
  auto split = split_corpus(corpus, opts);
  echo_split(std::cout, opts, split);
  std::cout << "grid C={";
  for (std::size_t i = 0; i < grid_c.size(); ++i) std::cout << (i ? "," : "") << grid_c[i];
  std::cout << "} K={";
  for (std::size_t i = 0; i < grid_k.size(); ++i) std::cout << (i ? "," : "") << grid_k[i];
  std::cout << "}\n";

  struct Cell {
    std::size_t C, K;
    std::vector<MetricRow> rows;
    std::string error;
  };
  std::vector<Cell> cells;
  for (auto C : grid_c)
    for (auto K : grid_k) cells.push_back({C, K, {}, {}});

  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      Cell& cell = cells[i];
      ModelFlags cell_flags = mf;
      cell_flags.C = cell.C;
      cell_flags.K = cell.K;
      try {
        auto h = make_hyper(split.train, cell_flags);
        auto trained = run_training(split.train, h, cell_flags, nullptr);
        cell.rows = evaluate(split, trained.estimates, ef, config_label(cell.C, cell.K)).rows;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      std::lock_guard lock(log_mutex);
      std::cerr << "cell " << config_label(cell.C, cell.K)
                << (cell.error.empty() ? " done" : " failed: " + cell.error) << '\n';
    }
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, cells.size()));
  std::vector<std::thread> threads;
  for (std::size_t j = 1; j < jobs; ++j) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  std::vector<MetricRow> rows;
  std::size_t failures = 0;
  for (const auto& cell : cells) {
    rows.insert(rows.end(), cell.rows.begin(), cell.rows.end());
    if (!cell.error.empty()) ++failures;
  }
  const fs::path dir(out_dir);
  {
    auto out = open_out(dir / "sweep.csv");
    write_metrics_csv(out, rows);
    finish(out, dir / "sweep.csv");
  }
  {
    auto out = open_out(dir / "sweep_errors.csv");
    out << "config,error\n";
    for (const auto& cell : cells)
      if (!cell.error.empty()) out << config_label(cell.C, cell.K) << ",\"" << cell.error << "\"\n";
    finish(out, dir / "sweep_errors.csv");
  }
  write_metrics_csv(std::cout, rows);
  if (failures > 0) {
    std::cerr << failures << " of " << cells.size() << " cells failed; see sweep_errors.csv\n";
    return 1;
  }
  return 0;
}

int cmd_analyze(const CorpusFlags& cf, const std::string& checkpoint_path, std::size_t top_n,
                double peak_z) {
  auto corpus = load_corpus(cf);
  auto model = load_checkpoint(checkpoint_path, corpus);
  const auto& est = model.estimates;
  const auto& train = model.split.train;
  const std::size_t C = est.num_communities(), K = est.num_topics(), T = est.num_slices();
  const fs::path dir(out_dir);

  auto write = [&](const fs::path& path, auto&& fn) {
    auto out = open_out(path);
    fn(out);
    finish(out, path);
  };
  auto series_csv = [](std::ostream& o, std::span<const double> s) {
    o << "t,prob\n";
    for (std::size_t t = 0; t < s.size(); ++t) o << t << ',' << format_double(s[t]) << '\n';
  };

  std::vector<std::string> peak_lines;
  auto collect_peaks = [&](const std::string& series, std::span<const double> s) {
    for (auto t : detect_peaks(std::vector<double>(s.begin(), s.end()), peak_z))
      peak_lines.push_back(series + ',' + std::to_string(t) + ',' + format_double(s[t]));
  };

  for (std::size_t k = 0; k < K; ++k) {
    auto g = global_topic_dynamics(k, est);
    write(dir / "timelines" / ("global_k" + std::to_string(k) + ".csv"),
          [&](std::ostream& o) { series_csv(o, g); });
    collect_peaks("global_k" + std::to_string(k), g);
    for (std::size_t c = 0; c < C; ++c) {
      std::string name = "k" + std::to_string(k) + "_c" + std::to_string(c);
      write(dir / "timelines" / (name + ".csv"), [&](std::ostream& o) { series_csv(o, est.psi_row(k, c)); });
      collect_peaks(name, est.psi_row(k, c));
    }
  }
  write(dir / "peaks.csv", [&](std::ostream& o) {
    o << "series,t,prob\n";
    for (const auto& line : peak_lines) o << line << '\n';
  });

  auto posts = train.posts_per_user();
  for (std::size_t c = 0; c < C; ++c) {
    auto attention = community_topic_over_time(c, est);
    write(dir / ("attention_c" + std::to_string(c) + ".csv"), [&](std::ostream& o) {
      o << 't';
      for (std::size_t k = 0; k < K; ++k) o << ",topic" << k;
      o << '\n';
      for (std::size_t t = 0; t < T; ++t) {
        o << t;
        for (std::size_t k = 0; k < K; ++k) o << ',' << format_double(attention(t, k));
        o << '\n';
      }
    });
    write(dir / ("contributions_c" + std::to_string(c) + ".csv"), [&](std::ostream& o) {
      o << "user,contribution\n";
      for (auto [user, value] : rank_contributions(c, est, posts))
        o << user << ',' << format_double(value) << '\n';
    });
  }

  const std::size_t n = std::min(top_n, est.vocabulary_size());
  write(dir / "top_words.csv", [&](std::ostream& o) {
    o << "topic,rank,word,prob\n";
    for (std::size_t k = 0; k < K && n > 0; ++k) {
      auto words = top_words(k, n, est);
      for (std::size_t r = 0; r < words.size(); ++r)
        o << k << ',' << r << ',' << train.vocabulary.word(words[r].word) << ','
          << format_double(words[r].prob) << '\n';
    }
  });
  std::cout << "analysis written to " << dir.string() << " (" << K << " topics, " << C
            << " communities, " << peak_lines.size() << " peaks)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Community-aware topics over time: collapsed Gibbs sampler over posts, time stamps and links"};
  app.set_config("--config", "", "TOML/INI file with option defaults; flags take precedence");
  app.require_subcommand(1);

  SyntheticConfig synth_cfg;
  std::uint64_t synth_seed = 1;
  auto* synth = app.add_subcommand("synth", "generate a planted synthetic corpus");
  synth->add_option("-C,--communities", synth_cfg.C, "communities")->capture_default_str();
  synth->add_option("-K,--topics", synth_cfg.K, "topics")->capture_default_str();
  synth->add_option("--vocab-size", synth_cfg.V, "vocabulary size")->capture_default_str();
  synth->add_option("--slices", synth_cfg.T, "time slices")->capture_default_str();
  synth->add_option("--users", synth_cfg.U, "users")->capture_default_str();
  synth->add_option("--posts-per-user", synth_cfg.posts_per_user, "posts per user")->capture_default_str();
  synth->add_option("--words-per-post", synth_cfg.words_per_post, "words per post")->capture_default_str();
  synth->add_option("--p0", synth_cfg.p0, "within-community link probability")->capture_default_str();
  synth->add_option("--p-slope", synth_cfg.p_slope, "link probability drop per index step")
      ->capture_default_str();
  synth->add_option("--p-min", synth_cfg.p_min, "link probability floor")->capture_default_str();
  synth->add_option("--gauss-var", synth_cfg.gauss_var, "Gaussian variance")->capture_default_str();
  synth->add_option("--seed", synth_seed, "generator seed")->capture_default_str();
  add_out_flag(synth);

  CorpusFlags train_corpus;
  ModelFlags train_model_flags;
  SplitFlags train_split;
  auto* train = app.add_subcommand("train", "fit the model and write a checkpoint");
  add_corpus_flags(train, train_corpus);
  add_model_flags(train, train_model_flags);
  add_split_flags(train, train_split, true);
  add_out_flag(train);

  CorpusFlags eval_corpus;
  ModelFlags eval_model_flags;
  SplitFlags eval_split;
  EvalFlags eval_flags;
  std::string eval_checkpoint;
  auto* eval = app.add_subcommand("eval", "held-out time prediction, link AUC and perplexity");
  add_corpus_flags(eval, eval_corpus);
  add_model_flags(eval, eval_model_flags);
  add_split_flags(eval, eval_split, false);
  add_eval_flags(eval, eval_flags);
  eval->add_option("--checkpoint", eval_checkpoint,
                   "evaluate a trained checkpoint on its own holdout instead of training");
  add_out_flag(eval);

  CorpusFlags sweep_corpus;
  ModelFlags sweep_model_flags;
  SplitFlags sweep_split;
  EvalFlags sweep_eval;
  std::vector<std::size_t> grid_c{20, 50, 100, 150}, grid_k{20, 50, 100, 150};
  std::size_t jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "train and evaluate over a grid of C and K");
  add_corpus_flags(sweep, sweep_corpus);
  add_model_flags(sweep, sweep_model_flags);
  add_split_flags(sweep, sweep_split, false);
  add_eval_flags(sweep, sweep_eval);
  sweep->add_option("--grid-communities", grid_c, "values of C")
      ->delimiter(',')
      ->check(kAtLeastOne)
      ->capture_default_str();
  sweep->add_option("--grid-topics", grid_k, "values of K")
      ->delimiter(',')
      ->check(kAtLeastOne)
      ->capture_default_str();
  sweep->add_option("--jobs", jobs, "cells trained concurrently")->check(kAtLeastOne)->capture_default_str();
  add_out_flag(sweep);

  CorpusFlags analyze_corpus;
  std::string analyze_checkpoint;
  std::size_t top_n = 10;
  double peak_z = 2.0;
  auto* analyze = app.add_subcommand("analyze", "export timelines, attention, contributions and top words");
  add_corpus_flags(analyze, analyze_corpus);
  analyze->add_option("--checkpoint", analyze_checkpoint, "trained checkpoint")->required();
  analyze->add_option("--top-n", top_n, "top words per topic")->capture_default_str();
  analyze->add_option("--peak-z", peak_z, "z-score threshold for peaks")->capture_default_str();
  add_out_flag(analyze);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) return cmd_synth(synth_cfg, synth_seed);
    if (*train) return cmd_train(train_corpus, train_model_flags, train_split);
    if (*eval) return cmd_eval(eval_corpus, eval_model_flags, eval_split, eval_flags, eval_checkpoint);
    if (*sweep)
      return cmd_sweep(sweep_corpus, sweep_model_flags, sweep_split, sweep_eval,
                       parse_grid(grid_c, "--grid-communities"), parse_grid(grid_k, "--grid-topics"),
                       jobs);
    if (*analyze) return cmd_analyze(analyze_corpus, analyze_checkpoint, top_n, peak_z);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
