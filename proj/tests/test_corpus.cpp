#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <sstream>

#include "costot/corpus.hpp"
#include "costot/random.hpp"

using namespace costot;

TEST_CASE("ingest_posts parses a single line") {
  std::istringstream in("0\t3\ta b a\n");
  auto r = ingest_posts(in, nullptr, 1);
  REQUIRE(r.posts.size() == 1);
  CHECK(r.vocabulary.size() == 2);
  auto a = *r.vocabulary.find("a"), b = *r.vocabulary.find("b");
  CHECK(r.posts[0] == Post{0, {a, b, a}, 3});
}

TEST_CASE("ingest_posts on an empty stream") {
  std::istringstream in("");
  auto r = ingest_posts(in, nullptr, 1);
  CHECK(r.posts.empty());
  CHECK(r.vocabulary.size() == 0);
}

TEST_CASE("ingest_posts drops rare words but keeps the post") {
  // a occurs twice, b and c once.
  std::istringstream in("0\t0\ta b\n1\t1\ta\n2\t1\tc\n");
  auto r = ingest_posts(in, nullptr, 2);
  CHECK(r.vocabulary.size() == 1);
  CHECK(r.vocabulary.find("a").has_value());
  CHECK_FALSE(r.vocabulary.find("b").has_value());
  REQUIRE(r.posts.size() == 3);
  CHECK(r.posts[0].tokens == std::vector<WordId>{0});
  CHECK(r.posts[2].tokens.empty());
  CHECK(r.summary.dropped_tokens == 2);
}

TEST_CASE("ingest_posts with a fixed vocabulary counts unknown tokens") {
  Vocabulary vocab({"x", "y"});
  std::istringstream in("0\t0\tx z y z\n");
  auto r = ingest_posts(in, &vocab, 1);
  CHECK(r.posts[0].tokens == std::vector<WordId>{0, 1});
  CHECK(r.summary.dropped_tokens == 2);
  CHECK(r.vocabulary == vocab);
}

TEST_CASE("ingest_posts reports the line of a malformed record") {
  std::istringstream in("0\t1\ta\n\nfoo\t1\ta\n");
  try {
    ingest_posts(in, nullptr, 1);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream no_tab("0 1 a\n");
  CHECK_THROWS_AS(ingest_posts(no_tab, nullptr, 1), ParseError);
}

TEST_CASE("ingest_posts accepts posts without tokens and skips blank lines") {
  std::istringstream in("4\t2\n\n1\t0\t\n");
  auto r = ingest_posts(in, nullptr, 1);
  CHECK(r.posts.size() == 2);
  CHECK(r.summary.skipped_blank == 1);
  CHECK(r.posts[0].author == 4);
  CHECK(r.posts[0].tokens.empty());
}

TEST_CASE("ingest_links deduplicates and rejects bad endpoints") {
  std::istringstream in("0\t1\n0\t1\n1\t0\n");
  auto r = ingest_links(in, 2);
  CHECK(r.links.out_links[0] == std::vector<UserId>{1});
  CHECK(r.links.out_links[1] == std::vector<UserId>{0});
  CHECK(r.duplicates_collapsed == 1);

  std::istringstream self("2\t2\n");
  auto s = ingest_links(self, 3);
  CHECK(s.self_links_skipped == 1);
  CHECK(s.links.size() == 0);

  std::istringstream empty("");
  auto e = ingest_links(empty, 3);
  CHECK(e.links.out_links.size() == 3);
  for (const auto& row : e.links.out_links) CHECK(row.empty());

  std::istringstream bad("0\t3\n");
  CHECK_THROWS_AS(ingest_links(bad, 3), ParseError);
}

TEST_CASE("discretize_time") {
  CHECK(discretize_time({5, 5, 5}, 1) == std::vector<std::uint32_t>{0, 0, 0});
  CHECK(discretize_time({0, 1, 2, 3}, 2) == std::vector<std::uint32_t>{0, 0, 1, 1});
  CHECK(discretize_time({10, 40, 100}, 30) == std::vector<std::uint32_t>{0, 1, 3});
  CHECK(discretize_time({}, 7).empty());
  CHECK_THROWS(discretize_time({1}, 0));
}

TEST_CASE("discretize_time is monotone on sorted input") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint64_t> raw(1 + rng.uniform_int(40));
    for (auto& t : raw) t = 1000 + rng.uniform_int(500);
    std::sort(raw.begin(), raw.end());
    auto slices = discretize_time(raw, 1 + rng.uniform_int(20));
    CHECK(slices.front() == 0);
    CHECK(std::is_sorted(slices.begin(), slices.end()));
  }
}

TEST_CASE("assemble_corpus groups posts and sizes U and T") {
  std::vector<Post> posts{{2, {}, 4}, {0, {}, 1}, {2, {}, 0}};
  LinkSet links;
  links.out_links = {{3}};
  auto c = assemble_corpus(posts, links, Vocabulary(), 0, 0);
  CHECK(c.num_users == 4);
  CHECK(c.num_slices == 5);
  CHECK(c.posts[0].author == 0);
  CHECK(c.posts[1].time_slice == 4);  // stable within author
  CHECK(c.posts[2].time_slice == 0);
  CHECK(assemble_corpus(posts, links, Vocabulary(), 10, 9).num_slices == 9);
}

TEST_CASE("filter_low_activity removes users and renumbers") {
  std::vector<Post> posts{{0, {}, 0}, {0, {}, 0}, {1, {}, 0}, {2, {}, 0}, {2, {}, 0}};
  LinkSet links;
  links.out_links = {{1, 2}, {0}, {0}};
  auto c = assemble_corpus(posts, links, Vocabulary(), 0, 0);
  auto f = filter_low_activity(c, 2);
  CHECK(f.num_users == 2);
  CHECK(f.posts.size() == 4);
  CHECK(f.posts.back().author == 1);
  CHECK(f.links.out_links[0] == std::vector<UserId>{1});
  CHECK(f.links.out_links[1] == std::vector<UserId>{0});
}

TEST_CASE("corpus files round-trip") {
  Rng rng(3);
  std::vector<std::string> words;
  for (int v = 0; v < 12; ++v) words.push_back("tok" + std::to_string(v));
  Vocabulary vocab(words);
  std::vector<Post> posts;
  std::size_t expected_lines = 0;
  for (int d = 0; d < 40; ++d) {
    Post p;
    p.author = static_cast<UserId>(rng.uniform_int(7));
    p.time_slice = static_cast<std::uint32_t>(rng.uniform_int(9));
    p.tokens.resize(rng.uniform_int(6));
    for (auto& w : p.tokens) w = static_cast<WordId>(rng.uniform_int(12));
    posts.push_back(p);
    ++expected_lines;
  }
  LinkSet links;
  links.out_links.assign(7, {});
  for (UserId i = 0; i < 7; ++i)
    for (UserId j = 0; j < 7; ++j)
      if (i != j && rng.bernoulli(0.3)) links.out_links[i].push_back(j);
  auto corpus = assemble_corpus(posts, links, vocab, 7, 9);

  std::stringstream post_file, link_file, vocab_file;
  write_posts(post_file, corpus);
  write_links(link_file, corpus.links);
  write_vocabulary(vocab_file, corpus.vocabulary);

  auto vocab2 = read_vocabulary(vocab_file);
  auto ingested = ingest_posts(post_file, &vocab2, 1);
  CHECK(ingested.posts.size() == expected_lines);
  auto links2 = ingest_links(link_file, 7);
  auto again = assemble_corpus(ingested.posts, links2.links, vocab2, 7, 9);
  CHECK(again == corpus);

  std::ostringstream summary;
  write_summary(summary, corpus);
  CHECK(summary.str().rfind("U=7 T=9 V=12 posts=40", 0) == 0);
}
