#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace costot {

using UserId = std::uint32_t;
using WordId = std::uint32_t;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> words);

  // Returns the id of `word`, adding it if absent.
  WordId add(const std::string& word);
  std::optional<WordId> find(const std::string& word) const;
  const std::string& word(WordId id) const { return id_to_word_.at(id); }
  std::size_t size() const { return id_to_word_.size(); }
  const std::vector<std::string>& words() const { return id_to_word_; }

  bool operator==(const Vocabulary& other) const { return id_to_word_ == other.id_to_word_; }

 private:
  std::unordered_map<std::string, WordId> word_to_id_;
  std::vector<std::string> id_to_word_;
};

struct Post {
  UserId author = 0;
  std::vector<WordId> tokens;
  std::uint32_t time_slice = 0;

  bool operator==(const Post&) const = default;
};

// Directed positive links. out_links[i] is sorted and duplicate free.
struct LinkSet {
  std::vector<std::vector<UserId>> out_links;

  std::size_t size() const;
  bool contains(UserId src, UserId dst) const;
  // All links as (src, dst), ordered by src then dst.
  std::vector<std::pair<UserId, UserId>> edges() const;

  bool operator==(const LinkSet&) const = default;
};

struct Corpus {
  std::vector<Post> posts;  // grouped by author, ascending
  LinkSet links;
  Vocabulary vocabulary;
  std::size_t num_users = 0;
  std::size_t num_slices = 0;

  std::size_t num_tokens() const;
  std::vector<std::size_t> posts_per_user() const;

  bool operator==(const Corpus&) const = default;
};

struct PostIngestSummary {
  std::size_t lines = 0;
  std::size_t skipped_blank = 0;
  std::size_t dropped_tokens = 0;  // below min count or absent from a fixed vocabulary
};

struct PostIngestResult {
  std::vector<Post> posts;  // time_slice holds the raw time value
  Vocabulary vocabulary;
  PostIngestSummary summary;
};

// Parses `user<TAB>time<TAB>tok tok ...` lines. With no fixed vocabulary one
// is built from tokens occurring at least `min_word_count` times, ids in
// order of first appearance.
PostIngestResult ingest_posts(std::istream& in, const Vocabulary* fixed_vocabulary,
                              std::size_t min_word_count = 1);

struct LinkIngestResult {
  LinkSet links;
  std::size_t self_links_skipped = 0;
  std::size_t duplicates_collapsed = 0;
};

LinkIngestResult ingest_links(std::istream& in, std::size_t num_users);

Vocabulary read_vocabulary(std::istream& in);

// slice = floor((raw - min(raw)) / slice_width)
std::vector<std::uint32_t> discretize_time(const std::vector<std::uint64_t>& raw_times,
                                           std::uint64_t slice_width);

// Sorts posts by author (stable), and sizes U and T. U and T are at least
// the configured minimums.
Corpus assemble_corpus(std::vector<Post> posts, LinkSet links, Vocabulary vocabulary,
                       std::size_t min_users = 0, std::size_t min_slices = 0);

// Drops users with fewer than `min_posts` posts together with their links,
// renumbering the remaining users densely in their original order.
Corpus filter_low_activity(const Corpus& corpus, std::size_t min_posts);

void write_posts(std::ostream& out, const Corpus& corpus);
void write_links(std::ostream& out, const LinkSet& links);
void write_vocabulary(std::ostream& out, const Vocabulary& vocabulary);
void write_summary(std::ostream& out, const Corpus& corpus);

}  // namespace costot
