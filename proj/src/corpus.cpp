#include "costot/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <string_view>

namespace costot {

namespace {

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char ch) { return ch == ' ' || ch == '\t'; });
}

template <typename Int>
bool parse_uint(std::string_view field, Int& value) {
  while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
  while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
  if (field.empty()) return false;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  return ec == std::errc() && ptr == field.data() + field.size();
}

std::vector<std::string_view> split_tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

Vocabulary::Vocabulary(std::vector<std::string> words) {
  for (auto& w : words) {
    if (word_to_id_.contains(w)) throw std::invalid_argument("duplicate vocabulary entry: " + w);
    word_to_id_.emplace(w, static_cast<WordId>(id_to_word_.size()));
    id_to_word_.push_back(std::move(w));
  }
}

WordId Vocabulary::add(const std::string& word) {
  auto [it, inserted] = word_to_id_.emplace(word, static_cast<WordId>(id_to_word_.size()));
  if (inserted) id_to_word_.push_back(word);
  return it->second;
}

std::optional<WordId> Vocabulary::find(const std::string& word) const {
  auto it = word_to_id_.find(word);
  if (it == word_to_id_.end()) return std::nullopt;
  return it->second;
}

std::size_t LinkSet::size() const {
  std::size_t n = 0;
  for (const auto& row : out_links) n += row.size();
  return n;
}

bool LinkSet::contains(UserId src, UserId dst) const {
  if (src >= out_links.size()) return false;
  const auto& row = out_links[src];
  return std::binary_search(row.begin(), row.end(), dst);
}

std::vector<std::pair<UserId, UserId>> LinkSet::edges() const {
  std::vector<std::pair<UserId, UserId>> out;
  out.reserve(size());
  for (std::size_t i = 0; i < out_links.size(); ++i)
    for (UserId j : out_links[i]) out.emplace_back(static_cast<UserId>(i), j);
  return out;
}

std::size_t Corpus::num_tokens() const {
  std::size_t n = 0;
  for (const auto& p : posts) n += p.tokens.size();
  return n;
}

std::vector<std::size_t> Corpus::posts_per_user() const {
  std::vector<std::size_t> counts(num_users, 0);
  for (const auto& p : posts) ++counts[p.author];
  return counts;
}

PostIngestResult ingest_posts(std::istream& in, const Vocabulary* fixed_vocabulary,
                              std::size_t min_word_count) {
  struct RawPost {
    UserId author;
    std::uint64_t time;
    std::vector<std::string> tokens;
  };
  PostIngestResult result;
  std::vector<RawPost> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim_cr(line);
    if (is_blank(view)) {
      ++result.summary.skipped_blank;
      continue;
    }
    auto tab1 = view.find('\t');
    if (tab1 == std::string_view::npos) throw ParseError(line_no, "expected user<TAB>time<TAB>tokens");
    auto tab2 = view.find('\t', tab1 + 1);
    std::string_view user_field = view.substr(0, tab1);
    std::string_view time_field =
        tab2 == std::string_view::npos ? view.substr(tab1 + 1) : view.substr(tab1 + 1, tab2 - tab1 - 1);
    std::string_view token_field = tab2 == std::string_view::npos ? std::string_view{} : view.substr(tab2 + 1);

    RawPost post{};
    if (!parse_uint(user_field, post.author)) throw ParseError(line_no, "invalid user id");
    if (!parse_uint(time_field, post.time)) throw ParseError(line_no, "invalid time stamp");
    if (post.time > UINT32_MAX) throw ParseError(line_no, "time stamp out of range");
    for (auto tok : split_tokens(token_field)) post.tokens.emplace_back(tok);
    raw.push_back(std::move(post));
    ++result.summary.lines;
  }

  if (fixed_vocabulary != nullptr) {
    result.vocabulary = *fixed_vocabulary;
  } else {
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& p : raw)
      for (const auto& t : p.tokens) ++counts[t];
    for (const auto& p : raw)
      for (const auto& t : p.tokens)
        if (counts[t] >= min_word_count) result.vocabulary.add(t);
  }

  result.posts.reserve(raw.size());
  for (auto& p : raw) {
    Post post;
    post.author = p.author;
    post.time_slice = static_cast<std::uint32_t>(p.time);
    post.tokens.reserve(p.tokens.size());
    for (const auto& t : p.tokens) {
      if (auto id = result.vocabulary.find(t))
        post.tokens.push_back(*id);
      else
        ++result.summary.dropped_tokens;
    }
    result.posts.push_back(std::move(post));
  }
  return result;
}

LinkIngestResult ingest_links(std::istream& in, std::size_t num_users) {
  LinkIngestResult result;
  result.links.out_links.assign(num_users, {});
  std::string line;
  std::size_t line_no = 0;
  std::size_t total = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim_cr(line);
    if (is_blank(view)) continue;
    auto tab = view.find('\t');
    if (tab == std::string_view::npos) throw ParseError(line_no, "expected src<TAB>dst");
    UserId src = 0, dst = 0;
    if (!parse_uint(view.substr(0, tab), src) || !parse_uint(view.substr(tab + 1), dst))
      throw ParseError(line_no, "invalid user id");
    if (src >= num_users || dst >= num_users)
      throw ParseError(line_no, "link endpoint out of range (U=" + std::to_string(num_users) + ")");
    if (src == dst) {
      ++result.self_links_skipped;
      continue;
    }
    result.links.out_links[src].push_back(dst);
    ++total;
  }
  for (auto& row : result.links.out_links) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  result.duplicates_collapsed = total - result.links.size();
  return result;
}

Vocabulary read_vocabulary(std::istream& in) {
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) words.emplace_back(trim_cr(line));
  return Vocabulary(std::move(words));
}

std::vector<std::uint32_t> discretize_time(const std::vector<std::uint64_t>& raw_times,
                                           std::uint64_t slice_width) {
  if (slice_width == 0) throw std::invalid_argument("slice_width must be >= 1");
  std::vector<std::uint32_t> out;
  if (raw_times.empty()) return out;
  std::uint64_t lo = *std::min_element(raw_times.begin(), raw_times.end());
  out.reserve(raw_times.size());
  for (auto t : raw_times) out.push_back(static_cast<std::uint32_t>((t - lo) / slice_width));
  return out;
}

Corpus assemble_corpus(std::vector<Post> posts, LinkSet links, Vocabulary vocabulary,
                       std::size_t min_users, std::size_t min_slices) {
  Corpus corpus;
  std::stable_sort(posts.begin(), posts.end(),
                   [](const Post& a, const Post& b) { return a.author < b.author; });
  std::size_t users = std::max(min_users, links.out_links.size());
  std::size_t slices = min_slices;
  for (const auto& p : posts) {
    users = std::max<std::size_t>(users, p.author + 1);
    slices = std::max<std::size_t>(slices, p.time_slice + 1);
    for (auto w : p.tokens)
      if (w >= vocabulary.size()) throw std::invalid_argument("token id outside vocabulary");
  }
  for (const auto& row : links.out_links)
    for (auto dst : row) users = std::max<std::size_t>(users, dst + 1);
  links.out_links.resize(users);
  corpus.posts = std::move(posts);
  corpus.links = std::move(links);
  corpus.vocabulary = std::move(vocabulary);
  corpus.num_users = users;
  corpus.num_slices = slices;
  return corpus;
}

Corpus filter_low_activity(const Corpus& corpus, std::size_t min_posts) {
  auto counts = corpus.posts_per_user();
  std::vector<std::int64_t> remap(corpus.num_users, -1);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < corpus.num_users; ++i)
    if (counts[i] >= min_posts) remap[i] = static_cast<std::int64_t>(kept++);

  std::vector<Post> posts;
  for (const auto& p : corpus.posts) {
    if (remap[p.author] < 0) continue;
    Post q = p;
    q.author = static_cast<UserId>(remap[p.author]);
    posts.push_back(std::move(q));
  }
  LinkSet links;
  links.out_links.assign(kept, {});
  for (auto [src, dst] : corpus.links.edges()) {
    if (remap[src] < 0 || remap[dst] < 0) continue;
    links.out_links[remap[src]].push_back(static_cast<UserId>(remap[dst]));
  }
  for (auto& row : links.out_links) std::sort(row.begin(), row.end());
  return assemble_corpus(std::move(posts), std::move(links), corpus.vocabulary, kept,
                         corpus.num_slices);
}

void write_posts(std::ostream& out, const Corpus& corpus) {
  for (const auto& p : corpus.posts) {
    out << p.author << '\t' << p.time_slice << '\t';
    for (std::size_t l = 0; l < p.tokens.size(); ++l) {
      if (l > 0) out << ' ';
      out << corpus.vocabulary.word(p.tokens[l]);
    }
    out << '\n';
  }
}

void write_links(std::ostream& out, const LinkSet& links) {
  for (auto [src, dst] : links.edges()) out << src << '\t' << dst << '\n';
}

void write_vocabulary(std::ostream& out, const Vocabulary& vocabulary) {
  for (const auto& w : vocabulary.words()) out << w << '\n';
}

void write_summary(std::ostream& out, const Corpus& corpus) {
  out << "U=" << corpus.num_users << " T=" << corpus.num_slices << " V=" << corpus.vocabulary.size()
      << " posts=" << corpus.posts.size() << " words=" << corpus.num_tokens()
      << " links=" << corpus.links.size() << '\n';
}

}  // namespace costot
