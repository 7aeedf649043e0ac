#include "drilldown/textprep.hpp"

#include "drilldown/error.hpp"
#include "drilldown/hash.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <utility>

namespace drilldown {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
char to_lower(char c) { return is_upper(c) ? static_cast<char>(c - 'A' + 'a') : c; }

std::string_view rtrim(std::string_view s) {
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}
std::string_view ltrim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  return s;
}
std::string_view trim(std::string_view s) { return ltrim(rtrim(s)); }

bool is_blank(std::string_view s) { return trim(s).empty(); }

// "...<letter>-" once trailing whitespace is ignored.
bool ends_with_word_hyphen(std::string_view line) {
  line = rtrim(line);
  return line.size() >= 2 && line.back() == '-' && is_alpha(line[line.size() - 2]);
}

bool starts_lowercase(std::string_view line) {
  line = ltrim(line);
  return !line.empty() && is_lower(line.front());
}

std::string join_hyphenated(std::string_view head, std::string_view tail) {
  head = rtrim(head);
  head.remove_suffix(1);  // the hyphen
  std::string out(head);
  out.append(ltrim(tail));
  return out;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string zero_pad(int value, int width) {
  std::string digits = std::to_string(value);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, width - digits.size(), '0');
  return digits;
}

std::string display_title(const Volume& v) { return v.title.empty() ? v.volume_id : v.title; }

}  // namespace

std::string_view to_string(Granularity g) noexcept {
  switch (g) {
    case Granularity::volume: return "volume";
    case Granularity::page: return "page";
    case Granularity::sentence: return "sentence";
  }
  return "volume";
}

Granularity parse_granularity(std::string_view s) {
  if (s == "volume") return Granularity::volume;
  if (s == "page") return Granularity::page;
  if (s == "sentence") return Granularity::sentence;
  throw Error(ErrorCode::InvalidInput, "unknown granularity '" + std::string(s) + "'");
}

// -- Vocabulary ---------------------------------------------------------------

Vocabulary::Vocabulary(std::vector<std::string> words, std::vector<std::int64_t> counts)
    : words_(std::move(words)), counts_(std::move(counts)) {
  if (words_.size() != counts_.size()) {
    throw Error(ErrorCode::InvalidInput, "vocabulary words/counts size mismatch");
  }
  for (std::size_t i = 0; i < words_.size(); ++i) {
    auto [it, inserted] = index_.emplace(words_[i], static_cast<WordId>(i));
    if (!inserted) throw Error(ErrorCode::InvalidInput, "duplicate vocabulary word '" + words_[i] + "'");
  }
}

std::optional<WordId> Vocabulary::id(std::string_view word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::string Vocabulary::hash() const {
  std::string joined;
  for (const auto& w : words_) {
    joined += w;
    joined += '\n';
  }
  return sha256_hex(joined);
}

// -- Corpus ---------------------------------------------------------------------

PrepOptions default_prep_options() {
  PrepOptions options;
  options.stoplist = default_stoplist();
  return options;
}

std::size_t Corpus::total_tokens() const noexcept {
  std::size_t n = 0;
  for (const auto& d : documents) n += d.tokens.size();
  return n;
}

std::optional<std::size_t> Corpus::index_of(std::string_view doc_id) const {
  for (std::size_t i = 0; i < documents.size(); ++i) {
    if (documents[i].doc_id == doc_id) return i;
  }
  return std::nullopt;
}

std::set<std::string> Corpus::volume_ids() const {
  std::set<std::string> ids;
  for (const auto& d : documents) ids.insert(d.provenance.volume_id);
  return ids;
}

// -- cleanup ----------------------------------------------------------------

std::vector<std::string> repair_hyphenation(std::span<const std::string> lines) {
  std::vector<std::string> work(lines.begin(), lines.end());
  std::vector<bool> removed(work.size(), false);
  for (std::size_t i = 0; i < work.size(); ++i) {
    if (removed[i]) continue;
    while (ends_with_word_hyphen(work[i])) {
      std::size_t j = i + 1;
      while (j < work.size() && (removed[j] || is_blank(work[j]))) ++j;
      if (j == work.size() || !starts_lowercase(work[j])) break;
      work[i] = join_hyphenated(work[i], work[j]);
      removed[j] = true;
    }
  }
  std::vector<std::string> out;
  out.reserve(work.size());
  for (std::size_t i = 0; i < work.size(); ++i) {
    if (!removed[i]) out.push_back(std::move(work[i]));
  }
  return out;
}

Volume repair_hyphenation(Volume volume) {
  struct Slot {
    std::size_t page;
    std::size_t line;
  };
  std::vector<Slot> slots;
  for (std::size_t p = 0; p < volume.pages.size(); ++p) {
    for (std::size_t l = 0; l < volume.pages[p].lines.size(); ++l) slots.push_back({p, l});
  }
  auto text = [&](const Slot& s) -> std::string& { return volume.pages[s.page].lines[s.line]; };
  std::vector<bool> removed(slots.size(), false);

  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (removed[i]) continue;
    while (ends_with_word_hyphen(text(slots[i]))) {
      std::size_t j = i + 1;
      while (j < slots.size() && (removed[j] || is_blank(text(slots[j])))) ++j;
      if (j == slots.size() || !starts_lowercase(text(slots[j]))) break;

      if (slots[j].page == slots[i].page) {
        text(slots[i]) = join_hyphenated(text(slots[i]), text(slots[j]));
        removed[j] = true;
        continue;
      }
      std::string_view next = ltrim(text(slots[j]));
      std::size_t word_end = 0;
      while (word_end < next.size() && !is_space(next[word_end])) ++word_end;
      std::string rest(ltrim(next.substr(word_end)));
      text(slots[i]) = join_hyphenated(text(slots[i]), next.substr(0, word_end));
      if (rest.empty()) {
        removed[j] = true;
      } else {
        text(slots[j]) = std::move(rest);
      }
    }
  }

  std::vector<std::vector<std::string>> rebuilt(volume.pages.size());
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!removed[i]) rebuilt[slots[i].page].push_back(std::move(text(slots[i])));
  }
  for (std::size_t p = 0; p < volume.pages.size(); ++p) volume.pages[p].lines = std::move(rebuilt[p]);
  return volume;
}

std::string normalize_header_line(std::string_view line) {
  std::string stripped;
  stripped.reserve(line.size());
  for (char c : line) {
    if (is_digit(c)) continue;
    stripped.push_back(to_lower(c));
  }
  return collapse_whitespace(stripped);
}

Volume strip_running_headers(Volume volume, const HeaderOptions& options) {
  const std::size_t n_pages = volume.pages.size();
  if (n_pages < options.min_pages || n_pages == 0) return volume;

  struct Edges {
    std::optional<std::size_t> first;
    std::optional<std::size_t> last;
  };
  std::vector<Edges> edges(n_pages);
  std::map<std::string, std::size_t> first_counts;
  std::map<std::string, std::size_t> last_counts;
  for (std::size_t p = 0; p < n_pages; ++p) {
    const auto& lines = volume.pages[p].lines;
    for (std::size_t l = 0; l < lines.size(); ++l) {
      if (is_blank(lines[l])) continue;
      if (!edges[p].first) edges[p].first = l;
      edges[p].last = l;
    }
    if (edges[p].first) {
      ++first_counts[normalize_header_line(lines[*edges[p].first])];
      ++last_counts[normalize_header_line(lines[*edges[p].last])];
    }
  }

  // A line must recur on at least two pages regardless of the fraction.
  const auto needed = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::ceil(options.min_fraction * static_cast<double>(n_pages) - 1e-9)));
  auto recurring = [&](const std::map<std::string, std::size_t>& counts, const std::string& key) {
    auto it = counts.find(key);
    return it != counts.end() && it->second >= needed;
  };

  for (std::size_t p = 0; p < n_pages; ++p) {
    if (!edges[p].first) continue;
    auto& lines = volume.pages[p].lines;
    const std::size_t f = *edges[p].first;
    const std::size_t l = *edges[p].last;
    const bool drop_first = recurring(first_counts, normalize_header_line(lines[f]));
    const bool drop_last = recurring(last_counts, normalize_header_line(lines[l]));
    std::vector<std::string> kept;
    kept.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (i == f && drop_first) continue;
      if (i == l && drop_last) continue;
      kept.push_back(std::move(lines[i]));
    }
    lines = std::move(kept);
  }
  return volume;
}

Volume clean_volume(Volume volume, const PrepOptions& options) {
  if (options.strip_headers) volume = strip_running_headers(std::move(volume), options.headers);
  if (options.repair_hyphens) volume = repair_hyphenation(std::move(volume));
  return volume;
}

// -- tokenization and segmentation -------------------------------------------

std::vector<std::string> tokenize(std::string_view text, const Stoplist& stoplist) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    if (!stoplist.contains(current)) tokens.push_back(current);
    current.clear();
  };
  for (char c : text) {
    if (is_alpha(c)) {
      current.push_back(to_lower(c));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> sentences;
  auto emit = [&](std::string_view piece) {
    std::string s = collapse_whitespace(piece);
    if (!s.empty()) sentences.push_back(std::move(s));
  };
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '?' && c != '!') continue;
    std::size_t j = i + 1;
    if (j >= text.size() || !is_space(text[j])) continue;
    while (j < text.size() && is_space(text[j])) ++j;
    if (j < text.size() && is_upper(text[j])) {
      emit(text.substr(start, i + 1 - start));
      start = j;
      i = j - 1;
    }
  }
  if (start < text.size()) emit(text.substr(start));
  return sentences;
}

std::string page_text(const PageText& page) {
  std::string out;
  for (std::size_t i = 0; i < page.lines.size(); ++i) {
    if (i) out.push_back('\n');
    out += page.lines[i];
  }
  return out;
}

std::string page_doc_id(std::string_view volume_id, int page_index) {
  return std::string(volume_id) + "/p" + zero_pad(page_index, 5);
}

std::string sentence_doc_id(std::string_view volume_id, int page_index, int sentence_index) {
  return page_doc_id(volume_id, page_index) + "/s" + zero_pad(sentence_index, 5);
}

std::vector<TextUnit> segment(const Volume& v, Granularity granularity) {
  std::vector<TextUnit> units;
  const std::string title = display_title(v);
  switch (granularity) {
    case Granularity::volume: {
      std::string text;
      for (std::size_t p = 0; p < v.pages.size(); ++p) {
        if (p) text.push_back('\n');
        text += page_text(v.pages[p]);
      }
      units.push_back({{v.volume_id, std::nullopt, std::nullopt}, v.volume_id, title, std::move(text)});
      break;
    }
    case Granularity::page:
      for (const auto& page : v.pages) {
        units.push_back({{v.volume_id, page.page_index, std::nullopt},
                         page_doc_id(v.volume_id, page.page_index),
                         title + ", p. " + std::to_string(page.page_index + 1),
                         page_text(page)});
      }
      break;
    case Granularity::sentence:
      for (const auto& page : v.pages) {
        const auto sentences = split_sentences(page_text(page));
        for (std::size_t s = 0; s < sentences.size(); ++s) {
          const int si = static_cast<int>(s);
          units.push_back({{v.volume_id, page.page_index, si},
                           sentence_doc_id(v.volume_id, page.page_index, si),
                           title + ", p. " + std::to_string(page.page_index + 1) + ", s. " +
                               std::to_string(si + 1),
                           sentences[s]});
        }
      }
      break;
  }
  return units;
}

// -- corpus construction ------------------------------------------------------

Corpus corpus_from_words(std::vector<WordDocument> docs, Granularity granularity,
                         const PrepOptions& options, std::optional<std::string> parent_corpus_id) {
  std::map<std::string, std::int64_t, std::less<>> counts;
  for (const auto& d : docs) {
    for (const auto& w : d.words) ++counts[w];
  }

  std::vector<std::string> words;
  std::vector<std::int64_t> word_counts;
  for (const auto& [w, c] : counts) {
    if (c <= options.min_count_exclusive || options.stoplist.contains(w)) continue;
    words.push_back(w);
    word_counts.push_back(c);
  }

  Corpus corpus;
  corpus.granularity = granularity;
  corpus.parent_corpus_id = std::move(parent_corpus_id);
  corpus.options = options;
  corpus.vocabulary = Vocabulary(std::move(words), std::move(word_counts));

  std::size_t dropped = 0;
  for (auto& d : docs) {
    Document doc;
    doc.doc_id = std::move(d.doc_id);
    doc.provenance = std::move(d.provenance);
    doc.label = std::move(d.label);
    doc.tokens.reserve(d.words.size());
    for (const auto& w : d.words) {
      if (auto id = corpus.vocabulary.id(w)) doc.tokens.push_back(*id);
    }
    if (doc.tokens.empty()) {
      ++dropped;
      spdlog::debug("dropping empty document {}", doc.doc_id);
      continue;
    }
    corpus.documents.push_back(std::move(doc));
  }
  if (dropped > 0) {
    spdlog::info("{} of {} {} documents empty after filtering; dropped", dropped, docs.size(),
                 to_string(granularity));
  }
  if (corpus.documents.empty()) {
    throw Error(ErrorCode::AllDocumentsEmpty, "filtering removed every token");
  }
  corpus.corpus_id = compute_corpus_id(corpus);
  return corpus;
}

Corpus corpus_from_units(std::span<const TextUnit> units, Granularity granularity,
                         const PrepOptions& options, std::optional<std::string> parent_corpus_id) {
  std::vector<WordDocument> docs;
  docs.reserve(units.size());
  for (const auto& u : units) {
    docs.push_back({u.doc_id, u.provenance, u.label, tokenize(u.text, options.stoplist)});
  }
  return corpus_from_words(std::move(docs), granularity, options, std::move(parent_corpus_id));
}

Corpus build_corpus(std::span<const Volume> volumes, Granularity granularity,
                    const PrepOptions& options) {
  if (volumes.empty()) throw Error(ErrorCode::InvalidInput, "no volumes to build a corpus from");
  std::set<std::string> seen;
  std::vector<TextUnit> units;
  for (const auto& v : volumes) {
    if (!seen.insert(v.volume_id).second) {
      throw Error(ErrorCode::InvalidInput, "duplicate volume_id '" + v.volume_id + "'");
    }
    auto segmented = segment(clean_volume(v, options), granularity);
    std::move(segmented.begin(), segmented.end(), std::back_inserter(units));
  }
  return corpus_from_units(units, granularity, options);
}

}  // namespace drilldown
