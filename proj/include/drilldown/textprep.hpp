#pragma once

// Text preparation: OCR cleanup, tokenization, segmentation and corpus
// construction at volume, page or sentence granularity.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace drilldown {

using WordId = std::int32_t;
using Stoplist = std::set<std::string, std::less<>>;

enum class Granularity { volume = 0, page = 1, sentence = 2 };

std::string_view to_string(Granularity g) noexcept;
Granularity parse_granularity(std::string_view s);

// True iff `finer` is strictly finer than `coarser` (volume > page > sentence).
constexpr bool is_finer(Granularity finer, Granularity coarser) noexcept {
  return static_cast<int>(finer) > static_cast<int>(coarser);
}

struct PageText {
  int page_index = 0;
  std::vector<std::string> lines;
};

struct Volume {
  std::string volume_id;
  std::string title;
  std::optional<int> year;
  std::optional<std::string> call_number;
  std::vector<PageText> pages;  // archival order
};

/// Word <-> id bijection with corpus-wide occurrence counts.
///
/// Ids are assigned in lexicographic word order so a vocabulary depends only
/// on the multiset of retained tokens, never on document order.
class Vocabulary {
 public:
  Vocabulary() = default;
  // Throws InvalidInput if `words` has duplicates or sizes differ.
  Vocabulary(std::vector<std::string> words, std::vector<std::int64_t> counts);

  std::optional<WordId> id(std::string_view word) const;
  const std::string& word(WordId id) const { return words_.at(static_cast<std::size_t>(id)); }
  std::int64_t count(WordId id) const { return counts_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const noexcept { return words_.size(); }
  bool empty() const noexcept { return words_.empty(); }

  const std::vector<std::string>& words() const noexcept { return words_; }
  const std::vector<std::int64_t>& counts() const noexcept { return counts_; }

  // SHA-256 over the newline-joined word list; ties models to corpora.
  std::string hash() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.words_ == b.words_ && a.counts_ == b.counts_;
  }

 private:
  std::vector<std::string> words_;
  std::vector<std::int64_t> counts_;
  std::map<std::string, WordId, std::less<>> index_;
};

struct Provenance {
  std::string volume_id;
  std::optional<int> page_index;
  std::optional<int> sentence_index;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Document {
  std::string doc_id;
  std::vector<WordId> tokens;
  Provenance provenance;
  std::string label;

  friend bool operator==(const Document&, const Document&) = default;
};

struct HeaderOptions {
  double min_fraction = 0.30;
  std::size_t min_pages = 5;
};

struct PrepOptions {
  Stoplist stoplist;
  int min_count_exclusive = 5;  // words with count <= this are dropped
  bool strip_headers = true;
  bool repair_hyphens = true;
  HeaderOptions headers;
};

// Default options: bundled stoplist, count <= 5 filter, cleanup on.
PrepOptions default_prep_options();

struct Corpus {
  std::string corpus_id;
  Granularity granularity = Granularity::volume;
  std::vector<Document> documents;
  Vocabulary vocabulary;
  std::optional<std::string> parent_corpus_id;
  PrepOptions options;

  std::size_t total_tokens() const noexcept;
  std::optional<std::size_t> index_of(std::string_view doc_id) const;
  std::set<std::string> volume_ids() const;
};

// A segment of cleaned source text at some granularity, before tokenization.
struct TextUnit {
  Provenance provenance;
  std::string doc_id;
  std::string label;
  std::string text;
};

// -- cleanup ---------------------------------------------------------------

// Joins a line ending in "<letter>-" with the next non-blank line when that
// line starts with a lowercase letter; the hyphen is dropped.
std::vector<std::string> repair_hyphenation(std::span<const std::string> lines);

// Page-aware variant. Within a page the continuation line is merged whole;
// across a page break only the continuation word moves back to the earlier
// page, so the rest of the text keeps its page.
Volume repair_hyphenation(Volume volume);

// Removes first/last non-blank page lines that recur (after lowercasing,
// digit removal and whitespace collapsing) on >= min_fraction of pages.
Volume strip_running_headers(Volume volume, const HeaderOptions& options = {});

// Header stripping followed by hyphenation repair, as enabled in `options`.
Volume clean_volume(Volume volume, const PrepOptions& options);

// -- tokenization and segmentation -----------------------------------------

std::string normalize_header_line(std::string_view line);

std::vector<std::string> tokenize(std::string_view text, const Stoplist& stoplist);

// Splits after '.', '?' or '!' when followed by whitespace and an uppercase
// letter. Sentences are trimmed and internal whitespace collapsed.
std::vector<std::string> split_sentences(std::string_view page_text);

std::string page_text(const PageText& page);
std::string page_doc_id(std::string_view volume_id, int page_index);
std::string sentence_doc_id(std::string_view volume_id, int page_index, int sentence_index);

// Segments an already-cleaned volume into units at `granularity`.
std::vector<TextUnit> segment(const Volume& cleaned, Granularity granularity);

// -- corpus construction ---------------------------------------------------

// Tokenizes units, applies the frequency filter, drops emptied documents and
// assigns a content-derived corpus id. Throws AllDocumentsEmpty.
Corpus corpus_from_units(std::span<const TextUnit> units, Granularity granularity,
                         const PrepOptions& options,
                         std::optional<std::string> parent_corpus_id = std::nullopt);

Corpus build_corpus(std::span<const Volume> volumes, Granularity granularity,
                    const PrepOptions& options);

// Rebuilds vocabulary and ids from per-document word lists (frequency filter
// re-applied); used after filtering a corpus.
struct WordDocument {
  std::string doc_id;
  Provenance provenance;
  std::string label;
  std::vector<std::string> words;
};
Corpus corpus_from_words(std::vector<WordDocument> docs, Granularity granularity,
                         const PrepOptions& options,
                         std::optional<std::string> parent_corpus_id = std::nullopt);

// -- serialization ---------------------------------------------------------

inline constexpr int kCorpusFormatVersion = 1;

std::string corpus_to_json(const Corpus& corpus);
Corpus corpus_from_json(std::string_view text);

// Content address over the serialization with an empty id field.
std::string compute_corpus_id(const Corpus& corpus);

// -- collection input ------------------------------------------------------

// Reads `<dir>/<volume>/metadata.json` + `page-NNNN.txt` files.
std::vector<Volume> load_collection(const std::filesystem::path& dir);
Volume load_volume(const std::filesystem::path& volume_dir);
void write_volume(const Volume& volume, const std::filesystem::path& collection_dir);

// 153-word English stoplist shipped with the library.
const Stoplist& default_stoplist();
Stoplist load_stoplist(const std::filesystem::path& path);

}  // namespace drilldown
