#pragma once

// Topic queries and topic-space ranking of documents, pages and sentences.

#include "drilldown/lda.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace drilldown {

inline constexpr std::size_t kAllEntries = std::numeric_limits<std::size_t>::max();

/// Cosine distance 1 - cos(a, b) of two vectors.
///
/// Evaluated as |a/|a| - b/|b||^2 / 2, which is exactly zero for vectors with
/// the same direction up to rounding of the normalization, and non-negative.
template <typename DerivedA, typename DerivedB>
double cosine_distance(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Vec = Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, 1>;
  if (a.size() != b.size()) throw std::invalid_argument("cosine_distance: size mismatch");
  Vec ua(a.size());
  Vec ub(b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    ua(i) = a(i);
    ub(i) = b(i);
  }
  if (ua == ub) return 0.0;
  ua.normalize();
  ub.normalize();
  return 0.5 * static_cast<double>((ua - ub).squaredNorm());
}

/// Cosine distance between basis vector e_t and `v`: 1 - v_t / |v|.
///
/// Rewritten as r^2 / (|v| (|v| + v_t)) with r the norm of v off axis t, so
/// the result is exactly 0 iff v is a positive multiple of e_t.
template <typename Derived>
double basis_cosine_distance(const Eigen::MatrixBase<Derived>& v, Eigen::Index t) {
  const double vt = static_cast<double>(v(t));
  const double off_axis = static_cast<double>(v.head(t).squaredNorm() + v.tail(v.size() - t - 1).squaredNorm());
  if (off_axis <= 0.0) return vt > 0.0 ? 0.0 : 1.0;
  // Orthogonal: exactly 1, so such documents tie and fall back to id order.
  if (vt == 0.0) return 1.0;
  const double norm = std::sqrt(off_axis + vt * vt);
  return off_axis / (norm * (norm + vt));
}

struct TopicScore {
  int topic = 0;
  double score = 0.0;

  friend bool operator==(const TopicScore&, const TopicScore&) = default;
};

struct TopicRanking {
  std::vector<TopicScore> entries;        // score desc, topic asc
  std::vector<std::string> query_words;   // in-vocabulary words used
  std::vector<std::string> ignored_words; // out-of-vocabulary words
};

struct DocDistance {
  std::string doc_id;
  double distance = 0.0;

  friend bool operator==(const DocDistance&, const DocDistance&) = default;
};

struct DocRanking {
  std::vector<DocDistance> entries;  // distance asc, doc_id asc
  std::vector<int> query_topics;
  std::string aggregation = "sum";
};

struct TopicWords {
  int topic = 0;
  std::vector<std::pair<std::string, double>> words;  // probability desc
};

// Top `n` words of every topic (ties by word id).
std::vector<TopicWords> top_words(const LdaModel& model, std::size_t n);
TopicWords top_words(const LdaModel& model, int topic, std::size_t n);

// score(t) = sum of phi(t, w) over in-vocabulary query words.
// Throws NoQueryWordInVocabulary.
TopicRanking topic_query(const LdaModel& model, std::span<const std::string> words,
                         std::size_t top_n = kAllEntries);

// 1 - cos(e_t, theta_d). Throws UnknownTopic / UnknownDocument.
double topic_doc_distance(const LdaModel& model, int topic, std::string_view doc_id);

// Sums topic_doc_distance over `topics`, ascending. Throws InvalidInput for an
// empty or repeated topic list, UnknownTopic otherwise.
DocRanking rank_docs(const LdaModel& model, std::span<const int> topics,
                     std::size_t top_n = kAllEntries);

// Doc ids with distance <= threshold.
std::set<std::string> filter_by_threshold(const DocRanking& ranking, double threshold);

struct VolumeHits {
  std::string volume_id;
  int page_hits = 0;
  double best_distance = 0.0;

  friend bool operator==(const VolumeHits&, const VolumeHits&) = default;
};

// Counts pages per volume among the first `top_pages` entries and returns the
// `top_volumes` volumes with most hits (ties: best page distance, volume id).
// Throws WrongGranularity unless `page_corpus` is a page corpus.
std::vector<VolumeHits> rank_volumes_by_page_hits(const Corpus& page_corpus, const DocRanking& page_ranking,
                                                  std::size_t top_pages = 800, std::size_t top_volumes = 6);

struct SentenceDocQuery {
  std::string doc_id;
};
struct RawTextQuery {
  std::string text;
};
using SentenceQuery = std::variant<SentenceDocQuery, RawTextQuery>;

struct FoldInOptions {
  int sweeps = 200;
  std::optional<std::uint64_t> seed;  // defaults to the model's seed
};

// Ranks the model's sentences by 1 - cos(theta_q, theta_s). An in-model query
// ranks itself first at distance 0. Throws WrongGranularity,
// UnknownDocument, EmptyAfterFiltering.
DocRanking similar_sentences(const LdaModel& model, const Corpus& corpus, const SentenceQuery& query,
                             std::size_t top_n = kAllEntries, const FoldInOptions& fold = {});

// Topic vector used for a sentence query (theta row or folded-in vector).
Eigen::VectorXd query_vector(const LdaModel& model, const Corpus& corpus, const SentenceQuery& query,
                             const FoldInOptions& fold = {});

}  // namespace drilldown
