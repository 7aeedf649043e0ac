#include "drilldown/retrieval.hpp"

#include "drilldown/error.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>

namespace drilldown {

namespace {

void check_topic(const LdaModel& model, int topic) {
  if (topic < 0 || topic >= model.k()) {
    throw Error(ErrorCode::UnknownTopic,
                "topic " + std::to_string(topic) + " outside [0, " + std::to_string(model.k()) + ")");
  }
}

Eigen::Index require_doc(const LdaModel& model, std::string_view doc_id) {
  auto d = model.doc_index(doc_id);
  if (!d) throw Error(ErrorCode::UnknownDocument, "unknown document '" + std::string(doc_id) + "'");
  return *d;
}

void sort_ascending(std::vector<DocDistance>& entries) {
  std::sort(entries.begin(), entries.end(), [](const DocDistance& a, const DocDistance& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.doc_id < b.doc_id;
  });
}

void truncate(std::vector<DocDistance>& entries, std::size_t top_n) {
  if (entries.size() > top_n) entries.resize(top_n);
}

}  // namespace

TopicWords top_words(const LdaModel& model, int topic, std::size_t n) {
  check_topic(model, topic);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(model.vocab_size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const std::size_t take = std::min(n, order.size());
  const auto row = model.phi.row(topic);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                    [&](Eigen::Index a, Eigen::Index b) {
                      if (row(a) != row(b)) return row(a) > row(b);
                      return a < b;
                    });
  TopicWords out{topic, {}};
  for (std::size_t i = 0; i < take; ++i) {
    out.words.emplace_back(model.words[static_cast<std::size_t>(order[i])], row(order[i]));
  }
  return out;
}

std::vector<TopicWords> top_words(const LdaModel& model, std::size_t n) {
  std::vector<TopicWords> out;
  out.reserve(static_cast<std::size_t>(model.k()));
  for (int t = 0; t < model.k(); ++t) out.push_back(top_words(model, t, n));
  return out;
}

TopicRanking topic_query(const LdaModel& model, std::span<const std::string> words, std::size_t top_n) {
  TopicRanking ranking;
  std::vector<Eigen::Index> ids;
  for (const auto& w : words) {
    if (std::find(ranking.query_words.begin(), ranking.query_words.end(), w) != ranking.query_words.end() ||
        std::find(ranking.ignored_words.begin(), ranking.ignored_words.end(), w) != ranking.ignored_words.end()) {
      continue;
    }
    if (auto id = model.word_index(w)) {
      ranking.query_words.push_back(w);
      ids.push_back(*id);
    } else {
      ranking.ignored_words.push_back(w);
    }
  }
  if (ids.empty()) {
    throw Error(ErrorCode::NoQueryWordInVocabulary, "none of the query words is in the model vocabulary");
  }

  ranking.entries.reserve(static_cast<std::size_t>(model.k()));
  for (int t = 0; t < model.k(); ++t) {
    double score = 0.0;
    for (auto w : ids) score += model.phi(t, w);
    ranking.entries.push_back({t, score});
  }
  std::sort(ranking.entries.begin(), ranking.entries.end(), [](const TopicScore& a, const TopicScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.topic < b.topic;
  });
  if (ranking.entries.size() > top_n) ranking.entries.resize(top_n);
  return ranking;
}

double topic_doc_distance(const LdaModel& model, int topic, std::string_view doc_id) {
  check_topic(model, topic);
  const auto d = require_doc(model, doc_id);
  return basis_cosine_distance(model.theta.row(d), topic);
}

DocRanking rank_docs(const LdaModel& model, std::span<const int> topics, std::size_t top_n) {
  if (topics.empty()) throw Error(ErrorCode::InvalidInput, "rank_docs needs at least one topic");
  for (std::size_t i = 0; i < topics.size(); ++i) {
    check_topic(model, topics[i]);
    if (std::find(topics.begin(), topics.begin() + static_cast<std::ptrdiff_t>(i), topics[i]) !=
        topics.begin() + static_cast<std::ptrdiff_t>(i)) {
      throw Error(ErrorCode::InvalidInput, "topic " + std::to_string(topics[i]) + " repeated");
    }
  }

  DocRanking ranking;
  ranking.query_topics.assign(topics.begin(), topics.end());
  ranking.entries.reserve(model.doc_ids.size());
  for (Eigen::Index d = 0; d < model.num_docs(); ++d) {
    double distance = 0.0;
    for (int t : topics) distance += basis_cosine_distance(model.theta.row(d), t);
    ranking.entries.push_back({model.doc_ids[static_cast<std::size_t>(d)], distance});
  }
  sort_ascending(ranking.entries);
  truncate(ranking.entries, top_n);
  return ranking;
}

std::set<std::string> filter_by_threshold(const DocRanking& ranking, double threshold) {
  std::set<std::string> kept;
  for (const auto& e : ranking.entries) {
    if (e.distance <= threshold) kept.insert(e.doc_id);
  }
  return kept;
}

std::vector<VolumeHits> rank_volumes_by_page_hits(const Corpus& page_corpus, const DocRanking& page_ranking,
                                                  std::size_t top_pages, std::size_t top_volumes) {
  if (page_corpus.granularity != Granularity::page) {
    throw Error(ErrorCode::WrongGranularity,
                "page ranking required, corpus is " + std::string(to_string(page_corpus.granularity)));
  }
  std::unordered_map<std::string_view, std::string_view> volume_of;
  for (const auto& d : page_corpus.documents) volume_of.emplace(d.doc_id, d.provenance.volume_id);

  std::map<std::string, VolumeHits> hits;
  const std::size_t n = std::min(top_pages, page_ranking.entries.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = page_ranking.entries[i];
    auto it = volume_of.find(e.doc_id);
    if (it == volume_of.end()) {
      throw Error(ErrorCode::UnknownDocument, "page '" + e.doc_id + "' is not in corpus " + page_corpus.corpus_id);
    }
    auto [slot, inserted] = hits.try_emplace(std::string(it->second), VolumeHits{std::string(it->second), 0, e.distance});
    ++slot->second.page_hits;
    slot->second.best_distance = std::min(slot->second.best_distance, e.distance);
  }

  std::vector<VolumeHits> out;
  out.reserve(hits.size());
  for (auto& [id, h] : hits) out.push_back(std::move(h));
  std::sort(out.begin(), out.end(), [](const VolumeHits& a, const VolumeHits& b) {
    if (a.page_hits != b.page_hits) return a.page_hits > b.page_hits;
    if (a.best_distance != b.best_distance) return a.best_distance < b.best_distance;
    return a.volume_id < b.volume_id;
  });
  if (out.size() > top_volumes) out.resize(top_volumes);
  return out;
}

Eigen::VectorXd query_vector(const LdaModel& model, const Corpus& corpus, const SentenceQuery& query,
                             const FoldInOptions& fold) {
  if (const auto* doc = std::get_if<SentenceDocQuery>(&query)) {
    return model.theta.row(require_doc(model, doc->doc_id)).transpose();
  }
  const auto& text = std::get<RawTextQuery>(query).text;
  std::vector<WordId> tokens;
  for (const auto& w : tokenize(text, corpus.options.stoplist)) {
    if (auto id = corpus.vocabulary.id(w)) tokens.push_back(*id);
  }
  if (tokens.empty()) {
    throw Error(ErrorCode::EmptyAfterFiltering, "query text has no in-vocabulary tokens");
  }
  return fold_in(model, tokens, fold.sweeps, fold.seed.value_or(model.params.seed));
}

DocRanking similar_sentences(const LdaModel& model, const Corpus& corpus, const SentenceQuery& query,
                             std::size_t top_n, const FoldInOptions& fold) {
  if (model.granularity != Granularity::sentence) {
    throw Error(ErrorCode::WrongGranularity,
                "sentence model required, model is " + std::string(to_string(model.granularity)));
  }
  check_vocabulary(model, corpus);
  const Eigen::VectorXd q = query_vector(model, corpus, query, fold);

  std::optional<std::string> self;
  if (const auto* doc = std::get_if<SentenceDocQuery>(&query)) self = doc->doc_id;

  DocRanking ranking;
  ranking.aggregation = "cosine";
  ranking.entries.reserve(model.doc_ids.size());
  for (Eigen::Index s = 0; s < model.num_docs(); ++s) {
    const auto& id = model.doc_ids[static_cast<std::size_t>(s)];
    const double distance = (self && id == *self) ? 0.0 : cosine_distance(q, model.theta.row(s));
    ranking.entries.push_back({id, distance});
  }
  std::sort(ranking.entries.begin(), ranking.entries.end(), [&](const DocDistance& a, const DocDistance& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (self) {
      const bool a_self = a.doc_id == *self;
      const bool b_self = b.doc_id == *self;
      if (a_self != b_self) return a_self;
    }
    return a.doc_id < b.doc_id;
  });
  truncate(ranking.entries, top_n);
  return ranking;
}

}  // namespace drilldown
