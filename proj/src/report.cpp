#include "drilldown/report.hpp"

#include "drilldown/error.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace drilldown {

using ojson = nlohmann::ordered_json;

namespace {

ojson envelope() {
  ojson j;
  j["api_version"] = kApiVersion;
  return j;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string join_words(const TopicWords& tw) {
  std::string out;
  for (const auto& [w, p] : tw.words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

ojson words_json(const TopicWords& tw) {
  ojson arr = ojson::array();
  for (const auto& [w, p] : tw.words) arr.push_back({{"word", w}, {"probability", p}});
  return arr;
}

ojson optional_json(const std::optional<std::string>& v) { return v ? ojson(*v) : ojson(nullptr); }

}  // namespace

OutputFormat parse_output_format(std::string_view s) {
  if (s == "json") return OutputFormat::json;
  if (s == "csv") return OutputFormat::csv;
  if (s == "table") return OutputFormat::table;
  throw Error(ErrorCode::InvalidParams, "format must be json, csv or table, got '" + std::string(s) + "'");
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, ptr) : std::to_string(v);
}

std::string render(const Report& report, OutputFormat format) {
  std::ostringstream out;
  switch (format) {
    case OutputFormat::json:
      out << report.json.dump(2) << '\n';
      break;
    case OutputFormat::csv:
      for (std::size_t c = 0; c < report.columns.size(); ++c) out << (c ? "," : "") << csv_field(report.columns[c]);
      out << '\n';
      for (const auto& row : report.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_field(row[c]);
        out << '\n';
      }
      break;
    case OutputFormat::table: {
      std::vector<std::size_t> width(report.columns.size(), 0);
      for (std::size_t c = 0; c < width.size(); ++c) width[c] = report.columns[c].size();
      for (const auto& row : report.rows) {
        for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) width[c] = std::max(width[c], row[c].size());
      }
      auto line = [&](const std::vector<std::string>& cells) {
        std::string s;
        for (std::size_t c = 0; c < cells.size(); ++c) {
          if (c) s += "  ";
          s += cells[c];
          if (c + 1 < cells.size()) s.append(width[c] - std::min(width[c], cells[c].size()), ' ');
        }
        out << s << '\n';
      };
      line(report.columns);
      std::vector<std::string> rule;
      for (auto w : width) rule.emplace_back(w, '-');
      line(rule);
      for (const auto& row : report.rows) line(row);
      break;
    }
  }
  return out.str();
}

ojson corpus_summary(const Corpus& corpus, bool with_documents) {
  ojson j;
  j["corpus_id"] = corpus.corpus_id;
  j["granularity"] = to_string(corpus.granularity);
  j["parent_corpus_id"] = optional_json(corpus.parent_corpus_id);
  j["num_documents"] = corpus.documents.size();
  j["vocabulary_size"] = corpus.vocabulary.size();
  j["total_tokens"] = corpus.total_tokens();
  j["num_volumes"] = corpus.volume_ids().size();
  if (with_documents) {
    j["documents"] = ojson::array();
    for (const auto& d : corpus.documents) {
      ojson jd;
      jd["doc_id"] = d.doc_id;
      jd["label"] = d.label;
      jd["volume_id"] = d.provenance.volume_id;
      jd["tokens"] = d.tokens.size();
      j["documents"].push_back(std::move(jd));
    }
  }
  return j;
}

Report corpus_report(const Corpus& corpus, bool with_documents) {
  Report r;
  r.json = envelope();
  r.json["corpus"] = corpus_summary(corpus, with_documents);
  if (with_documents) {
    r.columns = {"doc_id", "label", "volume_id", "tokens"};
    for (const auto& d : corpus.documents) {
      r.rows.push_back({d.doc_id, d.label, d.provenance.volume_id, std::to_string(d.tokens.size())});
    }
  } else {
    r.columns = {"corpus_id", "granularity", "parent_corpus_id", "documents", "vocabulary", "tokens"};
    r.rows.push_back({corpus.corpus_id, std::string(to_string(corpus.granularity)),
                      corpus.parent_corpus_id.value_or(""), std::to_string(corpus.documents.size()),
                      std::to_string(corpus.vocabulary.size()), std::to_string(corpus.total_tokens())});
  }
  return r;
}

Report model_report(const LdaModel& model, std::string_view model_id) {
  Report r;
  r.json = envelope();
  ojson m;
  m["model_id"] = model_id;
  m["corpus_id"] = model.corpus_id;
  m["granularity"] = to_string(model.granularity);
  m["k"] = model.params.k;
  m["alpha"] = model.params.alpha;
  m["beta"] = model.params.beta;
  m["iterations"] = model.params.iterations;
  m["seed"] = model.params.seed;
  m["average_last"] = model.params.average_last;
  m["num_documents"] = model.num_docs();
  m["vocabulary_size"] = model.vocab_size();
  r.json["model"] = std::move(m);
  r.columns = {"model_id", "corpus_id", "k", "alpha", "beta", "iterations", "seed"};
  r.rows.push_back({std::string(model_id), model.corpus_id, std::to_string(model.params.k),
                    format_number(model.params.alpha), format_number(model.params.beta),
                    std::to_string(model.params.iterations), std::to_string(model.params.seed)});
  return r;
}

Report topics_report(const LdaModel& model, std::size_t n_words) {
  Report r;
  r.json = envelope();
  r.json["topics"] = ojson::array();
  r.columns = {"topic", "words"};
  for (const auto& tw : top_words(model, n_words)) {
    r.json["topics"].push_back({{"topic", tw.topic}, {"words", words_json(tw)}});
    r.rows.push_back({std::to_string(tw.topic), join_words(tw)});
  }
  return r;
}

Report topic_query_report(const TopicRanking& ranking, const LdaModel& model, std::size_t n_words) {
  Report r;
  r.json = envelope();
  r.json["query_words"] = ranking.query_words;
  r.json["ignored_words"] = ranking.ignored_words;
  r.json["topics"] = ojson::array();
  r.columns = {"rank", "topic", "score", "words"};
  int rank = 0;
  for (const auto& e : ranking.entries) {
    const auto tw = top_words(model, e.topic, n_words);
    ++rank;
    r.json["topics"].push_back({{"rank", rank}, {"topic", e.topic}, {"score", e.score}, {"words", words_json(tw)}});
    r.rows.push_back({std::to_string(rank), std::to_string(e.topic), format_number(e.score), join_words(tw)});
  }
  return r;
}

Report doc_ranking_report(const DocRanking& ranking, const Corpus* corpus, std::optional<double> threshold) {
  auto label_of = [&](const std::string& doc_id) -> std::string {
    if (!corpus) return doc_id;
    const auto idx = corpus->index_of(doc_id);
    return idx ? corpus->documents[*idx].label : doc_id;
  };
  auto entry_json = [&](int rank, const DocDistance& e) {
    return ojson{{"rank", rank}, {"item_id", e.doc_id}, {"label", label_of(e.doc_id)}, {"distance", e.distance}};
  };

  Report r;
  r.json = envelope();
  r.json["query_topics"] = ranking.query_topics;
  r.json["aggregation"] = ranking.aggregation;
  r.json["entries"] = ojson::array();
  r.columns = {"rank", "item_id", "label", "distance"};
  int rank = 0;
  for (const auto& e : ranking.entries) {
    ++rank;
    r.json["entries"].push_back(entry_json(rank, e));
    r.rows.push_back({std::to_string(rank), e.doc_id, label_of(e.doc_id), format_number(e.distance)});
  }
  if (threshold) {
    r.json["threshold"] = *threshold;
    r.json["retained"] = ojson::array();
    rank = 0;
    for (const auto& e : ranking.entries) {
      ++rank;
      if (e.distance <= *threshold) r.json["retained"].push_back(entry_json(rank, e));
    }
  }
  return r;
}

Report volume_hits_report(const std::vector<VolumeHits>& hits, std::size_t top_pages) {
  Report r;
  r.json = envelope();
  r.json["top_pages"] = top_pages;
  r.json["volumes"] = ojson::array();
  r.columns = {"rank", "volume_id", "page_hits", "best_distance"};
  int rank = 0;
  for (const auto& h : hits) {
    ++rank;
    r.json["volumes"].push_back(
        {{"rank", rank}, {"volume_id", h.volume_id}, {"page_hits", h.page_hits}, {"best_distance", h.best_distance}});
    r.rows.push_back({std::to_string(rank), h.volume_id, std::to_string(h.page_hits), format_number(h.best_distance)});
  }
  return r;
}

Report crosswalk_report(const CrosswalkTable& table, const Basemap& basemap) {
  Report r;
  r.json = envelope();
  r.json["basemap"] = basemap.name;
  r.json["skipped_journals"] = table.skipped_journals;
  r.json["subdisciplines"] = ojson::array();
  r.columns = {"sub_id", "name", "level", "key", "count"};
  for (const auto& [sub_id, tally] : table.subs) {
    const auto* sub = basemap.find(sub_id);
    const std::string name = sub ? sub->name : "";
    ojson letters = ojson::object();
    for (const auto& [k, n] : tally.by_letters) {
      letters[k] = n;
      r.rows.push_back({std::to_string(sub_id), name, "letters", k, std::to_string(n)});
    }
    ojson first = ojson::object();
    for (const auto& [k, n] : tally.by_first_letter) {
      first[std::string(1, k)] = n;
      r.rows.push_back({std::to_string(sub_id), name, "first_letter", std::string(1, k), std::to_string(n)});
    }
    r.json["subdisciplines"].push_back({{"sub_id", sub_id},
                                        {"name", name},
                                        {"journals", tally.journals},
                                        {"by_letters", letters},
                                        {"by_first_letter", first}});
  }
  return r;
}

Report placements_report(const std::vector<BookPlacement>& placements) {
  Report r;
  r.json = envelope();
  r.json["placements"] = ojson::array();
  r.columns = {"volume_id", "status", "x", "y", "posterior"};
  for (const auto& p : placements) {
    const bool placed = p.status == PlacementStatus::placed;
    ojson post = ojson::object();
    std::string post_s;
    for (const auto& [sub_id, w] : p.posterior) {
      post[std::to_string(sub_id)] = w;
      if (!post_s.empty()) post_s += ' ';
      post_s += std::to_string(sub_id) + ":" + format_number(w);
    }
    ojson jp{{"volume_id", p.volume_id}, {"status", placed ? "placed" : "uncatalogued"}};
    if (placed) {
      jp["x"] = p.x;
      jp["y"] = p.y;
      jp["posterior"] = post;
    }
    r.json["placements"].push_back(std::move(jp));
    r.rows.push_back({p.volume_id, placed ? "placed" : "uncatalogued", placed ? format_number(p.x) : "",
                      placed ? format_number(p.y) : "", post_s});
  }
  return r;
}

Report overlay_report(const Overlay& overlay) {
  Report r;
  r.json = envelope();
  r.json.update(ojson::parse(overlay_to_json(overlay)));
  r.columns = {"volume_id", "x", "y", "tier"};
  for (const auto& e : overlay.entries) {
    r.rows.push_back({e.volume_id, format_number(e.x), format_number(e.y), std::string(to_string(e.tier))});
  }
  return r;
}

Report manifest_report(const AnnotationManifest& manifest, const std::string& out_dir) {
  Report r;
  r.json = envelope();
  r.json["out_dir"] = out_dir;
  r.json["corpus_id"] = manifest.corpus_id;
  r.json["query_topics"] = manifest.query_topics;
  r.json["entries"] = ojson::array();
  r.columns = {"rank", "item_id", "label", "distance", "file"};
  for (const auto& e : manifest.entries) {
    r.json["entries"].push_back(
        {{"rank", e.rank}, {"item_id", e.doc_id}, {"label", e.label}, {"distance", e.distance}, {"file", e.file}});
    r.rows.push_back({std::to_string(e.rank), e.doc_id, e.label, format_number(e.distance), e.file});
  }
  return r;
}

Report stage_report(const StageRecord& stage) {
  Report r;
  r.json = envelope();
  ojson s;
  s["index"] = stage.index;
  s["parent"] = stage.parent ? ojson(*stage.parent) : ojson(nullptr);
  s["action"] = to_string(stage.action);
  s["corpus_id"] = stage.corpus_id;
  s["model_id"] = optional_json(stage.model_id);
  s["params"] = stage.params;
  s["timestamp"] = stage.timestamp;
  r.json["stage"] = std::move(s);
  r.columns = {"index", "action", "corpus_id", "model_id"};
  r.rows.push_back({std::to_string(stage.index), std::string(to_string(stage.action)), stage.corpus_id,
                    stage.model_id.value_or("")});
  return r;
}

}  // namespace drilldown
