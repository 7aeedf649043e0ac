#include "drilldown/error.hpp"
#include "drilldown/hash.hpp"
#include "drilldown/textprep.hpp"

#include <json.hpp>

namespace drilldown {

namespace {

using ojson = nlohmann::ordered_json;

ojson options_to_json(const PrepOptions& o) {
  ojson j;
  j["min_count_exclusive"] = o.min_count_exclusive;
  j["strip_headers"] = o.strip_headers;
  j["repair_hyphens"] = o.repair_hyphens;
  j["header_min_fraction"] = o.headers.min_fraction;
  j["header_min_pages"] = o.headers.min_pages;
  j["stoplist"] = std::vector<std::string>(o.stoplist.begin(), o.stoplist.end());
  return j;
}

PrepOptions options_from_json(const ojson& j) {
  PrepOptions o;
  o.min_count_exclusive = j.at("min_count_exclusive").get<int>();
  o.strip_headers = j.at("strip_headers").get<bool>();
  o.repair_hyphens = j.at("repair_hyphens").get<bool>();
  o.headers.min_fraction = j.at("header_min_fraction").get<double>();
  o.headers.min_pages = j.at("header_min_pages").get<std::size_t>();
  for (const auto& w : j.at("stoplist")) o.stoplist.insert(w.get<std::string>());
  return o;
}

ojson to_ojson(const Corpus& c) {
  ojson j;
  j["format_version"] = kCorpusFormatVersion;
  j["corpus_id"] = c.corpus_id;
  j["granularity"] = to_string(c.granularity);
  j["parent_corpus_id"] = c.parent_corpus_id ? ojson(*c.parent_corpus_id) : ojson(nullptr);
  j["options"] = options_to_json(c.options);
  j["vocabulary"] = {{"words", c.vocabulary.words()}, {"counts", c.vocabulary.counts()}};
  ojson docs = ojson::array();
  for (const auto& d : c.documents) {
    ojson jd;
    jd["doc_id"] = d.doc_id;
    jd["label"] = d.label;
    jd["volume_id"] = d.provenance.volume_id;
    if (d.provenance.page_index) jd["page_index"] = *d.provenance.page_index;
    if (d.provenance.sentence_index) jd["sentence_index"] = *d.provenance.sentence_index;
    jd["tokens"] = d.tokens;
    docs.push_back(std::move(jd));
  }
  j["documents"] = std::move(docs);
  return j;
}

}  // namespace

std::string corpus_to_json(const Corpus& corpus) { return to_ojson(corpus).dump(); }

std::string compute_corpus_id(const Corpus& corpus) {
  auto j = to_ojson(corpus);
  j["corpus_id"] = "";
  return "c-" + sha256_hex(j.dump()).substr(0, 16);
}

Corpus corpus_from_json(std::string_view text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptCorpus, std::string("corpus JSON parse error: ") + e.what());
  }
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kCorpusFormatVersion) {
      throw Error(ErrorCode::UnsupportedVersion,
                  "corpus format_version " + std::to_string(version) + " not supported");
    }
    Corpus c;
    c.corpus_id = j.at("corpus_id").get<std::string>();
    c.granularity = parse_granularity(j.at("granularity").get<std::string>());
    if (!j.at("parent_corpus_id").is_null()) {
      c.parent_corpus_id = j.at("parent_corpus_id").get<std::string>();
    }
    c.options = options_from_json(j.at("options"));
    c.vocabulary = Vocabulary(j.at("vocabulary").at("words").get<std::vector<std::string>>(),
                              j.at("vocabulary").at("counts").get<std::vector<std::int64_t>>());
    const auto vocab_size = static_cast<WordId>(c.vocabulary.size());
    for (const auto& jd : j.at("documents")) {
      Document d;
      d.doc_id = jd.at("doc_id").get<std::string>();
      d.label = jd.at("label").get<std::string>();
      d.provenance.volume_id = jd.at("volume_id").get<std::string>();
      if (jd.contains("page_index")) d.provenance.page_index = jd["page_index"].get<int>();
      if (jd.contains("sentence_index")) d.provenance.sentence_index = jd["sentence_index"].get<int>();
      d.tokens = jd.at("tokens").get<std::vector<WordId>>();
      for (WordId t : d.tokens) {
        if (t < 0 || t >= vocab_size) {
          throw Error(ErrorCode::CorruptCorpus, "token id out of range in " + d.doc_id);
        }
      }
      c.documents.push_back(std::move(d));
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptCorpus, std::string("corpus JSON schema error: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidInput) throw Error(ErrorCode::CorruptCorpus, e.what());
    throw;
  }
}

}  // namespace drilldown
