#include "drilldown/pipeline.hpp"

#include "drilldown/error.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <sstream>

namespace drilldown {

namespace fs = std::filesystem;

namespace {

const Volume& find_volume(std::span<const Volume> collection, const std::string& id) {
  for (const auto& v : collection) {
    if (v.volume_id == id) return v;
  }
  throw Error(ErrorCode::UnknownDocId, "volume '" + id + "' missing from collection");
}

}  // namespace

Corpus filter_corpus(const Corpus& corpus, const std::set<std::string>& keep) {
  std::set<std::string> known;
  for (const auto& d : corpus.documents) known.insert(d.doc_id);
  for (const auto& id : keep) {
    if (!known.contains(id)) throw Error(ErrorCode::UnknownDocId, "document '" + id + "' not in " + corpus.corpus_id);
  }

  std::vector<WordDocument> docs;
  for (const auto& d : corpus.documents) {
    if (!keep.contains(d.doc_id)) continue;
    WordDocument wd{d.doc_id, d.provenance, d.label, {}};
    wd.words.reserve(d.tokens.size());
    for (WordId t : d.tokens) wd.words.push_back(corpus.vocabulary.word(t));
    docs.push_back(std::move(wd));
  }
  if (docs.empty()) throw Error(ErrorCode::AllDocumentsEmpty, "filter keeps no documents");
  return corpus_from_words(std::move(docs), corpus.granularity, corpus.options, corpus.corpus_id);
}

Corpus drill(const Corpus& corpus, std::span<const Volume> collection, Granularity finer) {
  if (!is_finer(finer, corpus.granularity)) {
    throw Error(ErrorCode::NotFiner, std::string(to_string(finer)) + " is not finer than " +
                                         std::string(to_string(corpus.granularity)));
  }

  // Retained source units, keyed by volume: whole volumes or specific pages.
  std::map<std::string, std::optional<std::set<int>>> retained;
  for (const auto& d : corpus.documents) {
    const auto& p = d.provenance;
    if (corpus.granularity == Granularity::volume) {
      retained[p.volume_id] = std::nullopt;
    } else {
      auto& pages = retained[p.volume_id];
      if (!pages) pages.emplace();
      pages->insert(p.page_index.value_or(0));
    }
  }

  std::vector<TextUnit> units;
  for (const auto& [volume_id, pages] : retained) {
    const Volume cleaned = clean_volume(find_volume(collection, volume_id), corpus.options);
    for (auto& unit : segment(cleaned, finer)) {
      if (pages && !pages->contains(unit.provenance.page_index.value_or(-1))) continue;
      units.push_back(std::move(unit));
    }
  }
  return corpus_from_units(units, finer, corpus.options, corpus.corpus_id);
}

AnnotationManifest export_annotation_manifest(const DocRanking& page_ranking, const Corpus& page_corpus,
                                              std::span<const Volume> collection, const fs::path& out_dir) {
  if (page_corpus.granularity != Granularity::page) {
    throw Error(ErrorCode::WrongGranularity, "annotation export needs a page corpus");
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir.string() + ": " + ec.message());

  AnnotationManifest manifest;
  manifest.corpus_id = page_corpus.corpus_id;
  manifest.query_topics = page_ranking.query_topics;

  std::map<std::string, Volume> cleaned;
  int rank = 0;
  for (const auto& e : page_ranking.entries) {
    const auto idx = page_corpus.index_of(e.doc_id);
    if (!idx) throw Error(ErrorCode::UnknownDocument, "page '" + e.doc_id + "' not in corpus");
    const auto& doc = page_corpus.documents[*idx];
    const auto& vid = doc.provenance.volume_id;
    const int page_index = doc.provenance.page_index.value_or(0);

    auto it = cleaned.find(vid);
    if (it == cleaned.end()) {
      it = cleaned.emplace(vid, clean_volume(find_volume(collection, vid), page_corpus.options)).first;
    }
    std::string text;
    for (const auto& page : it->second.pages) {
      if (page.page_index == page_index) text = page_text(page);
    }

    std::string name = e.doc_id;
    for (char& c : name) {
      if (c == '/') c = '_';
    }
    name += ".txt";
    std::ofstream out(out_dir / name, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + (out_dir / name).string());
    out << text << '\n';

    manifest.entries.push_back({++rank, e.doc_id, vid, page_index, doc.label, e.distance, name});
  }

  nlohmann::ordered_json j;
  j["format_version"] = manifest.format_version;
  j["corpus_id"] = manifest.corpus_id;
  j["query_topics"] = manifest.query_topics;
  j["entries"] = nlohmann::ordered_json::array();
  for (const auto& m : manifest.entries) {
    j["entries"].push_back({{"rank", m.rank},
                            {"doc_id", m.doc_id},
                            {"volume_id", m.volume_id},
                            {"page_index", m.page_index},
                            {"label", m.label},
                            {"distance", m.distance},
                            {"file", m.file}});
  }
  std::ofstream out(out_dir / "manifest.json", std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write manifest in " + out_dir.string());
  out << j.dump(2) << '\n';
  return manifest;
}

AnnotationManifest read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    AnnotationManifest m;
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kManifestFormatVersion) {
      throw Error(ErrorCode::UnsupportedVersion, "manifest format_version " + std::to_string(m.format_version));
    }
    m.corpus_id = j.at("corpus_id").get<std::string>();
    m.query_topics = j.at("query_topics").get<std::vector<int>>();
    for (const auto& e : j.at("entries")) {
      m.entries.push_back({e.at("rank").get<int>(), e.at("doc_id").get<std::string>(),
                           e.at("volume_id").get<std::string>(), e.at("page_index").get<int>(),
                           e.at("label").get<std::string>(), e.at("distance").get<double>(),
                           e.at("file").get<std::string>()});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("bad manifest: ") + e.what());
  }
}

}  // namespace drilldown
