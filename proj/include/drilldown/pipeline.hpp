#pragma once

// Drill-down steps: filter a corpus by a ranking, re-segment it at a finer
// granularity, and export ranked pages for external annotation.

#include "drilldown/retrieval.hpp"
#include "drilldown/textprep.hpp"

#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace drilldown {

// Child corpus holding exactly `keep` (vocabulary rebuilt with the parent's
// rules; documents emptied by the rebuilt filter are dropped).
// Throws UnknownDocId, AllDocumentsEmpty.
Corpus filter_corpus(const Corpus& corpus, const std::set<std::string>& keep);

// Re-segments the source text of the corpus's retained units at `finer`.
// `collection` must contain every referenced volume. Throws NotFiner.
Corpus drill(const Corpus& corpus, std::span<const Volume> collection, Granularity finer);

inline constexpr int kManifestFormatVersion = 1;

struct ManifestEntry {
  int rank = 0;
  std::string doc_id;
  std::string volume_id;
  int page_index = 0;
  std::string label;
  double distance = 0.0;
  std::string file;  // relative to the manifest directory

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct AnnotationManifest {
  int format_version = kManifestFormatVersion;
  std::string corpus_id;
  std::vector<int> query_topics;
  std::vector<ManifestEntry> entries;

  friend bool operator==(const AnnotationManifest&, const AnnotationManifest&) = default;
};

// Writes one cleaned text file per ranked page plus `manifest.json` into
// `out_dir`. Throws WrongGranularity, UnknownDocument, IoError.
AnnotationManifest export_annotation_manifest(const DocRanking& page_ranking, const Corpus& page_corpus,
                                              std::span<const Volume> collection,
                                              const std::filesystem::path& out_dir);

AnnotationManifest read_manifest(const std::filesystem::path& manifest_json);

}  // namespace drilldown
