#pragma once

// Serialization of operation results, shared by the CLI and the HTTP server
// so both emit identical JSON for identical inputs.

#include "drilldown/lda.hpp"
#include "drilldown/pipeline.hpp"
#include "drilldown/retrieval.hpp"
#include "drilldown/scimap.hpp"
#include "drilldown/store.hpp"
#include "drilldown/textprep.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace drilldown {

inline constexpr const char* kApiVersion = "1";

enum class OutputFormat { json, csv, table };

OutputFormat parse_output_format(std::string_view s);

// A result as JSON (the wire format) plus a flat row view for csv/table.
struct Report {
  nlohmann::ordered_json json;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

// JSON is pretty-printed; csv quotes fields containing separators.
std::string render(const Report& report, OutputFormat format);

// Shortest string that round-trips the double.
std::string format_number(double v);

nlohmann::ordered_json corpus_summary(const Corpus& corpus, bool with_documents);

Report corpus_report(const Corpus& corpus, bool with_documents = false);
Report model_report(const LdaModel& model, std::string_view model_id);
Report topics_report(const LdaModel& model, std::size_t n_words);
Report topic_query_report(const TopicRanking& ranking, const LdaModel& model, std::size_t n_words = 10);

// Labels come from `corpus` when given. With a threshold the JSON also holds
// the retained (<= threshold) subset.
Report doc_ranking_report(const DocRanking& ranking, const Corpus* corpus,
                          std::optional<double> threshold = std::nullopt);
Report volume_hits_report(const std::vector<VolumeHits>& hits, std::size_t top_pages);
Report crosswalk_report(const CrosswalkTable& table, const Basemap& basemap);
Report placements_report(const std::vector<BookPlacement>& placements);
Report overlay_report(const Overlay& overlay);
Report manifest_report(const AnnotationManifest& manifest, const std::string& out_dir);
Report stage_report(const StageRecord& stage);

}  // namespace drilldown
