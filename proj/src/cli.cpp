#include "drilldown/cli.hpp"

#include "drilldown/error.hpp"
#include "drilldown/report.hpp"
#include "drilldown/server.hpp"
#include "drilldown/store.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>

namespace drilldown {

namespace {

struct Globals {
  std::string store = "drilldown-store";
  std::uint64_t seed = 42;
  std::string stoplist;
  std::string log_level = "warn";
  std::string format = "json";
};

void use_stderr_logger() {
  static const bool installed = [] {
    auto logger = spdlog::stderr_color_mt("drilldown");
    spdlog::set_default_logger(logger);
    return true;
  }();
  (void)installed;
}

PrepOptions prep_options(const Globals& g) {
  auto options = default_prep_options();
  if (!g.stoplist.empty()) options.stoplist = load_stoplist(g.stoplist);
  return options;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  use_stderr_logger();

  CLI::App app{"Topic-model drill-down over digitized book collections"};
  app.name("drilldown");
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();

  Globals g;
  if (const char* env = std::getenv("DRILLDOWN_STORE")) g.store = env;
  app.add_option("--store", g.store, "Pipeline store directory (env DRILLDOWN_STORE)");
  app.add_option("--seed", g.seed, "Random seed for training and fold-in");
  app.add_option("--stoplist", g.stoplist, "Stoplist file, one word per line (default: bundled English list)");
  app.add_option("--log-level", g.log_level, "trace|debug|info|warn|error|off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));
  app.add_option("--format", g.format, "Output format for listings")->check(CLI::IsMember({"json", "csv", "table"}));

  // Each command stores its action here; it runs after parsing succeeds.
  std::function<Report()> action;

  // -- ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "Build the root corpus from a collection directory");
  std::string collection;
  std::string granularity = "volume";
  int min_count = 5;
  bool no_strip = false;
  bool no_hyphen = false;
  ingest_cmd->add_option("--collection", collection, "Collection directory")->required();
  ingest_cmd->add_option("--granularity", granularity, "volume|page|sentence");
  ingest_cmd->add_option("--min-count", min_count, "Drop words occurring this many times or fewer");
  ingest_cmd->add_flag("--no-strip-headers", no_strip, "Keep running headers and footers");
  ingest_cmd->add_flag("--no-repair-hyphens", no_hyphen, "Keep end-of-line hyphenation");
  ingest_cmd->callback([&] {
    action = [&] {
      IngestRequest req;
      req.collection = collection;
      req.granularity = parse_granularity(granularity);
      req.options = prep_options(g);
      req.options.min_count_exclusive = min_count;
      req.options.strip_headers = !no_strip;
      req.options.repair_hyphens = !no_hyphen;
      Store store(g.store);
      const auto lock = store.lock_mutation();
      return corpus_report(store.corpus(ingest(store, lock, req)));
    };
  });

  // -- train
  auto* train_cmd = app.add_subcommand("train", "Train a topic model on a stored corpus");
  std::string corpus_id;
  LdaParams params;
  train_cmd->add_option("--corpus", corpus_id, "Corpus id")->required();
  train_cmd->add_option("--k", params.k, "Number of topics");
  train_cmd->add_option("--alpha", params.alpha, "Document-topic prior");
  train_cmd->add_option("--beta", params.beta, "Topic-word prior");
  train_cmd->add_option("--iters", params.iterations, "Gibbs sweeps");
  train_cmd->add_option("--average-last", params.average_last, "Average estimates over this many final sweeps");
  train_cmd->callback([&] {
    action = [&] {
      params.seed = g.seed;
      Store store(g.store);
      const auto corpus = store.corpus(corpus_id);
      const auto model = train(corpus, params, [](const GibbsSampler& s) {
        if (s.sweeps_done() % 100 == 0) spdlog::info("sweep {}/{}", s.sweeps_done(), s.params().iterations);
      });
      const auto lock = store.lock_mutation();
      const auto id = commit_model(store, lock, model);
      return model_report(model, id);
    };
  });

  // -- topics
  auto* topics_cmd = app.add_subcommand("topics", "List the most probable words of every topic");
  std::string model_id;
  std::size_t n_words = 10;
  topics_cmd->add_option("--model", model_id, "Model id")->required();
  topics_cmd->add_option("--n", n_words, "Words per topic");
  topics_cmd->callback([&] { action = [&] { return topics_report(Store(g.store).model(model_id), n_words); }; });

  // -- topic-query
  auto* query_cmd = app.add_subcommand("topic-query", "Rank topics by the summed probability of query words");
  std::vector<std::string> words;
  std::size_t top = kAllEntries;
  query_cmd->add_option("--model", model_id, "Model id")->required();
  query_cmd->add_option("--words", words, "Query words")->required();
  query_cmd->add_option("--top", top, "Number of topics to list (default: all)")->default_str("all");
  query_cmd->add_option("--n-words", n_words, "Words shown per topic");
  query_cmd->callback([&] {
    action = [&] {
      const auto model = Store(g.store).model(model_id);
      return topic_query_report(topic_query(model, words, top), model, n_words);
    };
  });

  // -- rank-docs
  auto* rank_cmd = app.add_subcommand("rank-docs", "Rank documents by summed topic distance");
  std::vector<int> topics;
  std::optional<double> threshold;
  rank_cmd->add_option("--model", model_id, "Model id")->required();
  rank_cmd->add_option("--topics", topics, "Query topic ids")->required();
  rank_cmd->add_option("--top", top, "Number of documents to list (default: all)")->default_str("all");
  rank_cmd->add_option("--threshold", threshold, "Also report the documents at or below this distance");
  rank_cmd->callback([&] {
    action = [&] {
      Store store(g.store);
      const auto model = store.model(model_id);
      const auto corpus = store.corpus(model.corpus_id);
      return doc_ranking_report(rank_docs(model, topics, top), &corpus, threshold);
    };
  });

  // -- filter
  auto* filter_cmd = app.add_subcommand("filter", "Keep documents within a topic-distance threshold");
  double filter_threshold = 1.25;
  std::vector<std::string> keep;
  filter_cmd->add_option("--corpus", corpus_id, "Corpus id")->required();
  auto* filter_model = filter_cmd->add_option("--model", model_id, "Model trained on the corpus");
  auto* filter_topics = filter_cmd->add_option("--topics", topics, "Query topic ids");
  filter_cmd->add_option("--threshold", filter_threshold, "Maximum summed distance");
  auto* keep_opt = filter_cmd->add_option("--keep", keep, "Explicit document ids to keep");
  keep_opt->excludes(filter_model)->excludes(filter_topics);
  filter_model->needs(filter_topics);
  filter_topics->needs(filter_model);
  filter_cmd->callback([&] {
    if (keep.empty() && topics.empty()) throw CLI::ValidationError("filter", "give --model and --topics, or --keep");
    action = [&] {
      Store store(g.store);
      const auto lock = store.lock_mutation();
      std::string id;
      if (!keep.empty()) {
        id = filter_stage(store, lock, corpus_id, std::set<std::string>(keep.begin(), keep.end()));
      } else {
        id = filter_stage(store, lock, FilterRequest{corpus_id, model_id, topics, filter_threshold});
      }
      return corpus_report(store.corpus(id));
    };
  });

  // -- drill
  auto* drill_cmd = app.add_subcommand("drill", "Re-segment a corpus at a finer granularity");
  drill_cmd->add_option("--corpus", corpus_id, "Corpus id")->required();
  drill_cmd->add_option("--granularity", granularity, "page|sentence")->required();
  drill_cmd->callback([&] {
    action = [&] {
      Store store(g.store);
      const auto lock = store.lock_mutation();
      return corpus_report(store.corpus(drill_stage(store, lock, corpus_id, parse_granularity(granularity))));
    };
  });

  // -- rank-pages
  auto* pages_cmd = app.add_subcommand("rank-pages", "Rank pages of a page model by summed topic distance");
  std::size_t top_pages = 800;
  pages_cmd->add_option("--model", model_id, "Page model id")->required();
  pages_cmd->add_option("--topics", topics, "Query topic ids")->required();
  pages_cmd->add_option("--top", top_pages, "Number of pages");
  pages_cmd->callback([&] {
    action = [&] {
      Store store(g.store);
      const auto model = store.model(model_id);
      if (model.granularity != Granularity::page) {
        throw Error(ErrorCode::WrongGranularity, "rank-pages needs a page model");
      }
      const auto corpus = store.corpus(model.corpus_id);
      return doc_ranking_report(rank_docs(model, topics, top_pages), &corpus);
    };
  });

  // -- rank-volumes
  auto* volumes_cmd = app.add_subcommand("rank-volumes", "Rank volumes by hits among the top-ranked pages");
  std::size_t top_volumes = 6;
  volumes_cmd->add_option("--model", model_id, "Page model id")->required();
  volumes_cmd->add_option("--topics", topics, "Query topic ids")->required();
  volumes_cmd->add_option("--pages", top_pages, "Top pages counted");
  volumes_cmd->add_option("--top", top_volumes, "Volumes returned");
  volumes_cmd->callback([&] {
    action = [&] {
      Store store(g.store);
      const auto model = store.model(model_id);
      const auto corpus = store.corpus(model.corpus_id);
      return volume_hits_report(rank_volumes_by_page_hits(corpus, rank_docs(model, topics), top_pages, top_volumes),
                                top_pages);
    };
  });

  // -- similar-sentences
  auto* sent_cmd = app.add_subcommand("similar-sentences", "Rank sentences by topic-vector cosine distance");
  std::string doc_id;
  std::string text;
  std::size_t top_sentences = 10;
  int sweeps = 200;
  sent_cmd->add_option("--model", model_id, "Sentence model id")->required();
  auto* doc_opt = sent_cmd->add_option("--doc-id", doc_id, "Query sentence id");
  auto* text_opt = sent_cmd->add_option("--text", text, "Query text, folded into the model");
  doc_opt->excludes(text_opt);
  sent_cmd->add_option("--top", top_sentences, "Number of sentences");
  sent_cmd->add_option("--sweeps", sweeps, "Fold-in sweeps for --text");
  sent_cmd->callback([&] {
    if (doc_id.empty() && text.empty()) throw CLI::ValidationError("similar-sentences", "give --doc-id or --text");
    action = [&] {
      Store store(g.store);
      const auto model = store.model(model_id);
      const auto corpus = store.corpus(model.corpus_id);
      SentenceQuery q = doc_id.empty() ? SentenceQuery{RawTextQuery{text}} : SentenceQuery{SentenceDocQuery{doc_id}};
      return doc_ranking_report(similar_sentences(model, corpus, q, top_sentences, {sweeps, g.seed}), &corpus);
    };
  });

  // -- crosswalk
  auto* cross_cmd = app.add_subcommand("crosswalk", "Tally basemap journal call numbers per sub-discipline");
  std::string basemap_path;
  cross_cmd->add_option("--basemap", basemap_path, "Basemap JSON file")->required()->check(CLI::ExistingFile);
  cross_cmd->callback([&] {
    action = [&] {
      const auto map = load_basemap(basemap_path);
      return crosswalk_report(build_crosswalk(map), map);
    };
  });

  // -- place
  auto* place_cmd = app.add_subcommand("place", "Position books on the basemap by call number");
  std::string mode = "weighted";
  std::vector<std::string> call_numbers;
  place_cmd->add_option("--basemap", basemap_path, "Basemap JSON file")->required()->check(CLI::ExistingFile);
  auto* place_corpus = place_cmd->add_option("--corpus", corpus_id, "Place every volume of this corpus");
  auto* place_cn = place_cmd->add_option("--call-number", call_numbers, "Place these call numbers");
  place_corpus->excludes(place_cn);
  place_cmd->add_option("--mode", mode, "weighted|argmax")->check(CLI::IsMember({"weighted", "argmax"}));
  place_cmd->callback([&] {
    if (corpus_id.empty() && call_numbers.empty()) throw CLI::ValidationError("place", "give --corpus or --call-number");
    action = [&] {
      const auto map = load_basemap(basemap_path);
      const auto crosswalk = build_crosswalk(map);
      const auto m = parse_placement_mode(mode);
      std::vector<BookPlacement> placements;
      if (!call_numbers.empty()) {
        for (const auto& raw : call_numbers) placements.push_back(place_book(raw, parse_call_number(raw), crosswalk, map, m));
      } else {
        Store store(g.store);
        const auto ids = store.corpus(corpus_id).volume_ids();
        for (const auto& v : store.collection()) {
          if (!ids.contains(v.volume_id)) continue;
          std::optional<CallNumber> cn;
          if (v.call_number) {
            try {
              cn = parse_call_number(*v.call_number);
            } catch (const Error&) {
              spdlog::warn("volume {}: unparseable call number '{}'", v.volume_id, *v.call_number);
            }
          }
          placements.push_back(place_book(v.volume_id, cn, crosswalk, map, m));
        }
      }
      return placements_report(placements);
    };
  });

  // -- export-overlay
  auto* overlay_cmd = app.add_subcommand("export-overlay", "Write the basemap overlay for a corpus");
  std::string out_path;
  std::string csv_path;
  overlay_cmd->add_option("--basemap", basemap_path, "Basemap JSON file")->required()->check(CLI::ExistingFile);
  overlay_cmd->add_option("--corpus", corpus_id, "Focus corpus id")->required();
  overlay_cmd->add_option("--out", out_path, "Overlay JSON file")->required();
  overlay_cmd->add_option("--csv", csv_path, "Also write the overlay as CSV");
  overlay_cmd->add_option("--mode", mode, "weighted|argmax")->check(CLI::IsMember({"weighted", "argmax"}));
  overlay_cmd->callback([&] {
    action = [&] {
      Store store(g.store);
      const auto overlay = overlay_for_corpus(store, corpus_id, load_basemap(basemap_path), parse_placement_mode(mode));
      write_overlay(overlay, out_path);
      if (!csv_path.empty()) {
        std::ofstream csv(csv_path, std::ios::binary);
        if (!csv) throw Error(ErrorCode::IoError, "cannot write " + csv_path);
        csv << overlay_to_csv(overlay);
      }
      return overlay_report(overlay);
    };
  });

  // -- export-annotations
  auto* export_cmd = app.add_subcommand("export-annotations", "Export top-ranked pages for manual annotation");
  std::size_t export_pages = 108;
  std::string out_dir;
  export_cmd->add_option("--model", model_id, "Page model id")->required();
  export_cmd->add_option("--topics", topics, "Query topic ids")->required();
  export_cmd->add_option("--top", export_pages, "Number of pages");
  export_cmd->add_option("--out", out_dir, "Output directory (default: inside the store)");
  export_cmd->callback([&] {
    action = [&] {
      Store store(g.store);
      const auto lock = store.lock_mutation();
      ExportRequest req{model_id, topics, export_pages, out_dir};
      const auto manifest = export_stage(store, lock, req);
      const auto dir = out_dir.empty() ? (store.root() / "exports" / (model_id + "-annotations")).string() : out_dir;
      return manifest_report(manifest, dir);
    };
  });

  // -- serve
  auto* serve_cmd = app.add_subcommand("serve", "Serve the store over HTTP");
  ServerOptions server_options;
  std::string static_dir;
  serve_cmd->add_option("--host", server_options.host, "Bind address");
  serve_cmd->add_option("--port", server_options.port, "Port (0 picks a free one)");
  serve_cmd->add_option("--workers", server_options.workers, "Concurrent training jobs")->check(CLI::PositiveNumber);
  serve_cmd->add_option("--static-dir", static_dir, "Serve a built web UI from this directory");
  serve_cmd->add_option("--basemap", basemap_path, "Basemap for GET /overlay");
  serve_cmd->callback([&] {
    action = [&]() -> Report {
      if (!static_dir.empty()) server_options.static_dir = static_dir;
      if (!basemap_path.empty()) server_options.basemap = basemap_path;
      Server server(g.store, server_options);
      server.run();
      return {};
    };
  });

  // Help text: required list options would advertise an empty "[{}]" default.
  for (auto* sub : app.get_subcommands({})) {
    for (auto* opt : sub->get_options()) {
      if (opt->get_required() && opt->get_items_expected_max() > 1) opt->default_str("");
      // Optional values without a default say so instead of showing nothing.
      if (!opt->get_required() && opt->get_items_expected_max() > 0 && opt->get_default_str().empty() &&
          opt->get_type_size() > 0) {
        opt->default_str("none");
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  spdlog::set_level(spdlog::level::from_str(g.log_level));
  try {
    const auto report = action();
    if (!report.json.is_null()) out << render(report, parse_output_format(g.format));
    return 0;
  } catch (const Error& e) {
    err << nlohmann::ordered_json{{"error", e.name()}, {"detail", e.what()}}.dump() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << nlohmann::ordered_json{{"error", "InternalError"}, {"detail", e.what()}}.dump() << '\n';
    return 1;
  }
}

}  // namespace drilldown
