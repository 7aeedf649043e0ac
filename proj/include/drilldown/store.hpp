#pragma once

// On-disk pipeline store: content-addressed corpora and models plus a
// `pipeline.json` stage log. Layout:
//
//   <root>/pipeline.json
//   <root>/corpora/<corpus_id>.json
//   <root>/models/<model_id>.ldam
//   <root>/exports/
//   <root>/.lock          single-writer lock (flock)

#include "drilldown/lda.hpp"
#include "drilldown/pipeline.hpp"
#include "drilldown/scimap.hpp"
#include "drilldown/textprep.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace drilldown {

enum class StageAction { ingest, train, filter, drill, export_ };

std::string_view to_string(StageAction a) noexcept;
StageAction parse_stage_action(std::string_view s);

struct StageRecord {
  int index = 0;
  std::optional<int> parent;
  StageAction action = StageAction::ingest;
  std::string corpus_id;
  std::optional<std::string> model_id;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  std::string timestamp;
};

inline constexpr int kPipelineFormatVersion = 1;

struct PipelineState {
  int format_version = kPipelineFormatVersion;
  std::string root_collection;
  std::vector<StageRecord> stages;
};

nlohmann::ordered_json pipeline_to_json(const PipelineState& state);
PipelineState pipeline_from_json(const nlohmann::ordered_json& j);

class Store {
 public:
  // Creates the directory layout if needed.
  explicit Store(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }

  // Held while mutating the store. Move-only; released on destruction.
  class MutationLock {
   public:
    MutationLock(MutationLock&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
    MutationLock& operator=(MutationLock&&) = delete;
    MutationLock(const MutationLock&) = delete;
    ~MutationLock();

   private:
    friend class Store;
    explicit MutationLock(int fd) : fd_(fd) {}
    int fd_ = -1;
  };

  // Blocks until the lock is free.
  MutationLock lock_mutation() const;
  // Throws ConcurrentMutation if another writer holds the lock.
  MutationLock try_lock_mutation() const;

  PipelineState state() const;

  bool has_corpus(std::string_view id) const;
  bool has_model(std::string_view id) const;
  Corpus corpus(std::string_view id) const;  // Throws NotFound
  LdaModel model(std::string_view id) const; // Throws NotFound
  std::vector<std::string> corpus_ids() const;
  std::vector<std::string> model_ids() const;

  // Root-first chain of corpora ending at `corpus_id` (via parent ids).
  std::vector<Corpus> lineage(std::string_view corpus_id) const;

  // Volumes of the ingested root collection.
  std::vector<Volume> collection() const;

  // -- mutations (caller holds the lock) ---------------------------------

  std::string put_corpus(const MutationLock&, const Corpus& corpus);
  std::string put_model(const MutationLock&, const LdaModel& model);
  void set_root_collection(const MutationLock&, const std::filesystem::path& collection);
  StageRecord record_stage(const MutationLock&, StageAction action, std::string corpus_id,
                           std::optional<std::string> model_id, nlohmann::ordered_json params);

 private:
  std::filesystem::path corpus_path(std::string_view id) const;
  std::filesystem::path model_path(std::string_view id) const;
  void write_state(const PipelineState& state) const;

  std::filesystem::path root_;
};

// -- workflow steps shared by the CLI and the server -----------------------

struct IngestRequest {
  std::filesystem::path collection;
  Granularity granularity = Granularity::volume;
  PrepOptions options = default_prep_options();
};

// Builds and stores the root corpus; records an `ingest` stage.
std::string ingest(Store& store, const Store::MutationLock& lock, const IngestRequest& request);

// Stores a trained model and records a `train` stage.
std::string commit_model(Store& store, const Store::MutationLock& lock, const LdaModel& model);

struct FilterRequest {
  std::string corpus_id;
  std::string model_id;
  std::vector<int> topics;
  double threshold = 1.25;
};

// rank_docs -> filter_by_threshold -> filter_corpus; records a `filter` stage.
std::string filter_stage(Store& store, const Store::MutationLock& lock, const FilterRequest& request);

// Filter by an explicit document id set.
std::string filter_stage(Store& store, const Store::MutationLock& lock, std::string_view corpus_id,
                         const std::set<std::string>& keep);

std::string drill_stage(Store& store, const Store::MutationLock& lock, std::string_view corpus_id,
                        Granularity finer);

struct ExportRequest {
  std::string model_id;
  std::vector<int> topics;
  std::size_t top_pages = 108;
  std::filesystem::path out_dir;  // defaults to <store>/exports/<model>-annotations
};

AnnotationManifest export_stage(Store& store, const Store::MutationLock& lock, const ExportRequest& request);

// Tier of each root-collection volume for a corpus: focus if the corpus keeps
// it, mid if an intermediate ancestor does, base otherwise.
std::map<std::string, Tier> lineage_tiers(const Store& store, std::string_view corpus_id);

// Places every volume of the corpus's root and tags it by lineage tier.
Overlay overlay_for_corpus(const Store& store, std::string_view corpus_id, const Basemap& basemap,
                           PlacementMode mode = PlacementMode::weighted);

}  // namespace drilldown
