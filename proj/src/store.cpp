#include "drilldown/store.hpp"

#include "drilldown/error.hpp"

#include <spdlog/spdlog.h>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

namespace drilldown {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write-then-rename so readers never see a partial file.
void write_atomic(const fs::path& path, std::string_view bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool valid_id(std::string_view id) {
  return !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
  });
}

std::vector<std::string> ids_in(const fs::path& dir, std::string_view ext) {
  std::vector<std::string> ids;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) ids.push_back(e.path().stem().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

std::string_view to_string(StageAction a) noexcept {
  switch (a) {
    case StageAction::ingest: return "ingest";
    case StageAction::train: return "train";
    case StageAction::filter: return "filter";
    case StageAction::drill: return "drill";
    case StageAction::export_: return "export";
  }
  return "ingest";
}

StageAction parse_stage_action(std::string_view s) {
  for (auto a : {StageAction::ingest, StageAction::train, StageAction::filter, StageAction::drill,
                 StageAction::export_}) {
    if (to_string(a) == s) return a;
  }
  throw Error(ErrorCode::InvalidInput, "unknown stage action '" + std::string(s) + "'");
}

nlohmann::ordered_json pipeline_to_json(const PipelineState& state) {
  nlohmann::ordered_json j;
  j["format_version"] = state.format_version;
  j["root_collection"] = state.root_collection;
  j["stages"] = nlohmann::ordered_json::array();
  for (const auto& s : state.stages) {
    nlohmann::ordered_json js;
    js["index"] = s.index;
    js["parent"] = s.parent ? nlohmann::ordered_json(*s.parent) : nlohmann::ordered_json(nullptr);
    js["action"] = to_string(s.action);
    js["corpus_id"] = s.corpus_id;
    js["model_id"] = s.model_id ? nlohmann::ordered_json(*s.model_id) : nlohmann::ordered_json(nullptr);
    js["params"] = s.params;
    js["timestamp"] = s.timestamp;
    j["stages"].push_back(std::move(js));
  }
  return j;
}

PipelineState pipeline_from_json(const nlohmann::ordered_json& j) {
  PipelineState state;
  state.format_version = j.at("format_version").get<int>();
  if (state.format_version != kPipelineFormatVersion) {
    throw Error(ErrorCode::UnsupportedVersion, "pipeline format_version " + std::to_string(state.format_version));
  }
  state.root_collection = j.at("root_collection").get<std::string>();
  for (const auto& js : j.at("stages")) {
    StageRecord s;
    s.index = js.at("index").get<int>();
    if (!js.at("parent").is_null()) s.parent = js["parent"].get<int>();
    s.action = parse_stage_action(js.at("action").get<std::string>());
    s.corpus_id = js.at("corpus_id").get<std::string>();
    if (!js.at("model_id").is_null()) s.model_id = js["model_id"].get<std::string>();
    s.params = js.at("params");
    s.timestamp = js.at("timestamp").get<std::string>();
    state.stages.push_back(std::move(s));
  }
  return state;
}

// -- Store -------------------------------------------------------------------

Store::Store(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_ / "corpora", ec);
  fs::create_directories(root_ / "models", ec);
  fs::create_directories(root_ / "exports", ec);
  if (ec || !fs::is_directory(root_)) {
    throw Error(ErrorCode::IoError, "cannot create store at " + root_.string());
  }
}

Store::MutationLock::~MutationLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

Store::MutationLock Store::lock_mutation() const {
  const int fd = ::open((root_ / ".lock").c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(ErrorCode::IoError, "cannot open store lock");
  if (::flock(fd, LOCK_EX) != 0) {
    ::close(fd);
    throw Error(ErrorCode::IoError, "cannot lock store");
  }
  return MutationLock(fd);
}

Store::MutationLock Store::try_lock_mutation() const {
  const int fd = ::open((root_ / ".lock").c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(ErrorCode::IoError, "cannot open store lock");
  if (::flock(fd, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd);
    throw Error(ErrorCode::ConcurrentMutation, "another pipeline mutation is in progress");
  }
  return MutationLock(fd);
}

PipelineState Store::state() const {
  const fs::path path = root_ / "pipeline.json";
  if (!fs::exists(path)) return {};
  try {
    return pipeline_from_json(nlohmann::ordered_json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("corrupt pipeline.json: ") + e.what());
  }
}

void Store::write_state(const PipelineState& state) const {
  write_atomic(root_ / "pipeline.json", pipeline_to_json(state).dump(2) + "\n");
}

fs::path Store::corpus_path(std::string_view id) const {
  if (!valid_id(id)) throw Error(ErrorCode::NotFound, "invalid corpus id '" + std::string(id) + "'");
  return root_ / "corpora" / (std::string(id) + ".json");
}

fs::path Store::model_path(std::string_view id) const {
  if (!valid_id(id)) throw Error(ErrorCode::NotFound, "invalid model id '" + std::string(id) + "'");
  return root_ / "models" / (std::string(id) + ".ldam");
}

bool Store::has_corpus(std::string_view id) const { return valid_id(id) && fs::exists(corpus_path(id)); }
bool Store::has_model(std::string_view id) const { return valid_id(id) && fs::exists(model_path(id)); }

Corpus Store::corpus(std::string_view id) const {
  if (!has_corpus(id)) throw Error(ErrorCode::NotFound, "no corpus '" + std::string(id) + "'");
  return corpus_from_json(read_file(corpus_path(id)));
}

LdaModel Store::model(std::string_view id) const {
  if (!has_model(id)) throw Error(ErrorCode::NotFound, "no model '" + std::string(id) + "'");
  return load_model(read_file(model_path(id)));
}

std::vector<std::string> Store::corpus_ids() const { return ids_in(root_ / "corpora", ".json"); }
std::vector<std::string> Store::model_ids() const { return ids_in(root_ / "models", ".ldam"); }

std::vector<Corpus> Store::lineage(std::string_view corpus_id) const {
  std::vector<Corpus> chain;
  std::optional<std::string> next{std::string(corpus_id)};
  while (next) {
    if (chain.size() > 10000) throw Error(ErrorCode::IoError, "corpus lineage cycle");
    chain.push_back(corpus(*next));
    next = chain.back().parent_corpus_id;
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

std::vector<Volume> Store::collection() const {
  const auto s = state();
  if (s.root_collection.empty()) throw Error(ErrorCode::NotFound, "store has no ingested collection");
  return load_collection(s.root_collection);
}

std::string Store::put_corpus(const MutationLock&, const Corpus& corpus) {
  const auto path = corpus_path(corpus.corpus_id);
  if (!fs::exists(path)) write_atomic(path, corpus_to_json(corpus));
  return corpus.corpus_id;
}

std::string Store::put_model(const MutationLock&, const LdaModel& model) {
  const auto bytes = save_model(model);
  const auto id = model_id(model);
  const auto path = model_path(id);
  if (!fs::exists(path)) write_atomic(path, bytes);
  return id;
}

void Store::set_root_collection(const MutationLock&, const fs::path& collection) {
  auto s = state();
  const std::string abs = fs::absolute(collection).lexically_normal().string();
  if (!s.root_collection.empty() && s.root_collection != abs) {
    throw Error(ErrorCode::InvalidInput, "store already holds collection " + s.root_collection);
  }
  s.root_collection = abs;
  write_state(s);
}

StageRecord Store::record_stage(const MutationLock&, StageAction action, std::string corpus_id,
                                std::optional<std::string> model_id, nlohmann::ordered_json params) {
  auto s = state();
  StageRecord r;
  r.index = static_cast<int>(s.stages.size());
  if (!s.stages.empty()) r.parent = s.stages.back().index;
  r.action = action;
  r.corpus_id = std::move(corpus_id);
  r.model_id = std::move(model_id);
  r.params = std::move(params);
  r.timestamp = utc_timestamp();
  s.stages.push_back(r);
  write_state(s);
  return r;
}

// -- workflow ---------------------------------------------------------------

std::string ingest(Store& store, const Store::MutationLock& lock, const IngestRequest& request) {
  const auto volumes = load_collection(request.collection);
  const auto corpus = build_corpus(volumes, request.granularity, request.options);
  store.set_root_collection(lock, request.collection);
  const auto id = store.put_corpus(lock, corpus);
  store.record_stage(lock, StageAction::ingest, id, std::nullopt,
                     {{"collection", fs::absolute(request.collection).lexically_normal().string()},
                      {"granularity", to_string(request.granularity)},
                      {"min_count_exclusive", request.options.min_count_exclusive},
                      {"stoplist_size", request.options.stoplist.size()},
                      {"volumes", volumes.size()},
                      {"documents", corpus.documents.size()}});
  return id;
}

std::string commit_model(Store& store, const Store::MutationLock& lock, const LdaModel& model) {
  const auto id = store.put_model(lock, model);
  store.record_stage(lock, StageAction::train, model.corpus_id, id,
                     {{"k", model.params.k},
                      {"alpha", model.params.alpha},
                      {"beta", model.params.beta},
                      {"iterations", model.params.iterations},
                      {"seed", model.params.seed},
                      {"average_last", model.params.average_last}});
  return id;
}

std::string filter_stage(Store& store, const Store::MutationLock& lock, const FilterRequest& request) {
  const auto corpus = store.corpus(request.corpus_id);
  const auto model = store.model(request.model_id);
  check_vocabulary(model, corpus);
  const auto ranking = rank_docs(model, request.topics);
  const auto keep = filter_by_threshold(ranking, request.threshold);
  const auto child = filter_corpus(corpus, keep);
  const auto id = store.put_corpus(lock, child);
  store.record_stage(lock, StageAction::filter, id, request.model_id,
                     {{"parent_corpus_id", request.corpus_id},
                      {"topics", request.topics},
                      {"threshold", request.threshold},
                      {"kept", child.documents.size()}});
  return id;
}

std::string filter_stage(Store& store, const Store::MutationLock& lock, std::string_view corpus_id,
                         const std::set<std::string>& keep) {
  const auto corpus = store.corpus(corpus_id);
  const auto child = filter_corpus(corpus, keep);
  const auto id = store.put_corpus(lock, child);
  store.record_stage(lock, StageAction::filter, id, std::nullopt,
                     {{"parent_corpus_id", corpus_id}, {"doc_ids", keep}, {"kept", child.documents.size()}});
  return id;
}

std::string drill_stage(Store& store, const Store::MutationLock& lock, std::string_view corpus_id,
                        Granularity finer) {
  const auto corpus = store.corpus(corpus_id);
  const auto child = drill(corpus, store.collection(), finer);
  const auto id = store.put_corpus(lock, child);
  store.record_stage(lock, StageAction::drill, id, std::nullopt,
                     {{"parent_corpus_id", corpus_id},
                      {"granularity", to_string(finer)},
                      {"documents", child.documents.size()}});
  return id;
}

AnnotationManifest export_stage(Store& store, const Store::MutationLock& lock, const ExportRequest& request) {
  const auto model = store.model(request.model_id);
  const auto corpus = store.corpus(model.corpus_id);
  const auto ranking = rank_docs(model, request.topics, request.top_pages);
  const fs::path out = request.out_dir.empty() ? store.root() / "exports" / (request.model_id + "-annotations")
                                               : request.out_dir;
  auto manifest = export_annotation_manifest(ranking, corpus, store.collection(), out);
  store.record_stage(lock, StageAction::export_, corpus.corpus_id, request.model_id,
                     {{"topics", request.topics},
                      {"top_pages", request.top_pages},
                      {"out_dir", out.string()},
                      {"pages", manifest.entries.size()}});
  return manifest;
}

std::map<std::string, Tier> lineage_tiers(const Store& store, std::string_view corpus_id) {
  const auto chain = store.lineage(corpus_id);
  std::map<std::string, Tier> tiers;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const Tier tier = i + 1 == chain.size() ? Tier::focus : (i == 0 ? Tier::base : Tier::mid);
    for (const auto& vid : chain[i].volume_ids()) tiers[vid] = tier;
  }
  return tiers;
}

Overlay overlay_for_corpus(const Store& store, std::string_view corpus_id, const Basemap& basemap,
                           PlacementMode mode) {
  const auto tiers = lineage_tiers(store, corpus_id);
  const auto crosswalk = build_crosswalk(basemap);
  std::vector<BookPlacement> placements;
  for (const auto& volume : store.collection()) {
    if (!tiers.contains(volume.volume_id)) continue;
    std::optional<CallNumber> cn;
    if (volume.call_number) {
      try {
        cn = parse_call_number(*volume.call_number);
      } catch (const Error&) {
        spdlog::warn("volume {}: unparseable call number '{}'", volume.volume_id, *volume.call_number);
      }
    }
    placements.push_back(place_book(volume.volume_id, cn, crosswalk, basemap, mode));
  }
  return make_overlay(placements, tiers, basemap.name);
}

}  // namespace drilldown
