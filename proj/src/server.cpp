#include "drilldown/server.hpp"

#include "drilldown/error.hpp"
#include "drilldown/report.hpp"
#include "drilldown/store.hpp"

#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <cstdio>

namespace drilldown {

using ojson = nlohmann::ordered_json;

std::string_view to_string(JobKind k) noexcept { return k == JobKind::train ? "train" : "drill"; }

std::string_view to_string(JobStatus s) noexcept {
  switch (s) {
    case JobStatus::queued: return "queued";
    case JobStatus::running: return "running";
    case JobStatus::done: return "done";
    case JobStatus::failed: return "failed";
  }
  return "queued";
}

// -- JobQueue ----------------------------------------------------------------

JobQueue::JobQueue(int workers) {
  for (int i = 0; i < std::max(1, workers); ++i) workers_.emplace_back([this] { worker_loop(); });
}

JobQueue::~JobQueue() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
    for (auto& [id, work] : pending_) {
      auto& job = jobs_[id];
      job.status = JobStatus::failed;
      job.error = "Cancelled";
      job.detail = "server shutting down";
    }
    pending_.clear();
  }
  changed_.notify_all();
  for (auto& t : workers_) t.join();
}

std::string JobQueue::submit(JobKind kind, int total, Work work) {
  std::string id;
  {
    std::lock_guard lock(mutex_);
    char buf[32];
    std::snprintf(buf, sizeof buf, "j-%06d", next_id_++);
    id = buf;
    JobInfo info;
    info.job_id = id;
    info.kind = kind;
    info.total = total;
    jobs_.emplace(id, std::move(info));
    pending_.emplace_back(id, std::move(work));
  }
  changed_.notify_all();
  return id;
}

std::optional<JobInfo> JobQueue::get(const std::string& job_id) const {
  std::lock_guard lock(mutex_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

JobInfo JobQueue::wait(const std::string& job_id) const {
  std::unique_lock lock(mutex_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw Error(ErrorCode::NotFound, "no job '" + job_id + "'");
  changed_.wait(lock, [&] { return it->second.status == JobStatus::done || it->second.status == JobStatus::failed; });
  return it->second;
}

void JobQueue::worker_loop() {
  for (;;) {
    std::string id;
    Work work;
    {
      std::unique_lock lock(mutex_);
      changed_.wait(lock, [&] { return stopping_ || !pending_.empty(); });
      if (stopping_) return;
      id = pending_.front().first;
      work = std::move(pending_.front().second);
      pending_.pop_front();
      jobs_[id].status = JobStatus::running;
    }
    changed_.notify_all();

    const Progress progress = [&](int completed) {
      std::lock_guard lock(mutex_);
      jobs_[id].progress = completed;
    };
    std::optional<std::string> result;
    std::string error;
    std::string detail;
    try {
      result = work(progress);
    } catch (const Error& e) {
      error = e.name();
      detail = e.what();
    } catch (const std::exception& e) {
      error = "InternalError";
      detail = e.what();
    }
    {
      std::lock_guard lock(mutex_);
      auto& job = jobs_[id];
      if (result) {
        job.status = JobStatus::done;
        job.result_id = *result;
        job.progress = job.total;
      } else {
        job.status = JobStatus::failed;
        job.error = error;
        job.detail = detail;
        spdlog::warn("job {} failed: {}: {}", id, error, detail);
      }
    }
    changed_.notify_all();
  }
}

// -- HTTP --------------------------------------------------------------------

namespace {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound:
    case ErrorCode::UnknownDocument:
    case ErrorCode::UnknownDocId:
      return 404;
    case ErrorCode::ConcurrentMutation:
      return 409;
    case ErrorCode::IoError:
    case ErrorCode::CorruptModel:
    case ErrorCode::CorruptCorpus:
    case ErrorCode::UnsupportedVersion:
      return 500;
    default:
      return 422;
  }
}

ojson job_json(const JobInfo& job) {
  ojson j;
  j["job_id"] = job.job_id;
  j["kind"] = to_string(job.kind);
  j["status"] = to_string(job.status);
  j["progress"] = job.progress;
  j["total"] = job.total;
  j["result_id"] = job.result_id ? ojson(*job.result_id) : ojson(nullptr);
  if (job.error) {
    j["error"] = *job.error;
    j["detail"] = job.detail.value_or("");
  }
  return j;
}

void send(httplib::Response& res, int status, const ojson& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view name, std::string_view detail) {
  send(res, status, ojson{{"api_version", kApiVersion}, {"error", name}, {"detail", detail}});
}

nlohmann::json body_of(const httplib::Request& req) {
  auto j = nlohmann::json::parse(req.body.empty() ? std::string("{}") : req.body);
  if (!j.is_object()) throw Error(ErrorCode::InvalidInput, "request body must be a JSON object");
  return j;
}

template <typename T>
T required(const nlohmann::json& body, const char* key) {
  if (!body.contains(key)) throw Error(ErrorCode::InvalidInput, std::string("missing field '") + key + "'");
  return body.at(key).get<T>();
}

std::size_t optional_count(const nlohmann::json& body, const char* key, std::size_t fallback) {
  if (!body.contains(key) || body.at(key).is_null()) return fallback;
  const auto v = body.at(key).get<long long>();
  if (v < 0) throw Error(ErrorCode::InvalidInput, std::string("'") + key + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

}  // namespace

struct Server::Impl {
  Impl(std::filesystem::path root, ServerOptions opts)
      : store(std::move(root)), options(std::move(opts)), queue(options.workers) {}

  Store store;
  ServerOptions options;
  JobQueue queue;
  httplib::Server http;
  std::thread thread;
  std::optional<Basemap> basemap;

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  // Maps domain and JSON errors onto status codes with an {error, detail} body.
  static httplib::Server::Handler guarded(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const Error& e) {
        send_error(res, http_status(e.code()), e.name(), e.what());
      } catch (const nlohmann::json::exception& e) {
        send_error(res, 422, "InvalidInput", e.what());
      } catch (const std::exception& e) {
        spdlog::error("{} {}: {}", req.method, req.path, e.what());
        send_error(res, 500, "InternalError", e.what());
      }
    };
  }

  LdaModel model(const httplib::Request& req) const { return store.model(req.matches[1].str()); }

  void routes() {
    http.Post("/corpora", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = body_of(req);
      IngestRequest request;
      request.collection = required<std::string>(body, "collection");
      request.granularity = parse_granularity(body.value("granularity", std::string("volume")));
      request.options.min_count_exclusive = body.value("min_count_exclusive", request.options.min_count_exclusive);
      if (body.contains("stoplist")) {
        const auto words = body.at("stoplist").get<std::vector<std::string>>();
        request.options.stoplist = Stoplist(words.begin(), words.end());
      }
      const auto lock = store.try_lock_mutation();
      const auto id = ingest(store, lock, request);
      send(res, 201, corpus_report(store.corpus(id)).json);
    }));

    http.Get(R"(/corpora/([A-Za-z0-9-]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send(res, 200, corpus_report(store.corpus(req.matches[1].str()), true).json);
    }));

    http.Post("/models", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = body_of(req);
      const auto corpus_id = required<std::string>(body, "corpus_id");
      LdaParams params;
      params.k = body.value("k", params.k);
      params.alpha = body.value("alpha", params.alpha);
      params.beta = body.value("beta", params.beta);
      params.iterations = body.value("iterations", params.iterations);
      params.seed = body.value("seed", params.seed);
      params.average_last = body.value("average_last", params.average_last);
      params.validate();
      if (!store.has_corpus(corpus_id)) throw Error(ErrorCode::NotFound, "no corpus '" + corpus_id + "'");

      const auto job = queue.submit(JobKind::train, params.iterations, [this, corpus_id, params](const auto& progress) {
        const auto corpus = store.corpus(corpus_id);
        const auto model = train(corpus, params, [&](const GibbsSampler& s) { progress(s.sweeps_done()); });
        const auto lock = store.lock_mutation();
        return commit_model(store, lock, model);
      });
      send(res, 202, ojson{{"api_version", kApiVersion}, {"job", job_json(*queue.get(job))}});
    }));

    http.Get(R"(/jobs/([A-Za-z0-9-]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto job = queue.get(req.matches[1].str());
      if (!job) throw Error(ErrorCode::NotFound, "no job '" + req.matches[1].str() + "'");
      send(res, 200, ojson{{"api_version", kApiVersion}, {"job", job_json(*job)}});
    }));

    http.Get(R"(/models/([A-Za-z0-9-]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send(res, 200, model_report(model(req), req.matches[1].str()).json);
    }));

    http.Get(R"(/models/([A-Za-z0-9-]+)/topics)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      std::size_t n = 10;
      if (req.has_param("n")) {
        const auto v = std::stoll(req.get_param_value("n"));
        if (v < 0) throw Error(ErrorCode::InvalidInput, "n must be non-negative");
        n = static_cast<std::size_t>(v);
      }
      send(res, 200, topics_report(model(req), n).json);
    }));

    http.Post(R"(/models/([A-Za-z0-9-]+)/topic-query)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = body_of(req);
      const auto words = required<std::vector<std::string>>(body, "words");
      const auto m = model(req);
      const auto ranking = topic_query(m, words, optional_count(body, "top", kAllEntries));
      send(res, 200, topic_query_report(ranking, m, optional_count(body, "n_words", 10)).json);
    }));

    http.Post(R"(/models/([A-Za-z0-9-]+)/rank-docs)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = body_of(req);
      const auto topics = required<std::vector<int>>(body, "topics");
      const auto m = model(req);
      const auto corpus = store.corpus(m.corpus_id);
      const auto ranking = rank_docs(m, topics, optional_count(body, "top", kAllEntries));
      std::optional<double> threshold;
      if (body.contains("threshold") && !body.at("threshold").is_null()) threshold = body.at("threshold").get<double>();
      send(res, 200, doc_ranking_report(ranking, &corpus, threshold).json);
    }));

    http.Post(R"(/models/([A-Za-z0-9-]+)/rank-volumes)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = body_of(req);
      const auto topics = required<std::vector<int>>(body, "topics");
      const auto m = model(req);
      const auto corpus = store.corpus(m.corpus_id);
      const auto pages = optional_count(body, "pages", 800);
      const auto hits = rank_volumes_by_page_hits(corpus, rank_docs(m, topics), pages, optional_count(body, "top", 6));
      send(res, 200, volume_hits_report(hits, pages).json);
    }));

    http.Post(R"(/models/([A-Za-z0-9-]+)/similar-sentences)", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = body_of(req);
      const auto m = model(req);
      const auto corpus = store.corpus(m.corpus_id);
      SentenceQuery query;
      if (body.contains("doc_id")) {
        query = SentenceDocQuery{body.at("doc_id").get<std::string>()};
      } else if (body.contains("text")) {
        query = RawTextQuery{body.at("text").get<std::string>()};
      } else {
        throw Error(ErrorCode::InvalidInput, "give either 'doc_id' or 'text'");
      }
      FoldInOptions fold;
      fold.sweeps = body.value("sweeps", fold.sweeps);
      if (body.contains("seed")) fold.seed = body.at("seed").get<std::uint64_t>();
      const auto ranking = similar_sentences(m, corpus, query, optional_count(body, "top", 10), fold);
      send(res, 200, doc_ranking_report(ranking, &corpus).json);
    }));

    http.Post("/pipeline/filter", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = body_of(req);
      const auto corpus_id = required<std::string>(body, "corpus_id");
      const auto lock = store.try_lock_mutation();
      std::string id;
      if (body.contains("doc_ids")) {
        const auto ids = body.at("doc_ids").get<std::set<std::string>>();
        id = filter_stage(store, lock, corpus_id, ids);
      } else {
        FilterRequest request;
        request.corpus_id = corpus_id;
        request.model_id = required<std::string>(body, "model_id");
        request.topics = required<std::vector<int>>(body, "topics");
        request.threshold = body.value("threshold", request.threshold);
        id = filter_stage(store, lock, request);
      }
      send(res, 201, corpus_report(store.corpus(id)).json);
    }));

    http.Post("/pipeline/drill", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = body_of(req);
      const auto corpus_id = required<std::string>(body, "corpus_id");
      const auto finer = parse_granularity(required<std::string>(body, "granularity"));
      const auto parent = store.corpus(corpus_id);
      if (!is_finer(finer, parent.granularity)) {
        throw Error(ErrorCode::NotFiner, std::string(to_string(finer)) + " is not finer than " +
                                             std::string(to_string(parent.granularity)));
      }
      // The lock is taken now so a conflicting mutation is refused up front,
      // and released when the job finishes.
      auto lock = std::make_shared<Store::MutationLock>(store.try_lock_mutation());
      const auto job = queue.submit(JobKind::drill, 1, [this, corpus_id, finer, lock](const auto&) mutable {
        auto held = std::move(lock);
        return drill_stage(store, *held, corpus_id, finer);
      });
      send(res, 202, ojson{{"api_version", kApiVersion}, {"job", job_json(*queue.get(job))}});
    }));

    http.Get("/overlay", guarded([this](const httplib::Request& req, httplib::Response& res) {
      if (!req.has_param("corpus")) throw Error(ErrorCode::InvalidInput, "missing query parameter 'corpus'");
      if (!basemap) throw Error(ErrorCode::NotFound, "server has no basemap configured");
      const auto mode = parse_placement_mode(req.has_param("mode") ? req.get_param_value("mode") : "weighted");
      send(res, 200, overlay_report(overlay_for_corpus(store, req.get_param_value("corpus"), *basemap, mode)).json);
    }));

    http.Get("/pipeline", guarded([this](const httplib::Request&, httplib::Response& res) {
      ojson j{{"api_version", kApiVersion}};
      j["pipeline"] = pipeline_to_json(store.state());
      send(res, 200, j);
    }));

    if (options.static_dir && !http.set_mount_point("/", options.static_dir->string())) {
      throw Error(ErrorCode::IoError, "cannot serve static files from " + options.static_dir->string());
    }
  }

  int bind() {
    if (options.basemap) basemap = load_basemap(*options.basemap);
    routes();
    int port = options.port;
    if (port == 0) {
      port = http.bind_to_any_port(options.host);
      if (port < 0) throw Error(ErrorCode::IoError, "cannot bind " + options.host);
    } else if (!http.bind_to_port(options.host, port)) {
      throw Error(ErrorCode::IoError, "cannot bind " + options.host + ":" + std::to_string(port));
    }
    spdlog::info("serving store {} on http://{}:{}", store.root().string(), options.host, port);
    return port;
  }
};

Server::Server(std::filesystem::path store_root, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(store_root), std::move(options))) {}

Server::~Server() { stop(); }

int Server::start() {
  const int port = impl_->bind();
  impl_->thread = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  return port;
}

void Server::run() {
  impl_->bind();
  impl_->http.listen_after_bind();
}

void Server::stop() {
  if (!impl_) return;
  impl_->http.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

JobQueue& Server::jobs() { return impl_->queue; }

}  // namespace drilldown
