#pragma once

// HTTP/JSON front end over a pipeline store. Training and drilling run as
// background jobs; everything else answers synchronously.

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace drilldown {

enum class JobKind { train, drill };
enum class JobStatus { queued, running, done, failed };

std::string_view to_string(JobKind k) noexcept;
std::string_view to_string(JobStatus s) noexcept;

struct JobInfo {
  std::string job_id;
  JobKind kind = JobKind::train;
  JobStatus status = JobStatus::queued;
  int progress = 0;  // completed sweeps (train) or steps (drill)
  int total = 0;
  std::optional<std::string> result_id;
  std::optional<std::string> error;  // error name when failed
  std::optional<std::string> detail;
};

// FIFO job runner with a fixed number of worker threads.
class JobQueue {
 public:
  using Progress = std::function<void(int completed)>;
  // Returns the id of the produced artifact.
  using Work = std::function<std::string(const Progress&)>;

  explicit JobQueue(int workers = 1);
  ~JobQueue();
  JobQueue(const JobQueue&) = delete;
  JobQueue& operator=(const JobQueue&) = delete;

  std::string submit(JobKind kind, int total, Work work);
  std::optional<JobInfo> get(const std::string& job_id) const;
  // Blocks until the job is done or failed.
  JobInfo wait(const std::string& job_id) const;

 private:
  void worker_loop();

  mutable std::mutex mutex_;
  mutable std::condition_variable changed_;
  std::deque<std::pair<std::string, Work>> pending_;
  std::map<std::string, JobInfo> jobs_;
  std::vector<std::thread> workers_;
  int next_id_ = 1;
  bool stopping_ = false;
};

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  int workers = 1;
  std::optional<std::filesystem::path> static_dir;
  std::optional<std::filesystem::path> basemap;
};

class Server {
 public:
  Server(std::filesystem::path store_root, ServerOptions options);
  ~Server();

  // Binds and serves on a background thread; returns the bound port.
  int start();
  // Binds and serves on the calling thread until stop().
  void run();
  void stop();

  JobQueue& jobs();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace drilldown
