#include "drilldown/error.hpp"
#include "drilldown/textprep.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
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

// "page-0012.txt" -> 12
std::optional<int> page_number(const std::string& filename) {
  constexpr std::string_view prefix = "page-";
  constexpr std::string_view suffix = ".txt";
  if (filename.size() <= prefix.size() + suffix.size() || !filename.starts_with(prefix) ||
      !filename.ends_with(suffix)) {
    return std::nullopt;
  }
  const char* first = filename.data() + prefix.size();
  const char* last = filename.data() + filename.size() - suffix.size();
  int value = 0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  return lines;
}

}  // namespace

Volume load_volume(const fs::path& dir) {
  Volume v;
  try {
    const auto meta = nlohmann::json::parse(read_file(dir / "metadata.json"));
    v.volume_id = meta.at("volume_id").get<std::string>();
    v.title = meta.value("title", std::string{});
    if (meta.contains("year") && !meta["year"].is_null()) v.year = meta["year"].get<int>();
    if (meta.contains("call_number") && !meta["call_number"].is_null()) {
      v.call_number = meta["call_number"].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidInput, "bad metadata.json in " + dir.string() + ": " + e.what());
  }

  std::vector<std::pair<int, fs::path>> pages;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (auto n = page_number(entry.path().filename().string())) pages.emplace_back(*n, entry.path());
  }
  std::sort(pages.begin(), pages.end());
  for (std::size_t i = 1; i < pages.size(); ++i) {
    if (pages[i].first == pages[i - 1].first) {
      throw Error(ErrorCode::InvalidInput,
                  "duplicate page index " + std::to_string(pages[i].first) + " in " + dir.string());
    }
  }
  for (const auto& [index, path] : pages) v.pages.push_back({index, split_lines(read_file(path))});
  return v;
}

std::vector<Volume> load_collection(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, "not a directory: " + dir.string());
  std::vector<fs::path> volume_dirs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "metadata.json")) {
      volume_dirs.push_back(entry.path());
    }
  }
  std::sort(volume_dirs.begin(), volume_dirs.end());

  std::vector<Volume> volumes;
  std::set<std::string> ids;
  for (const auto& vd : volume_dirs) {
    auto v = load_volume(vd);
    if (!ids.insert(v.volume_id).second) {
      throw Error(ErrorCode::InvalidInput, "duplicate volume_id '" + v.volume_id + "'");
    }
    volumes.push_back(std::move(v));
  }
  if (volumes.empty()) throw Error(ErrorCode::InvalidInput, "no volumes under " + dir.string());
  return volumes;
}

void write_volume(const Volume& v, const fs::path& collection_dir) {
  const fs::path dir = collection_dir / v.volume_id;
  fs::create_directories(dir);
  nlohmann::ordered_json meta;
  meta["volume_id"] = v.volume_id;
  meta["title"] = v.title;
  meta["year"] = v.year ? nlohmann::ordered_json(*v.year) : nlohmann::ordered_json(nullptr);
  meta["call_number"] =
      v.call_number ? nlohmann::ordered_json(*v.call_number) : nlohmann::ordered_json(nullptr);
  std::ofstream(dir / "metadata.json") << meta.dump(2) << '\n';
  for (const auto& page : v.pages) {
    std::string name = std::to_string(page.page_index);
    if (name.size() < 4) name.insert(0, 4 - name.size(), '0');
    std::ofstream out(dir / ("page-" + name + ".txt"), std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write page file in " + dir.string());
    for (const auto& line : page.lines) out << line << '\n';
  }
}

}  // namespace drilldown
