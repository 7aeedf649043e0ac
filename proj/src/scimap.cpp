#include "drilldown/scimap.hpp"

#include "drilldown/error.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace drilldown {

namespace {

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

CallNumber parse_call_number(std::string_view raw) {
  std::size_t i = 0;
  while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
  const std::size_t letters_begin = i;
  while (i < raw.size() && is_upper(raw[i])) ++i;
  const std::size_t n_letters = i - letters_begin;
  // LC classes have at most three letters; a longer run is a word, not a class.
  if (n_letters == 0 || n_letters > 3 || (i < raw.size() && std::isalpha(static_cast<unsigned char>(raw[i])))) {
    throw Error(ErrorCode::UnparseableCallNumber, "no class letters in '" + std::string(raw) + "'");
  }

  CallNumber cn;
  cn.raw = std::string(raw);
  cn.class_letters = std::string(raw.substr(letters_begin, n_letters));

  while (i < raw.size() && raw[i] == ' ') ++i;
  std::size_t end = i;
  while (end < raw.size() && is_digit(raw[end])) ++end;
  if (end > i) {
    if (end + 1 < raw.size() && raw[end] == '.' && is_digit(raw[end + 1])) {
      ++end;
      while (end < raw.size() && is_digit(raw[end])) ++end;
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(raw.data() + i, raw.data() + end, value);
    if (ec == std::errc{} && ptr == raw.data() + end) cn.class_number = value;
  }
  return cn;
}

// -- basemap ---------------------------------------------------------------

const Subdiscipline* Basemap::find(int sub_id) const {
  for (const auto& s : subdisciplines) {
    if (s.sub_id == sub_id) return &s;
  }
  return nullptr;
}

Basemap basemap_from_json(std::string_view json_text) {
  Basemap map;
  try {
    const auto j = nlohmann::json::parse(json_text);
    map.name = j.value("name", std::string("basemap"));
    for (const auto& d : j.at("disciplines")) {
      map.disciplines.push_back({d.at("discipline_id").get<int>(), d.at("name").get<std::string>()});
    }
    for (const auto& s : j.at("subdisciplines")) {
      map.subdisciplines.push_back({s.at("sub_id").get<int>(), s.at("name").get<std::string>(),
                                    s.at("discipline_id").get<int>(), s.at("x").get<double>(),
                                    s.at("y").get<double>()});
    }
    for (const auto& r : j.at("journals")) {
      map.journals.push_back(
          {r.at("name").get<std::string>(), r.at("call_number").get<std::string>(), r.at("sub_id").get<int>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidBasemap, std::string("bad basemap JSON: ") + e.what());
  }

  std::set<int> discipline_ids;
  for (const auto& d : map.disciplines) discipline_ids.insert(d.discipline_id);
  std::set<int> sub_ids;
  for (const auto& s : map.subdisciplines) {
    if (!sub_ids.insert(s.sub_id).second) {
      throw Error(ErrorCode::InvalidBasemap, "duplicate sub_id " + std::to_string(s.sub_id));
    }
    if (!discipline_ids.contains(s.discipline_id)) {
      throw Error(ErrorCode::InvalidBasemap, "sub_id " + std::to_string(s.sub_id) + " has unknown discipline " +
                                                 std::to_string(s.discipline_id));
    }
  }
  for (const auto& r : map.journals) {
    if (!sub_ids.contains(r.sub_id)) {
      throw Error(ErrorCode::InvalidBasemap, "journal '" + r.name + "' references unknown sub_id " +
                                                 std::to_string(r.sub_id));
    }
  }
  return map;
}

Basemap load_basemap(const std::filesystem::path& path) { return basemap_from_json(read_text(path)); }

// -- crosswalk ---------------------------------------------------------------

CrosswalkTable build_crosswalk(const Basemap& basemap) {
  if (basemap.journals.empty()) throw Error(ErrorCode::EmptyBasemap, "basemap has no journals");
  CrosswalkTable table;
  for (const auto& j : basemap.journals) {
    CallNumber cn;
    try {
      cn = parse_call_number(j.call_number);
    } catch (const Error&) {
      spdlog::warn("skipping journal '{}': unparseable call number '{}'", j.name, j.call_number);
      ++table.skipped_journals;
      continue;
    }
    auto& tally = table.subs[j.sub_id];
    ++tally.by_letters[cn.class_letters];
    ++tally.by_first_letter[cn.class_letters.front()];
    ++tally.journals;
  }
  if (table.subs.empty()) throw Error(ErrorCode::EmptyBasemap, "no journal call number could be parsed");
  return table;
}

double crosswalk_score(const SubTally& tally, const CallNumber& cn, const ScoringWeights& w) {
  double score = 0.0;
  if (auto it = tally.by_letters.find(cn.class_letters); it != tally.by_letters.end()) {
    score += w.full_letters * it->second;
  }
  if (auto it = tally.by_first_letter.find(cn.class_letters.front()); it != tally.by_first_letter.end()) {
    score += w.first_letter * it->second;
  }
  return score;
}

std::string_view to_string(PlacementMode m) noexcept { return m == PlacementMode::argmax ? "argmax" : "weighted"; }

PlacementMode parse_placement_mode(std::string_view s) {
  if (s == "weighted") return PlacementMode::weighted;
  if (s == "argmax") return PlacementMode::argmax;
  throw Error(ErrorCode::InvalidParams, "placement mode must be weighted or argmax, got '" + std::string(s) + "'");
}

BookPlacement place_book(std::string volume_id, const std::optional<CallNumber>& call_number,
                         const CrosswalkTable& crosswalk, const Basemap& basemap, PlacementMode mode,
                         const ScoringWeights& w) {
  BookPlacement p;
  p.volume_id = std::move(volume_id);
  if (!call_number) return p;

  std::map<int, double> scores;
  double total = 0.0;
  for (const auto& [sub_id, tally] : crosswalk.subs) {
    const double s = crosswalk_score(tally, *call_number, w);
    if (s > 0.0) {
      scores[sub_id] = s;
      total += s;
    }
  }
  if (scores.empty()) return p;

  if (mode == PlacementMode::argmax) {
    // std::map iterates in sub_id order, so a strict > keeps the lowest id on ties.
    auto best = scores.begin();
    for (auto it = scores.begin(); it != scores.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    p.posterior = {{best->first, 1.0}};
  } else {
    for (const auto& [sub_id, s] : scores) p.posterior[sub_id] = s / total;
  }

  for (const auto& [sub_id, weight] : p.posterior) {
    const auto* sub = basemap.find(sub_id);
    if (!sub) throw Error(ErrorCode::InvalidBasemap, "crosswalk sub_id " + std::to_string(sub_id) + " not on basemap");
    p.x += weight * sub->x;
    p.y += weight * sub->y;
  }
  p.status = PlacementStatus::placed;
  return p;
}

// -- overlay -----------------------------------------------------------------

std::string_view to_string(Tier t) noexcept {
  switch (t) {
    case Tier::base: return "base";
    case Tier::mid: return "mid";
    case Tier::focus: return "focus";
  }
  return "base";
}

Tier parse_tier(std::string_view s) {
  if (s == "base") return Tier::base;
  if (s == "mid") return Tier::mid;
  if (s == "focus") return Tier::focus;
  throw Error(ErrorCode::InvalidInput, "unknown tier '" + std::string(s) + "'");
}

Overlay make_overlay(const std::vector<BookPlacement>& placements, const std::map<std::string, Tier>& tiers,
                     std::string basemap_name) {
  Overlay o;
  o.basemap = std::move(basemap_name);
  for (const auto& p : placements) {
    if (p.status != PlacementStatus::placed) {
      o.uncatalogued.push_back(p.volume_id);
      continue;
    }
    auto it = tiers.find(p.volume_id);
    o.entries.push_back({p.volume_id, p.x, p.y, p.posterior, it == tiers.end() ? Tier::base : it->second});
  }
  return o;
}

std::string overlay_to_json(const Overlay& overlay) {
  nlohmann::ordered_json j;
  j["format_version"] = overlay.format_version;
  j["basemap"] = overlay.basemap;
  j["overlay"] = nlohmann::ordered_json::array();
  for (const auto& e : overlay.entries) {
    nlohmann::ordered_json post = nlohmann::ordered_json::object();
    for (const auto& [sub_id, w] : e.posterior) post[std::to_string(sub_id)] = w;
    j["overlay"].push_back(
        {{"volume_id", e.volume_id}, {"x", e.x}, {"y", e.y}, {"posterior", post}, {"tier", to_string(e.tier)}});
  }
  j["uncatalogued"] = overlay.uncatalogued;
  return j.dump(2) + "\n";
}

Overlay overlay_from_json(std::string_view json_text) {
  Overlay o;
  try {
    const auto j = nlohmann::json::parse(json_text);
    o.format_version = j.at("format_version").get<int>();
    if (o.format_version != kOverlayFormatVersion) {
      throw Error(ErrorCode::UnsupportedVersion, "overlay format_version " + std::to_string(o.format_version));
    }
    o.basemap = j.at("basemap").get<std::string>();
    for (const auto& e : j.at("overlay")) {
      OverlayEntry entry;
      entry.volume_id = e.at("volume_id").get<std::string>();
      entry.x = e.at("x").get<double>();
      entry.y = e.at("y").get<double>();
      for (const auto& [key, w] : e.at("posterior").items()) entry.posterior[std::stoi(key)] = w.get<double>();
      entry.tier = parse_tier(e.at("tier").get<std::string>());
      o.entries.push_back(std::move(entry));
    }
    o.uncatalogued = j.at("uncatalogued").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("bad overlay JSON: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw Error(ErrorCode::InvalidInput, "bad overlay posterior key");
  }
  return o;
}

std::string overlay_to_csv(const Overlay& overlay) {
  std::ostringstream out;
  out.precision(17);
  out << "volume_id,x,y,tier,top_sub_id,top_weight\n";
  for (const auto& e : overlay.entries) {
    int top = -1;
    double top_w = -1.0;
    for (const auto& [sub_id, w] : e.posterior) {
      if (w > top_w) {
        top = sub_id;
        top_w = w;
      }
    }
    out << e.volume_id << ',' << e.x << ',' << e.y << ',' << to_string(e.tier) << ',' << top << ',' << top_w
        << '\n';
  }
  return out.str();
}

void write_overlay(const Overlay& overlay, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << overlay_to_json(overlay);
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

}  // namespace drilldown
