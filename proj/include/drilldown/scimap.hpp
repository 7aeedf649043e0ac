#pragma once

// Call-number crosswalk onto a science basemap and book placement.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace drilldown {

struct CallNumber {
  std::string class_letters;          // 1-3 uppercase letters
  std::optional<double> class_number; // e.g. 785 in "QL785 .W3 1908"
  std::string raw;

  friend bool operator==(const CallNumber&, const CallNumber&) = default;
};

// Throws UnparseableCallNumber when the string has no leading class letters.
CallNumber parse_call_number(std::string_view raw);

struct Subdiscipline {
  int sub_id = 0;
  std::string name;
  int discipline_id = 0;
  double x = 0.0;
  double y = 0.0;
};

struct Discipline {
  int discipline_id = 0;
  std::string name;
};

struct Journal {
  std::string name;
  std::string call_number;
  int sub_id = 0;
};

struct Basemap {
  std::string name;
  std::vector<Subdiscipline> subdisciplines;
  std::vector<Discipline> disciplines;
  std::vector<Journal> journals;

  const Subdiscipline* find(int sub_id) const;
};

// Validates that sub ids are unique and every journal references one.
// Throws InvalidBasemap.
Basemap basemap_from_json(std::string_view json_text);
Basemap load_basemap(const std::filesystem::path& path);

// Journal tallies per sub-discipline at two match levels.
struct SubTally {
  std::map<std::string, int, std::less<>> by_letters;
  std::map<char, int> by_first_letter;
  int journals = 0;
};

struct CrosswalkTable {
  std::map<int, SubTally> subs;  // only sub-disciplines with parseable journals
  int skipped_journals = 0;
};

// Duplicate journal rows count twice. Throws EmptyBasemap.
CrosswalkTable build_crosswalk(const Basemap& basemap);

enum class PlacementMode { weighted, argmax };

std::string_view to_string(PlacementMode m) noexcept;
PlacementMode parse_placement_mode(std::string_view s);

struct ScoringWeights {
  double full_letters = 4.0;
  double first_letter = 1.0;
};

enum class PlacementStatus { placed, uncatalogued };

struct BookPlacement {
  std::string volume_id;
  PlacementStatus status = PlacementStatus::uncatalogued;
  std::map<int, double> posterior;  // sub_id -> weight, only non-zero entries
  double x = 0.0;
  double y = 0.0;
};

// Raw (unnormalized) score of one sub-discipline.
double crosswalk_score(const SubTally& tally, const CallNumber& cn, const ScoringWeights& w = {});

// argmax ties go to the lowest sub_id.
BookPlacement place_book(std::string volume_id, const std::optional<CallNumber>& call_number,
                         const CrosswalkTable& crosswalk, const Basemap& basemap,
                         PlacementMode mode = PlacementMode::weighted, const ScoringWeights& w = {});

enum class Tier { base, mid, focus };

std::string_view to_string(Tier t) noexcept;
Tier parse_tier(std::string_view s);

inline constexpr int kOverlayFormatVersion = 1;

struct OverlayEntry {
  std::string volume_id;
  double x = 0.0;
  double y = 0.0;
  std::map<int, double> posterior;
  Tier tier = Tier::base;

  friend bool operator==(const OverlayEntry&, const OverlayEntry&) = default;
};

struct Overlay {
  int format_version = kOverlayFormatVersion;
  std::string basemap;
  std::vector<OverlayEntry> entries;
  std::vector<std::string> uncatalogued;

  friend bool operator==(const Overlay&, const Overlay&) = default;
};

// Volumes without a tier default to base. Uncatalogued placements are listed
// separately and never appear in `entries`.
Overlay make_overlay(const std::vector<BookPlacement>& placements, const std::map<std::string, Tier>& tiers,
                     std::string basemap_name);

std::string overlay_to_json(const Overlay& overlay);
Overlay overlay_from_json(std::string_view json_text);

// One row per entry: volume_id,x,y,tier,top_sub_id,top_weight
std::string overlay_to_csv(const Overlay& overlay);

void write_overlay(const Overlay& overlay, const std::filesystem::path& path);

}  // namespace drilldown
