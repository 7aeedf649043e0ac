#include "fixtures.hpp"
#include "oracles.hpp"

#include "drilldown/error.hpp"
#include "drilldown/scimap.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

namespace {

using namespace drilldown;

const std::filesystem::path kData = DRILLDOWN_DATA_DIR;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no drilldown::Error thrown";
  return ErrorCode::InvalidInput;
}

BookPlacement place(const std::string& raw, const Basemap& m, PlacementMode mode = PlacementMode::weighted) {
  std::optional<CallNumber> cn;
  try {
    cn = parse_call_number(raw);
  } catch (const Error&) {
  }
  return place_book("book", cn, build_crosswalk(m), m, mode);
}

TEST(CallNumber, Parses) {
  const auto a = parse_call_number("QL785 .W3 1908");
  EXPECT_EQ(a.class_letters, "QL");
  EXPECT_EQ(a.class_number, 785.0);
  EXPECT_EQ(a.raw, "QL785 .W3 1908");
  const auto b = parse_call_number("BF660");
  EXPECT_EQ(b.class_letters, "BF");
  EXPECT_EQ(b.class_number, 660.0);
  const auto c = parse_call_number("QH 31.5 .D2");
  EXPECT_EQ(c.class_letters, "QH");
  EXPECT_EQ(c.class_number, 31.5);
  EXPECT_FALSE(parse_call_number("B").class_number.has_value());
}

TEST(CallNumber, Rejects) {
  for (const std::string bad : {"1234", "", "ql785", "QLXZ12", "  "}) {
    EXPECT_EQ(code_of([&] { parse_call_number(bad); }), ErrorCode::UnparseableCallNumber) << bad;
  }
}

TEST(Crosswalk, HandTally) {
  const auto t = build_crosswalk(fixtures::two_sub_basemap());
  ASSERT_EQ(t.subs.size(), 2u);
  const auto& a = t.subs.at(1);
  EXPECT_EQ(a.by_letters, (std::map<std::string, int, std::less<>>{{"QL", 2}}));
  EXPECT_EQ(a.by_first_letter, (std::map<char, int>{{'Q', 2}}));
  const auto& b = t.subs.at(2);
  EXPECT_EQ(b.by_letters, (std::map<std::string, int, std::less<>>{{"BF", 1}}));
  EXPECT_EQ(b.by_first_letter, (std::map<char, int>{{'B', 1}}));
}

TEST(Crosswalk, EmptyJournalList) {
  Basemap m = fixtures::two_sub_basemap();
  m.journals.clear();
  EXPECT_EQ(code_of([&] { build_crosswalk(m); }), ErrorCode::EmptyBasemap);
}

TEST(Crosswalk, FixtureFileSkipsUnparseableJournal) {
  const Basemap m = load_basemap(kData / "basemap_fixture.json");
  EXPECT_EQ(m.subdisciplines.size(), 6u);
  const auto t = build_crosswalk(m);
  EXPECT_EQ(t.skipped_journals, 1);
  EXPECT_EQ(t.subs.at(101).journals, 3);
}

TEST(Basemap, ValidationErrors) {
  EXPECT_EQ(code_of([] { basemap_from_json("{"); }), ErrorCode::InvalidBasemap);
  const std::string dup = R"({"name":"x","disciplines":[{"discipline_id":1,"name":"d"}],
    "subdisciplines":[{"sub_id":1,"name":"a","discipline_id":1,"x":0,"y":0},
                      {"sub_id":1,"name":"b","discipline_id":1,"x":0,"y":0}],"journals":[]})";
  EXPECT_EQ(code_of([&] { basemap_from_json(dup); }), ErrorCode::InvalidBasemap);
  const std::string orphan = R"({"name":"x","disciplines":[{"discipline_id":1,"name":"d"}],
    "subdisciplines":[{"sub_id":1,"name":"a","discipline_id":1,"x":0,"y":0}],
    "journals":[{"name":"j","call_number":"QL1","sub_id":9}]})";
  EXPECT_EQ(code_of([&] { basemap_from_json(orphan); }), ErrorCode::InvalidBasemap);
}

TEST(PlaceBook, FullLetterMatch) {
  const auto p = place("QL791", fixtures::two_sub_basemap());
  EXPECT_EQ(p.status, PlacementStatus::placed);
  EXPECT_EQ(p.posterior, (std::map<int, double>{{1, 1.0}}));
  EXPECT_EQ(p.x, 1.0);
  EXPECT_EQ(p.y, 2.0);
}

TEST(PlaceBook, FirstLetterOnlyMatch) {
  const auto p = place("QH1", fixtures::two_sub_basemap());
  EXPECT_EQ(p.posterior, (std::map<int, double>{{1, 1.0}}));
}

TEST(PlaceBook, UncataloguedCases) {
  const Basemap m = fixtures::two_sub_basemap();
  EXPECT_EQ(place_book("none", std::nullopt, build_crosswalk(m), m).status, PlacementStatus::uncatalogued);
  EXPECT_EQ(place("TF200", m).status, PlacementStatus::uncatalogued);
}

TEST(PlaceBook, WeightedAcrossFixtureSubs) {
  // QL: 101 holds three QL journals (4 each, plus 1 each for Q); 102 two QH
  // journals (1 each); 201 one QL journal (4 + 1). Total 22.
  const Basemap m = load_basemap(kData / "basemap_fixture.json");
  const auto p = place("QL791 .W3", m);
  ASSERT_EQ(p.posterior.size(), 3u);
  EXPECT_NEAR(p.posterior.at(101), 15.0 / 22, 1e-15);
  EXPECT_NEAR(p.posterior.at(102), 2.0 / 22, 1e-15);
  EXPECT_NEAR(p.posterior.at(201), 5.0 / 22, 1e-15);
  EXPECT_NEAR(p.x, (15 * 0.8 + 2 * 0.7 + 5 * 0.5) / 22, 1e-15);
  const auto argmax = place("QL791 .W3", m, PlacementMode::argmax);
  EXPECT_EQ(argmax.posterior, (std::map<int, double>{{101, 1.0}}));
  EXPECT_EQ(argmax.x, 0.8);
}

TEST(PlaceBook, ArgmaxTieGoesToLowestSub) {
  Basemap m = fixtures::two_sub_basemap();
  m.journals = {{"a", "QL1", 2}, {"b", "QL2", 1}};
  const auto p = place("QL5", m, PlacementMode::argmax);
  EXPECT_EQ(p.posterior, (std::map<int, double>{{1, 1.0}}));
}

TEST(PlaceBook, MatchesOracleWithNormalizedPosteriorInsideHull) {
  std::mt19937_64 rng(401);
  for (int trial = 0; trial < 300; ++trial) {
    const Basemap m = fixtures::random_basemap(rng);
    const auto table = build_crosswalk(m);
    const auto mode = rng() % 2 ? PlacementMode::argmax : PlacementMode::weighted;
    for (const auto& raw : fixtures::random_call_numbers(rng)) {
      std::optional<CallNumber> cn;
      try {
        cn = parse_call_number(raw);
      } catch (const Error&) {
      }
      const auto got = place_book("b", cn, table, m, mode);
      EXPECT_EQ(fixtures::compare(got, fixtures::oracle_place("b", raw, m, mode)), "") << raw;
      if (got.status != PlacementStatus::placed) continue;
      double sum = 0.0, lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
      for (const auto& [sub, w] : got.posterior) {
        sum += w;
        const auto* s = m.find(sub);
        lo_x = std::min(lo_x, s->x);
        hi_x = std::max(hi_x, s->x);
        lo_y = std::min(lo_y, s->y);
        hi_y = std::max(hi_y, s->y);
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
      EXPECT_GE(got.x, lo_x - 1e-12);
      EXPECT_LE(got.x, hi_x + 1e-12);
      EXPECT_GE(got.y, lo_y - 1e-12);
      EXPECT_LE(got.y, hi_y + 1e-12);
    }
  }
}

// -- overlay --------------------------------------------------------------------

TEST(Overlay, EmptyOverlayIsValid) {
  const Overlay o = make_overlay({}, {}, "fixture");
  const auto text = overlay_to_json(o);
  const auto j = nlohmann::json::parse(text);
  EXPECT_TRUE(j.at("overlay").is_array());
  EXPECT_TRUE(j.at("overlay").empty());
  EXPECT_EQ(overlay_from_json(text), o);
  EXPECT_EQ(overlay_to_csv(o), "volume_id,x,y,tier,top_sub_id,top_weight\n");
}

TEST(Overlay, RoundTripAndTiers) {
  const Basemap m = load_basemap(kData / "basemap_fixture.json");
  const auto table = build_crosswalk(m);
  std::vector<BookPlacement> ps;
  ps.push_back(place_book("v1", parse_call_number("QL791"), table, m));
  ps.push_back(place_book("v2", parse_call_number("BF660"), table, m));
  ps.push_back(place_book("v3", std::nullopt, table, m));
  const std::map<std::string, Tier> tiers = {{"v1", Tier::focus}, {"v2", Tier::mid}};
  const Overlay o = make_overlay(ps, tiers, m.name);
  ASSERT_EQ(o.entries.size(), 2u);
  EXPECT_EQ(o.entries[0].tier, Tier::focus);
  EXPECT_EQ(o.entries[1].tier, Tier::mid);
  EXPECT_EQ(o.uncatalogued, std::vector<std::string>{"v3"});
  EXPECT_EQ(overlay_from_json(overlay_to_json(o)), o);

  fixtures::TempDir dir;
  write_overlay(o, dir.path() / "o.json");
  EXPECT_EQ(overlay_from_json(fixtures::read_file(dir.path() / "o.json")), o);

  const auto csv = overlay_to_csv(o);
  EXPECT_NE(csv.find("\nv1,"), std::string::npos);
  EXPECT_NE(csv.find(",focus,101,"), std::string::npos);
  EXPECT_NE(csv.find(",mid,201,0.625\n"), std::string::npos);
}

TEST(Overlay, VersionAndShapeErrors) {
  EXPECT_EQ(code_of([] { overlay_from_json(R"({"format_version":2,"basemap":"x","overlay":[],"uncatalogued":[]})"); }),
            ErrorCode::UnsupportedVersion);
  EXPECT_EQ(code_of([] { overlay_from_json(R"({"format_version":1})"); }), ErrorCode::InvalidInput);
}

}  // namespace
