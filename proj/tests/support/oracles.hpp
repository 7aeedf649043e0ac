#pragma once

// Brute-force reference implementations and random fixtures for them.
// Oracles work from the raw definitions in long double and share no code
// with the library beyond its data types.

#include "drilldown/lda.hpp"
#include "drilldown/retrieval.hpp"
#include "drilldown/scimap.hpp"

#include <random>
#include <string>
#include <vector>

namespace fixtures {

// Values closer than this are treated as ties by the oracles.
inline constexpr long double kTieTolerance = 1e-12L;

std::vector<drilldown::TopicScore> oracle_topic_query(const drilldown::LdaModel& model,
                                                      const std::vector<std::string>& words);

std::vector<drilldown::DocDistance> oracle_rank_docs(const drilldown::LdaModel& model,
                                                     const std::vector<int>& topics);

drilldown::BookPlacement oracle_place(const std::string& volume_id, const std::string& call_number,
                                      const drilldown::Basemap& basemap, drilldown::PlacementMode mode);

// Random small model. Some phi and theta rows are exact copies of others so
// tie rules get exercised.
drilldown::LdaModel random_model(std::mt19937_64& rng);
std::vector<std::string> random_query_words(std::mt19937_64& rng, const drilldown::LdaModel& model);
std::vector<int> random_topics(std::mt19937_64& rng, const drilldown::LdaModel& model);

// Random basemap over a handful of class letters, plus call numbers to place
// (some unparseable, some matching nothing).
drilldown::Basemap random_basemap(std::mt19937_64& rng);
std::vector<std::string> random_call_numbers(std::mt19937_64& rng);

// Empty string when equal; otherwise a description of the first difference.
std::string compare(const std::vector<drilldown::TopicScore>& got, const std::vector<drilldown::TopicScore>& want);
std::string compare(const std::vector<drilldown::DocDistance>& got, const std::vector<drilldown::DocDistance>& want);
std::string compare(const drilldown::BookPlacement& got, const drilldown::BookPlacement& want);

}  // namespace fixtures
