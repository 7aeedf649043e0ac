#pragma once

// Shared fixtures for unit and acceptance tests.

#include "drilldown/lda.hpp"
#include "drilldown/retrieval.hpp"
#include "drilldown/scimap.hpp"
#include "drilldown/textprep.hpp"

#include <filesystem>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace fixtures {

// mkdtemp-backed directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::vector<double> dirichlet(std::mt19937_64& rng, std::size_t n, double concentration);
std::size_t categorical(std::mt19937_64& rng, const std::vector<double>& p);

// Documents drawn from the LDA generative process. Words are "w00", "w01", ...
// so vocabulary ids follow word index.
struct SyntheticLda {
  std::vector<std::vector<double>> phi;    // true topic-word distributions
  std::vector<std::vector<double>> theta;  // true document mixtures
  drilldown::Corpus corpus;
};

SyntheticLda synthetic_lda(std::uint64_t seed, int docs, int doc_length, int k, int vocab, double alpha,
                           double beta);

// Corpus with no stoplist and no frequency filter over explicit word lists.
drilldown::Corpus corpus_of(const std::vector<std::vector<std::string>>& docs,
                            drilldown::Granularity g = drilldown::Granularity::volume);

// Mean L1 distance between true and learned topics after greedy alignment
// (repeatedly pair the closest remaining true/learned topics).
double aligned_mean_l1(const std::vector<std::vector<double>>& truth, const drilldown::ProbMatrix& learned);

// Model with the given phi/theta but no count tables; enough for retrieval.
drilldown::LdaModel model_from(const drilldown::ProbMatrix& phi, const drilldown::ProbMatrix& theta,
                               drilldown::Granularity g = drilldown::Granularity::volume);

// -- drill-down collection ----------------------------------------------------
//
// Twelve volumes of five pages. Five themes with disjoint vocabularies: three
// relevant (R1-R3) and two unrelated (N1, N2). Every page is written from a
// single theme and carries a running header.
//
//   v01-v06  five relevant pages each, theme mix rotating (2,2,1)
//   v07-v08  three relevant pages (one per theme) and two pages of digits only
//   v09-v12  unrelated pages, plus one relevant page in v09 and v10
//
// The relevant words are `query_words()`. Volumes v01-v06 hold the most
// relevant pages, so they are the expected final selection.
struct DrillCollection {
  std::vector<drilldown::Volume> volumes;
  std::set<std::string> expected_final;       // v01-v06
  std::set<std::string> relevant_volumes;     // v01-v08
  std::vector<std::string> query_words;       // one word per relevant theme
};

DrillCollection drill_collection();

// Volume model -> top-3 topics for the query words -> filter at `threshold`
// -> page drill -> page model -> rank_volumes(800, 6). Stops after the filter
// when it keeps nothing.
struct DrillRun {
  std::vector<int> volume_topics;
  double min_volume_distance = 0.0;
  std::set<std::string> filtered_volumes;
  std::optional<std::string> error;  // error name raised by the filter step
  std::size_t filtered_tokens = 0;
  std::size_t page_documents = 0;
  std::size_t page_tokens = 0;
  std::set<std::string> page_volumes;
  std::vector<drilldown::VolumeHits> hits;
  std::set<std::string> final_volumes;
};

DrillRun run_drill_fixture(double threshold, int iterations = 300);

// -- golden files -------------------------------------------------------------
//
// Paged text files: a line "@@ page N" opens page N, following lines belong
// to it verbatim.

std::string read_file(const std::filesystem::path& path);
drilldown::Volume read_paged(const std::filesystem::path& path);
std::string write_paged(const drilldown::Volume& volume);

// Two-sub-discipline basemap: A {QL750, QL85} at (1, 2), B {BF660} at (5, -1).
drilldown::Basemap two_sub_basemap();

}  // namespace fixtures
