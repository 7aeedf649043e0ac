#include "fixtures.hpp"

#include "drilldown/error.hpp"
#include "drilldown/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fixtures {

namespace fs = std::filesystem;
using namespace drilldown;

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "drilldown-test-XXXXXX").string();
  if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::vector<double> dirichlet(std::mt19937_64& rng, std::size_t n, double concentration) {
  std::gamma_distribution<double> gamma(concentration, 1.0);
  std::vector<double> p(n);
  double total = 0.0;
  // Very small concentrations can underflow every draw; retry until one is positive.
  while (total <= 0.0) {
    total = 0.0;
    for (auto& x : p) total += (x = gamma(rng));
  }
  for (auto& x : p) x /= total;
  return p;
}

std::size_t categorical(std::mt19937_64& rng, const std::vector<double>& p) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return i;
  }
  return p.size() - 1;
}

SyntheticLda synthetic_lda(std::uint64_t seed, int docs, int doc_length, int k, int vocab, double alpha,
                           double beta) {
  std::mt19937_64 rng(seed);
  SyntheticLda out;
  for (int t = 0; t < k; ++t) out.phi.push_back(dirichlet(rng, static_cast<std::size_t>(vocab), beta));

  std::vector<std::vector<std::string>> words(static_cast<std::size_t>(docs));
  for (int d = 0; d < docs; ++d) {
    out.theta.push_back(dirichlet(rng, static_cast<std::size_t>(k), alpha));
    for (int i = 0; i < doc_length; ++i) {
      const auto t = categorical(rng, out.theta.back());
      const auto w = categorical(rng, out.phi[t]);
      char buf[8];
      std::snprintf(buf, sizeof buf, "w%02zu", w);
      words[static_cast<std::size_t>(d)].emplace_back(buf);
    }
  }
  out.corpus = corpus_of(words);
  return out;
}

Corpus corpus_of(const std::vector<std::vector<std::string>>& docs, Granularity g) {
  PrepOptions options;
  options.min_count_exclusive = 0;
  std::vector<WordDocument> wd;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    char id[16];
    std::snprintf(id, sizeof id, "d%04zu", d);
    Provenance p;
    p.volume_id = id;
    if (g != Granularity::volume) p.page_index = 0;
    if (g == Granularity::sentence) p.sentence_index = 0;
    wd.push_back({id, p, id, docs[d]});
  }
  return corpus_from_words(std::move(wd), g, options);
}

double aligned_mean_l1(const std::vector<std::vector<double>>& truth, const ProbMatrix& learned) {
  const std::size_t k = truth.size();
  std::vector<std::vector<double>> dist(k, std::vector<double>(k));
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      double l1 = 0.0;
      for (std::size_t w = 0; w < truth[a].size(); ++w) {
        l1 += std::abs(truth[a][w] - learned(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(w)));
      }
      dist[a][b] = l1;
    }
  }
  std::vector<bool> used_a(k, false);
  std::vector<bool> used_b(k, false);
  double total = 0.0;
  for (std::size_t step = 0; step < k; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t ba = 0;
    std::size_t bb = 0;
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) {
        if (!used_a[a] && !used_b[b] && dist[a][b] < best) {
          best = dist[a][b];
          ba = a;
          bb = b;
        }
      }
    }
    used_a[ba] = used_b[bb] = true;
    total += best;
  }
  return total / static_cast<double>(k);
}

LdaModel model_from(const ProbMatrix& phi, const ProbMatrix& theta, Granularity g) {
  LdaModel m;
  m.granularity = g;
  m.phi = phi;
  m.theta = theta;
  for (Eigen::Index w = 0; w < phi.cols(); ++w) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "w%03ld", static_cast<long>(w));
    m.words.emplace_back(buf);
  }
  for (Eigen::Index d = 0; d < theta.rows(); ++d) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "d%04ld", static_cast<long>(d));
    m.doc_ids.emplace_back(buf);
  }
  m.params.k = static_cast<int>(phi.rows());
  return m;
}

// -- drill-down collection ----------------------------------------------------

namespace {

using Theme = std::vector<std::string>;

const std::vector<Theme>& themes() {
  static const std::vector<Theme> t = {
      {"consciousness", "perception", "sensation", "memory", "learning", "habit", "reflex", "instinct",
       "attention", "intelligence"},
      {"anthropomorphism", "animals", "evolution", "species", "ancestry", "descent", "adaptation", "variation",
       "heredity", "selection"},
      {"psychology", "experiment", "observation", "laboratory", "method", "measurement", "stimulus", "response",
       "apparatus", "trial"},
      {"railway", "locomotive", "boiler", "piston", "cylinder", "freight", "signal", "junction", "carriage",
       "timetable"},
      {"harvest", "wheat", "barley", "plough", "orchard", "pasture", "cattle", "dairy", "fertilizer", "drainage"},
  };
  return t;
}

constexpr int kR1 = 0, kR2 = 1, kR3 = 2, kN1 = 3, kN2 = 4, kBlank = -1;

// Sentences of 6-10 theme words wrapped at 8 words per line. A long word
// that starts a continuation line is hyphenated across the break.
std::vector<std::string> page_lines(std::mt19937_64& rng, int theme, const std::string& header, int page_no) {
  std::vector<std::string> lines{header + " " + std::to_string(page_no), ""};
  if (theme == kBlank) {
    lines.push_back(std::to_string(1000 + page_no * 7));
    lines.emplace_back("  ");
    lines.push_back(std::to_string(page_no));
    return lines;
  }
  const auto& words = themes()[static_cast<std::size_t>(theme)];
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
  std::uniform_int_distribution<int> sentence_len(6, 10);

  std::vector<std::string> tokens;
  while (tokens.size() < 60) {
    const int n = sentence_len(rng);
    for (int i = 0; i < n; ++i) {
      std::string w = words[pick(rng)];
      if (i == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
      if (i == n - 1) w += '.';
      tokens.push_back(std::move(w));
    }
  }

  std::string line;
  int on_line = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& w = tokens[i];
    if (on_line == 8) {
      const bool lower = std::islower(static_cast<unsigned char>(w[0])) != 0;
      if (lower && w.size() >= 8) {
        const std::size_t cut = w.size() / 2;
        lines.push_back(line + " " + w.substr(0, cut) + "-");
        line = w.substr(cut);
        on_line = 1;
        continue;
      }
      lines.push_back(line);
      line.clear();
      on_line = 0;
    }
    line += (on_line ? " " : "") + w;
    ++on_line;
  }
  if (!line.empty()) lines.push_back(line);
  return lines;
}

}  // namespace

DrillCollection drill_collection() {
  std::mt19937_64 rng(20240611);
  DrillCollection c;
  c.query_words = {"instinct", "evolution", "experiment"};

  auto add = [&](int number, const std::vector<int>& page_themes) {
    char id[8];
    std::snprintf(id, sizeof id, "v%02d", number);
    Volume v;
    v.volume_id = id;
    v.title = "Fixture volume " + std::to_string(number);
    v.year = 1890 + number;
    v.call_number = number <= 8 ? "BF660 .F" + std::to_string(number) : "TF200 .F" + std::to_string(number);
    const std::string header = "FIXTURE STUDIES " + std::string(number % 2 ? "ODD" : "EVEN");
    for (std::size_t p = 0; p < page_themes.size(); ++p) {
      v.pages.push_back({static_cast<int>(p), page_lines(rng, page_themes[p], header, 10 + static_cast<int>(p))});
    }
    c.volumes.push_back(std::move(v));
  };

  const std::vector<std::vector<int>> orders = {{kR1, kR2, kR3}, {kR2, kR3, kR1}, {kR3, kR1, kR2},
                                                {kR1, kR3, kR2}, {kR2, kR1, kR3}, {kR3, kR2, kR1}};
  for (int i = 0; i < 6; ++i) {
    const auto& o = orders[static_cast<std::size_t>(i)];
    add(i + 1, {o[0], o[1], o[0], o[1], o[2]});
  }
  add(7, {kR1, kBlank, kR2, kBlank, kR3});
  add(8, {kR3, kBlank, kR1, kBlank, kR2});
  add(9, {kN1, kN1, kR1, kN2, kN2});
  add(10, {kN2, kN2, kR2, kN1, kN1});
  add(11, {kN1, kN2, kN1, kN2, kN1});
  add(12, {kN2, kN1, kN2, kN1, kN2});

  c.expected_final = {"v01", "v02", "v03", "v04", "v05", "v06"};
  c.relevant_volumes = {"v01", "v02", "v03", "v04", "v05", "v06", "v07", "v08"};
  return c;
}

DrillRun run_drill_fixture(double threshold, int iterations) {
  const DrillCollection c = drill_collection();
  DrillRun run;
  const PrepOptions options = default_prep_options();
  const Corpus volumes = build_corpus(c.volumes, Granularity::volume, options);

  LdaParams params;
  params.k = 5;
  params.iterations = iterations;
  const LdaModel volume_model = train(volumes, params);
  for (const auto& e : topic_query(volume_model, c.query_words, 3).entries) run.volume_topics.push_back(e.topic);
  const DocRanking ranking = rank_docs(volume_model, run.volume_topics);
  run.min_volume_distance = ranking.entries.front().distance;

  Corpus filtered;
  try {
    filtered = filter_corpus(volumes, filter_by_threshold(ranking, threshold));
  } catch (const Error& e) {
    run.error = std::string(e.name());
    return run;
  }
  run.filtered_volumes = filtered.volume_ids();
  run.filtered_tokens = filtered.total_tokens();

  const Corpus pages = drill(filtered, c.volumes, Granularity::page);
  run.page_documents = pages.documents.size();
  run.page_tokens = pages.total_tokens();
  run.page_volumes = pages.volume_ids();

  params.k = 3;
  const LdaModel page_model = train(pages, params);
  std::vector<int> page_topics;
  for (const auto& e : topic_query(page_model, c.query_words, 3).entries) page_topics.push_back(e.topic);
  run.hits = rank_volumes_by_page_hits(pages, rank_docs(page_model, page_topics), 800, 6);
  for (const auto& h : run.hits) run.final_volumes.insert(h.volume_id);
  return run;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Volume read_paged(const fs::path& path) {
  Volume v;
  v.volume_id = path.stem().string();
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("@@ page ", 0) == 0) {
      v.pages.push_back({std::stoi(line.substr(8)), {}});
    } else if (!v.pages.empty()) {
      v.pages.back().lines.push_back(line);
    }
  }
  return v;
}

std::string write_paged(const Volume& volume) {
  std::string out;
  for (const auto& page : volume.pages) {
    out += "@@ page " + std::to_string(page.page_index) + "\n";
    for (const auto& line : page.lines) out += line + "\n";
  }
  return out;
}

Basemap two_sub_basemap() {
  Basemap m;
  m.name = "two-sub fixture";
  m.disciplines = {{1, "Sciences"}, {2, "Humanities"}};
  m.subdisciplines = {{1, "A", 1, 1.0, 2.0}, {2, "B", 2, 5.0, -1.0}};
  m.journals = {{"Journal A1", "QL750", 1}, {"Journal A2", "QL85", 1}, {"Journal B1", "BF660", 2}};
  return m;
}

}  // namespace fixtures
