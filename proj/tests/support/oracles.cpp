#include "oracles.hpp"

#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace fixtures {

using namespace drilldown;

namespace {

// Replaces each value by the smallest value of its tie cluster so ties sort
// by the secondary key.
template <typename T, typename Value>
void snap_ties(std::vector<T>& items, Value value) {
  std::vector<long double*> order;
  for (auto& it : items) order.push_back(&value(it));
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return *a < *b; });
  long double anchor = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i == 0 || *order[i] - anchor > kTieTolerance) anchor = *order[i];
    *order[i] = anchor;
  }
}

// Leading class letters of a call number, or "" when not 1-3 uppercase
// letters followed by a non-letter.
std::string class_letters(const std::string& raw) {
  std::size_t i = 0;
  while (i < raw.size() && raw[i] == ' ') ++i;
  std::string letters;
  while (i < raw.size() && std::isalpha(static_cast<unsigned char>(raw[i]))) {
    if (!std::isupper(static_cast<unsigned char>(raw[i]))) return "";
    letters += raw[i++];
  }
  return letters.size() <= 3 ? letters : "";
}

}  // namespace

std::vector<TopicScore> oracle_topic_query(const LdaModel& model, const std::vector<std::string>& words) {
  std::set<std::size_t> ids;
  for (const auto& w : words) {
    for (std::size_t i = 0; i < model.words.size(); ++i) {
      if (model.words[i] == w) ids.insert(i);
    }
  }
  struct Scored {
    int topic;
    long double score;
  };
  std::vector<Scored> all;
  for (int t = 0; t < model.k(); ++t) {
    long double s = 0;
    for (auto w : ids) s += model.phi(t, static_cast<Eigen::Index>(w));
    all.push_back({t, -s});  // negated so ascending sort ranks high scores first
  }
  snap_ties(all, [](Scored& s) -> long double& { return s.score; });
  std::sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) {
    return a.score != b.score ? a.score < b.score : a.topic < b.topic;
  });
  std::vector<TopicScore> out;
  for (const auto& s : all) {
    long double exact = 0;
    for (auto w : ids) exact += model.phi(s.topic, static_cast<Eigen::Index>(w));
    out.push_back({s.topic, static_cast<double>(exact)});
  }
  return out;
}

std::vector<DocDistance> oracle_rank_docs(const LdaModel& model, const std::vector<int>& topics) {
  struct Ranked {
    std::string doc;
    long double key;
    long double exact;
  };
  std::vector<Ranked> all;
  for (Eigen::Index d = 0; d < model.num_docs(); ++d) {
    long double norm = 0;
    for (Eigen::Index t = 0; t < model.k(); ++t) norm += static_cast<long double>(model.theta(d, t)) * model.theta(d, t);
    norm = std::sqrt(norm);
    long double sum = 0;
    for (int t : topics) sum += 1.0L - model.theta(d, t) / norm;
    all.push_back({model.doc_ids[static_cast<std::size_t>(d)], sum, sum});
  }
  snap_ties(all, [](Ranked& r) -> long double& { return r.key; });
  std::sort(all.begin(), all.end(),
            [](const Ranked& a, const Ranked& b) { return a.key != b.key ? a.key < b.key : a.doc < b.doc; });
  std::vector<DocDistance> out;
  for (const auto& r : all) out.push_back({r.doc, static_cast<double>(r.exact)});
  return out;
}

BookPlacement oracle_place(const std::string& volume_id, const std::string& call_number, const Basemap& basemap,
                           PlacementMode mode) {
  BookPlacement p;
  p.volume_id = volume_id;
  const std::string letters = class_letters(call_number);
  if (letters.empty()) return p;

  std::map<int, long double> score;
  for (const auto& j : basemap.journals) {
    const std::string jl = class_letters(j.call_number);
    if (jl.empty()) continue;
    if (jl == letters) score[j.sub_id] += 4;
    if (jl[0] == letters[0]) score[j.sub_id] += 1;
  }
  long double total = 0;
  for (const auto& [sub, s] : score) total += s;
  if (total == 0) return p;

  if (mode == PlacementMode::argmax) {
    int best = -1;
    long double best_score = 0;
    for (const auto& sub : basemap.subdisciplines) {
      const long double s = score.count(sub.sub_id) ? score[sub.sub_id] : 0;
      if (s > best_score || (s == best_score && s > 0 && sub.sub_id < best)) {
        best = sub.sub_id;
        best_score = s;
      }
    }
    p.posterior[best] = 1.0;
  } else {
    for (const auto& [sub, s] : score) {
      if (s > 0) p.posterior[sub] = static_cast<double>(s / total);
    }
  }
  long double x = 0, y = 0;
  for (const auto& [sub_id, w] : p.posterior) {
    for (const auto& sub : basemap.subdisciplines) {
      if (sub.sub_id == sub_id) {
        x += w * static_cast<long double>(sub.x);
        y += w * static_cast<long double>(sub.y);
      }
    }
  }
  p.x = static_cast<double>(x);
  p.y = static_cast<double>(y);
  p.status = PlacementStatus::placed;
  return p;
}

LdaModel random_model(std::mt19937_64& rng) {
  const int k = 2 + static_cast<int>(rng() % 7);
  const int v = 5 + static_cast<int>(rng() % 10);
  const int d = 1 + static_cast<int>(rng() % 25);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // Rows are strictly positive as smoothed estimates are; theta may also hold
  // exact basis rows. Some rows copy earlier ones to force ties.
  auto fill_rows = [&](ProbMatrix& m, bool basis_rows) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      if (r > 0 && rng() % 4 == 0) {
        m.row(r) = m.row(static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(r)));
      } else if (basis_rows && rng() % 6 == 0) {
        m.row(r).setZero();
        m(r, static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(m.cols()))) = 1.0;
      } else {
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = 0.01 + u(rng);
        m.row(r) /= m.row(r).sum();
      }
    }
  };
  ProbMatrix phi(k, v);
  ProbMatrix theta(d, k);
  fill_rows(phi, false);
  fill_rows(theta, true);
  LdaModel m = model_from(phi, theta);
  // Shuffle doc ids so row order and id order disagree.
  std::shuffle(m.doc_ids.begin(), m.doc_ids.end(), rng);
  return m;
}

std::vector<std::string> random_query_words(std::mt19937_64& rng, const LdaModel& model) {
  std::vector<std::string> words;
  const int n = 1 + static_cast<int>(rng() % 4);
  for (int i = 0; i < n; ++i) words.push_back(model.words[rng() % model.words.size()]);
  if (rng() % 3 == 0) words.push_back("zz-not-in-vocab");
  return words;
}

std::vector<int> random_topics(std::mt19937_64& rng, const LdaModel& model) {
  std::vector<int> all(static_cast<std::size_t>(model.k()));
  for (int t = 0; t < model.k(); ++t) all[static_cast<std::size_t>(t)] = t;
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(1 + rng() % std::min<std::size_t>(3, all.size()));
  return all;
}

namespace {
const std::vector<std::string> kLetters = {"Q", "QL", "QH", "QP", "B", "BF", "BJ", "H", "HM", "TF"};
}

Basemap random_basemap(std::mt19937_64& rng) {
  Basemap m;
  m.name = "random";
  m.disciplines = {{1, "one"}, {2, "two"}};
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  const int subs = 1 + static_cast<int>(rng() % 6);
  for (int s = 0; s < subs; ++s) m.subdisciplines.push_back({10 + s, "sub", 1 + s % 2, coord(rng), coord(rng)});
  const int journals = 1 + static_cast<int>(rng() % 12);
  for (int j = 0; j < journals; ++j) {
    const auto& letters = kLetters[rng() % kLetters.size()];
    const std::string cn = rng() % 10 == 0 ? "n/a" : letters + std::to_string(1 + rng() % 900);
    m.journals.push_back({"J" + std::to_string(j), cn, 10 + static_cast<int>(rng() % static_cast<std::uint64_t>(subs))});
  }
  // build_crosswalk rejects a basemap without any parseable journal.
  m.journals.push_back({"anchor", kLetters[rng() % kLetters.size()] + "1", 10});
  return m;
}

std::vector<std::string> random_call_numbers(std::mt19937_64& rng) {
  std::vector<std::string> out;
  for (int i = 0; i < 6; ++i) {
    switch (rng() % 6) {
      case 0: out.push_back(std::to_string(rng() % 9999)); break;
      case 1: out.push_back("PZ" + std::to_string(rng() % 99)); break;
      default: out.push_back(kLetters[rng() % kLetters.size()] + std::to_string(rng() % 999) + " .X1 1900");
    }
  }
  return out;
}

std::string compare(const std::vector<TopicScore>& got, const std::vector<TopicScore>& want) {
  std::ostringstream os;
  if (got.size() != want.size()) {
    os << "size " << got.size() << " vs " << want.size();
    return os.str();
  }
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (got[i].topic != want[i].topic || std::abs(got[i].score - want[i].score) > 1e-12) {
      os << "rank " << i << ": topic " << got[i].topic << " (" << got[i].score << ") vs " << want[i].topic << " ("
         << want[i].score << ")";
      return os.str();
    }
  }
  return "";
}

std::string compare(const std::vector<DocDistance>& got, const std::vector<DocDistance>& want) {
  std::ostringstream os;
  if (got.size() != want.size()) {
    os << "size " << got.size() << " vs " << want.size();
    return os.str();
  }
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (got[i].doc_id != want[i].doc_id || std::abs(got[i].distance - want[i].distance) > 1e-12) {
      os << "rank " << i << ": " << got[i].doc_id << " (" << got[i].distance << ") vs " << want[i].doc_id << " ("
         << want[i].distance << ")";
      return os.str();
    }
  }
  return "";
}

std::string compare(const BookPlacement& got, const BookPlacement& want) {
  std::ostringstream os;
  if (got.status != want.status) return "status differs for " + got.volume_id;
  if (got.posterior.size() != want.posterior.size()) return "posterior support differs for " + got.volume_id;
  for (const auto& [sub, w] : want.posterior) {
    auto it = got.posterior.find(sub);
    if (it == got.posterior.end() || std::abs(it->second - w) > 1e-12) {
      os << got.volume_id << ": weight of sub " << sub << " differs";
      return os.str();
    }
  }
  if (std::abs(got.x - want.x) > 1e-9 || std::abs(got.y - want.y) > 1e-9) return "position differs for " + got.volume_id;
  return "";
}

}  // namespace fixtures
