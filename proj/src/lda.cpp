#include "drilldown/lda.hpp"

#include "drilldown/error.hpp"

#include <algorithm>
#include <cmath>

namespace drilldown {

void LdaParams::validate() const {
  if (k < 1) throw Error(ErrorCode::InvalidParams, "k must be >= 1");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw Error(ErrorCode::InvalidParams, "alpha must be > 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw Error(ErrorCode::InvalidParams, "beta must be > 0");
  if (iterations < 1) throw Error(ErrorCode::InvalidParams, "iterations must be >= 1");
  if (average_last < 1 || average_last > iterations) {
    throw Error(ErrorCode::InvalidParams, "average_last must be in [1, iterations]");
  }
}

std::optional<Eigen::Index> LdaModel::doc_index(std::string_view doc_id) const {
  for (std::size_t i = 0; i < doc_ids.size(); ++i) {
    if (doc_ids[i] == doc_id) return static_cast<Eigen::Index>(i);
  }
  return std::nullopt;
}

std::optional<Eigen::Index> LdaModel::word_index(std::string_view word) const {
  // Vocabulary ids are in lexicographic order.
  auto it = std::lower_bound(words.begin(), words.end(), word);
  if (it == words.end() || *it != word) return std::nullopt;
  return static_cast<Eigen::Index>(it - words.begin());
}

// -- GibbsSampler -------------------------------------------------------------

GibbsSampler::GibbsSampler(const Corpus& corpus, const LdaParams& params)
    : corpus_(corpus), params_(params), rng_(params.seed) {
  params_.validate();
  if (corpus.documents.empty() || corpus.vocabulary.empty()) {
    throw Error(ErrorCode::EmptyCorpus, "cannot train on an empty corpus");
  }
  const auto k = params_.k;
  const auto vocab = static_cast<Eigen::Index>(corpus.vocabulary.size());
  const auto docs = static_cast<Eigen::Index>(corpus.documents.size());

  n_dt_ = DocTopicCounts::Zero(docs, k);
  n_tw_ = TopicWordCounts::Zero(k, vocab);
  n_t_ = TopicCounts::Zero(k);
  cumulative_.assign(static_cast<std::size_t>(k), 0.0);
  z_.resize(corpus.documents.size());

  for (Eigen::Index d = 0; d < docs; ++d) {
    const auto& tokens = corpus.documents[static_cast<std::size_t>(d)].tokens;
    if (tokens.empty()) {
      throw Error(ErrorCode::EmptyCorpus,
                  "document " + corpus.documents[static_cast<std::size_t>(d)].doc_id + " is empty");
    }
    auto& zd = z_[static_cast<std::size_t>(d)];
    zd.resize(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const auto w = tokens[i];
      if (w < 0 || w >= vocab) throw Error(ErrorCode::EmptyCorpus, "token id outside vocabulary");
      const auto t = static_cast<std::int32_t>(rng_.next() % static_cast<std::uint64_t>(k));
      zd[i] = t;
      ++n_dt_(d, t);
      ++n_tw_(t, w);
      ++n_t_(t);
    }
  }
}

void GibbsSampler::sweep() {
  const int k = params_.k;
  const double alpha = params_.alpha;
  const double beta = params_.beta;
  const double vbeta = static_cast<double>(n_tw_.cols()) * beta;

  for (std::size_t di = 0; di < corpus_.documents.size(); ++di) {
    const auto d = static_cast<Eigen::Index>(di);
    const auto& tokens = corpus_.documents[di].tokens;
    auto& zd = z_[di];
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const WordId w = tokens[i];
      std::int32_t t = zd[i];
      --n_dt_(d, t);
      --n_tw_(t, w);
      --n_t_(t);

      double total = 0.0;
      for (int s = 0; s < k; ++s) {
        total += (n_dt_(d, s) + alpha) * (n_tw_(s, w) + beta) / (static_cast<double>(n_t_(s)) + vbeta);
        cumulative_[static_cast<std::size_t>(s)] = total;
      }
      const double u = rng_.uniform() * total;
      t = k - 1;
      for (int s = 0; s < k; ++s) {
        if (u < cumulative_[static_cast<std::size_t>(s)]) {
          t = s;
          break;
        }
      }

      zd[i] = t;
      ++n_dt_(d, t);
      ++n_tw_(t, w);
      ++n_t_(t);
    }
  }
  ++sweeps_;
}

ProbMatrix GibbsSampler::phi() const {
  const double vbeta = static_cast<double>(n_tw_.cols()) * params_.beta;
  ProbMatrix phi(n_tw_.rows(), n_tw_.cols());
  for (Eigen::Index t = 0; t < phi.rows(); ++t) {
    const double denom = static_cast<double>(n_t_(t)) + vbeta;
    for (Eigen::Index w = 0; w < phi.cols(); ++w) phi(t, w) = (n_tw_(t, w) + params_.beta) / denom;
  }
  return phi;
}

ProbMatrix GibbsSampler::theta() const {
  const double kalpha = params_.k * params_.alpha;
  ProbMatrix theta(n_dt_.rows(), n_dt_.cols());
  for (Eigen::Index d = 0; d < theta.rows(); ++d) {
    const double denom = static_cast<double>(z_[static_cast<std::size_t>(d)].size()) + kalpha;
    for (Eigen::Index t = 0; t < theta.cols(); ++t) theta(d, t) = (n_dt_(d, t) + params_.alpha) / denom;
  }
  return theta;
}

LdaModel GibbsSampler::snapshot() const {
  LdaModel m;
  m.params = params_;
  m.corpus_id = corpus_.corpus_id;
  m.granularity = corpus_.granularity;
  m.vocabulary_hash = corpus_.vocabulary.hash();
  m.words = corpus_.vocabulary.words();
  m.doc_ids.reserve(corpus_.documents.size());
  for (const auto& d : corpus_.documents) m.doc_ids.push_back(d.doc_id);
  m.phi = phi();
  m.theta = theta();
  m.assignments = z_;
  m.n_dt = n_dt_;
  m.n_tw = n_tw_;
  m.n_t = n_t_;
  return m;
}

LdaModel train(const Corpus& corpus, const LdaParams& params, const SweepObserver& observer) {
  GibbsSampler sampler(corpus, params);
  const int first_averaged = params.iterations - params.average_last + 1;
  ProbMatrix phi_sum;
  ProbMatrix theta_sum;
  for (int sweep = 1; sweep <= params.iterations; ++sweep) {
    sampler.sweep();
    if (observer) observer(sampler);
    if (sweep >= first_averaged && params.average_last > 1) {
      if (phi_sum.size() == 0) {
        phi_sum = sampler.phi();
        theta_sum = sampler.theta();
      } else {
        phi_sum += sampler.phi();
        theta_sum += sampler.theta();
      }
    }
  }
  LdaModel model = sampler.snapshot();
  if (params.average_last > 1) {
    model.phi = phi_sum / static_cast<double>(params.average_last);
    model.theta = theta_sum / static_cast<double>(params.average_last);
  }
  return model;
}

void check_vocabulary(const LdaModel& model, const Corpus& corpus) {
  if (model.vocabulary_hash != corpus.vocabulary.hash()) {
    throw Error(ErrorCode::ModelCorpusMismatch,
                "model vocabulary does not match corpus " + corpus.corpus_id);
  }
}

double log_likelihood(const LdaModel& model, const Corpus& corpus) {
  check_vocabulary(model, corpus);
  if (model.doc_ids.size() != corpus.documents.size()) {
    throw Error(ErrorCode::ModelCorpusMismatch, "model and corpus document counts differ");
  }
  double ll = 0.0;
  for (std::size_t di = 0; di < corpus.documents.size(); ++di) {
    const auto& doc = corpus.documents[di];
    if (doc.doc_id != model.doc_ids[di]) {
      throw Error(ErrorCode::ModelCorpusMismatch, "document order differs at " + doc.doc_id);
    }
    const auto theta_d = model.theta.row(static_cast<Eigen::Index>(di));
    for (WordId w : doc.tokens) ll += std::log(theta_d.dot(model.phi.col(w)));
  }
  return ll;
}

Eigen::VectorXd fold_in(const LdaModel& model, std::span<const WordId> tokens, int sweeps,
                        std::uint64_t seed) {
  if (tokens.empty()) throw Error(ErrorCode::EmptyAfterFiltering, "no in-vocabulary tokens to fold in");
  if (sweeps < 1) throw Error(ErrorCode::InvalidParams, "fold-in sweeps must be >= 1");
  std::vector<WordId> sorted(tokens.begin(), tokens.end());
  std::sort(sorted.begin(), sorted.end());
  for (WordId w : sorted) {
    if (w < 0 || w >= model.vocab_size()) throw Error(ErrorCode::InvalidInput, "fold-in token outside vocabulary");
  }

  const int k = model.k();
  const double alpha = model.params.alpha;
  PortableRng rng(seed);
  std::vector<std::int32_t> z(sorted.size());
  Eigen::VectorXi counts = Eigen::VectorXi::Zero(k);
  for (auto& t : z) {
    t = static_cast<std::int32_t>(rng.next() % static_cast<std::uint64_t>(k));
    ++counts(t);
  }
  std::vector<double> cumulative(static_cast<std::size_t>(k));
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      const WordId w = sorted[i];
      --counts(z[i]);
      double total = 0.0;
      for (int s = 0; s < k; ++s) {
        total += (counts(s) + alpha) * model.phi(s, w);
        cumulative[static_cast<std::size_t>(s)] = total;
      }
      const double u = rng.uniform() * total;
      std::int32_t t = k - 1;
      for (int s = 0; s < k; ++s) {
        if (u < cumulative[static_cast<std::size_t>(s)]) {
          t = s;
          break;
        }
      }
      z[i] = t;
      ++counts(t);
    }
  }
  const double denom = static_cast<double>(sorted.size()) + k * alpha;
  return (counts.cast<double>().array() + alpha).matrix() / denom;
}

}  // namespace drilldown
