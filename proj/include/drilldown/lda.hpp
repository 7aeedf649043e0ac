#pragma once

// Latent Dirichlet allocation trained by collapsed Gibbs sampling.

#include "drilldown/textprep.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace drilldown {

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using ProbMatrix = RowMatrix<double>;
// Row d is contiguous: counts of topic t in document d.
using DocTopicCounts = RowMatrix<std::int32_t>;
// Column w is contiguous: counts of word w under each topic.
using TopicWordCounts = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic>;
using TopicCounts = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

struct LdaParams {
  int k = 60;
  double alpha = 0.1;
  double beta = 0.1;
  int iterations = 1000;
  std::uint64_t seed = 42;
  int average_last = 1;  // phi/theta averaged over this many final sweeps

  // Throws InvalidParams.
  void validate() const;

  friend bool operator==(const LdaParams&, const LdaParams&) = default;
};

struct LdaModel {
  LdaParams params;
  std::string corpus_id;
  Granularity granularity = Granularity::volume;
  std::string vocabulary_hash;
  std::vector<std::string> words;
  std::vector<std::string> doc_ids;

  ProbMatrix phi;    // k x V, phi(t, w) = P(w | t)
  ProbMatrix theta;  // D x k, theta(d, t) = P(t | d)

  std::vector<std::vector<std::int32_t>> assignments;
  DocTopicCounts n_dt;
  TopicWordCounts n_tw;
  TopicCounts n_t;

  int k() const noexcept { return static_cast<int>(phi.rows()); }
  Eigen::Index vocab_size() const noexcept { return phi.cols(); }
  Eigen::Index num_docs() const noexcept { return theta.rows(); }

  std::optional<Eigen::Index> doc_index(std::string_view doc_id) const;
  std::optional<Eigen::Index> word_index(std::string_view word) const;
};

// Portable uniform draws from mt19937_64 (whose output is fixed by the standard).
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Collapsed Gibbs sampler over a fixed corpus.
///
/// Documents are visited in corpus order and tokens in position order. For
/// each token the current assignment is removed from the counts, a topic is
/// drawn from (n_dt + alpha) (n_tw + beta) / (n_t + V beta), and the counts
/// are restored. The sampler keeps a reference to the corpus.
class GibbsSampler {
 public:
  GibbsSampler(const Corpus& corpus, const LdaParams& params);

  void sweep();
  int sweeps_done() const noexcept { return sweeps_; }

  const LdaParams& params() const noexcept { return params_; }
  const Corpus& corpus() const noexcept { return corpus_; }
  const std::vector<std::vector<std::int32_t>>& assignments() const noexcept { return z_; }
  const DocTopicCounts& n_dt() const noexcept { return n_dt_; }
  const TopicWordCounts& n_tw() const noexcept { return n_tw_; }
  const TopicCounts& n_t() const noexcept { return n_t_; }

  ProbMatrix phi() const;
  ProbMatrix theta() const;

  // Model built from the current counts (phi/theta from this sweep only).
  LdaModel snapshot() const;

 private:
  const Corpus& corpus_;
  LdaParams params_;
  PortableRng rng_;
  int sweeps_ = 0;
  std::vector<std::vector<std::int32_t>> z_;
  DocTopicCounts n_dt_;
  TopicWordCounts n_tw_;
  TopicCounts n_t_;
  std::vector<double> cumulative_;
};

using SweepObserver = std::function<void(const GibbsSampler&)>;

// Runs params.iterations sweeps; `observer` is called after every sweep.
// Throws EmptyCorpus / InvalidParams.
LdaModel train(const Corpus& corpus, const LdaParams& params, const SweepObserver& observer = {});

// sum_d sum_i log sum_t theta(d,t) phi(t,w_i). Throws ModelCorpusMismatch.
double log_likelihood(const LdaModel& model, const Corpus& corpus);

// Topic vector for unseen tokens, sampling with phi held fixed. Tokens are
// sorted first so equal multisets give equal vectors for a given seed.
Eigen::VectorXd fold_in(const LdaModel& model, std::span<const WordId> tokens, int sweeps,
                        std::uint64_t seed);

// Throws ModelCorpusMismatch unless the model was trained on this vocabulary.
void check_vocabulary(const LdaModel& model, const Corpus& corpus);

// -- model file ----------------------------------------------------------

inline constexpr std::uint32_t kModelFormatVersion = 1;

std::string save_model(const LdaModel& model);
// Throws CorruptModel / UnsupportedVersion.
LdaModel load_model(std::string_view bytes);

// "m-" + first 16 hex chars of SHA-256(save_model(model)).
std::string model_id(const LdaModel& model);

}  // namespace drilldown
