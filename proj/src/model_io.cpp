// Model file layout (all integers little-endian, doubles as IEEE-754 bits):
//
//   magic        4 bytes  "LDAM"
//   version      u32
//   k            u32
//   alpha, beta  f64, f64
//   iterations   u32
//   seed         u64
//   average_last u32
//   granularity  u8      0 volume, 1 page, 2 sentence
//   corpus_id    str     (u32 length + bytes)
//   vocab_hash   str
//   V            u32, then V x str words
//   D            u32, then D x str doc ids
//   phi          k*V f64, row-major
//   theta        D*k f64, row-major
//   assignments  D x (u32 length + length x u32 topic)
//   n_tw         k*V u32, row-major
//
// n_dt and n_t are rebuilt from the assignments on load and checked
// against n_tw.

#include "drilldown/error.hpp"
#include "drilldown/hash.hpp"
#include "drilldown/lda.hpp"

#include <bit>
#include <cstring>

namespace drilldown {

namespace {

constexpr char kMagic[4] = {'L', 'D', 'A', 'M'};

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.append(s);
  }
  void raw(std::string_view s) { out_.append(s); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(in_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(in_[pos_++])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(in_[pos_++])) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const auto n = u32();
    need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::string_view raw(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  // Guards allocations against absurd counts in damaged files.
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw Error(ErrorCode::CorruptModel, "model file truncated");
  }
  bool at_end() const { return pos_ == in_.size(); }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string save_model(const LdaModel& m) {
  Writer w;
  w.raw(std::string_view(kMagic, 4));
  w.u32(kModelFormatVersion);
  w.u32(static_cast<std::uint32_t>(m.params.k));
  w.f64(m.params.alpha);
  w.f64(m.params.beta);
  w.u32(static_cast<std::uint32_t>(m.params.iterations));
  w.u64(m.params.seed);
  w.u32(static_cast<std::uint32_t>(m.params.average_last));
  w.u8(static_cast<std::uint8_t>(m.granularity));
  w.str(m.corpus_id);
  w.str(m.vocabulary_hash);
  w.u32(static_cast<std::uint32_t>(m.words.size()));
  for (const auto& word : m.words) w.str(word);
  w.u32(static_cast<std::uint32_t>(m.doc_ids.size()));
  for (const auto& id : m.doc_ids) w.str(id);
  for (Eigen::Index t = 0; t < m.phi.rows(); ++t) {
    for (Eigen::Index v = 0; v < m.phi.cols(); ++v) w.f64(m.phi(t, v));
  }
  for (Eigen::Index d = 0; d < m.theta.rows(); ++d) {
    for (Eigen::Index t = 0; t < m.theta.cols(); ++t) w.f64(m.theta(d, t));
  }
  for (const auto& zd : m.assignments) {
    w.u32(static_cast<std::uint32_t>(zd.size()));
    for (auto t : zd) w.u32(static_cast<std::uint32_t>(t));
  }
  for (Eigen::Index t = 0; t < m.n_tw.rows(); ++t) {
    for (Eigen::Index v = 0; v < m.n_tw.cols(); ++v) w.u32(static_cast<std::uint32_t>(m.n_tw(t, v)));
  }
  return w.take();
}

LdaModel load_model(std::string_view bytes) {
  Reader r(bytes);
  if (r.raw(4) != std::string_view(kMagic, 4)) throw Error(ErrorCode::CorruptModel, "bad model magic");
  const auto version = r.u32();
  if (version != kModelFormatVersion) {
    throw Error(ErrorCode::UnsupportedVersion, "model format version " + std::to_string(version));
  }

  LdaModel m;
  m.params.k = static_cast<int>(r.u32());
  m.params.alpha = r.f64();
  m.params.beta = r.f64();
  m.params.iterations = static_cast<int>(r.u32());
  m.params.seed = r.u64();
  m.params.average_last = static_cast<int>(r.u32());
  try {
    m.params.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::CorruptModel, std::string("bad model params: ") + e.what());
  }
  const auto g = r.u8();
  if (g > 2) throw Error(ErrorCode::CorruptModel, "bad granularity tag");
  m.granularity = static_cast<Granularity>(g);
  m.corpus_id = r.str();
  m.vocabulary_hash = r.str();

  const auto vocab = r.u32();
  r.need(static_cast<std::size_t>(vocab) * 4);
  m.words.reserve(vocab);
  for (std::uint32_t i = 0; i < vocab; ++i) m.words.push_back(r.str());
  const auto docs = r.u32();
  r.need(static_cast<std::size_t>(docs) * 4);
  m.doc_ids.reserve(docs);
  for (std::uint32_t i = 0; i < docs; ++i) m.doc_ids.push_back(r.str());

  const auto k = static_cast<Eigen::Index>(m.params.k);
  r.need(static_cast<std::size_t>(k) * vocab * 8);
  m.phi.resize(k, vocab);
  for (Eigen::Index t = 0; t < k; ++t) {
    for (Eigen::Index v = 0; v < static_cast<Eigen::Index>(vocab); ++v) m.phi(t, v) = r.f64();
  }
  r.need(static_cast<std::size_t>(k) * docs * 8);
  m.theta.resize(docs, k);
  for (Eigen::Index d = 0; d < static_cast<Eigen::Index>(docs); ++d) {
    for (Eigen::Index t = 0; t < k; ++t) m.theta(d, t) = r.f64();
  }

  m.n_dt = DocTopicCounts::Zero(docs, k);
  m.n_t = TopicCounts::Zero(k);
  m.assignments.resize(docs);
  for (std::uint32_t d = 0; d < docs; ++d) {
    const auto len = r.u32();
    r.need(static_cast<std::size_t>(len) * 4);
    auto& zd = m.assignments[d];
    zd.resize(len);
    for (auto& t : zd) {
      const auto topic = r.u32();
      if (topic >= static_cast<std::uint32_t>(k)) throw Error(ErrorCode::CorruptModel, "topic id out of range");
      t = static_cast<std::int32_t>(topic);
      ++m.n_dt(d, t);
      ++m.n_t(t);
    }
  }

  r.need(static_cast<std::size_t>(k) * vocab * 4);
  m.n_tw.resize(k, vocab);
  for (Eigen::Index t = 0; t < k; ++t) {
    std::int64_t row = 0;
    for (Eigen::Index v = 0; v < static_cast<Eigen::Index>(vocab); ++v) {
      m.n_tw(t, v) = static_cast<std::int32_t>(r.u32());
      row += m.n_tw(t, v);
    }
    if (row != m.n_t(t)) throw Error(ErrorCode::CorruptModel, "topic-word counts inconsistent with assignments");
  }
  if (!r.at_end()) throw Error(ErrorCode::CorruptModel, "trailing bytes after model");
  return m;
}

std::string model_id(const LdaModel& model) { return "m-" + sha256_hex(save_model(model)).substr(0, 16); }

}  // namespace drilldown
