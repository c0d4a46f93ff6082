// A built distributional model: vocabulary, raw counts for one window, and
// lazily derived weightings. Includes the binary container and text dumps.
//
// Container layout (all integers little-endian):
//
//   magic        8 bytes  "APSYNDSM"
//   version      u32      1
//   vocabulary   u64 min_freq, u8 pos_filter bits, u64 n,
//                n x (u32 len, lemma bytes, u8 pos, u64 frequency)
//   counts       u32 K, u64 nnz, (n+1) x u64 row_ptr, nnz x u32 column,
//                nnz x u64 count
//   marginals    n x u64 row, n x u64 column
//   D            u64
//   fingerprint  u64 vocabulary fingerprint
//   weighting    u8 scheme (0 none, 1 ppmi, 2 lmi); when nonzero:
//                u64 nnz, (n+1) x u64 row_ptr, nnz x u32 column,
//                nnz x f64 weight, u64 source matrix fingerprint
//   checksum     u64 FNV-1a of every preceding byte

#pragma once

#include <sys/file.h>
#include <fcntl.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

#include "apsyn/cooccurrence.hpp"
#include "apsyn/measures.hpp"
#include "apsyn/serialize.hpp"
#include "apsyn/vocabulary.hpp"
#include "apsyn/weighting.hpp"

namespace apsyn {

struct MeasureParams {
  std::uint32_t top_n = 100;          // APSyn cutoff N
  Scheme ranking = Scheme::kPpmi;     // weighting used to rank APSyn contexts
};

class Model {
 public:
  static constexpr char kMagic[8] = {'A', 'P', 'S', 'Y', 'N', 'D', 'S', 'M'};
  static constexpr std::uint32_t kVersion = 1;

  Model() : Model(Vocabulary{}, CooccurrenceMatrix{}) {}

  Model(Vocabulary vocab, CooccurrenceMatrix counts,
        std::optional<Scheme> persisted = Scheme::kPpmi)
      : vocab_(std::move(vocab)),
        counts_(std::move(counts)),
        persisted_(persisted),
        cache_(std::make_unique<Cache>()) {
    if (counts_.dimension() != vocab_.size()) {
      throw FormatError("matrix dimension does not match vocabulary size");
    }
    if (counts_.vocab_fingerprint() != vocab_.fingerprint() && vocab_.size() > 0) {
      throw FormatError("matrix is bound to a different vocabulary");
    }
  }

  const Vocabulary& vocabulary() const { return vocab_; }
  const CooccurrenceMatrix& counts() const { return counts_; }
  std::uint32_t window() const { return counts_.window(); }
  std::optional<Scheme> persisted_scheme() const { return persisted_; }

  // Computed on first use; thread safe.
  const WeightedMatrix& weights(Scheme s) const {
    const auto i = slot(s);
    std::call_once(cache_->weight_once[i], [&] {
      if (!cache_->weighted[i]) cache_->weighted[i] = std::make_unique<WeightedMatrix>(weigh(counts_, s));
    });
    return *cache_->weighted[i];
  }

  const RankedListIndex& ranked(Scheme s, std::uint32_t n) const {
    const WeightedMatrix& w = weights(s);
    std::lock_guard lock(cache_->ranked_mutex);
    auto& slot_ptr = cache_->ranked[{s, n}];
    if (!slot_ptr) slot_ptr = std::make_unique<RankedListIndex>(w, n);
    return *slot_ptr;
  }

  WordId id(const WordKey& key) const { return vocab_.id(key); }

  SimilarityScore similarity(Measure m, WordId a, WordId b, const MeasureParams& p = {}) const {
    switch (m) {
      case Measure::kApsyn: {
        const auto& idx = ranked(p.ranking, p.top_n);
        return apsyn(idx.get(a), idx.get(b));
      }
      case Measure::kCooc: return cooccurrence_score(counts_, a, b);
      default: {
        const auto& w = weights(Scheme::kPpmi);
        return row_measure(m, w.row(a), w.row(b));
      }
    }
  }

  SimilarityScore similarity(Measure m, const WordKey& a, const WordKey& b,
                             const MeasureParams& p = {}) const {
    return similarity(m, id(a), id(b), p);
  }

  // ---- persistence ----

  std::string serialize() const {
    ByteWriter w;
    w.bytes(kMagic, sizeof kMagic);
    w.u32(kVersion);
    w.u64(vocab_.min_freq());
    w.u8(vocab_.pos_filter().bits());
    w.u64(vocab_.size());
    for (const auto& e : vocab_.entries()) {
      w.str(e.key.lemma);
      w.u8(static_cast<std::uint8_t>(e.key.pos));
      w.u64(e.frequency);
    }
    w.u32(counts_.window());
    w.u64(counts_.nnz());
    w.u64s(counts_.row_ptr());
    w.u32s(counts_.cols());
    w.u64s(counts_.counts());
    w.u64s(counts_.row_marginals());
    w.u64s(counts_.col_marginals());
    w.u64(counts_.total());
    w.u64(counts_.vocab_fingerprint());
    if (persisted_ && counts_.total() > 0) {
      const WeightedMatrix& wm = weights(*persisted_);
      w.u8(static_cast<std::uint8_t>(*persisted_));
      w.u64(wm.nnz());
      w.u64s(wm.row_ptr());
      w.u32s(wm.cols());
      for (double x : wm.weights()) w.f64(x);
      w.u64(wm.source_fingerprint());
    } else {
      w.u8(0);
    }
    Fingerprint fp;
    fp.add_bytes(w.data().data(), w.data().size());
    w.u64(fp.value());
    return w.data();
  }

  static Model deserialize(const std::string& buf) {
    if (buf.size() < sizeof kMagic + 12 || buf.compare(0, sizeof kMagic, kMagic, sizeof kMagic) != 0) {
      throw FormatError("not an apsyn model container (bad magic)");
    }
    {
      Fingerprint fp;
      fp.add_bytes(buf.data(), buf.size() - 8);
      ByteReader tail(buf);
      tail.raw(buf.size() - 8);
      if (tail.u64() != fp.value()) throw FormatError("model container checksum mismatch");
    }
    ByteReader r(buf);
    r.raw(sizeof kMagic);
    if (const auto v = r.u32(); v != kVersion) {
      throw FormatError("unsupported model container version " + std::to_string(v));
    }
    const auto min_freq = r.u64();
    const auto filter = PosSet::from_bits(r.u8());
    const auto n = r.u64();
    std::vector<VocabEntry> entries;
    for (std::uint64_t i = 0; i < n; ++i) {
      VocabEntry e;
      e.key.lemma = r.str();
      const auto pos = r.u8();
      if (pos > 3) throw FormatError("bad POS code in vocabulary block");
      e.key.pos = static_cast<Pos>(pos);
      e.frequency = r.u64();
      entries.push_back(std::move(e));
    }
    const auto stored_order = entries;
    Vocabulary vocab(std::move(entries), min_freq, filter);
    for (std::size_t i = 0; i < stored_order.size(); ++i) {
      if (!(vocab.key(static_cast<WordId>(i)) == stored_order[i].key)) {
        throw FormatError("vocabulary block is not in canonical id order");
      }
    }

    const auto window = r.u32();
    const auto nnz = r.u64();
    auto row_ptr = r.u64s(n + 1);
    auto cols32 = r.u32s(nnz);
    auto counts = r.u64s(nnz);
    const auto row_marg = r.u64s(n);
    const auto col_marg = r.u64s(n);
    const auto total = r.u64();
    const auto vocab_fp = r.u64();
    if (vocab_fp != vocab.fingerprint()) throw FormatError("vocabulary fingerprint mismatch");
    auto matrix = CooccurrenceMatrix::from_csr(n, std::move(row_ptr),
                                               std::vector<WordId>(cols32.begin(), cols32.end()),
                                               std::move(counts), window, vocab_fp);
    if (matrix.row_marginals() != row_marg || matrix.col_marginals() != col_marg ||
        matrix.total() != total) {
      throw FormatError("stored marginals or D disagree with the count block");
    }

    const auto scheme_code = r.u8();
    std::optional<Scheme> persisted;
    std::unique_ptr<WeightedMatrix> weighted;
    if (scheme_code != 0) {
      if (scheme_code != 1 && scheme_code != 2) throw FormatError("unknown weighting scheme code");
      persisted = static_cast<Scheme>(scheme_code);
      const auto wnnz = r.u64();
      auto wptr = r.u64s(n + 1);
      auto wcols = r.u32s(wnnz);
      std::vector<double> wvals(wnnz);
      for (auto& x : wvals) x = r.f64();
      const auto src = r.u64();
      if (src != matrix.fingerprint()) throw FormatError("weighting block bound to a different matrix");
      weighted = std::make_unique<WeightedMatrix>(*persisted, n, std::move(wptr),
                                                  std::vector<WordId>(wcols.begin(), wcols.end()),
                                                  std::move(wvals), src);
    }
    r.u64();  // checksum, verified above
    if (r.remaining() != 0) throw FormatError("trailing bytes after model container");

    Model m(std::move(vocab), std::move(matrix), persisted);
    if (weighted) m.cache_->weighted[slot(*persisted)] = std::move(weighted);
    return m;
  }

  // Writes atomically (temp file + rename) under an advisory lock on
  // "<path>.lock".
  void save(const std::string& path) const {
    const std::string data = serialize();
    const std::string lock_path = path + ".lock";
    const int lock_fd = ::open(lock_path.c_str(), O_CREAT | O_RDWR, 0644);
    if (lock_fd < 0) throw Error(ErrorKind::kData, "cannot create lock file " + lock_path);
    ::flock(lock_fd, LOCK_EX);
    const std::string tmp = path + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out.write(data.data(), static_cast<std::streamsize>(data.size()));
      if (!out) {
        ::flock(lock_fd, LOCK_UN);
        ::close(lock_fd);
        throw Error(ErrorKind::kData, "cannot write model file " + tmp);
      }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    ::flock(lock_fd, LOCK_UN);
    ::close(lock_fd);
    std::filesystem::remove(lock_path, ec);
    if (ec) throw Error(ErrorKind::kData, "cannot move model into place: " + path);
  }

  static Model load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::kData, "cannot open model file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize(ss.str());
  }

  // "target<TAB>context<TAB>count", preceded by D and K header lines.
  void dump_counts(std::ostream& out) const {
    out << "# D=" << counts_.total() << "\n# K=" << counts_.window() << "\n";
    for (const auto& c : counts_.cells()) {
      out << vocab_.key(c.target).str() << '\t' << vocab_.key(c.context).str() << '\t' << c.count
          << '\n';
    }
  }

  // "target<TAB>context<TAB>weight" with six decimals.
  void dump_weights(std::ostream& out, Scheme s) const {
    const WeightedMatrix& wm = weights(s);
    out << "# scheme=" << scheme_name(s) << "\n";
    char buf[64];
    for (WordId w = 0; w < wm.dimension(); ++w) {
      const auto row = wm.row(w);
      for (std::size_t k = 0; k < row.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.6f", row.weights[k]);
        out << vocab_.key(w).str() << '\t' << vocab_.key(row.ids[k]).str() << '\t' << buf << '\n';
      }
    }
  }

 private:
  struct Cache {
    std::array<std::once_flag, 2> weight_once;
    std::array<std::unique_ptr<WeightedMatrix>, 2> weighted;
    std::mutex ranked_mutex;
    std::map<std::pair<Scheme, std::uint32_t>, std::unique_ptr<RankedListIndex>> ranked;
  };

  static std::size_t slot(Scheme s) { return s == Scheme::kPpmi ? 0 : 1; }

  Vocabulary vocab_;
  CooccurrenceMatrix counts_;
  std::optional<Scheme> persisted_;
  std::unique_ptr<Cache> cache_;
};

// Reads the corpus twice: once for the vocabulary, once for counting. The
// opener must return a fresh stream positioned at the start each call.
struct BuildOptions {
  std::uint64_t min_freq = 1000;
  PosSet pos_filter = PosSet::content_words();
  Scheme scheme = Scheme::kPpmi;
};

template <typename OpenFn>
std::vector<Model> build_models(OpenFn&& open, const TagsetMap& tags,
                                const std::vector<std::uint32_t>& windows,
                                const BuildOptions& opts, ReaderStats* stats = nullptr) {
  VocabularyBuilder vb(opts.min_freq, opts.pos_filter);
  {
    auto in = open();
    CorpusReader reader(*in, tags);
    Sentence s;
    while (reader.next(s)) vb.add(s);
    if (stats) *stats = reader.stats();
  }
  Vocabulary vocab = vb.build();
  std::vector<CooccurrenceCounter> counters;
  for (auto k : windows) counters.emplace_back(vocab, k);
  {
    auto in = open();
    CorpusReader reader(*in, tags);
    Sentence s;
    while (reader.next(s)) {
      for (auto& c : counters) c.add(s);
    }
  }
  std::vector<Model> models;
  for (const auto& c : counters) models.emplace_back(vocab, c.finalize(), opts.scheme);
  return models;
}

}  // namespace apsyn
