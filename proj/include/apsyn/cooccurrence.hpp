// Window-based co-occurrence counting into a sparse CSR matrix.
//
// Distances are measured in the filtered stream of in-vocabulary words of
// one sentence; out-of-vocabulary tokens are transparent and windows never
// cross a sentence boundary. Pairs of identical words are not counted, so
// the diagonal is always empty.

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "apsyn/corpus.hpp"
#include "apsyn/error.hpp"
#include "apsyn/vocabulary.hpp"

namespace apsyn {

using Count = std::uint64_t;

struct CountCell {
  WordId target;
  WordId context;
  Count count;

  friend bool operator==(const CountCell&, const CountCell&) = default;
};

// Immutable once built. Rows are targets, columns contexts; both index the
// same vocabulary.
class CooccurrenceMatrix {
 public:
  CooccurrenceMatrix() = default;

  // Cells may come in any order; duplicates are summed and zero counts dropped.
  static CooccurrenceMatrix from_cells(std::size_t dimension, std::vector<CountCell> cells,
                                       std::uint32_t window, std::uint64_t vocab_fingerprint) {
    std::sort(cells.begin(), cells.end(), [](const CountCell& a, const CountCell& b) {
      return std::tie(a.target, a.context) < std::tie(b.target, b.context);
    });
    CooccurrenceMatrix m;
    m.dimension_ = dimension;
    m.window_ = window;
    m.vocab_fingerprint_ = vocab_fingerprint;
    m.row_ptr_.assign(dimension + 1, 0);
    m.row_marginals_.assign(dimension, 0);
    m.col_marginals_.assign(dimension, 0);
    for (std::size_t i = 0; i < cells.size();) {
      const auto& c = cells[i];
      if (c.target >= dimension || c.context >= dimension) {
        throw FormatError("cell index out of range");
      }
      Count sum = 0;
      std::size_t j = i;
      while (j < cells.size() && cells[j].target == c.target && cells[j].context == c.context) {
        sum += cells[j].count;
        ++j;
      }
      if (sum > 0) {
        m.cols_.push_back(c.context);
        m.counts_.push_back(sum);
        ++m.row_ptr_[c.target + 1];
        m.row_marginals_[c.target] += sum;
        m.col_marginals_[c.context] += sum;
        m.total_ += sum;
      }
      i = j;
    }
    std::partial_sum(m.row_ptr_.begin(), m.row_ptr_.end(), m.row_ptr_.begin());
    return m;
  }

  // Raw CSR constructor used by deserialisation; checks every invariant.
  static CooccurrenceMatrix from_csr(std::size_t dimension, std::vector<std::uint64_t> row_ptr,
                                     std::vector<WordId> cols, std::vector<Count> counts,
                                     std::uint32_t window, std::uint64_t vocab_fingerprint) {
    CooccurrenceMatrix m;
    m.dimension_ = dimension;
    m.window_ = window;
    m.vocab_fingerprint_ = vocab_fingerprint;
    m.row_ptr_ = std::move(row_ptr);
    m.cols_ = std::move(cols);
    m.counts_ = std::move(counts);
    if (m.row_ptr_.size() != dimension + 1 || m.row_ptr_.front() != 0 ||
        m.row_ptr_.back() != m.cols_.size() || m.cols_.size() != m.counts_.size()) {
      throw FormatError("inconsistent CSR count block");
    }
    m.row_marginals_.assign(dimension, 0);
    m.col_marginals_.assign(dimension, 0);
    for (std::size_t r = 0; r < dimension; ++r) {
      if (m.row_ptr_[r] > m.row_ptr_[r + 1]) throw FormatError("row pointers not monotone");
      for (auto k = m.row_ptr_[r]; k < m.row_ptr_[r + 1]; ++k) {
        if (m.cols_[k] >= dimension) throw FormatError("column index out of range");
        if (k > m.row_ptr_[r] && m.cols_[k] <= m.cols_[k - 1]) {
          throw FormatError("columns not strictly ascending within a row");
        }
        if (m.counts_[k] == 0) throw FormatError("explicit zero count");
        m.row_marginals_[r] += m.counts_[k];
        m.col_marginals_[m.cols_[k]] += m.counts_[k];
        m.total_ += m.counts_[k];
      }
    }
    return m;
  }

  std::size_t dimension() const { return dimension_; }
  std::size_t nnz() const { return cols_.size(); }
  Count total() const { return total_; }
  std::uint32_t window() const { return window_; }
  std::uint64_t vocab_fingerprint() const { return vocab_fingerprint_; }

  Count row_marginal(WordId w) const { return row_marginals_.at(w); }
  Count col_marginal(WordId c) const { return col_marginals_.at(c); }
  const std::vector<Count>& row_marginals() const { return row_marginals_; }
  const std::vector<Count>& col_marginals() const { return col_marginals_; }

  std::span<const WordId> row_contexts(WordId w) const {
    check(w);
    return {cols_.data() + row_ptr_[w], cols_.data() + row_ptr_[w + 1]};
  }
  std::span<const Count> row_counts(WordId w) const {
    check(w);
    return {counts_.data() + row_ptr_[w], counts_.data() + row_ptr_[w + 1]};
  }

  Count count(WordId w, WordId c) const {
    const auto ctx = row_contexts(w);
    auto it = std::lower_bound(ctx.begin(), ctx.end(), c);
    if (it == ctx.end() || *it != c) return 0;
    return row_counts(w)[static_cast<std::size_t>(it - ctx.begin())];
  }

  std::vector<CountCell> cells() const {
    std::vector<CountCell> out;
    out.reserve(nnz());
    for (WordId r = 0; r < dimension_; ++r) {
      for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        out.push_back({r, cols_[k], counts_[k]});
      }
    }
    return out;
  }

  const std::vector<std::uint64_t>& row_ptr() const { return row_ptr_; }
  const std::vector<WordId>& cols() const { return cols_; }
  const std::vector<Count>& counts() const { return counts_; }

  // Checksum of the full content, binding derived weightings to it.
  std::uint64_t fingerprint() const {
    Fingerprint fp;
    fp.add(dimension_);
    fp.add(window_);
    fp.add(vocab_fingerprint_);
    for (auto v : row_ptr_) fp.add(v);
    for (auto v : cols_) fp.add(v);
    for (auto v : counts_) fp.add(v);
    return fp.value();
  }

  friend bool operator==(const CooccurrenceMatrix& a, const CooccurrenceMatrix& b) {
    return a.dimension_ == b.dimension_ && a.window_ == b.window_ &&
           a.vocab_fingerprint_ == b.vocab_fingerprint_ && a.row_ptr_ == b.row_ptr_ &&
           a.cols_ == b.cols_ && a.counts_ == b.counts_;
  }

 private:
  void check(WordId w) const {
    if (w >= dimension_) throw NotInModelError("#" + std::to_string(w));
  }

  std::size_t dimension_ = 0;
  std::vector<std::uint64_t> row_ptr_{0};
  std::vector<WordId> cols_;
  std::vector<Count> counts_;
  std::vector<Count> row_marginals_;
  std::vector<Count> col_marginals_;
  Count total_ = 0;
  std::uint32_t window_ = 0;
  std::uint64_t vocab_fingerprint_ = 0;
};

// Cell-wise sum of two partial matrices over the same vocabulary and window.
inline CooccurrenceMatrix merge(const CooccurrenceMatrix& a, const CooccurrenceMatrix& b) {
  if (a.vocab_fingerprint() != b.vocab_fingerprint() || a.dimension() != b.dimension()) {
    throw MergeError("cannot merge matrices built over different vocabularies");
  }
  if (a.window() != b.window()) {
    throw MergeError("cannot merge matrices with windows " + std::to_string(a.window()) +
                     " and " + std::to_string(b.window()));
  }
  auto cells = a.cells();
  auto more = b.cells();
  cells.insert(cells.end(), more.begin(), more.end());
  return CooccurrenceMatrix::from_cells(a.dimension(), std::move(cells), a.window(),
                                        a.vocab_fingerprint());
}

// Mutable accumulator; one per shard.
class CooccurrenceCounter {
 public:
  CooccurrenceCounter(const Vocabulary& vocab, std::uint32_t window)
      : vocab_(&vocab), window_(window), fingerprint_(vocab.fingerprint()) {
    if (window < 1) throw ParameterError("window must be >= 1");
  }

  void add(const Sentence& s) {
    stream_.clear();
    for (const auto& tok : s.tokens) {
      if (auto id = vocab_->find(tok.key())) stream_.push_back(*id);
    }
    add_reduced(stream_);
  }

  // `ids` is a sentence already reduced to in-vocabulary words.
  void add_reduced(std::span<const WordId> ids) {
    const std::size_t n = ids.size();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t end = std::min(n, i + 1 + window_);
      for (std::size_t j = i + 1; j < end; ++j) {
        if (ids[i] == ids[j]) continue;
        ++cells_[key(ids[i], ids[j])];
        ++cells_[key(ids[j], ids[i])];
      }
    }
  }

  void merge(const CooccurrenceCounter& other) {
    if (other.fingerprint_ != fingerprint_) {
      throw MergeError("cannot merge counters built over different vocabularies");
    }
    if (other.window_ != window_) throw MergeError("cannot merge counters with different windows");
    for (const auto& [k, v] : other.cells_) cells_[k] += v;
  }

  CooccurrenceMatrix finalize() const {
    std::vector<CountCell> cells;
    cells.reserve(cells_.size());
    for (const auto& [k, v] : cells_) {
      cells.push_back({static_cast<WordId>(k >> 32), static_cast<WordId>(k & 0xffffffffu), v});
    }
    return CooccurrenceMatrix::from_cells(vocab_->size(), std::move(cells), window_, fingerprint_);
  }

  std::uint32_t window() const { return window_; }

 private:
  static std::uint64_t key(WordId a, WordId b) {
    return (static_cast<std::uint64_t>(a) << 32) | b;
  }

  const Vocabulary* vocab_;
  std::uint32_t window_;
  std::uint64_t fingerprint_;
  std::unordered_map<std::uint64_t, Count> cells_;
  std::vector<WordId> stream_;
};

template <typename SentenceRange>
CooccurrenceMatrix count_cooccurrences(const SentenceRange& sentences, const Vocabulary& vocab,
                                       std::uint32_t window) {
  CooccurrenceCounter counter(vocab, window);
  for (const auto& s : sentences) counter.add(s);
  return counter.finalize();
}

// Counts disjoint contiguous shards on separate threads, then merges.
inline CooccurrenceMatrix count_cooccurrences_parallel(std::span<const Sentence> sentences,
                                                       const Vocabulary& vocab,
                                                       std::uint32_t window, unsigned threads) {
  threads = std::max(1u, threads);
  std::vector<CooccurrenceCounter> shards(threads, CooccurrenceCounter(vocab, window));
  std::vector<std::thread> workers;
  const std::size_t per = (sentences.size() + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = std::min(sentences.size(), t * per);
    const std::size_t end = std::min(sentences.size(), begin + per);
    workers.emplace_back([&, t, begin, end] {
      for (std::size_t i = begin; i < end; ++i) shards[t].add(sentences[i]);
    });
  }
  for (auto& w : workers) w.join();
  for (unsigned t = 1; t < threads; ++t) shards[0].merge(shards[t]);
  return shards[0].finalize();
}

}  // namespace apsyn
