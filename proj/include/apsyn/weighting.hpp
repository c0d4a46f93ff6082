// PPMI and LMI association weights, and per-word ranked context lists.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apsyn/cooccurrence.hpp"
#include "apsyn/error.hpp"

namespace apsyn {

enum class Scheme : std::uint8_t { kPpmi = 1, kLmi = 2 };

inline const char* scheme_name(Scheme s) { return s == Scheme::kPpmi ? "ppmi" : "lmi"; }

inline std::optional<Scheme> scheme_from_name(const std::string& name) {
  if (name == "ppmi" || name == "PPMI") return Scheme::kPpmi;
  if (name == "lmi" || name == "LMI") return Scheme::kLmi;
  return std::nullopt;
}

// Read-only view of one sparse row; ids strictly ascending.
struct SparseRow {
  std::span<const WordId> ids;
  std::span<const double> weights;

  std::size_t size() const { return ids.size(); }
  bool empty() const { return ids.empty(); }
};

// Sparse non-negative weights; only strictly positive cells are stored.
class WeightedMatrix {
 public:
  WeightedMatrix() = default;

  WeightedMatrix(Scheme scheme, std::size_t dimension, std::vector<std::uint64_t> row_ptr,
                 std::vector<WordId> cols, std::vector<double> weights,
                 std::uint64_t source_fingerprint)
      : scheme_(scheme),
        dimension_(dimension),
        row_ptr_(std::move(row_ptr)),
        cols_(std::move(cols)),
        weights_(std::move(weights)),
        source_fingerprint_(source_fingerprint) {
    if (row_ptr_.size() != dimension_ + 1 || row_ptr_.front() != 0 ||
        row_ptr_.back() != cols_.size() || cols_.size() != weights_.size()) {
      throw FormatError("inconsistent CSR weight block");
    }
    for (std::size_t r = 0; r < dimension_; ++r) {
      if (row_ptr_[r] > row_ptr_[r + 1]) throw FormatError("row pointers not monotone");
      for (auto k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        if (cols_[k] >= dimension_) throw FormatError("column index out of range");
        if (k > row_ptr_[r] && cols_[k] <= cols_[k - 1]) {
          throw FormatError("columns not strictly ascending within a row");
        }
        if (!(weights_[k] > 0.0) || !std::isfinite(weights_[k])) {
          throw FormatError("stored weight must be finite and > 0");
        }
      }
    }
  }

  Scheme scheme() const { return scheme_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t nnz() const { return cols_.size(); }
  std::uint64_t source_fingerprint() const { return source_fingerprint_; }

  SparseRow row(WordId w) const {
    if (w >= dimension_) throw NotInModelError("#" + std::to_string(w));
    const auto b = row_ptr_[w];
    const auto e = row_ptr_[w + 1];
    return {{cols_.data() + b, cols_.data() + e}, {weights_.data() + b, weights_.data() + e}};
  }

  double weight(WordId w, WordId c) const {
    const auto r = row(w);
    auto it = std::lower_bound(r.ids.begin(), r.ids.end(), c);
    if (it == r.ids.end() || *it != c) return 0.0;
    return r.weights[static_cast<std::size_t>(it - r.ids.begin())];
  }

  const std::vector<std::uint64_t>& row_ptr() const { return row_ptr_; }
  const std::vector<WordId>& cols() const { return cols_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  Scheme scheme_ = Scheme::kPpmi;
  std::size_t dimension_ = 0;
  std::vector<std::uint64_t> row_ptr_{0};
  std::vector<WordId> cols_;
  std::vector<double> weights_;
  std::uint64_t source_fingerprint_ = 0;
};

namespace detail {

// max(ln(|w,c| D / (|w| |c|)), 0). The zero boundary is decided on exact
// integer products so that ratios of exactly 1 never leak a tiny positive.
inline double ppmi_cell(Count wc, Count w, Count c, Count total) {
  const auto num = static_cast<unsigned __int128>(wc) * total;
  const auto den = static_cast<unsigned __int128>(w) * c;
  if (num <= den) return 0.0;
  return std::log(static_cast<double>(wc)) + std::log(static_cast<double>(total)) -
         std::log(static_cast<double>(w)) - std::log(static_cast<double>(c));
}

template <typename CellFn>
WeightedMatrix weigh(const CooccurrenceMatrix& m, Scheme scheme, CellFn&& fn) {
  if (m.total() == 0) throw EmptyModelError();
  std::vector<std::uint64_t> row_ptr(m.dimension() + 1, 0);
  std::vector<WordId> cols;
  std::vector<double> weights;
  for (WordId w = 0; w < m.dimension(); ++w) {
    const auto ctx = m.row_contexts(w);
    const auto cnt = m.row_counts(w);
    for (std::size_t k = 0; k < ctx.size(); ++k) {
      const double v = fn(cnt[k], m.row_marginal(w), m.col_marginal(ctx[k]), m.total());
      if (v > 0.0) {
        cols.push_back(ctx[k]);
        weights.push_back(v);
      }
    }
    row_ptr[w + 1] = cols.size();
  }
  return WeightedMatrix(scheme, m.dimension(), std::move(row_ptr), std::move(cols),
                        std::move(weights), m.fingerprint());
}

}  // namespace detail

// Natural-log PPMI, D = total number of observed pair tokens.
inline WeightedMatrix ppmi(const CooccurrenceMatrix& m) {
  return detail::weigh(m, Scheme::kPpmi, detail::ppmi_cell);
}

// P(w,c) * PPMI(w,c) with P(w,c) = |w,c| / D.
inline WeightedMatrix lmi(const CooccurrenceMatrix& m) {
  return detail::weigh(m, Scheme::kLmi, [](Count wc, Count w, Count c, Count total) {
    const double p = detail::ppmi_cell(wc, w, c, total);
    return p > 0.0 ? (static_cast<double>(wc) / static_cast<double>(total)) * p : 0.0;
  });
}

inline WeightedMatrix weigh(const CooccurrenceMatrix& m, Scheme scheme) {
  return scheme == Scheme::kPpmi ? ppmi(m) : lmi(m);
}

struct RankedContext {
  WordId context;
  double weight;
  std::uint32_t rank;  // 1-based

  friend bool operator==(const RankedContext&, const RankedContext&) = default;
};

struct RankedContextList {
  WordId word = 0;
  std::uint32_t cutoff = 0;  // the requested N
  std::vector<RankedContext> entries;

  std::size_t size() const { return entries.size(); }

  friend bool operator==(const RankedContextList&, const RankedContextList&) = default;
};

// Top-N positive contexts of `word`, by weight descending then id ascending.
inline RankedContextList rank_contexts(const WeightedMatrix& weighted, WordId word,
                                       std::uint32_t n) {
  if (n < 1) throw ParameterError("N must be >= 1");
  const SparseRow row = weighted.row(word);
  std::vector<std::size_t> order(row.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto better = [&](std::size_t a, std::size_t b) {
    if (row.weights[a] != row.weights[b]) return row.weights[a] > row.weights[b];
    return row.ids[a] < row.ids[b];
  };
  const std::size_t keep = std::min<std::size_t>(n, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                    better);
  RankedContextList out;
  out.word = word;
  out.cutoff = n;
  out.entries.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    out.entries.push_back({row.ids[order[i]], row.weights[order[i]], static_cast<std::uint32_t>(i + 1)});
  }
  return out;
}

// Lazily memoised ranked lists for one (weighted matrix, N). Safe to query
// from many threads; each list is computed exactly once.
class RankedListIndex {
 public:
  RankedListIndex(const WeightedMatrix& weighted, std::uint32_t n)
      : weighted_(&weighted),
        n_(n),
        once_(std::make_unique<std::once_flag[]>(weighted.dimension())),
        lists_(weighted.dimension()) {
    if (n < 1) throw ParameterError("N must be >= 1");
  }

  const RankedContextList& get(WordId word) const {
    if (word >= weighted_->dimension()) throw NotInModelError("#" + std::to_string(word));
    std::call_once(once_[word], [&] { lists_[word] = rank_contexts(*weighted_, word, n_); });
    return lists_[word];
  }

  std::uint32_t cutoff() const { return n_; }

 private:
  const WeightedMatrix* weighted_;
  std::uint32_t n_;
  std::unique_ptr<std::once_flag[]> once_;
  mutable std::vector<RankedContextList> lists_;
};

}  // namespace apsyn
