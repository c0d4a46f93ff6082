// Similarity and distance measures between two words of a model.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "apsyn/cooccurrence.hpp"
#include "apsyn/error.hpp"
#include "apsyn/weighting.hpp"

namespace apsyn {

enum class Measure : std::uint8_t {
  kApsyn,
  kCosine,
  kCooc,
  kManhattan,
  kEuclidean,
  kDice,
  kJaccard,
  kMatching,
};

enum class Polarity : std::uint8_t { kSimilarity, kDistance };

inline constexpr Measure kAllMeasures[] = {
    Measure::kApsyn,     Measure::kCosine, Measure::kCooc,    Measure::kManhattan,
    Measure::kEuclidean, Measure::kDice,   Measure::kJaccard, Measure::kMatching,
};

inline Polarity polarity_of(Measure m) {
  return (m == Measure::kManhattan || m == Measure::kEuclidean) ? Polarity::kDistance
                                                                : Polarity::kSimilarity;
}

// Lowercase identifier used on the command line and in TSV/JSON output.
inline const char* measure_id(Measure m) {
  switch (m) {
    case Measure::kApsyn: return "apsyn";
    case Measure::kCosine: return "cosine";
    case Measure::kCooc: return "cooc";
    case Measure::kManhattan: return "manhattan";
    case Measure::kEuclidean: return "euclidean";
    case Measure::kDice: return "dice";
    case Measure::kJaccard: return "jaccard";
    case Measure::kMatching: return "matching";
  }
  return "?";
}

// Display label used in aligned tables.
inline const char* measure_label(Measure m) {
  switch (m) {
    case Measure::kApsyn: return "APSyn";
    case Measure::kCosine: return "Cosine";
    case Measure::kCooc: return "Co-occ";
    case Measure::kManhattan: return "Manhattan";
    case Measure::kEuclidean: return "Euclidean";
    case Measure::kDice: return "Dice";
    case Measure::kJaccard: return "Jaccard";
    case Measure::kMatching: return "Matching";
  }
  return "?";
}

inline std::optional<Measure> measure_from_name(std::string name) {
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (name == "co-occ") name = "cooc";
  for (Measure m : kAllMeasures) {
    if (name == measure_id(m)) return m;
  }
  return std::nullopt;
}

struct SimilarityScore {
  double value = 0.0;
  Measure measure = Measure::kApsyn;
  Polarity polarity = Polarity::kSimilarity;
};

inline SimilarityScore make_score(Measure m, double v) { return {v, m, polarity_of(m)}; }

// H_n = 1 + 1/2 + ... + 1/n, the APSyn ceiling at cutoff n.
inline double harmonic(std::size_t n) {
  double h = 0.0;
  for (std::size_t r = n; r >= 1; --r) h += 1.0 / static_cast<double>(r);
  return h;
}

// Sum over shared contexts f of 1 / ((rank1(f) + rank2(f)) / 2).
// Terms are accumulated in ascending context id so that the result is
// bitwise identical when the arguments are swapped.
inline SimilarityScore apsyn(const RankedContextList& a, const RankedContextList& b) {
  if (a.cutoff != b.cutoff) {
    throw ParameterError("APSyn lists built with different N (" + std::to_string(a.cutoff) +
                         " vs " + std::to_string(b.cutoff) + ")");
  }
  auto by_id = [](const RankedContextList& l) {
    std::vector<std::pair<WordId, std::uint32_t>> v;
    v.reserve(l.entries.size());
    for (const auto& e : l.entries) v.emplace_back(e.context, e.rank);
    std::sort(v.begin(), v.end());
    return v;
  };
  const auto x = by_id(a);
  const auto y = by_id(b);
  double sum = 0.0;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i].first < y[j].first) {
      ++i;
    } else if (y[j].first < x[i].first) {
      ++j;
    } else {
      sum += 2.0 / static_cast<double>(x[i].second + y[j].second);
      ++i;
      ++j;
    }
  }
  return make_score(Measure::kApsyn, sum);
}

namespace detail {

// Walks the union of two sorted sparse rows; fn(a_i, b_i) gets 0 for a
// missing side.
template <typename Fn>
void merge_join(const SparseRow& a, const SparseRow& b, Fn&& fn) {
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a.ids[i] < b.ids[j])) {
      fn(a.weights[i], 0.0);
      ++i;
    } else if (i == a.size() || b.ids[j] < a.ids[i]) {
      fn(0.0, b.weights[j]);
      ++j;
    } else {
      fn(a.weights[i], b.weights[j]);
      ++i;
      ++j;
    }
  }
}

inline std::size_t shared_support(const SparseRow& a, const SparseRow& b) {
  std::size_t shared = 0;
  merge_join(a, b, [&](double x, double y) {
    if (x != 0.0 && y != 0.0) ++shared;
  });
  return shared;
}

}  // namespace detail

// Zero when either row has zero norm.
inline SimilarityScore cosine(const SparseRow& a, const SparseRow& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  detail::merge_join(a, b, [&](double x, double y) {
    dot += x * y;
    na += x * x;
    nb += y * y;
  });
  if (na == 0.0 || nb == 0.0) return make_score(Measure::kCosine, 0.0);
  return make_score(Measure::kCosine, dot / (std::sqrt(na) * std::sqrt(nb)));
}

inline SimilarityScore manhattan(const SparseRow& a, const SparseRow& b) {
  double sum = 0.0;
  detail::merge_join(a, b, [&](double x, double y) { sum += std::fabs(x - y); });
  return make_score(Measure::kManhattan, sum);
}

inline SimilarityScore euclidean(const SparseRow& a, const SparseRow& b) {
  double sum = 0.0;
  detail::merge_join(a, b, [&](double x, double y) { sum += (x - y) * (x - y); });
  return make_score(Measure::kEuclidean, std::sqrt(sum));
}

// 2 |A ∩ B| / (|A| + |B|) over the nonzero supports; 0 for two empty rows.
inline SimilarityScore dice(const SparseRow& a, const SparseRow& b) {
  const auto total = a.size() + b.size();
  if (total == 0) return make_score(Measure::kDice, 0.0);
  return make_score(Measure::kDice, 2.0 * static_cast<double>(detail::shared_support(a, b)) /
                                        static_cast<double>(total));
}

// |A ∩ B| / |A ∪ B|; 0 for two empty rows.
inline SimilarityScore jaccard(const SparseRow& a, const SparseRow& b) {
  const auto shared = detail::shared_support(a, b);
  const auto uni = a.size() + b.size() - shared;
  if (uni == 0) return make_score(Measure::kJaccard, 0.0);
  return make_score(Measure::kJaccard,
                    static_cast<double>(shared) / static_cast<double>(uni));
}

inline SimilarityScore matching(const SparseRow& a, const SparseRow& b) {
  return make_score(Measure::kMatching, static_cast<double>(detail::shared_support(a, b)));
}

inline SimilarityScore cooccurrence_score(const CooccurrenceMatrix& m, WordId w1, WordId w2) {
  if (w1 >= m.dimension()) throw NotInModelError("#" + std::to_string(w1));
  if (w2 >= m.dimension()) throw NotInModelError("#" + std::to_string(w2));
  return make_score(Measure::kCooc, static_cast<double>(m.count(w1, w2)));
}

// Dispatch for the row-based measures (everything except APSyn and co-occurrence).
inline SimilarityScore row_measure(Measure m, const SparseRow& a, const SparseRow& b) {
  switch (m) {
    case Measure::kCosine: return cosine(a, b);
    case Measure::kManhattan: return manhattan(a, b);
    case Measure::kEuclidean: return euclidean(a, b);
    case Measure::kDice: return dice(a, b);
    case Measure::kJaccard: return jaccard(a, b);
    case Measure::kMatching: return matching(a, b);
    default: throw ParameterError(std::string("not a row measure: ") + measure_id(m));
  }
}

}  // namespace apsyn
