#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <thread>

#include "apsyn/apsyn.hpp"
#include "test_util.hpp"

namespace apsyn {
namespace {

// Builds a matrix whose cell (0,1) has count wc and whose marginals and
// total hit the requested values, by padding with cells that touch
// neither row 0 nor column 1.
CooccurrenceMatrix with_marginals(Count wc, Count w, Count c, Count total) {
  std::vector<CountCell> cells{{0, 1, wc}};
  if (w > wc) cells.push_back({0, 2, w - wc});
  if (c > wc) cells.push_back({3, 1, c - wc});
  const Count used = w + (c - wc);
  if (total > used) cells.push_back({3, 2, total - used});
  return CooccurrenceMatrix::from_cells(4, cells, 2, 0);
}

TEST(Ppmi, RatioOfOneIsNotStored) {
  const auto m = with_marginals(2, 4, 2, 4);
  ASSERT_EQ(m.row_marginal(0), 4u);
  ASSERT_EQ(m.col_marginal(1), 2u);
  ASSERT_EQ(m.total(), 4u);
  EXPECT_EQ(ppmi(m).weight(0, 1), 0.0);
}

TEST(Ppmi, PositiveAssociationIsStored) {
  const auto m = with_marginals(1, 1, 1, 2);
  EXPECT_NEAR(ppmi(m).weight(0, 1), std::log(2.0), 1e-15);
  EXPECT_NEAR(ppmi(m).weight(0, 1), 0.6931, 1e-4);
}

TEST(Ppmi, NegativeAssociationIsClipped) {
  // |w,c|=1, |w|=|c|=3, D=4 cannot occur in one matrix (D >= |w|+|c|-|w,c|),
  // so check the cell formula directly, then a realisable negative cell.
  EXPECT_EQ(detail::ppmi_cell(1, 3, 3, 4), 0.0);
  const auto m = with_marginals(1, 3, 3, 5);
  const auto w = ppmi(m);
  EXPECT_EQ(w.weight(0, 1), 0.0);  // ln(5/9) < 0
  for (double x : w.weights()) EXPECT_GT(x, 0.0);
}

TEST(Ppmi, CellFormula) {
  EXPECT_EQ(detail::ppmi_cell(2, 4, 2, 4), 0.0);
  EXPECT_NEAR(detail::ppmi_cell(1, 1, 1, 2), std::log(2.0), 1e-15);
  EXPECT_NEAR(detail::ppmi_cell(3, 5, 7, 100), std::log(300.0 / 35.0), 1e-14);
}

TEST(Ppmi, EmptyMatrixIsAnError) {
  EXPECT_THROW(ppmi(CooccurrenceMatrix::from_cells(3, {}, 2, 0)), EmptyModelError);
  EXPECT_THROW(lmi(CooccurrenceMatrix::from_cells(3, {}, 2, 0)), EmptyModelError);
}

TEST(Lmi, ZeroPpmiGivesZeroLmi) {
  EXPECT_EQ(lmi(with_marginals(2, 4, 2, 4)).weight(0, 1), 0.0);
}

TEST(Lmi, JointProbabilityTimesPpmi) {
  EXPECT_NEAR(lmi(with_marginals(1, 1, 1, 2)).weight(0, 1), 0.5 * std::log(2.0), 1e-15);
}

TEST(Lmi, InvariantUnderUniformScaling) {
  std::mt19937_64 rng(3);
  const auto m = testing::random_count_matrix(rng, 12);
  const auto base = lmi(m);
  const auto big = lmi(testing::scaled(m, 10));
  ASSERT_EQ(base.nnz(), big.nnz());
  for (std::size_t i = 0; i < base.nnz(); ++i) EXPECT_NEAR(base.weights()[i], big.weights()[i], 1e-12);
}

TEST(WeightingProperties, MatchesDenseOracle) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = 1 + rng() % 20;
    const auto m = testing::random_count_matrix(rng, dim);
    for (bool use_lmi : {false, true}) {
      const auto dense = testing::dense_ppmi(m, use_lmi);
      const auto sparse = use_lmi ? lmi(m) : ppmi(m);
      for (WordId w = 0; w < dim; ++w) {
        for (WordId c = 0; c < dim; ++c) {
          ASSERT_NEAR(sparse.weight(w, c), dense[w][c], 1e-12) << w << "," << c;
        }
      }
    }
  }
}

TEST(WeightingProperties, PpmiScaleInvariance) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = testing::random_count_matrix(rng, 1 + rng() % 20);
    const auto base = ppmi(m);
    for (std::uint64_t k : {2u, 10u, 100u}) {
      const auto s = ppmi(testing::scaled(m, k));
      ASSERT_EQ(s.cols(), base.cols());
      for (std::size_t i = 0; i < base.nnz(); ++i) EXPECT_NEAR(s.weights()[i], base.weights()[i], 1e-12);
    }
  }
}

TEST(WeightingProperties, PpmiSymmetricOnCountedCorpora) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const auto corpus = testing::random_corpus(rng, 200);
    const auto vocab = build_vocabulary(corpus, 1);
    const auto m = count_cooccurrences(corpus, vocab, 2);
    if (m.total() == 0) continue;
    const auto w = ppmi(m);
    for (WordId a = 0; a < w.dimension(); ++a) {
      const auto row = w.row(a);
      for (std::size_t k = 0; k < row.size(); ++k) {
        EXPECT_GT(row.weights[k], 0.0);
        EXPECT_NEAR(w.weight(row.ids[k], a), row.weights[k], 1e-12);
      }
    }
  }
}

// ---- ranked lists ----

WeightedMatrix single_row(std::vector<std::pair<WordId, double>> cells, std::size_t dim = 10) {
  std::sort(cells.begin(), cells.end());
  std::vector<std::uint64_t> ptr(dim + 1, cells.size());
  ptr[0] = 0;
  std::vector<WordId> cols;
  std::vector<double> vals;
  for (auto [c, v] : cells) {
    cols.push_back(c);
    vals.push_back(v);
  }
  return WeightedMatrix(Scheme::kPpmi, dim, ptr, cols, vals, 0);
}

TEST(RankContexts, SortsByWeightAndTruncates) {
  const auto w = single_row({{7, 3.0}, {2, 1.5}, {9, 0.2}});
  const auto l = rank_contexts(w, 0, 2);
  ASSERT_EQ(l.size(), 2u);
  EXPECT_EQ(l.entries[0], (RankedContext{7, 3.0, 1}));
  EXPECT_EQ(l.entries[1], (RankedContext{2, 1.5, 2}));
  EXPECT_EQ(l.cutoff, 2u);
}

TEST(RankContexts, TiesGoToSmallerId) {
  const auto w = single_row({{4, 2.0}, {1, 2.0}});
  const auto l = rank_contexts(w, 0, 2);
  EXPECT_EQ(l.entries[0].context, 1u);
  EXPECT_EQ(l.entries[1].context, 4u);
}

TEST(RankContexts, EmptyRowGivesEmptyList) {
  const auto w = single_row({{4, 2.0}});
  EXPECT_TRUE(rank_contexts(w, 5, 100).entries.empty());
}

TEST(RankContexts, ErrorsOnUnknownWordOrZeroN) {
  const auto w = single_row({{4, 2.0}});
  EXPECT_THROW(rank_contexts(w, 10, 5), NotInModelError);
  EXPECT_THROW(rank_contexts(w, 0, 0), ParameterError);
}

TEST(RankContexts, ListsArePrefixMonotoneAndWellFormed) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = testing::random_count_matrix(rng, 20, 0.6, 5);  // small counts force ties
    const auto w = ppmi(m);
    for (WordId word = 0; word < 20; ++word) {
      std::size_t positive = w.row(word).size();
      for (std::uint32_t n = 1; n <= 21; ++n) {
        const auto a = rank_contexts(w, word, n);
        const auto b = rank_contexts(w, word, n + 1);
        EXPECT_EQ(a.size(), std::min<std::size_t>(n, positive));
        for (std::size_t i = 0; i < a.size(); ++i) {
          EXPECT_EQ(a.entries[i], b.entries[i]);
          EXPECT_EQ(a.entries[i].rank, i + 1);
          if (i > 0) {
            EXPECT_GE(a.entries[i - 1].weight, a.entries[i].weight);
            if (a.entries[i - 1].weight == a.entries[i].weight) {
              EXPECT_LT(a.entries[i - 1].context, a.entries[i].context);
            }
          }
        }
      }
    }
  }
}

TEST(RankedListIndex, ConcurrentMemoisationMatchesEager) {
  std::mt19937_64 rng(8);
  const auto m = testing::random_count_matrix(rng, 20);
  const auto w = ppmi(m);
  RankedListIndex index(w, 5);
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      for (WordId word = 0; word < 20; ++word) index.get(word);
    });
  }
  for (auto& t : threads) t.join();
  for (WordId word = 0; word < 20; ++word) EXPECT_EQ(index.get(word), rank_contexts(w, word, 5));
  EXPECT_THROW(index.get(20), NotInModelError);
}

}  // namespace
}  // namespace apsyn
