#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "apsyn/apsyn.hpp"
#include "test_util.hpp"

namespace apsyn {
namespace {

WordKey key(const char* s) { return parse_word(s, 0); }

std::vector<Question> parse(const std::string& text) {
  std::istringstream in(text);
  return load_questions(in);
}

// ---- question files ----

TEST(LoadQuestions, TsvWithSentence) {
  const auto qs = parse(
      "passage-n\thallway-n\tticket-n\tentrance-n\troom-n\tAn underground passage connected the house.\n");
  ASSERT_EQ(qs.size(), 1u);
  const auto& q = qs[0];
  EXPECT_EQ(q.problem, key("passage-n"));
  ASSERT_EQ(q.choices.size(), 4u);
  EXPECT_EQ(q.correct(), key("hallway-n"));
  EXPECT_EQ(q.context_sentence, "An underground passage connected the house.");
  std::vector<WordKey> sorted = q.choices;
  std::sort(sorted.begin(), sorted.end());
  std::vector<WordKey> expected{key("entrance-n"), key("hallway-n"), key("room-n"), key("ticket-n")};
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(sorted, expected);
}

TEST(LoadQuestions, TwoChoiceLine) {
  const auto qs = parse("big-j\tlarge-j\tsmall-j\n");
  ASSERT_EQ(qs.size(), 1u);
  EXPECT_EQ(qs[0].choices.size(), 2u);
  EXPECT_EQ(qs[0].correct(), key("large-j"));
}

TEST(LoadQuestions, Rejections) {
  EXPECT_THROW(parse("big-j\tlarge-j\tlarge-j\n"), ParseError);
  EXPECT_THROW(parse("big-j\tbig-j\tlarge-j\n"), ParseError);
  EXPECT_THROW(parse("big-x\tlarge-j\n"), ParseError);
  EXPECT_THROW(parse("big-j\tlarge\n"), ParseError);
  EXPECT_THROW(parse("big-j\n"), ParseError);
  EXPECT_THROW(parse("a-n\tb-n\tc-n\td-n\te-n\tf-n\n"), ParseError);
  EXPECT_THROW(parse("a-n\tb-n\tsome words\tc-n\n"), ParseError);
}

TEST(LoadQuestions, ParseErrorCarriesLine) {
  try {
    parse("# seed=1\nbig-j\tlarge-j\n\nbad\tlarge-j\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(LoadQuestions, JsonForms) {
  const auto a = parse(R"([{"problem":"car-n","choices":["road-n","auto-n"],"correct":"auto-n"}])");
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].correct_index, 1u);
  EXPECT_EQ(a[0].choices[0], key("road-n"));
  const auto b = parse(R"({"questions":[{"problem":"car-n","choices":["road-n","auto-n"],"correct_index":0}]})");
  EXPECT_EQ(b[0].correct(), key("road-n"));
  EXPECT_THROW(parse(R"([{"problem":"car-n","choices":["road-n"],"correct":"auto-n"}])"), ParseError);
  EXPECT_THROW(parse("[{"), ParseError);
}

TEST(LoadQuestions, ShuffleIsSeededAndPreservesAnswer) {
  const std::string body = "a-n\tb-n\tc-n\td-n\te-n\nf-v\tg-v\th-v\ti-v\tj-v\n";
  const auto x = parse("# seed=3\n" + body);
  const auto y = parse("# seed=3\n" + body);
  ASSERT_EQ(x.size(), 2u);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(x[i].choices, y[i].choices);
    EXPECT_EQ(x[i].correct_index, y[i].correct_index);
  }
  EXPECT_EQ(x[0].correct(), key("b-n"));
  EXPECT_EQ(x[1].correct(), key("g-v"));
  bool moved = false;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto z = parse("# seed=" + std::to_string(seed) + "\n" + body);
    EXPECT_EQ(z[0].correct(), key("b-n"));
    moved = moved || z[0].correct_index != 0;
  }
  EXPECT_TRUE(moved);
}

// ---- a ten-word toy model with a hand-written score table ----

class ToyModel : public ::testing::Test {
 protected:
  void SetUp() override {
    std::vector<Sentence> corpus{testing::sentence(
        {"w0-n", "w1-n", "w2-n", "w3-n", "w4-n", "w5-n", "w6-n", "w7-n", "w8-n", "w9-n"})};
    auto vocab = build_vocabulary(corpus, 1);
    auto counts = CooccurrenceMatrix::from_cells(vocab.size(), {}, 2, vocab.fingerprint());
    model_ = Model(std::move(vocab), std::move(counts));
  }

  WordId id(int i) const { return model_.id(key(("w" + std::to_string(i) + "-n").c_str())); }

  Scorer table_scorer(Polarity p = Polarity::kSimilarity) const {
    return Scorer{[this](WordId a, WordId b) {
                    const auto it = scores_.find({std::min(a, b), std::max(a, b)});
                    return it == scores_.end() ? 0.0 : it->second;
                  },
                  p};
  }

  void set(int a, int b, double s) { scores_[{std::min(id(a), id(b)), std::max(id(a), id(b))}] = s; }

  Question q(int problem, std::vector<std::string> choices, std::size_t correct) const {
    Question out;
    out.problem = key(("w" + std::to_string(problem) + "-n").c_str());
    for (const auto& c : choices) out.choices.push_back(key(c.c_str()));
    out.correct_index = correct;
    return out;
  }

  Model model_;
  std::map<std::pair<WordId, WordId>, double> scores_;
};

TEST_F(ToyModel, HandOracle) {
  set(0, 1, 3.0);
  set(0, 2, 1.0);
  set(0, 3, 2.0);
  set(4, 5, 1.0);
  set(4, 6, 5.0);
  set(7, 8, 2.0);
  set(7, 9, 2.0);
  const std::vector<Question> qs{
      q(0, {"w1-n", "w2-n", "w3-n", "w4-n"}, 0),     // correct, full: 1.0
      q(0, {"w2-n", "w1-n", "w3-n", "w5-n"}, 0),     // wrong: 0
      q(4, {"w6-n", "w5-n", "zzz-n", "w1-n"}, 0),    // correct, 3 of 4 covered: 0.75
      q(7, {"w8-n", "w9-n", "w1-n", "w2-n"}, 0),     // tie resolved by listed order: 1.0
      q(7, {"w9-n", "w8-n", "w1-n", "w2-n"}, 1),     // same tie, other answer: 0
      q(0, {"missing-n", "w1-n", "w2-n", "w3-n"}, 0) // excluded
  };
  const auto results = evaluate(model_, table_scorer(), qs);
  const double expected[] = {1.0, 0.0, 0.75, 1.0, 0.0, 0.0};
  for (std::size_t i = 0; i < qs.size(); ++i) EXPECT_EQ(results[i].contribution, expected[i]) << i;
  EXPECT_EQ(results[5].status, QuestionStatus::kExcludedCorrectMissing);
  const auto rep = score_test(results);
  EXPECT_EQ(rep.total_questions, 6u);
  EXPECT_EQ(rep.scored, 5u);
  EXPECT_EQ(rep.excluded, 1u);
  EXPECT_EQ(rep.correct_full, 2u);
  EXPECT_EQ(rep.correct_partial, 1u);
  EXPECT_DOUBLE_EQ(rep.accuracy, 2.75 / 5.0);

  const auto errors = error_report(results);
  ASSERT_EQ(errors.size(), 2u);
  EXPECT_EQ(errors[0].problem, "w0-n");
  EXPECT_EQ(errors[0].ranked, (std::vector<std::string>{"w1-n", "w3-n", "w2-n", "w5-n"}));
  EXPECT_EQ(errors[0].correct_rank, 3u);
}

TEST_F(ToyModel, DistancePolaritySortsAscending) {
  set(0, 1, 3.0);
  set(0, 2, 1.0);
  const auto r = answer_question(model_, table_scorer(Polarity::kDistance), q(0, {"w2-n", "w1-n"}, 0));
  EXPECT_TRUE(r.top_is_correct);
  EXPECT_EQ(r.contribution, 0.5);
}

TEST_F(ToyModel, ProblemMissingIsCountedSeparately) {
  Question x;
  x.problem = key("absent-n");
  x.choices = {key("w1-n"), key("w2-n")};
  const auto r = answer_question(model_, table_scorer(), x);
  EXPECT_EQ(r.status, QuestionStatus::kExcludedProblemMissing);
  const auto rep = score_test({r, answer_question(model_, table_scorer(), q(0, {"w1-n"}, 0))});
  EXPECT_EQ(rep.excluded, 1u);
  EXPECT_EQ(rep.excluded_problem_missing, 1u);
  EXPECT_EQ(rep.accuracy, 0.25);
}

TEST_F(ToyModel, SingleChoiceFullyCovered) {
  // A lone correct choice contributes 0.25 out of a possible 0.25 per covered choice.
  set(0, 1, 1.0);
  const auto r = answer_question(model_, table_scorer(), q(0, {"w1-n"}, 0));
  EXPECT_EQ(r.contribution, 0.25);
}

TEST_F(ToyModel, OnlyRankingMatters) {
  set(0, 1, 3.0);
  set(0, 2, 1.0);
  set(4, 5, 0.5);
  set(4, 6, 0.7);
  const std::vector<Question> qs{q(0, {"w1-n", "w2-n"}, 0), q(4, {"w5-n", "w6-n"}, 0)};
  auto base = table_scorer();
  Scorer doubled{[base](WordId a, WordId b) { return 2 * base.score(a, b) + 1; }, Polarity::kSimilarity};
  EXPECT_EQ(score_test(evaluate(model_, base, qs)), score_test(evaluate(model_, doubled, qs)));
}

// ---- aggregate scoring ----

QuestionResult synthetic(bool correct, std::size_t covered, std::size_t listed = 4) {
  QuestionResult r;
  r.question.choices.resize(listed);
  r.covered_choices = covered;
  r.top_is_correct = correct;
  r.contribution = correct ? 0.25 * static_cast<double>(covered) : 0.0;
  return r;
}

TEST(ScoreTest, PartialCreditArithmetic) {
  std::vector<QuestionResult> rs;
  for (int i = 0; i < 22; ++i) rs.push_back(synthetic(true, 4));
  for (int i = 0; i < 3; ++i) rs.push_back(synthetic(true, 3));
  for (int i = 0; i < 21; ++i) rs.push_back(synthetic(false, 4));
  const auto rep = score_test(rs);
  EXPECT_EQ(rep.scored, 46u);
  EXPECT_EQ(rep.score_sum, 24.25);
  EXPECT_NEAR(rep.accuracy, 0.5272, 5e-5);
  EXPECT_EQ(rep.correct_full, 22u);
  EXPECT_EQ(rep.correct_partial, 3u);
}

TEST(ScoreTest, AllExcludedIsUndefined) {
  QuestionResult r;
  r.status = QuestionStatus::kExcludedCorrectMissing;
  EXPECT_THROW(score_test({r, r}), UndefinedAccuracyError);
  EXPECT_THROW(score_test({}), UndefinedAccuracyError);
}

TEST(ScoreTest, SingleCorrectQuestion) {
  EXPECT_EQ(score_test({synthetic(true, 4)}).accuracy, 1.0);
}

// ---- fixture corpus ----

class Fixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    auto ms = testing::fixture_models({2, 3});
    models_ = new std::vector<Model>(std::move(ms));
  }
  static void TearDownTestSuite() { delete models_; }
  static const Model& model(std::size_t i) { return (*models_)[i]; }
  static std::vector<Model>* models_;
};
std::vector<Model>* Fixture::models_ = nullptr;

TEST_F(Fixture, ExpectedAccuracies) {
  const auto qs = testing::fixture_questions();
  const MeasureParams p{10, Scheme::kPpmi};
  const auto ap = run_test(model(0), Measure::kApsyn, p, qs);
  EXPECT_EQ(ap.scored, 5u);
  EXPECT_EQ(ap.excluded, 1u);
  EXPECT_NEAR(ap.accuracy, 0.75, 1e-12);
  EXPECT_NEAR(run_test(model(0), Measure::kCosine, p, qs).accuracy, 0.95, 1e-12);
  EXPECT_NEAR(run_test(model(0), Measure::kCooc, p, qs).accuracy, 0.35, 1e-12);
}

TEST_F(Fixture, ErrorReport) {
  const auto qs = testing::fixture_questions();
  const auto results = evaluate(model(0), make_scorer(model(0), Measure::kApsyn, {10, Scheme::kPpmi}), qs);
  const auto rows = error_report(results);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].problem, "passage-n");
  EXPECT_EQ(rows[0].ranked,
            (std::vector<std::string>{"entrance-n", "hallway-n", "room-n", "ticket-n"}));
  EXPECT_EQ(rows[0].correct_rank, 2u);
  EXPECT_TRUE(error_report({}).empty());
}

TEST_F(Fixture, ErrorRowPadsMissingChoices) {
  Question q;
  q.problem = key("passage-n");
  q.choices = {key("hallway-n"), key("nosuchword-n"), key("entrance-n")};
  const auto r = answer_question(model(0), Measure::kApsyn, {10, Scheme::kPpmi}, q);
  ASSERT_EQ(r.status, QuestionStatus::kScored);
  ASSERT_FALSE(r.top_is_correct);
  const auto rows = error_report({r});
  EXPECT_EQ(rows[0].ranked, (std::vector<std::string>{"entrance-n", "hallway-n", "---", "---"}));
}

TEST_F(Fixture, DeterministicAcrossThreads) {
  const auto qs = testing::fixture_questions();
  const auto scorer = make_scorer(model(0), Measure::kApsyn, {10, Scheme::kPpmi});
  const auto one = score_test(evaluate(model(0), scorer, qs, 1));
  EXPECT_EQ(one, score_test(evaluate(model(0), scorer, qs, 4)));
  EXPECT_EQ(one, score_test(evaluate(model(0), scorer, qs, 1)));
}

TEST_F(Fixture, SweepGridShape) {
  const auto qs = testing::fixture_questions();
  std::map<std::uint32_t, const Model*> ms{{2, &model(0)}, {3, &model(1)}};
  const auto rep = sweep(ms, {2, 3}, {2, 4, 6, 8, 10, 12, 14, 16, 18, 20},
                         {Measure::kApsyn, Measure::kCosine, Measure::kCooc}, qs);
  std::size_t apsyn_cells = 0, baseline_cells = 0;
  for (const auto& [k, r] : rep.grid) {
    (k.measure == Measure::kApsyn ? apsyn_cells : baseline_cells)++;
    EXPECT_EQ(r.config.window, k.window);
    EXPECT_EQ(r.config.top_n, k.top_n);
  }
  EXPECT_EQ(apsyn_cells, 20u);
  EXPECT_EQ(baseline_cells, 4u);
  EXPECT_EQ(rep.grid.at(SweepKey{2, 10, Measure::kApsyn}).accuracy,
            run_test(model(0), Measure::kApsyn, {10, Scheme::kPpmi}, qs).accuracy);

  const auto single = sweep(ms, {2}, {10}, {Measure::kApsyn}, qs);
  EXPECT_EQ(single.grid.size(), 1u);

  EXPECT_THROW(sweep(ms, {2, 5}, {10}, {Measure::kApsyn}, qs), ConfigError);
  EXPECT_THROW(sweep(ms, {2}, {}, {Measure::kApsyn}, qs), ConfigError);
  std::map<std::uint32_t, const Model*> wrong{{5, &model(0)}};
  EXPECT_THROW(sweep(wrong, {5}, {10}, {Measure::kCosine}, qs), ConfigError);
}

TEST_F(Fixture, SweepRowsLayout) {
  const auto qs = testing::fixture_questions();
  std::map<std::uint32_t, const Model*> ms{{2, &model(0)}, {3, &model(1)}};
  const auto rep = sweep(ms, {2, 3}, {5, 10}, {Measure::kApsyn, Measure::kCosine, Measure::kCooc}, qs);
  const auto rows = sweep_rows(rep, 2);
  ASSERT_GE(rows.size(), 6u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"APSyn", "Win 2", "Win 3"}));
  EXPECT_EQ(rows[1][0], "N=5");
  EXPECT_EQ(rows[2][0], "N=10");
  EXPECT_EQ(rows[3][0], "Baselines");
  EXPECT_EQ(rows[4][0], "Cosine");
  EXPECT_EQ(rows[5][0], "Co-occ");
  std::ostringstream table;
  emit_sweep(table, rep, OutputFormat::kTable);
  EXPECT_NE(table.str().find(kHumanBaselineFooter), std::string::npos);
}

}  // namespace
}  // namespace apsyn
