// Multiple-choice synonym evaluation.
//
// Each question pairs a problem word with up to four choices. Choices are
// scored against the problem word, sorted by similarity (distance measures
// ascending), and the question counts as correct when the right answer is
// on top. A correct question contributes 0.25 per choice present in the
// model, so a full question with every choice covered is worth 1. Questions
// whose correct answer (or problem word) is missing from the model are
// excluded from the denominator.

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "apsyn/error.hpp"
#include "apsyn/measures.hpp"
#include "apsyn/model.hpp"

namespace apsyn {

struct Question {
  WordKey problem;
  std::vector<WordKey> choices;  // 1..4, distinct, none equal to problem
  std::size_t correct_index = 0;
  std::optional<std::string> context_sentence;  // carried, never consulted

  const WordKey& correct() const { return choices.at(correct_index); }
};

// Parses "lemma-x" with x in {n, v, j}.
inline WordKey parse_word(const std::string& field, std::size_t line) {
  const auto dash = field.rfind('-');
  if (dash == std::string::npos || dash == 0 || dash + 2 != field.size()) {
    throw ParseError("malformed word '" + field + "', expected lemma-pos", line);
  }
  const char tag = field.back();
  if (tag != 'n' && tag != 'v' && tag != 'j') {
    throw ParseError("POS of '" + field + "' is not one of n, v, j", line);
  }
  return WordKey{ascii_lower(field.substr(0, dash)), *pos_from_letter(tag)};
}

inline void validate_question(const Question& q, std::size_t line) {
  if (q.choices.empty() || q.choices.size() > 4) {
    throw ParseError("a question needs 1 to 4 choices", line);
  }
  if (q.correct_index >= q.choices.size()) throw ParseError("correct index out of range", line);
  for (std::size_t i = 0; i < q.choices.size(); ++i) {
    if (q.choices[i] == q.problem) {
      throw ParseError("choice " + q.choices[i].str() + " repeats the problem word", line);
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (q.choices[i] == q.choices[j]) {
        throw ParseError("duplicate choice " + q.choices[i].str(), line);
      }
    }
  }
}

namespace detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

// Fisher-Yates driven by raw mt19937_64 output, so the permutation is
// identical across standard library implementations.
inline void seeded_shuffle(Question& q, std::mt19937_64& rng) {
  std::vector<std::size_t> order(q.choices.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  std::vector<WordKey> shuffled;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] == q.correct_index) correct = i;
    shuffled.push_back(q.choices[order[i]]);
  }
  q.choices = std::move(shuffled);
  q.correct_index = correct;
}

inline std::vector<Question> load_questions_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), 1);
  }
  const nlohmann::json* items = &doc;
  if (doc.is_object()) {
    if (!doc.contains("questions")) throw ParseError("JSON object lacks a \"questions\" array", 1);
    items = &doc["questions"];
  }
  if (!items->is_array()) throw ParseError("expected an array of questions", 1);
  std::vector<Question> out;
  std::size_t index = 0;
  for (const auto& item : *items) {
    ++index;
    try {
      Question q;
      q.problem = parse_word(item.at("problem").get<std::string>(), index);
      for (const auto& c : item.at("choices")) q.choices.push_back(parse_word(c.get<std::string>(), index));
      if (item.contains("correct_index")) {
        q.correct_index = item.at("correct_index").get<std::size_t>();
      } else {
        const WordKey correct = parse_word(item.at("correct").get<std::string>(), index);
        auto it = std::find(q.choices.begin(), q.choices.end(), correct);
        if (it == q.choices.end()) throw ParseError("correct answer is not among the choices", index);
        q.correct_index = static_cast<std::size_t>(it - q.choices.begin());
      }
      if (item.contains("sentence") && !item["sentence"].is_null()) {
        q.context_sentence = item["sentence"].get<std::string>();
      }
      validate_question(q, index);
      out.push_back(std::move(q));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad question object: ") + e.what(), index);
    }
  }
  return out;
}

}  // namespace detail

// TSV rows: problem, correct answer, up to three more choices, and an
// optional context sentence (the first field containing a space). The
// correct answer is listed first; choices are then permuted with a
// generator seeded from a "# seed=<n>" header line (seed 0 when absent).
// JSON input (first non-blank character '[' or '{') lists choices in final
// order with either "correct" or "correct_index" and is not permuted.
inline std::vector<Question> load_questions(std::istream& in) {
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '[' || text[first] == '{')) {
    return detail::load_questions_json(text);
  }

  std::vector<Question> out;
  std::uint64_t seed = 0;
  std::istringstream body(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(body, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (line[0] == '#') {
      const auto eq = line.find("seed=");
      if (eq != std::string::npos) {
        try {
          seed = std::stoull(line.substr(eq + 5));
        } catch (const std::exception&) {
          throw ParseError("bad seed header", line_no);
        }
      }
      continue;
    }
    const auto fields = detail::split_tabs(line);
    Question q;
    q.problem = parse_word(fields[0], line_no);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      if (fields[i].find(' ') != std::string::npos) {
        if (i + 1 != fields.size()) throw ParseError("context sentence must be the last field", line_no);
        q.context_sentence = fields[i];
        break;
      }
      if (q.choices.size() == 4) throw ParseError("more than four choices", line_no);
      q.choices.push_back(parse_word(fields[i], line_no));
    }
    q.correct_index = 0;
    validate_question(q, line_no);
    out.push_back(std::move(q));
  }
  std::mt19937_64 rng(seed);
  for (auto& q : out) detail::seeded_shuffle(q, rng);
  return out;
}

inline std::vector<Question> load_questions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kData, "cannot open questions file: " + path);
  return load_questions(in);
}

// Pairwise scoring function with its polarity; lets the harness run any
// measure, including ones defined outside this library.
struct Scorer {
  std::function<double(WordId, WordId)> score;
  Polarity polarity = Polarity::kSimilarity;
};

inline Scorer make_scorer(const Model& model, Measure m, const MeasureParams& params = {}) {
  if (m == Measure::kApsyn) model.ranked(params.ranking, params.top_n);  // warm + validate
  return Scorer{[&model, m, params](WordId a, WordId b) {
                  return model.similarity(m, a, b, params).value;
                },
                polarity_of(m)};
}

enum class QuestionStatus { kScored, kExcludedCorrectMissing, kExcludedProblemMissing };

struct RankedChoice {
  std::size_t choice_index;  // into Question::choices
  double score;
};

struct QuestionResult {
  Question question;
  QuestionStatus status = QuestionStatus::kScored;
  std::size_t covered_choices = 0;
  std::vector<RankedChoice> ranked;  // best first
  double contribution = 0.0;
  bool top_is_correct = false;
};

inline QuestionResult answer_question(const Model& model, const Scorer& scorer, const Question& q) {
  QuestionResult r;
  r.question = q;
  const auto& vocab = model.vocabulary();
  if (!vocab.contains(q.correct())) {
    r.status = QuestionStatus::kExcludedCorrectMissing;
    return r;
  }
  const auto problem = vocab.find(q.problem);
  if (!problem) {
    r.status = QuestionStatus::kExcludedProblemMissing;
    return r;
  }
  for (std::size_t i = 0; i < q.choices.size(); ++i) {
    if (auto id = vocab.find(q.choices[i])) {
      r.ranked.push_back({i, scorer.score(*problem, *id)});
    }
  }
  r.covered_choices = r.ranked.size();
  const bool ascending = scorer.polarity == Polarity::kDistance;
  std::stable_sort(r.ranked.begin(), r.ranked.end(), [&](const RankedChoice& a, const RankedChoice& b) {
    return ascending ? a.score < b.score : a.score > b.score;
  });
  r.top_is_correct = r.ranked.front().choice_index == q.correct_index;
  r.contribution = r.top_is_correct ? 0.25 * static_cast<double>(r.covered_choices) : 0.0;
  return r;
}

inline QuestionResult answer_question(const Model& model, Measure m, const MeasureParams& params,
                                      const Question& q) {
  return answer_question(model, make_scorer(model, m, params), q);
}

// Answers every question; `threads` > 1 splits the list into contiguous
// chunks. Output order always matches input order.
inline std::vector<QuestionResult> evaluate(const Model& model, const Scorer& scorer,
                                            const std::vector<Question>& questions,
                                            unsigned threads = 1) {
  std::vector<QuestionResult> out(questions.size());
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(questions.size())));
  if (threads <= 1) {
    for (std::size_t i = 0; i < questions.size(); ++i) out[i] = answer_question(model, scorer, questions[i]);
    return out;
  }
  std::vector<std::thread> pool;
  const std::size_t per = (questions.size() + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      const std::size_t b = std::min(questions.size(), t * per);
      const std::size_t e = std::min(questions.size(), b + per);
      for (std::size_t i = b; i < e; ++i) out[i] = answer_question(model, scorer, questions[i]);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

struct RunConfig {
  Measure measure = Measure::kApsyn;
  std::uint32_t window = 0;
  std::optional<std::uint32_t> top_n;  // APSyn only
  Scheme ranking = Scheme::kPpmi;      // APSyn only
};

struct TestReport {
  RunConfig config;
  std::size_t total_questions = 0;
  std::size_t excluded = 0;                  // correct answer or problem word missing
  std::size_t excluded_problem_missing = 0;  // subset of `excluded`
  std::size_t scored = 0;
  std::size_t correct_full = 0;     // correct with every listed choice covered
  std::size_t correct_partial = 0;  // correct with some choice missing
  double score_sum = 0.0;
  double accuracy = 0.0;

  friend bool operator==(const TestReport& a, const TestReport& b) {
    return std::tie(a.config.measure, a.config.window, a.config.top_n, a.config.ranking,
                    a.total_questions, a.excluded, a.excluded_problem_missing, a.scored,
                    a.correct_full, a.correct_partial, a.score_sum, a.accuracy) ==
           std::tie(b.config.measure, b.config.window, b.config.top_n, b.config.ranking,
                    b.total_questions, b.excluded, b.excluded_problem_missing, b.scored,
                    b.correct_full, b.correct_partial, b.score_sum, b.accuracy);
  }
};

inline TestReport score_test(const std::vector<QuestionResult>& results, const RunConfig& config = {}) {
  TestReport rep;
  rep.config = config;
  rep.total_questions = results.size();
  for (const auto& r : results) {
    if (r.status != QuestionStatus::kScored) {
      ++rep.excluded;
      if (r.status == QuestionStatus::kExcludedProblemMissing) ++rep.excluded_problem_missing;
      continue;
    }
    ++rep.scored;
    if (r.top_is_correct) {
      if (r.covered_choices == r.question.choices.size()) {
        ++rep.correct_full;
      } else {
        ++rep.correct_partial;
      }
    }
    rep.score_sum += r.contribution;
  }
  if (rep.scored == 0) throw UndefinedAccuracyError();
  rep.accuracy = rep.score_sum / static_cast<double>(rep.scored);
  return rep;
}

inline RunConfig run_config(const Model& model, Measure m, const MeasureParams& p) {
  RunConfig c;
  c.measure = m;
  c.window = model.window();
  if (m == Measure::kApsyn) {
    c.top_n = p.top_n;
    c.ranking = p.ranking;
  }
  return c;
}

inline TestReport run_test(const Model& model, Measure m, const MeasureParams& p,
                           const std::vector<Question>& questions, unsigned threads = 1) {
  return score_test(evaluate(model, make_scorer(model, m, p), questions, threads),
                    run_config(model, m, p));
}

// ---- sweeps ----

struct SweepKey {
  std::uint32_t window;
  std::optional<std::uint32_t> top_n;  // empty for baselines
  Measure measure;

  friend auto operator<=>(const SweepKey&, const SweepKey&) = default;
};

struct SweepReport {
  Scheme ranking = Scheme::kPpmi;
  std::vector<std::uint32_t> windows;
  std::vector<std::uint32_t> top_ns;
  std::vector<Measure> measures;
  std::map<SweepKey, TestReport> grid;
};

// `model_for(K)` returns the model built for window K, or nullptr.
// APSyn is evaluated at every N; every other measure once per window.
inline SweepReport sweep(const std::function<const Model*(std::uint32_t)>& model_for,
                         std::vector<std::uint32_t> windows, std::vector<std::uint32_t> top_ns,
                         std::vector<Measure> measures, const std::vector<Question>& questions,
                         Scheme ranking = Scheme::kPpmi, unsigned threads = 1) {
  std::sort(windows.begin(), windows.end());
  windows.erase(std::unique(windows.begin(), windows.end()), windows.end());
  std::sort(top_ns.begin(), top_ns.end());
  top_ns.erase(std::unique(top_ns.begin(), top_ns.end()), top_ns.end());
  std::sort(measures.begin(), measures.end());
  measures.erase(std::unique(measures.begin(), measures.end()), measures.end());
  const bool wants_apsyn = std::find(measures.begin(), measures.end(), Measure::kApsyn) != measures.end();
  if (wants_apsyn && top_ns.empty()) throw ConfigError("APSyn requested in a sweep without any N");

  SweepReport rep;
  rep.ranking = ranking;
  rep.windows = windows;
  rep.top_ns = top_ns;
  rep.measures = measures;
  for (auto k : windows) {
    const Model* model = model_for(k);
    if (model == nullptr) throw ConfigError("no model available for window " + std::to_string(k));
    if (model->window() != k) {
      throw ConfigError("model supplied for window " + std::to_string(k) + " was built with window " +
                        std::to_string(model->window()));
    }
    for (Measure m : measures) {
      if (m == Measure::kApsyn) {
        for (auto n : top_ns) {
          MeasureParams p{n, ranking};
          rep.grid.emplace(SweepKey{k, n, m}, run_test(*model, m, p, questions, threads));
        }
      } else {
        rep.grid.emplace(SweepKey{k, std::nullopt, m}, run_test(*model, m, {}, questions, threads));
      }
    }
  }
  return rep;
}

inline SweepReport sweep(const std::map<std::uint32_t, const Model*>& models,
                         std::vector<std::uint32_t> windows, std::vector<std::uint32_t> top_ns,
                         std::vector<Measure> measures, const std::vector<Question>& questions,
                         Scheme ranking = Scheme::kPpmi) {
  return sweep(
      [&](std::uint32_t k) -> const Model* {
        auto it = models.find(k);
        return it == models.end() ? nullptr : it->second;
      },
      std::move(windows), std::move(top_ns), std::move(measures), questions, ranking);
}

// ---- error analysis ----

inline constexpr const char* kMissingChoice = "---";

struct ErrorRow {
  std::string problem;
  std::vector<std::string> ranked;  // always four cells, "---" padded
  std::size_t correct_rank = 0;     // 1-based position of the right answer
};

// One row per scored question whose top choice is wrong.
inline std::vector<ErrorRow> error_report(const std::vector<QuestionResult>& results) {
  std::vector<ErrorRow> rows;
  for (const auto& r : results) {
    if (r.status != QuestionStatus::kScored || r.top_is_correct) continue;
    ErrorRow row;
    row.problem = r.question.problem.str();
    for (std::size_t i = 0; i < r.ranked.size(); ++i) {
      row.ranked.push_back(r.question.choices[r.ranked[i].choice_index].str());
      if (r.ranked[i].choice_index == r.question.correct_index) row.correct_rank = i + 1;
    }
    while (row.ranked.size() < 4) row.ranked.emplace_back(kMissingChoice);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace apsyn
