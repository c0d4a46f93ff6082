// Text, TSV and JSON emitters for evaluation results.
//
// Sweep tables follow the usual layout: one row per N for APSyn, one column
// per window, then a "Baselines" block with one row per other measure.
// Error tables list the problem word followed by the covered choices in
// ranked order; the correct answer carries a '*' suffix.

#pragma once

#include <algorithm>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "apsyn/eval.hpp"

namespace apsyn {

enum class OutputFormat { kTable, kTsv, kJson };

inline std::optional<OutputFormat> format_from_name(const std::string& s) {
  if (s == "table") return OutputFormat::kTable;
  if (s == "tsv") return OutputFormat::kTsv;
  if (s == "json") return OutputFormat::kJson;
  return std::nullopt;
}

inline constexpr const char* kHumanBaselineFooter =
    "Reference: average of non-English US college applicants = 64.50%";

inline std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

namespace detail {

inline void print_aligned(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    if (width.size() < r.size()) width.resize(r.size(), 0);
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      line += r[i];
      if (i + 1 < r.size()) line += std::string(width[i] - r[i].size() + 2, ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }
}

inline void print_tsv(std::ostream& out, const std::vector<std::vector<std::string>>& rows) {
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "\t" : "") << r[i];
    out << '\n';
  }
}

}  // namespace detail

inline nlohmann::json to_json(const TestReport& r) {
  nlohmann::json j;
  j["measure"] = measure_id(r.config.measure);
  j["window"] = r.config.window;
  j["top_n"] = r.config.top_n ? nlohmann::json(*r.config.top_n) : nlohmann::json(nullptr);
  if (r.config.measure == Measure::kApsyn) j["ranking"] = scheme_name(r.config.ranking);
  j["total_questions"] = r.total_questions;
  j["excluded"] = r.excluded;
  j["excluded_problem_missing"] = r.excluded_problem_missing;
  j["scored"] = r.scored;
  j["correct_full"] = r.correct_full;
  j["correct_partial"] = r.correct_partial;
  j["score_sum"] = r.score_sum;
  j["accuracy"] = r.accuracy;
  return j;
}

inline void emit_report(std::ostream& out, const TestReport& r, OutputFormat fmt) {
  if (fmt == OutputFormat::kJson) {
    out << to_json(r).dump(2) << '\n';
    return;
  }
  const std::string n = r.config.top_n ? std::to_string(*r.config.top_n) : "-";
  std::vector<std::vector<std::string>> rows = {
      {"measure", "window", "N", "total", "excluded", "scored", "correct_full", "correct_partial",
       "score", "accuracy"},
      {measure_label(r.config.measure), std::to_string(r.config.window), n,
       std::to_string(r.total_questions), std::to_string(r.excluded), std::to_string(r.scored),
       std::to_string(r.correct_full), std::to_string(r.correct_partial), fixed(r.score_sum, 2),
       fixed(r.accuracy, 4)}};
  if (fmt == OutputFormat::kTsv) {
    detail::print_tsv(out, rows);
  } else {
    detail::print_aligned(out, rows);
    if (r.excluded_problem_missing > 0) {
      out << "(" << r.excluded_problem_missing << " excluded because the problem word is missing)\n";
    }
    out << kHumanBaselineFooter << '\n';
  }
}

// Rows of the sweep table; values with `decimals` places, "-" when absent.
inline std::vector<std::vector<std::string>> sweep_rows(const SweepReport& rep, int decimals) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"APSyn"};
  if (rep.ranking == Scheme::kLmi) header[0] = "APSyn (LMI)";
  for (auto k : rep.windows) header.push_back("Win " + std::to_string(k));
  rows.push_back(header);
  auto cell = [&](const SweepKey& key) -> std::string {
    auto it = rep.grid.find(key);
    return it == rep.grid.end() ? "-" : fixed(it->second.accuracy, decimals);
  };
  const bool apsyn = std::find(rep.measures.begin(), rep.measures.end(), Measure::kApsyn) != rep.measures.end();
  if (apsyn) {
    for (auto n : rep.top_ns) {
      std::vector<std::string> row{"N=" + std::to_string(n)};
      for (auto k : rep.windows) row.push_back(cell({k, n, Measure::kApsyn}));
      rows.push_back(row);
    }
  }
  bool baselines = false;
  for (Measure m : rep.measures) {
    if (m == Measure::kApsyn) continue;
    if (!baselines) {
      rows.push_back({"Baselines"});
      baselines = true;
    }
    std::vector<std::string> row{measure_label(m)};
    for (auto k : rep.windows) row.push_back(cell({k, std::nullopt, m}));
    rows.push_back(row);
  }
  return rows;
}

inline void emit_sweep(std::ostream& out, const SweepReport& rep, OutputFormat fmt) {
  if (fmt == OutputFormat::kJson) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& [key, r] : rep.grid) cells.push_back(to_json(r));
    out << nlohmann::json{{"ranking", scheme_name(rep.ranking)}, {"cells", cells}}.dump(2) << '\n';
    return;
  }
  if (fmt == OutputFormat::kTsv) {
    detail::print_tsv(out, sweep_rows(rep, 4));
    return;
  }
  detail::print_aligned(out, sweep_rows(rep, 2));
  out << kHumanBaselineFooter << '\n';
}

inline void emit_errors(std::ostream& out, const std::vector<ErrorRow>& rows, OutputFormat fmt) {
  if (fmt == OutputFormat::kJson) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
      arr.push_back({{"problem", r.problem}, {"ranked", r.ranked}, {"correct_rank", r.correct_rank}});
    }
    out << arr.dump(2) << '\n';
    return;
  }
  std::vector<std::vector<std::string>> table{{"Problem word", "1st", "2nd", "3rd", "4th"}};
  for (const auto& r : rows) {
    std::vector<std::string> line{r.problem};
    for (std::size_t i = 0; i < r.ranked.size(); ++i) {
      line.push_back(r.ranked[i] + (i + 1 == r.correct_rank ? "*" : ""));
    }
    table.push_back(line);
  }
  if (fmt == OutputFormat::kTsv) {
    detail::print_tsv(out, table);
  } else {
    detail::print_aligned(out, table);
  }
}

}  // namespace apsyn
