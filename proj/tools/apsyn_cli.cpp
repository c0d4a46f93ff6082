// apsyn: build count-based models, query similarities, run synonym tests.
//
// Exit codes: 0 success, 2 usage, 3 data/format, 4 word not in model.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "apsyn/apsyn.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNotInModel = 4;

int exit_code(apsyn::ErrorKind kind) {
  switch (kind) {
    case apsyn::ErrorKind::kUsage: return kExitUsage;
    case apsyn::ErrorKind::kData: return kExitData;
    case apsyn::ErrorKind::kNotInModel: return kExitNotInModel;
  }
  return kExitData;
}

struct QueryFlags {
  std::string model_path;
  std::string measure = "apsyn";
  std::uint32_t top_n = 100;
  std::string weighting = "ppmi";
  std::string format = "table";
  std::string out_path;
};

apsyn::Measure parse_measure(const std::string& s) {
  auto m = apsyn::measure_from_name(s);
  if (!m) throw apsyn::ParameterError("unknown measure '" + s + "'");
  return *m;
}

apsyn::Scheme parse_scheme(const std::string& s) {
  auto m = apsyn::scheme_from_name(s);
  if (!m) throw apsyn::ParameterError("unknown weighting '" + s + "' (ppmi or lmi)");
  return *m;
}

apsyn::OutputFormat parse_format(const std::string& s) {
  auto f = apsyn::format_from_name(s);
  if (!f) throw apsyn::ParameterError("unknown format '" + s + "' (tsv, table or json)");
  return *f;
}

apsyn::PosSet parse_pos_filter(const std::vector<std::string>& tags) {
  apsyn::PosSet set;
  for (const auto& t : tags) {
    auto p = apsyn::pos_from_name(t);
    if (!p) throw apsyn::ParameterError("unknown POS '" + t + "'");
    set.insert(*p);
  }
  if (set.empty()) throw apsyn::ParameterError("--pos must name at least one tag");
  return set;
}

apsyn::WordKey parse_query_word(const std::string& s) {
  const auto dash = s.rfind('-');
  if (dash == std::string::npos || dash == 0 || dash + 2 != s.size() ||
      !apsyn::pos_from_letter(s.back())) {
    throw apsyn::ParameterError("word '" + s + "' must look like lemma-n, lemma-v or lemma-j");
  }
  return {apsyn::ascii_lower(s.substr(0, dash)), *apsyn::pos_from_letter(s.back())};
}

// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw apsyn::Error(apsyn::ErrorKind::kData, "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::string model_file_for_window(const std::string& dir, std::uint32_t k) {
  return (fs::path(dir) / ("window" + std::to_string(k) + ".dsm")).string();
}

apsyn::MeasureParams params_of(const QueryFlags& f) {
  return {f.top_n, parse_scheme(f.weighting)};
}

// ---- subcommands ----

struct BuildFlags {
  std::string corpus;
  std::string tagset_map;
  std::uint64_t min_freq = 1000;
  std::vector<std::string> pos{"n", "v", "j"};
  std::vector<std::uint32_t> windows{2};
  std::string weighting = "ppmi";
  std::string out;
  std::string format = "table";
};

int cmd_build(const BuildFlags& f) {
  if (f.windows.empty()) throw apsyn::ParameterError("--window needs at least one value");
  const auto tags = f.tagset_map.empty() ? apsyn::TagsetMap::defaults()
                                         : apsyn::TagsetMap::load(f.tagset_map);
  {
    std::ifstream probe(f.corpus, std::ios::binary);
    if (!probe) throw apsyn::Error(apsyn::ErrorKind::kData, "cannot open corpus: " + f.corpus);
  }
  apsyn::BuildOptions opts;
  opts.min_freq = f.min_freq;
  opts.pos_filter = parse_pos_filter(f.pos);
  opts.scheme = parse_scheme(f.weighting);
  const auto fmt = parse_format(f.format);

  apsyn::ReaderStats stats;
  auto models = apsyn::build_models(
      [&] { return std::make_unique<std::ifstream>(f.corpus, std::ios::binary); }, tags, f.windows,
      opts, &stats);

  std::vector<std::string> paths;
  if (f.windows.size() == 1 && !(fs::exists(f.out) && fs::is_directory(f.out))) {
    paths.push_back(f.out);
  } else {
    fs::create_directories(f.out);
    for (auto k : f.windows) paths.push_back(model_file_for_window(f.out, k));
  }
  nlohmann::json summary = nlohmann::json::array();
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto& m = models[i];
    if (m.counts().total() > 0) m.weights(opts.scheme);
    m.save(paths[i]);
    std::size_t weighted_nnz = m.counts().total() > 0 ? m.weights(opts.scheme).nnz() : 0;
    summary.push_back({{"path", paths[i]},
                       {"window", m.window()},
                       {"vocabulary", m.vocabulary().size()},
                       {"D", m.counts().total()},
                       {"nnz", m.counts().nnz()},
                       {"weighting", apsyn::scheme_name(opts.scheme)},
                       {"weighted_nnz", weighted_nnz},
                       {"sentences", stats.sentences},
                       {"tokens", stats.tokens},
                       {"malformed_lines", stats.malformed}});
  }
  if (fmt == apsyn::OutputFormat::kJson) {
    std::cout << summary.dump(2) << '\n';
  } else {
    for (const auto& s : summary) {
      std::cout << "model\t" << s["path"].get<std::string>() << "\nwindow\t" << s["window"]
                << "\nvocabulary\t" << s["vocabulary"] << "\nD\t" << s["D"] << "\nnnz\t" << s["nnz"]
                << "\nweighted_nnz\t" << s["weighted_nnz"] << "\nsentences\t" << s["sentences"]
                << "\ntokens\t" << s["tokens"] << "\nmalformed_lines\t" << s["malformed_lines"]
                << '\n';
    }
  }
  if (models.front().vocabulary().empty()) {
    std::cerr << "warning: empty vocabulary (no content word reaches --min-freq "
              << f.min_freq << ")\n";
    return kExitData;
  }
  return kExitOk;
}

int cmd_sim(const QueryFlags& f, const std::string& w1, const std::string& w2) {
  const auto measure = parse_measure(f.measure);
  const auto fmt = parse_format(f.format);
  const auto model = apsyn::Model::load(f.model_path);
  const auto a = parse_query_word(w1);
  const auto b = parse_query_word(w2);
  const auto score = model.similarity(measure, a, b, params_of(f));
  const char* polarity = score.polarity == apsyn::Polarity::kSimilarity ? "similarity" : "distance";
  Output out(f.out_path);
  auto& os = out.stream();
  if (fmt == apsyn::OutputFormat::kJson) {
    nlohmann::json j{{"measure", apsyn::measure_id(measure)}, {"w1", a.str()}, {"w2", b.str()},
                     {"value", score.value}, {"polarity", polarity}};
    if (measure == apsyn::Measure::kApsyn) j["top_n"] = f.top_n;
    os << j.dump(2) << '\n';
  } else if (fmt == apsyn::OutputFormat::kTsv) {
    os << apsyn::measure_id(measure) << '\t' << a.str() << '\t' << b.str() << '\t'
       << apsyn::fixed(score.value, 6) << '\t' << polarity << '\n';
  } else {
    os << apsyn::measure_label(measure) << "(" << a.str() << ", " << b.str()
       << ") = " << apsyn::fixed(score.value, 6) << "  [" << polarity << "]\n";
  }
  return kExitOk;
}

int cmd_rank(const QueryFlags& f, const std::string& word) {
  const auto fmt = parse_format(f.format);
  const auto model = apsyn::Model::load(f.model_path);
  const auto key = parse_query_word(word);
  const auto scheme = parse_scheme(f.weighting);
  const auto list = apsyn::rank_contexts(model.weights(scheme), model.id(key), f.top_n);
  Output out(f.out_path);
  auto& os = out.stream();
  const auto& vocab = model.vocabulary();
  if (fmt == apsyn::OutputFormat::kJson) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : list.entries) {
      arr.push_back({{"rank", e.rank}, {"context", vocab.key(e.context).str()}, {"weight", e.weight}});
    }
    os << nlohmann::json{{"word", key.str()}, {"top_n", f.top_n}, {"weighting", apsyn::scheme_name(scheme)},
                         {"contexts", arr}}
              .dump(2)
       << '\n';
    return kExitOk;
  }
  for (const auto& e : list.entries) {
    os << e.rank << '\t' << vocab.key(e.context).str() << '\t' << apsyn::fixed(e.weight, 6) << '\n';
  }
  return kExitOk;
}

int cmd_eval(const QueryFlags& f, const std::string& questions_path) {
  const auto measure = parse_measure(f.measure);
  const auto fmt = parse_format(f.format);
  const auto questions = apsyn::load_questions(questions_path);
  const auto model = apsyn::Model::load(f.model_path);
  const auto report = apsyn::run_test(model, measure, params_of(f), questions);
  Output out(f.out_path);
  apsyn::emit_report(out.stream(), report, fmt);
  return kExitOk;
}

int cmd_errors(const QueryFlags& f, const std::string& questions_path) {
  const auto measure = parse_measure(f.measure);
  const auto fmt = parse_format(f.format);
  const auto questions = apsyn::load_questions(questions_path);
  const auto model = apsyn::Model::load(f.model_path);
  const auto results =
      apsyn::evaluate(model, apsyn::make_scorer(model, measure, params_of(f)), questions);
  Output out(f.out_path);
  apsyn::emit_errors(out.stream(), apsyn::error_report(results), fmt);
  return kExitOk;
}

struct SweepFlags {
  std::string models_dir;
  std::string questions;
  std::vector<std::uint32_t> windows{2, 3, 5, 10};
  std::vector<std::uint32_t> top_ns{100, 200, 300, 400, 500, 600, 700, 800, 900, 1000};
  std::vector<std::string> measures{"apsyn", "cosine", "cooc"};
  std::string weighting = "ppmi";
  std::string format = "table";
  std::string out;
  unsigned threads = 1;
};

int cmd_sweep(const SweepFlags& f) {
  const auto fmt = parse_format(f.format);
  std::vector<apsyn::Measure> measures;
  for (const auto& m : f.measures) measures.push_back(parse_measure(m));
  const auto questions = apsyn::load_questions(f.questions);
  std::map<std::uint32_t, apsyn::Model> models;
  for (auto k : f.windows) {
    const auto path = model_file_for_window(f.models_dir, k);
    if (!fs::exists(path)) {
      throw apsyn::ConfigError("no model for window " + std::to_string(k) + " (expected " + path + ")");
    }
    models.emplace(k, apsyn::Model::load(path));
  }
  const auto report = apsyn::sweep(
      [&](std::uint32_t k) -> const apsyn::Model* {
        auto it = models.find(k);
        return it == models.end() ? nullptr : &it->second;
      },
      f.windows, f.top_ns, measures, questions, parse_scheme(f.weighting), f.threads);
  Output out(f.out);
  apsyn::emit_sweep(out.stream(), report, fmt);
  return kExitOk;
}

int cmd_dump(const QueryFlags& f, const std::string& what) {
  const auto model = apsyn::Model::load(f.model_path);
  Output out(f.out_path);
  if (what == "counts") {
    model.dump_counts(out.stream());
  } else {
    model.dump_weights(out.stream(), parse_scheme(f.weighting));
  }
  return kExitOk;
}

void add_query_flags(CLI::App* cmd, QueryFlags& f, bool with_measure) {
  cmd->add_option("--model", f.model_path, "Model file written by 'build'")->required();
  if (with_measure) {
    cmd->add_option("--measure", f.measure,
                    "apsyn, cosine, cooc, manhattan, euclidean, dice, jaccard or matching")
        ->capture_default_str();
  }
  cmd->add_option("--top-n", f.top_n, "APSyn cutoff N")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--weighting", f.weighting, "Ranking weights for APSyn: ppmi or lmi")->capture_default_str();
  cmd->add_option("--format", f.format, "tsv, table or json")->capture_default_str();
  cmd->add_option("--out", f.out_path, "Write output here instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Count-based distributional models, APSyn and synonym-test evaluation"};
  app.require_subcommand(1);

  BuildFlags build;
  auto* build_cmd = app.add_subcommand("build", "Count a corpus and write one model per window");
  build_cmd->add_option("--corpus", build.corpus, "Vertical corpus: surface<TAB>lemma<TAB>tag (gzip ok)")
      ->required();
  build_cmd->add_option("--tagset-map", build.tagset_map, "TAG<TAB>coarse mapping file");
  build_cmd->add_option("--min-freq", build.min_freq, "Minimum lemma frequency")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  build_cmd->add_option("--pos", build.pos, "Coarse tags kept in the vocabulary")
      ->delimiter(',')
      ->capture_default_str();
  build_cmd->add_option("--window", build.windows, "Window size(s) K")
      ->delimiter(',')
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  build_cmd->add_option("--weighting", build.weighting, "ppmi or lmi")->capture_default_str();
  build_cmd->add_option("--out", build.out, "Model file, or directory for several windows")->required();
  build_cmd->add_option("--format", build.format, "Summary format: tsv, table or json")->capture_default_str();

  QueryFlags sim;
  std::vector<std::string> sim_words;
  auto* sim_cmd = app.add_subcommand("sim", "Similarity between two words");
  add_query_flags(sim_cmd, sim, true);
  sim_cmd->add_option("words", sim_words, "Two words, e.g. passage-n hallway-n")->required()->expected(2);

  QueryFlags rank;
  std::string rank_word;
  auto* rank_cmd = app.add_subcommand("rank", "Top-N weighted contexts of a word");
  add_query_flags(rank_cmd, rank, false);
  rank_cmd->add_option("word", rank_word, "Word, e.g. passage-n")->required();

  QueryFlags eval;
  std::string eval_questions;
  auto* eval_cmd = app.add_subcommand("eval", "Accuracy on a synonym test");
  add_query_flags(eval_cmd, eval, true);
  eval_cmd->add_option("--questions", eval_questions, "Question file (TSV or JSON)")->required();

  QueryFlags errs;
  std::string errs_questions;
  auto* errs_cmd = app.add_subcommand("errors", "List the questions answered wrongly");
  add_query_flags(errs_cmd, errs, true);
  errs_cmd->add_option("--questions", errs_questions, "Question file (TSV or JSON)")->required();

  SweepFlags sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "Accuracy grid over windows, N and measures");
  sweep_cmd->add_option("--models-dir", sw.models_dir, "Directory holding window<K>.dsm files")->required();
  sweep_cmd->add_option("--questions", sw.questions, "Question file (TSV or JSON)")->required();
  sweep_cmd->add_option("--window", sw.windows, "Windows")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--top-n", sw.top_ns, "APSyn cutoffs")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--measure", sw.measures, "Measures")->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--weighting", sw.weighting, "APSyn ranking weights")->capture_default_str();
  sweep_cmd->add_option("--format", sw.format, "tsv, table or json")->capture_default_str();
  sweep_cmd->add_option("--out", sw.out, "Write output here instead of stdout");
  sweep_cmd->add_option("--threads", sw.threads, "Worker threads per cell")->capture_default_str();

  QueryFlags dump;
  std::string dump_what = "counts";
  auto* dump_cmd = app.add_subcommand("dump", "Text dump of counts or weights");
  dump_cmd->add_option("--model", dump.model_path, "Model file")->required();
  dump_cmd->add_option("what", dump_what, "counts or weights")
      ->check(CLI::IsMember({"counts", "weights"}))
      ->capture_default_str();
  dump_cmd->add_option("--weighting", dump.weighting, "ppmi or lmi")->capture_default_str();
  dump_cmd->add_option("--out", dump.out_path, "Write output here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*build_cmd) return cmd_build(build);
    if (*sim_cmd) return cmd_sim(sim, sim_words[0], sim_words[1]);
    if (*rank_cmd) return cmd_rank(rank, rank_word);
    if (*eval_cmd) return cmd_eval(eval, eval_questions);
    if (*errs_cmd) return cmd_errors(errs, errs_questions);
    if (*sweep_cmd) return cmd_sweep(sw);
    if (*dump_cmd) return cmd_dump(dump, dump_what);
  } catch (const apsyn::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
