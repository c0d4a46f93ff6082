// Reading POS-tagged vertical corpora.
//
// Input is one token per line, "surface<TAB>lemma<TAB>tag", with a blank
// line ending a sentence. ukWaC-style structural lines ("<s>", "</s>",
// "<text id=...>") are also understood: "</s>" ends a sentence and every
// other tag line is ignored. Gzip input is detected by its magic bytes.

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "apsyn/error.hpp"
#include "apsyn/gzip_stream.hpp"

namespace apsyn {

enum class Pos : std::uint8_t { kNoun = 0, kVerb = 1, kAdjective = 2, kOther = 3 };

// Single-letter suffix used in "lemma-pos" word notation.
inline char pos_letter(Pos pos) {
  switch (pos) {
    case Pos::kNoun: return 'n';
    case Pos::kVerb: return 'v';
    case Pos::kAdjective: return 'j';
    case Pos::kOther: return 'o';
  }
  return 'o';
}

inline std::optional<Pos> pos_from_letter(char c) {
  switch (c) {
    case 'n': return Pos::kNoun;
    case 'v': return Pos::kVerb;
    case 'j': return Pos::kAdjective;
    case 'o': return Pos::kOther;
    default: return std::nullopt;
  }
}

inline std::optional<Pos> pos_from_name(std::string_view name) {
  if (name.size() == 1) return pos_from_letter(name[0]);
  if (name == "noun") return Pos::kNoun;
  if (name == "verb") return Pos::kVerb;
  if (name == "adjective" || name == "adj") return Pos::kAdjective;
  if (name == "other") return Pos::kOther;
  return std::nullopt;
}

// Small bitset over the four coarse tags.
class PosSet {
 public:
  constexpr PosSet() = default;
  constexpr PosSet(std::initializer_list<Pos> tags) {
    for (Pos p : tags) insert(p);
  }

  // Noun, verb and adjective: the content-word filter.
  static constexpr PosSet content_words() {
    return PosSet{Pos::kNoun, Pos::kVerb, Pos::kAdjective};
  }

  constexpr void insert(Pos p) { bits_ |= bit(p); }
  constexpr bool contains(Pos p) const { return (bits_ & bit(p)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t bits() const { return bits_; }
  static constexpr PosSet from_bits(std::uint8_t b) {
    PosSet s;
    s.bits_ = static_cast<std::uint8_t>(b & 0x0f);
    return s;
  }

  // Comma-separated letters, e.g. "n,v,j".
  std::string to_string() const {
    std::string out;
    for (Pos p : {Pos::kNoun, Pos::kVerb, Pos::kAdjective, Pos::kOther}) {
      if (!contains(p)) continue;
      if (!out.empty()) out += ',';
      out += pos_letter(p);
    }
    return out;
  }

  friend constexpr bool operator==(PosSet, PosSet) = default;

 private:
  static constexpr std::uint8_t bit(Pos p) {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(p));
  }
  std::uint8_t bits_ = 0;
};

// Identity of a word in the model: lemma plus coarse tag ("grind-v").
struct WordKey {
  std::string lemma;
  Pos pos = Pos::kOther;

  std::string str() const { return lemma + '-' + pos_letter(pos); }

  friend bool operator==(const WordKey&, const WordKey&) = default;
  // Lexicographic by lemma, then by the tag letter.
  friend bool operator<(const WordKey& a, const WordKey& b) {
    if (a.lemma != b.lemma) return a.lemma < b.lemma;
    return pos_letter(a.pos) < pos_letter(b.pos);
  }
};

struct WordKeyHash {
  std::size_t operator()(const WordKey& k) const noexcept {
    return std::hash<std::string>{}(k.lemma) * 31u + static_cast<std::size_t>(k.pos);
  }
};

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

// Maps a fine-grained corpus tag onto the coarse set. Exact entries win;
// otherwise the longest matching prefix rule applies; anything unmatched
// is Pos::kOther.
//
// Default table (TreeTagger/ukWaC and Penn conventions):
//
//   tag prefix              coarse
//   NN*  NP*                noun
//   VV*  VB*  VH*  VD*      verb
//   JJ*                     adjective
//   n  v  j (exact)         noun, verb, adjective (toy corpora)
//
// A mapping file has one "TAG<TAB>coarse" rule per line, where coarse is
// n, v, j, o or the full names noun/verb/adjective/other. A trailing '*' on
// TAG makes it a prefix rule. '#' starts a comment line.
class TagsetMap {
 public:
  static TagsetMap defaults() {
    TagsetMap m;
    m.add_prefix("NN", Pos::kNoun);
    m.add_prefix("NP", Pos::kNoun);
    m.add_prefix("VV", Pos::kVerb);
    m.add_prefix("VB", Pos::kVerb);
    m.add_prefix("VH", Pos::kVerb);
    m.add_prefix("VD", Pos::kVerb);
    m.add_prefix("JJ", Pos::kAdjective);
    m.add_exact("n", Pos::kNoun);
    m.add_exact("v", Pos::kVerb);
    m.add_exact("j", Pos::kAdjective);
    return m;
  }

  static TagsetMap parse(std::istream& in) {
    TagsetMap m;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos || tab == 0) {
        throw ParseError("expected TAG<TAB>coarse", line_no);
      }
      std::string tag = line.substr(0, tab);
      const auto pos = pos_from_name(line.substr(tab + 1));
      if (!pos) throw ParseError("unknown coarse tag '" + line.substr(tab + 1) + "'", line_no);
      if (tag.back() == '*') {
        tag.pop_back();
        m.add_prefix(tag, *pos);
      } else {
        m.add_exact(tag, *pos);
      }
    }
    return m;
  }

  static TagsetMap load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::kData, "cannot open tagset map: " + path);
    return parse(in);
  }

  void add_exact(std::string tag, Pos pos) { exact_[std::move(tag)] = pos; }

  void add_prefix(std::string prefix, Pos pos) {
    prefixes_.emplace_back(std::move(prefix), pos);
    std::stable_sort(prefixes_.begin(), prefixes_.end(),
                     [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
  }

  Pos map(std::string_view tag) const {
    if (auto it = exact_.find(std::string(tag)); it != exact_.end()) return it->second;
    for (const auto& [prefix, pos] : prefixes_) {
      if (tag.substr(0, prefix.size()) == prefix) return pos;
    }
    return Pos::kOther;
  }

 private:
  std::map<std::string, Pos> exact_;
  std::vector<std::pair<std::string, Pos>> prefixes_;
};

struct Token {
  std::string surface;
  std::string lemma;  // lowercased, never empty
  Pos pos = Pos::kOther;

  WordKey key() const { return WordKey{lemma, pos}; }
};

struct Sentence {
  std::vector<Token> tokens;
};

struct ReaderStats {
  std::uint64_t lines = 0;  // non-blank, non-structural lines
  std::uint64_t malformed = 0;
  std::uint64_t tokens = 0;
  std::uint64_t sentences = 0;
  std::uint64_t bytes = 0;
};

// Pull-based sentence reader. Malformed lines are skipped and counted; if
// more than half of the first `kFormatProbeLines` token lines are malformed
// the input is rejected with FormatError.
class CorpusReader {
 public:
  static constexpr std::uint64_t kFormatProbeLines = 10000;

  CorpusReader(std::istream& in, TagsetMap tags) : tags_(std::move(tags)) {
    if (has_gzip_magic(in)) {
      gzip_ = std::make_unique<GzipStreambuf>(in);
      owned_ = std::make_unique<std::istream>(gzip_.get());
      in_ = owned_.get();
    } else {
      in_ = &in;
    }
  }

  // Fills `out` with the next non-empty sentence. Returns false at end of input.
  bool next(Sentence& out) {
    out.tokens.clear();
    std::string line;
    while (true) {
      if (!std::getline(*in_, line)) {
        if (in_->bad()) throw ReadError("corpus stream read failed", stats_.bytes);
        probe_format(true);
        if (!out.tokens.empty()) {
          ++stats_.sentences;
          return true;
        }
        return false;
      }
      stats_.bytes += line.size() + 1;
      if (!line.empty() && line.back() == '\r') line.pop_back();

      if (line.empty() || line == "</s>") {
        if (!out.tokens.empty()) {
          ++stats_.sentences;
          return true;
        }
        continue;
      }
      if (is_structural(line)) continue;

      ++stats_.lines;
      if (auto tok = parse_line(line)) {
        ++stats_.tokens;
        out.tokens.push_back(std::move(*tok));
      } else {
        ++stats_.malformed;
      }
      if (stats_.lines == kFormatProbeLines) probe_format(false);
    }
  }

  std::optional<Sentence> next() {
    Sentence s;
    if (next(s)) return s;
    return std::nullopt;
  }

  const ReaderStats& stats() const { return stats_; }

 private:
  static bool is_structural(const std::string& line) {
    return line.size() >= 2 && line.front() == '<' && line.back() == '>' &&
           line.find('\t') == std::string::npos;
  }

  std::optional<Token> parse_line(const std::string& line) const {
    const auto t1 = line.find('\t');
    if (t1 == std::string::npos) return std::nullopt;
    const auto t2 = line.find('\t', t1 + 1);
    if (t2 == std::string::npos) return std::nullopt;
    if (line.find('\t', t2 + 1) != std::string::npos) return std::nullopt;
    Token tok;
    tok.surface = line.substr(0, t1);
    tok.lemma = ascii_lower(std::string_view(line).substr(t1 + 1, t2 - t1 - 1));
    const std::string_view tag = std::string_view(line).substr(t2 + 1);
    if (tok.lemma.empty() || tag.empty()) return std::nullopt;
    tok.pos = tags_.map(tag);
    return tok;
  }

  void probe_format(bool at_eof) {
    if (probed_) return;
    if (!at_eof && stats_.lines < kFormatProbeLines) return;
    probed_ = true;
    if (stats_.lines > 0 && stats_.malformed * 2 > stats_.lines) {
      throw FormatError("input does not look like surface<TAB>lemma<TAB>tag vertical text: " +
                        std::to_string(stats_.malformed) + " of the first " +
                        std::to_string(stats_.lines) + " lines are malformed");
    }
  }

  TagsetMap tags_;
  std::unique_ptr<GzipStreambuf> gzip_;
  std::unique_ptr<std::istream> owned_;
  std::istream* in_ = nullptr;
  ReaderStats stats_;
  bool probed_ = false;
};

// Lazily reads sentences from `in`.
inline CorpusReader read_corpus(std::istream& in, TagsetMap tags = TagsetMap::defaults()) {
  return CorpusReader(in, std::move(tags));
}

// Convenience for small inputs and tests.
inline std::vector<Sentence> read_all_sentences(std::istream& in,
                                                TagsetMap tags = TagsetMap::defaults()) {
  CorpusReader reader(in, std::move(tags));
  std::vector<Sentence> out;
  Sentence s;
  while (reader.next(s)) out.push_back(s);
  return out;
}

}  // namespace apsyn
