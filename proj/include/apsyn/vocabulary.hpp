// Filtered vocabulary of (lemma, coarse POS) entries with dense ids.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "apsyn/corpus.hpp"
#include "apsyn/error.hpp"

namespace apsyn {

using WordId = std::uint32_t;

// 64-bit FNV-1a, used to bind matrices to the vocabulary they index.
class Fingerprint {
 public:
  void add_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  void add(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    add_bytes(b, 8);
  }
  void add(const std::string& s) {
    add(s.size());
    add_bytes(s.data(), s.size());
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

struct VocabEntry {
  WordKey key;
  std::uint64_t frequency = 0;
};

// Ids are assigned by descending corpus frequency, ties by (lemma, pos).
class Vocabulary {
 public:
  Vocabulary() = default;

  // Builds from entries that already satisfy the filter; sorts and assigns ids.
  Vocabulary(std::vector<VocabEntry> entries, std::uint64_t min_freq, PosSet pos_filter)
      : entries_(std::move(entries)), min_freq_(min_freq), pos_filter_(pos_filter) {
    std::sort(entries_.begin(), entries_.end(), [](const VocabEntry& a, const VocabEntry& b) {
      if (a.frequency != b.frequency) return a.frequency > b.frequency;
      return a.key < b.key;
    });
    index_.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      if (e.frequency < min_freq_ || !pos_filter_.contains(e.key.pos)) {
        throw FormatError("vocabulary entry " + e.key.str() + " violates the filter");
      }
      if (!index_.emplace(e.key, static_cast<WordId>(i)).second) {
        throw FormatError("duplicate vocabulary entry " + e.key.str());
      }
    }
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  std::optional<WordId> find(const WordKey& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  bool contains(const WordKey& key) const { return index_.count(key) != 0; }

  // Throws NotInModelError naming the word.
  WordId id(const WordKey& key) const {
    if (auto found = find(key)) return *found;
    throw NotInModelError(key.str());
  }

  const WordKey& key(WordId id) const { return entries_.at(id).key; }
  std::uint64_t frequency(WordId id) const { return entries_.at(id).frequency; }
  const std::vector<VocabEntry>& entries() const { return entries_; }
  std::uint64_t min_freq() const { return min_freq_; }
  PosSet pos_filter() const { return pos_filter_; }

  // Depends only on the id -> (lemma, pos) assignment.
  std::uint64_t fingerprint() const {
    Fingerprint fp;
    fp.add(entries_.size());
    for (const auto& e : entries_) {
      fp.add(e.key.lemma);
      fp.add(static_cast<std::uint64_t>(e.key.pos));
    }
    return fp.value();
  }

 private:
  std::vector<VocabEntry> entries_;
  std::unordered_map<WordKey, WordId, WordKeyHash> index_;
  std::uint64_t min_freq_ = 1;
  PosSet pos_filter_ = PosSet::content_words();
};

// Accumulates raw (lemma, pos) frequencies; feed sentences then build().
class VocabularyBuilder {
 public:
  VocabularyBuilder(std::uint64_t min_freq, PosSet pos_filter)
      : min_freq_(min_freq), pos_filter_(pos_filter) {
    if (min_freq < 1) throw ParameterError("min_freq must be >= 1");
    if (pos_filter.empty()) throw ParameterError("pos filter must not be empty");
  }

  void add(const Sentence& s) {
    for (const auto& tok : s.tokens) {
      if (pos_filter_.contains(tok.pos)) ++counts_[tok.key()];
    }
  }

  Vocabulary build() const {
    std::vector<VocabEntry> kept;
    for (const auto& [key, n] : counts_) {
      if (n >= min_freq_) kept.push_back(VocabEntry{key, n});
    }
    return Vocabulary(std::move(kept), min_freq_, pos_filter_);
  }

 private:
  std::uint64_t min_freq_;
  PosSet pos_filter_;
  std::unordered_map<WordKey, std::uint64_t, WordKeyHash> counts_;
};

template <typename SentenceRange>
Vocabulary build_vocabulary(const SentenceRange& sentences, std::uint64_t min_freq,
                            PosSet pos_filter = PosSet::content_words()) {
  VocabularyBuilder builder(min_freq, pos_filter);
  for (const auto& s : sentences) builder.add(s);
  return builder.build();
}

}  // namespace apsyn
