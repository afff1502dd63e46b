#pragma once

#include "merkit/corpus_extractor.hpp"
#include "merkit/errors.hpp"
#include "merkit/latex_lexer.hpp"
#include "merkit/near_dup.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace merkit {

struct DedupStats {
  SampleLevel level = SampleLevel::Line;
  std::size_t before = 0;
  std::size_t kept = 0;
  std::size_t dropped = 0;
  std::size_t train = 0;
  std::size_t test = 0;

  bool operator==(const DedupStats&) const = default;
};

struct DedupOptions {
  latex::NormalizeOptions normalization;
  NearDupOptions near_dup;
};

// Canonical text a record is deduplicated on. Line records are the normalized
// formula; Paragraph/Page records keep their text (whitespace collapsed) with each
// embedded formula normalized and re-delimited as $...$ or $$...$$.
// Throws latex::LexError when a Line record does not lex.
std::string canonical_text(const FormulaRecord& record, const latex::NormalizeOptions& options = {});

// Digest of the level tag and canonical_text. Throws latex::LexError.
Digest128 canonical_key(const FormulaRecord& record, const latex::NormalizeOptions& options = {});

struct DedupResult {
  std::vector<FormulaRecord> kept;         // dedup_key filled in
  std::vector<FormulaRecord> quarantined;  // did not lex; counted as dropped
  std::array<DedupStats, 3> stats;         // indexed by level_index
};

// Keeps the first record of every canonical key (input order), per level.
DedupResult dedup(const std::vector<FormulaRecord>& records, const DedupOptions& options = {});

struct SplitConfig {
  std::size_t test_per_level = 1000;
  std::uint64_t seed = 0;
};

class InsufficientSamples : public DataError {
 public:
  InsufficientSamples(SampleLevel level, std::size_t have, std::size_t need);

  SampleLevel level() const noexcept { return level_; }
  std::size_t have() const noexcept { return have_; }
  std::size_t need() const noexcept { return need_; }

 private:
  SampleLevel level_;
  std::size_t have_;
  std::size_t need_;
};

struct SplitResult {
  // Both sorted by (level, record_id).
  std::vector<FormulaRecord> train;
  std::vector<FormulaRecord> test;
};

// Draws test_per_level records from every level present. The draw depends only on
// the set of record ids and the seed, not on input order. Throws
// InsufficientSamples, or DataError on duplicate record ids.
SplitResult split(const std::vector<FormulaRecord>& records, const SplitConfig& config);

// Fills the train/test counters of `stats` from a split.
void record_split(std::array<DedupStats, 3>& stats, const SplitResult& result);

}  // namespace merkit
