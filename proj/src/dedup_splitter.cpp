#include "merkit/dedup_splitter.hpp"

#include <algorithm>
#include <optional>
#include <random>
#include <unordered_set>

namespace merkit {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

void append_collapsed(std::string& out, std::string_view text) {
  for (char c : text) {
    if (is_space(c)) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
    } else {
      out.push_back(c);
    }
  }
}

std::string strip_trailing_space(std::string s) {
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

std::string canonical_markup(const std::string& markup, const latex::NormalizeOptions& options) {
  const PageDocument page{"record", "", markup, PageFormat::Markdown};
  const auto spans = extract_spans(page);
  std::string out;
  std::size_t cursor = 0;
  for (const FormulaSpan& span : spans) {
    append_collapsed(out, std::string_view(markup).substr(cursor, span.start - cursor));
    // spans only exist when their latex lexes
    const std::string formula = latex::canonical_form(span.latex, options).value_or(span.latex);
    const std::string_view fence = is_display(span.delimiter) ? "$$" : "$";
    out.append(fence).append(formula).append(fence);
    cursor = span.end;
  }
  append_collapsed(out, std::string_view(markup).substr(cursor));
  if (!out.empty() && out.front() == ' ') out.erase(out.begin());
  return strip_trailing_space(std::move(out));
}

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t threshold = (0 - n) % n;
  std::uint64_t x = 0;
  do {
    x = rng();
  } while (x < threshold);
  return x % n;
}

Digest128 key_for(SampleLevel level, std::string_view canonical) {
  std::string material(level_tag(level));
  material.push_back('\x1f');
  material += canonical;
  return digest128(material);
}

}  // namespace

std::string canonical_text(const FormulaRecord& record, const latex::NormalizeOptions& options) {
  if (record.level == SampleLevel::Line) {
    return latex::detokenize(latex::normalize(latex::tokenize(record.latex), options));
  }
  return canonical_markup(record.latex, options);
}

Digest128 canonical_key(const FormulaRecord& record, const latex::NormalizeOptions& options) {
  return key_for(record.level, canonical_text(record, options));
}

DedupResult dedup(const std::vector<FormulaRecord>& records, const DedupOptions& options) {
  DedupResult result;
  for (SampleLevel level : kAllLevels) result.stats[level_index(level)].level = level;

  std::unordered_set<Digest128, Digest128Hash> seen;
  std::vector<std::optional<NearDupIndex>> near(3);
  if (options.near_dup.enabled) {
    for (auto& index : near) index.emplace(options.near_dup);
  }

  for (const FormulaRecord& record : records) {
    DedupStats& stats = result.stats[level_index(record.level)];
    ++stats.before;
    std::string canonical;
    try {
      canonical = canonical_text(record, options.normalization);
    } catch (const latex::LexError&) {
      ++stats.dropped;
      result.quarantined.push_back(record);
      continue;
    }
    const Digest128 key = key_for(record.level, canonical);
    if (!seen.insert(key).second) {
      ++stats.dropped;
      continue;
    }
    if (auto& index = near[level_index(record.level)]) {
      auto shingles = shingle_hashes(canonical, options.near_dup.shingle);
      if (index->has_near_duplicate(shingles)) {
        ++stats.dropped;
        continue;
      }
      index->insert(std::move(shingles));
    }
    ++stats.kept;
    FormulaRecord kept = record;
    kept.dedup_key = key;
    result.kept.push_back(std::move(kept));
  }
  return result;
}

InsufficientSamples::InsufficientSamples(SampleLevel level, std::size_t have, std::size_t need)
    : DataError("not enough " + std::string(level_tag(level)) + " samples for the test split: have " +
                std::to_string(have) + ", need " + std::to_string(need)),
      level_(level),
      have_(have),
      need_(need) {}

SplitResult split(const std::vector<FormulaRecord>& records, const SplitConfig& config) {
  std::array<std::vector<const FormulaRecord*>, 3> by_level;
  for (const FormulaRecord& r : records) by_level[level_index(r.level)].push_back(&r);

  SplitResult result;
  for (SampleLevel level : kAllLevels) {
    auto& group = by_level[level_index(level)];
    if (group.empty()) continue;
    std::sort(group.begin(), group.end(),
              [](const FormulaRecord* a, const FormulaRecord* b) { return a->record_id < b->record_id; });
    for (std::size_t k = 1; k < group.size(); ++k) {
      if (group[k]->record_id == group[k - 1]->record_id) {
        throw DataError("duplicate record_id '" + group[k]->record_id + "'");
      }
    }
    if (group.size() < config.test_per_level) {
      throw InsufficientSamples(level, group.size(), config.test_per_level);
    }

    std::mt19937_64 rng(config.seed ^ (0x9e3779b97f4a7c15ULL * (level_index(level) + 1)));
    std::vector<std::size_t> order(group.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    // partial Fisher-Yates: the first test_per_level slots are the test draw
    for (std::size_t k = 0; k < config.test_per_level; ++k) {
      const std::size_t pick = k + static_cast<std::size_t>(bounded(rng, order.size() - k));
      std::swap(order[k], order[pick]);
    }
    std::vector<bool> is_test(group.size(), false);
    for (std::size_t k = 0; k < config.test_per_level; ++k) is_test[order[k]] = true;
    for (std::size_t k = 0; k < group.size(); ++k) {
      (is_test[k] ? result.test : result.train).push_back(*group[k]);
    }
  }
  return result;
}

void record_split(std::array<DedupStats, 3>& stats, const SplitResult& result) {
  for (auto& s : stats) s.train = s.test = 0;
  for (const auto& r : result.train) ++stats[level_index(r.level)].train;
  for (const auto& r : result.test) ++stats[level_index(r.level)].test;
}

}  // namespace merkit
