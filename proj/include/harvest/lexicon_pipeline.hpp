#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "harvest/llm_gateway.hpp"
#include "harvest/page_source.hpp"

namespace harvest::lexicon {

inline constexpr std::size_t kDefaultMaxChunkTokens = 3000;
inline constexpr std::size_t kDefaultTopN = 200;
inline constexpr std::size_t kDefaultFilterWords = 100;
inline constexpr std::size_t kDefaultPerSeedSearchLimit = 40;

struct TextChunk {
  std::string page_title;
  std::size_t index = 0;
  std::string text;
  std::size_t token_count = 0;  // whitespace-delimited words
};

// Greedy split on paragraph boundaries (blank lines), falling back to a hard
// word-boundary split for oversized paragraphs. Chunks concatenate back to
// `body` byte-for-byte and each holds at most max_chunk_tokens words.
std::vector<TextChunk> split_page(std::string_view page_title, std::string_view body,
                                  std::size_t max_chunk_tokens);
inline std::vector<TextChunk> split_page(const pages::SourcePage& page,
                                         std::size_t max_chunk_tokens) {
  return split_page(page.title, page.body, max_chunk_tokens);
}

struct PageKeyword {
  std::string keyword;  // surface form of the first occurrence on the page
  std::string page_title;
  double importance = 0.0;  // mean of the chunk-level scores
  std::size_t chunk_hits = 0;
};

struct CorpusKeyword {
  std::string keyword;
  double importance = 0.0;  // sum of page-level importances
  std::vector<std::string> pages;  // sorted, unique
};

// Case-folded identity used for merging keywords.
std::string keyword_key(std::string_view keyword);

struct ChunkScores {
  std::size_t chunk_index = 0;
  std::vector<llm::ScoredKeyword> entries;
};

// Averages each keyword's scores within one page. Output follows first
// appearance (chunk order, then position in the chunk).
std::vector<PageKeyword> merge_page_scores(std::string_view page_title,
                                           std::span<const ChunkScores> chunks);

struct ExtractionStats {
  std::size_t chunks = 0;
  std::size_t empty_chunks = 0;
  std::size_t parse_skips = 0;
};

// One KeywordExtract completion per chunk, then merge_page_scores. Chunks
// whose response has no valid pair contribute nothing (counted, logged).
std::vector<PageKeyword> extract_page_keywords(std::span<const TextChunk> chunks,
                                               std::string_view topic, const llm::Gateway& gateway,
                                               int max_response_tokens = 2048,
                                               ExtractionStats* stats = nullptr);

// Ranking order: importance descending, then case-folded keyword, then raw bytes.
bool ranks_before(const CorpusKeyword& a, const CorpusKeyword& b);

// Sums page importances per case-folded keyword and keeps the top_n by rank.
// Per-keyword sums run in page-title order so the result does not depend on
// input order.
std::vector<CorpusKeyword> aggregate_corpus(std::span<const PageKeyword> page_keywords,
                                            std::size_t top_n = kDefaultTopN);

// True iff `needle` occurs as a contiguous run inside `haystack`.
bool contains_token_run(std::span<const std::string> haystack, std::span<const std::string> needle);

// Drops every keyword that contains another keyword as a contiguous
// case-insensitive token run. Keywords with identical token sequences keep
// their first occurrence; keywords with no tokens are dropped. Input order is
// preserved for survivors.
std::vector<std::string> containment_filter(std::span<const std::string> keywords);
std::vector<CorpusKeyword> containment_filter(std::span<const CorpusKeyword> keywords);

struct PageFilterOutcome {
  std::vector<pages::SourcePage> kept;
  std::vector<std::string> rejected;
  std::vector<std::string> unparseable;  // counted as rejected too
};

// Asks the PageFilter prompt about each page (title + first `filter_words`
// words). Unparseable verdicts count as NO.
PageFilterOutcome filter_pages(std::vector<pages::SourcePage> candidates, std::string_view topic,
                               const llm::Gateway& gateway,
                               std::size_t filter_words = kDefaultFilterWords,
                               int max_response_tokens = 16);

// Keeps the keywords the KeywordFilter response returns (case-insensitive),
// in their original order. kLexiconEmpty when nothing survives.
std::vector<CorpusKeyword> generic_filter(std::span<const CorpusKeyword> keywords,
                                          const llm::Gateway& gateway,
                                          int max_response_tokens = 4096);

struct PipelineConfig {
  std::vector<std::string> seed_terms;
  std::string topic;
  std::size_t per_seed_search_limit = kDefaultPerSeedSearchLimit;
  std::size_t filter_words = kDefaultFilterWords;
  std::size_t max_chunk_tokens = kDefaultMaxChunkTokens;
  std::size_t top_n = kDefaultTopN;
  int extract_response_tokens = 2048;
  int filter_response_tokens = 4096;

  nlohmann::json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& j);
  void validate() const;
};

struct KeywordLexicon {
  std::string topic;
  std::vector<CorpusKeyword> entries;
  nlohmann::json config_snapshot;
};

// The lexicon file: a JSON array of {keyword, importance, pages}.
nlohmann::json lexicon_entries_json(std::span<const CorpusKeyword> entries);
std::vector<CorpusKeyword> lexicon_entries_from_json(const nlohmann::json& j);
std::vector<CorpusKeyword> load_lexicon_file(const std::filesystem::path& path);
std::string serialize_lexicon(std::span<const CorpusKeyword> entries);

struct PipelineResult {
  KeywordLexicon lexicon;
  nlohmann::json metadata;  // per-stage counts, parse skips, config, provider
};

// search -> fetch -> filter_pages -> split_page -> extract_page_keywords ->
// aggregate_corpus -> containment_filter -> generic_filter.
// Stages that call the provider persist their output under `stage_dir` (when
// non-empty) and are reused on the next run with the same configuration.
// Stage failures surface as StageError naming the stage.
PipelineResult run_pipeline(const PipelineConfig& config, pages::PageSource& source,
                            const llm::Gateway& gateway,
                            const std::filesystem::path& stage_dir = {});

}  // namespace harvest::lexicon
