#include "harvest/lexicon_pipeline.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "harvest/errors.hpp"
#include "harvest/files.hpp"
#include "harvest/log.hpp"
#include "harvest/text.hpp"

namespace harvest::lexicon {

namespace fs = std::filesystem;

// --- splitting ------------------------------------------------------------------

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Paragraph segments: each ends after a whitespace run holding >= 2 newlines.
std::vector<std::string_view> paragraphs(std::string_view body) {
  std::vector<std::string_view> out;
  std::size_t seg_start = 0;
  std::size_t i = 0;
  while (i < body.size()) {
    if (!is_space(body[i])) {
      ++i;
      continue;
    }
    const std::size_t run_start = i;
    int newlines = 0;
    while (i < body.size() && is_space(body[i])) newlines += body[i++] == '\n';
    if (newlines >= 2 && run_start > seg_start && i < body.size()) {
      out.push_back(body.substr(seg_start, i - seg_start));
      seg_start = i;
    }
  }
  if (seg_start < body.size()) out.push_back(body.substr(seg_start));
  return out;
}

// Splits `segment` so each piece holds at most `max_words` words; pieces end
// right before a word start.
std::vector<std::string_view> hard_split(std::string_view segment, std::size_t max_words) {
  std::vector<std::string_view> out;
  std::size_t piece_start = 0;
  std::size_t words_in_piece = 0;
  std::size_t i = 0;
  while (i < segment.size()) {
    if (is_space(segment[i])) {
      ++i;
      continue;
    }
    if (words_in_piece == max_words) {
      out.push_back(segment.substr(piece_start, i - piece_start));
      piece_start = i;
      words_in_piece = 0;
    }
    ++words_in_piece;
    while (i < segment.size() && !is_space(segment[i])) ++i;
  }
  out.push_back(segment.substr(piece_start));
  return out;
}

}  // namespace

std::vector<TextChunk> split_page(std::string_view page_title, std::string_view body,
                                  std::size_t max_chunk_tokens) {
  if (max_chunk_tokens < 1) throw Error(ErrorCode::kInvalidArgument, "max_chunk_tokens must be >= 1");
  std::vector<TextChunk> chunks;
  if (body.empty()) return chunks;

  std::string current;
  std::size_t current_tokens = 0;
  bool have_current = false;
  auto flush = [&] {
    if (!have_current) return;
    chunks.push_back({std::string(page_title), chunks.size(), std::move(current), current_tokens});
    current.clear();
    current_tokens = 0;
    have_current = false;
  };
  auto add = [&](std::string_view piece, std::size_t tokens) {
    if (have_current && current_tokens + tokens > max_chunk_tokens) flush();
    current += piece;
    current_tokens += tokens;
    have_current = true;
  };

  for (std::string_view para : paragraphs(body)) {
    const std::size_t tokens = text::word_count(para);
    if (tokens <= max_chunk_tokens) {
      add(para, tokens);
      continue;
    }
    for (std::string_view piece : hard_split(para, max_chunk_tokens)) {
      add(piece, text::word_count(piece));
    }
  }
  flush();
  return chunks;
}

// --- page-level merge -----------------------------------------------------------

std::string keyword_key(std::string_view keyword) {
  return text::ascii_lower(text::trim(keyword));
}

std::vector<PageKeyword> merge_page_scores(std::string_view page_title,
                                           std::span<const ChunkScores> chunks) {
  struct Acc {
    std::string display;
    double sum = 0.0;
    std::size_t count = 0;
    std::set<std::size_t> chunk_ids;
  };
  std::vector<Acc> accs;
  std::unordered_map<std::string, std::size_t> index;

  std::vector<const ChunkScores*> ordered;
  for (const auto& c : chunks) ordered.push_back(&c);
  std::stable_sort(ordered.begin(), ordered.end(), [](const ChunkScores* a, const ChunkScores* b) {
    return a->chunk_index < b->chunk_index;
  });

  for (const ChunkScores* chunk : ordered) {
    for (const auto& entry : chunk->entries) {
      std::string key = keyword_key(entry.keyword);
      if (key.empty()) continue;
      auto [it, inserted] = index.try_emplace(std::move(key), accs.size());
      if (inserted) accs.push_back({std::string(text::trim(entry.keyword)), 0.0, 0, {}});
      Acc& acc = accs[it->second];
      acc.sum += entry.importance;
      ++acc.count;
      acc.chunk_ids.insert(chunk->chunk_index);
    }
  }

  std::vector<PageKeyword> out;
  out.reserve(accs.size());
  for (auto& acc : accs) {
    out.push_back({std::move(acc.display), std::string(page_title),
                   acc.sum / static_cast<double>(acc.count), acc.chunk_ids.size()});
  }
  return out;
}

namespace {

// Extraction for several pages with one batched gateway call.
std::vector<std::vector<PageKeyword>> extract_pages(
    std::span<const std::vector<TextChunk>> pages_chunks, std::string_view topic,
    const llm::Gateway& gateway, int max_response_tokens, ExtractionStats& stats) {
  std::vector<llm::CompletionRequest> requests;
  for (const auto& chunks : pages_chunks) {
    for (const auto& chunk : chunks) {
      requests.push_back(llm::make_request(llm::TemplateId::kKeywordExtract,
                                           {{"topic", std::string(topic)}, {"text", chunk.text}},
                                           max_response_tokens));
    }
  }
  const auto responses = gateway.complete_all(requests);

  std::vector<std::vector<PageKeyword>> out;
  std::size_t r = 0;
  for (const auto& chunks : pages_chunks) {
    std::vector<ChunkScores> scores;
    for (const auto& chunk : chunks) {
      ++stats.chunks;
      const std::string& response = responses[r++];
      try {
        auto parsed = llm::parse_scored_keywords(response);
        stats.parse_skips += parsed.skipped;
        scores.push_back({chunk.index, std::move(parsed.entries)});
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kEmptyResult) throw;
        ++stats.empty_chunks;
        log::warn("no keywords recovered from chunk " + std::to_string(chunk.index) + " of '" +
                  chunk.page_title + "'");
      }
    }
    const std::string title = chunks.empty() ? std::string{} : chunks.front().page_title;
    auto merged = merge_page_scores(title, scores);
    if (merged.empty() && !chunks.empty()) log::warn("page '" + title + "' yielded no keywords");
    out.push_back(std::move(merged));
  }
  return out;
}

}  // namespace

std::vector<PageKeyword> extract_page_keywords(std::span<const TextChunk> chunks,
                                               std::string_view topic, const llm::Gateway& gateway,
                                               int max_response_tokens, ExtractionStats* stats) {
  ExtractionStats local;
  std::vector<std::vector<TextChunk>> one{std::vector<TextChunk>(chunks.begin(), chunks.end())};
  auto out = extract_pages(one, topic, gateway, max_response_tokens, local);
  if (stats) {
    stats->chunks += local.chunks;
    stats->empty_chunks += local.empty_chunks;
    stats->parse_skips += local.parse_skips;
  }
  return std::move(out.front());
}

// --- corpus aggregation ---------------------------------------------------------

bool ranks_before(const CorpusKeyword& a, const CorpusKeyword& b) {
  if (a.importance != b.importance) return a.importance > b.importance;
  const std::string ka = keyword_key(a.keyword);
  const std::string kb = keyword_key(b.keyword);
  if (ka != kb) return ka < kb;
  return a.keyword < b.keyword;
}

std::vector<CorpusKeyword> aggregate_corpus(std::span<const PageKeyword> page_keywords,
                                            std::size_t top_n) {
  std::map<std::string, std::vector<const PageKeyword*>> groups;
  for (const auto& pk : page_keywords) {
    std::string key = keyword_key(pk.keyword);
    if (!key.empty()) groups[std::move(key)].push_back(&pk);
  }

  std::vector<CorpusKeyword> out;
  out.reserve(groups.size());
  for (auto& [key, contributions] : groups) {
    std::sort(contributions.begin(), contributions.end(),
              [](const PageKeyword* a, const PageKeyword* b) {
                if (a->page_title != b->page_title) return a->page_title < b->page_title;
                if (a->importance != b->importance) return a->importance < b->importance;
                return a->keyword < b->keyword;
              });
    CorpusKeyword ck;
    ck.keyword = contributions.front()->keyword;
    for (const PageKeyword* pk : contributions) {
      ck.importance += pk->importance;
      if (pk->keyword < ck.keyword) ck.keyword = pk->keyword;
      if (ck.pages.empty() || ck.pages.back() != pk->page_title) ck.pages.push_back(pk->page_title);
    }
    out.push_back(std::move(ck));
  }
  std::sort(out.begin(), out.end(), ranks_before);
  if (out.size() > top_n) out.resize(top_n);
  return out;
}

// --- containment ----------------------------------------------------------------

bool contains_token_run(std::span<const std::string> haystack, std::span<const std::string> needle) {
  if (needle.empty()) return true;
  if (needle.size() > haystack.size()) return false;
  return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) !=
         haystack.end();
}

namespace {

// Indices (into `keywords`) that survive the containment rule.
std::vector<std::size_t> containment_survivors(std::span<const std::string_view> keywords) {
  std::vector<std::vector<std::string>> tokens;
  std::vector<std::size_t> unique;  // first occurrence of each distinct token sequence
  std::set<std::vector<std::string>> seen;
  tokens.reserve(keywords.size());
  for (std::size_t i = 0; i < keywords.size(); ++i) {
    tokens.push_back(text::match_tokens(keywords[i]));
    if (tokens.back().empty()) continue;
    if (seen.insert(tokens.back()).second) unique.push_back(i);
  }
  std::vector<std::size_t> out;
  for (std::size_t b : unique) {
    bool contains_other = false;
    for (std::size_t a : unique) {
      if (a == b || tokens[a].size() >= tokens[b].size()) continue;
      if (contains_token_run(tokens[b], tokens[a])) {
        contains_other = true;
        break;
      }
    }
    if (!contains_other) out.push_back(b);
  }
  return out;
}

}  // namespace

std::vector<std::string> containment_filter(std::span<const std::string> keywords) {
  std::vector<std::string_view> views(keywords.begin(), keywords.end());
  std::vector<std::string> out;
  for (std::size_t i : containment_survivors(views)) out.push_back(keywords[i]);
  return out;
}

std::vector<CorpusKeyword> containment_filter(std::span<const CorpusKeyword> keywords) {
  std::vector<std::string_view> views;
  views.reserve(keywords.size());
  for (const auto& k : keywords) views.push_back(k.keyword);
  std::vector<CorpusKeyword> out;
  for (std::size_t i : containment_survivors(views)) out.push_back(keywords[i]);
  return out;
}

// --- provider-backed filters ----------------------------------------------------

PageFilterOutcome filter_pages(std::vector<pages::SourcePage> candidates, std::string_view topic,
                               const llm::Gateway& gateway, std::size_t filter_words,
                               int max_response_tokens) {
  std::vector<llm::CompletionRequest> requests;
  requests.reserve(candidates.size());
  for (const auto& page : candidates) {
    requests.push_back(llm::make_request(llm::TemplateId::kPageFilter,
                                         {{"page_name", page.title},
                                          {"topic", std::string(topic)},
                                          {"first_100_words", pages::first_n_words(page, filter_words)}},
                                         max_response_tokens));
  }
  const auto verdicts = gateway.complete_all(requests);

  PageFilterOutcome outcome;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    bool keep = false;
    try {
      keep = llm::parse_yes_no(verdicts[i]);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kUnparseableVerdict) throw;
      log::warn("unparseable page verdict for '" + candidates[i].title + "', treating as NO");
      outcome.unparseable.push_back(candidates[i].title);
    }
    if (keep) {
      outcome.kept.push_back(std::move(candidates[i]));
    } else {
      outcome.rejected.push_back(candidates[i].title);
    }
  }
  return outcome;
}

std::vector<CorpusKeyword> generic_filter(std::span<const CorpusKeyword> keywords,
                                          const llm::Gateway& gateway, int max_response_tokens) {
  if (keywords.empty()) throw Error(ErrorCode::kLexiconEmpty, "no keywords to filter");
  std::string list;
  for (std::size_t i = 0; i < keywords.size(); ++i) {
    if (i) list += ", ";
    list += keywords[i].keyword;
  }
  const auto response = gateway.complete(
      llm::make_request(llm::TemplateId::kKeywordFilter, {{"keyword_list", list}}, max_response_tokens));

  std::set<std::string> returned;
  try {
    for (const auto& k : llm::parse_keyword_list(response)) returned.insert(keyword_key(k));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kEmptyResult) throw;
    throw Error(ErrorCode::kLexiconEmpty, "keyword filter returned no keywords");
  }
  std::vector<CorpusKeyword> out;
  for (const auto& k : keywords) {
    if (returned.contains(keyword_key(k.keyword))) out.push_back(k);
  }
  if (out.empty()) throw Error(ErrorCode::kLexiconEmpty, "keyword filter kept nothing");
  return out;
}

// --- config / files -------------------------------------------------------------

nlohmann::json PipelineConfig::to_json() const {
  return {{"seed_terms", seed_terms},
          {"topic", topic},
          {"per_seed_search_limit", per_seed_search_limit},
          {"filter_words", filter_words},
          {"max_chunk_tokens", max_chunk_tokens},
          {"top_n", top_n},
          {"extract_response_tokens", extract_response_tokens},
          {"filter_response_tokens", filter_response_tokens}};
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  PipelineConfig c;
  c.seed_terms = j.value("seed_terms", c.seed_terms);
  c.topic = j.value("topic", c.topic);
  c.per_seed_search_limit = j.value("per_seed_search_limit", c.per_seed_search_limit);
  c.filter_words = j.value("filter_words", c.filter_words);
  c.max_chunk_tokens = j.value("max_chunk_tokens", c.max_chunk_tokens);
  c.top_n = j.value("top_n", c.top_n);
  c.extract_response_tokens = j.value("extract_response_tokens", c.extract_response_tokens);
  c.filter_response_tokens = j.value("filter_response_tokens", c.filter_response_tokens);
  return c;
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kConfigInvalid, what); };
  if (seed_terms.empty()) fail("seed_terms is empty");
  for (const auto& s : seed_terms) {
    if (text::trim(s).empty()) fail("blank seed term");
  }
  if (text::trim(topic).empty()) fail("topic is empty");
  if (per_seed_search_limit < 1) fail("per_seed_search_limit must be >= 1");
  if (filter_words < 1) fail("filter_words must be >= 1");
  if (max_chunk_tokens < 1) fail("max_chunk_tokens must be >= 1");
  if (top_n < 1) fail("top_n must be >= 1");
  if (extract_response_tokens < 1 || filter_response_tokens < 1) fail("response token limits must be >= 1");
}

nlohmann::json lexicon_entries_json(std::span<const CorpusKeyword> entries) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : entries) {
    arr.push_back({{"keyword", e.keyword}, {"importance", e.importance}, {"pages", e.pages}});
  }
  return arr;
}

std::vector<CorpusKeyword> lexicon_entries_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kConfigInvalid, "lexicon must be a JSON array");
  std::vector<CorpusKeyword> out;
  for (const auto& e : j) {
    CorpusKeyword k;
    if (e.is_string()) {
      k.keyword = e.get<std::string>();
    } else {
      k.keyword = e.at("keyword").get<std::string>();
      k.importance = e.value("importance", 0.0);
      k.pages = e.value("pages", std::vector<std::string>{});
    }
    out.push_back(std::move(k));
  }
  return out;
}

std::vector<CorpusKeyword> load_lexicon_file(const fs::path& path) {
  const auto doc = nlohmann::json::parse(files::read_file(path), nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::kConfigInvalid, "lexicon is not JSON: " + path.string());
  return lexicon_entries_from_json(doc);
}

std::string serialize_lexicon(std::span<const CorpusKeyword> entries) {
  return lexicon_entries_json(entries).dump(2) + "\n";
}

// --- pipeline -------------------------------------------------------------------

namespace {

nlohmann::json page_keywords_json(std::span<const PageKeyword> pks) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& pk : pks) {
    arr.push_back({{"keyword", pk.keyword},
                   {"page_title", pk.page_title},
                   {"importance", pk.importance},
                   {"chunk_hits", pk.chunk_hits}});
  }
  return arr;
}

std::vector<PageKeyword> page_keywords_from_json(const nlohmann::json& arr) {
  std::vector<PageKeyword> out;
  for (const auto& e : arr) {
    out.push_back({e.at("keyword").get<std::string>(), e.at("page_title").get<std::string>(),
                   e.at("importance").get<double>(), e.at("chunk_hits").get<std::size_t>()});
  }
  return out;
}

// Persisted provider-backed stage output, keyed by a fingerprint of every
// input that influences it.
class StageStore {
 public:
  StageStore(fs::path dir, std::string fingerprint)
      : dir_(std::move(dir)), fingerprint_(std::move(fingerprint)) {}

  std::optional<nlohmann::json> load(const std::string& stage) const {
    if (dir_.empty()) return std::nullopt;
    const fs::path path = dir_ / (stage + ".json");
    if (!fs::exists(path)) return std::nullopt;
    auto doc = nlohmann::json::parse(files::read_file(path), nullptr, false);
    if (doc.is_discarded() || doc.value("fingerprint", std::string{}) != fingerprint_) {
      return std::nullopt;
    }
    log::info("resuming stage " + stage + " from " + path.string());
    return doc.at("data");
  }

  void save(const std::string& stage, nlohmann::json data) const {
    if (dir_.empty()) return;
    nlohmann::json doc = {{"fingerprint", fingerprint_}, {"data", std::move(data)}};
    files::write_file_atomic(dir_ / (stage + ".json"), doc.dump(1) + "\n");
  }

 private:
  fs::path dir_;
  std::string fingerprint_;
};

template <typename Fn>
auto run_stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config, pages::PageSource& source,
                            const llm::Gateway& gateway, const fs::path& stage_dir) {
  config.validate();
  const nlohmann::json provider = gateway.provider().describe();
  const StageStore store(stage_dir, files::sha256_hex(config.to_json().dump() + provider.dump()));

  nlohmann::json counts = nlohmann::json::object();

  // 1. search
  struct Candidate {
    std::string title;
    std::string seed;
  };
  std::vector<Candidate> candidates = run_stage("search", [&] {
    std::vector<Candidate> out;
    std::set<std::string> seen;
    for (const auto& seed : config.seed_terms) {
      for (auto& title : source.search(seed, config.per_seed_search_limit)) {
        if (seen.insert(title).second) out.push_back({std::move(title), seed});
      }
    }
    return out;
  });
  counts["titles_found"] = candidates.size();

  // 2. fetch
  std::vector<pages::SourcePage> fetched = run_stage("fetch", [&] {
    std::vector<pages::SourcePage> out;
    std::size_t missing = 0;
    for (const auto& c : candidates) {
      try {
        out.push_back(source.fetch(c.title, c.seed));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kPageNotFound) throw;
        ++missing;
        log::warn("page not found: " + c.title);
      }
    }
    counts["pages_missing"] = missing;
    return out;
  });
  counts["pages_fetched"] = fetched.size();

  // 3. filter_pages
  std::vector<pages::SourcePage> kept = run_stage("filter_pages", [&] {
    std::vector<std::string> kept_titles;
    std::size_t unparseable = 0;
    if (auto cached = store.load("filter_pages")) {
      kept_titles = cached->at("kept").get<std::vector<std::string>>();
      unparseable = cached->at("unparseable").get<std::size_t>();
    } else {
      auto outcome = filter_pages(fetched, config.topic, gateway, config.filter_words);
      for (const auto& p : outcome.kept) kept_titles.push_back(p.title);
      unparseable = outcome.unparseable.size();
      store.save("filter_pages", {{"kept", kept_titles}, {"unparseable", unparseable}});
    }
    counts["verdicts_unparseable"] = unparseable;
    const std::set<std::string> keep(kept_titles.begin(), kept_titles.end());
    std::vector<pages::SourcePage> out;
    for (auto& p : fetched) {
      if (keep.contains(p.title)) out.push_back(std::move(p));
    }
    return out;
  });
  counts["pages_kept"] = kept.size();

  // 4. split_page
  std::vector<std::vector<TextChunk>> chunks = run_stage("split_page", [&] {
    std::vector<std::vector<TextChunk>> out;
    for (const auto& page : kept) out.push_back(split_page(page, config.max_chunk_tokens));
    return out;
  });
  std::size_t chunk_total = 0;
  for (const auto& c : chunks) chunk_total += c.size();
  counts["chunks"] = chunk_total;

  // 5. extract_page_keywords
  std::vector<PageKeyword> page_keywords = run_stage("extract_page_keywords", [&] {
    if (auto cached = store.load("extract_page_keywords")) {
      counts["chunks_empty"] = cached->at("chunks_empty");
      counts["parse_skips"] = cached->at("parse_skips");
      return page_keywords_from_json(cached->at("page_keywords"));
    }
    ExtractionStats stats;
    std::vector<PageKeyword> out;
    for (auto& per_page : extract_pages(chunks, config.topic, gateway, config.extract_response_tokens, stats)) {
      out.insert(out.end(), std::make_move_iterator(per_page.begin()),
                 std::make_move_iterator(per_page.end()));
    }
    counts["chunks_empty"] = stats.empty_chunks;
    counts["parse_skips"] = stats.parse_skips;
    store.save("extract_page_keywords", {{"page_keywords", page_keywords_json(out)},
                                         {"chunks_empty", stats.empty_chunks},
                                         {"parse_skips", stats.parse_skips}});
    return out;
  });
  counts["page_keywords"] = page_keywords.size();

  // 6. aggregate_corpus
  std::vector<CorpusKeyword> ranked = run_stage("aggregate_corpus", [&] {
    auto out = aggregate_corpus(page_keywords, config.top_n);
    if (out.empty()) throw Error(ErrorCode::kLexiconEmpty, "no keywords extracted from any page");
    return out;
  });
  counts["after_top_n"] = ranked.size();

  // 7. containment_filter
  std::vector<CorpusKeyword> contained =
      run_stage("containment_filter", [&] { return containment_filter(ranked); });
  counts["after_containment"] = contained.size();

  // 8. generic_filter
  std::vector<CorpusKeyword> final_entries = run_stage("generic_filter", [&] {
    if (auto cached = store.load("generic_filter")) return lexicon_entries_from_json(*cached);
    auto out = generic_filter(contained, gateway, config.filter_response_tokens);
    store.save("generic_filter", lexicon_entries_json(out));
    return out;
  });
  counts["lexicon"] = final_entries.size();

  PipelineResult result;
  result.lexicon.topic = config.topic;
  result.lexicon.entries = std::move(final_entries);
  result.lexicon.config_snapshot = config.to_json();
  result.metadata = {{"topic", config.topic},
                     {"config", config.to_json()},
                     {"provider", provider},
                     {"counts", counts}};
  return result;
}

}  // namespace harvest::lexicon
