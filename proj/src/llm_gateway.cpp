#include "harvest/llm_gateway.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <optional>
#include <set>
#include <thread>

#include "harvest/errors.hpp"
#include "harvest/files.hpp"
#include "harvest/text.hpp"
#include "http_client.hpp"

namespace harvest::llm {

namespace {

constexpr std::string_view kPageFilterBody =
    "Evaluate the content of the Wikipedia page titled {{page_name}} to determine if it is "
    "related to {{topic}}. Consider the page name and the first 100 words of the content. "
    "Output only YES if the content is related to the war; otherwise, output NO.\n"
    "First 100 words: {{first_100_words}}";

constexpr std::string_view kKeywordExtractBody =
    "Please analyze the provided text chunk from the Wikipedia page about {{topic}}. Your task "
    "is to extract keywords that are directly related to this topic. Each keyword should be no "
    "longer than three tokens. After identifying these keywords, evaluate their importance for "
    "the purpose of social media message filtration. Rate each keyword's importance on a scale "
    "from 0 to 5, where 0 means the keyword is least important and 5 means it is extremely "
    "important for filtering messages. Present the output as a list of keyword-importance "
    "pairs, separated by commas. Format each pair with the keyword followed by a colon and its "
    "importance rating. For example, \"keyword1: 4, keyword2: 2\". The output should be a "
    "continuous string text without any line breaks or bullet points.\n"
    "Text: {{text}}";

constexpr std::string_view kKeywordFilterBody =
    "Please filter the provided list of keywords based on the following criteria:\n"
    "1. Exclude any keywords that are names of countries or presidents.\n"
    "2. Exclude any keywords that are names of news organizations or social media platforms, "
    "such as \"TikTok\" or \"BBC\".\n"
    "3. In the list, if a keyword contains another keyword, remove the longer keyword. For "
    "example, if the list includes both \"2023 Israel-Hamas war\" and \"Hamas\", remove \"2023 "
    "Israel-Hamas war\".\n"
    "Your task is to process the list and return a filtered set of keywords that meet these "
    "criteria. Please present the filtered keywords in a list format.\n"
    "Keyword list: {{keyword_list}}";

constexpr std::string_view kOpen = "{{";
constexpr std::string_view kClose = "}}";

template <typename Fn>
void scan_template(std::string_view body, Fn&& on_piece) {
  std::size_t pos = 0;
  while (pos < body.size()) {
    const auto open = body.find(kOpen, pos);
    if (open == std::string_view::npos) {
      on_piece(body.substr(pos), false);
      return;
    }
    const auto close = body.find(kClose, open + kOpen.size());
    if (close == std::string_view::npos) {
      on_piece(body.substr(pos), false);
      return;
    }
    on_piece(body.substr(pos, open - pos), false);
    on_piece(body.substr(open + kOpen.size(), close - open - kOpen.size()), true);
    pos = close + kClose.size();
  }
}

PromptTemplate build_template(TemplateId id, std::string_view body) {
  PromptTemplate t{id, body, {}};
  scan_template(body, [&](std::string_view piece, bool is_name) {
    if (is_name && std::find(t.placeholders.begin(), t.placeholders.end(), piece) ==
                       t.placeholders.end()) {
      t.placeholders.push_back(piece);
    }
  });
  return t;
}

}  // namespace

std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::kPageFilter: return "PageFilter";
    case TemplateId::kKeywordExtract: return "KeywordExtract";
    case TemplateId::kKeywordFilter: return "KeywordFilter";
  }
  return "Unknown";
}

const PromptTemplate& prompt_template(TemplateId id) {
  static const PromptTemplate page_filter = build_template(TemplateId::kPageFilter, kPageFilterBody);
  static const PromptTemplate extract =
      build_template(TemplateId::kKeywordExtract, kKeywordExtractBody);
  static const PromptTemplate filter =
      build_template(TemplateId::kKeywordFilter, kKeywordFilterBody);
  switch (id) {
    case TemplateId::kPageFilter: return page_filter;
    case TemplateId::kKeywordExtract: return extract;
    case TemplateId::kKeywordFilter: return filter;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown template id");
}

std::string render(TemplateId id, const Variables& variables) {
  const PromptTemplate& t = prompt_template(id);
  for (std::string_view name : t.placeholders) {
    if (variables.find(name) == variables.end()) {
      throw Error(ErrorCode::kMissingVariable, std::string(name));
    }
  }
  std::string out;
  out.reserve(t.body.size());
  scan_template(t.body, [&](std::string_view piece, bool is_name) {
    if (is_name) {
      out += variables.find(piece)->second;
    } else {
      out += piece;
    }
  });
  return out;
}

CompletionRequest make_request(TemplateId id, Variables variables, int max_response_tokens) {
  if (max_response_tokens <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_response_tokens must be positive");
  }
  const PromptTemplate& t = prompt_template(id);
  for (std::string_view name : t.placeholders) {
    if (variables.find(name) == variables.end()) {
      throw Error(ErrorCode::kMissingVariable, std::string(name));
    }
  }
  for (const auto& [name, value] : variables) {
    if (std::find(t.placeholders.begin(), t.placeholders.end(), name) == t.placeholders.end()) {
      throw Error(ErrorCode::kUnexpectedVariable, name);
    }
  }
  return CompletionRequest{id, std::move(variables), max_response_tokens};
}

std::string prompt_hash(std::string_view prompt) { return files::sha256_hex(prompt); }

// --- stub provider ------------------------------------------------------------

namespace {

const std::set<std::string, std::less<>>& stub_stopwords() {
  static const std::set<std::string, std::less<>> words = {
      "A",     "After", "An",    "And",   "As",     "At",    "Before", "But",   "By",
      "During", "For",  "From",  "He",    "Her",    "His",   "However", "I",    "If",
      "In",    "It",    "Its",   "Of",    "On",     "Or",    "She",    "Since", "That",
      "The",   "Their", "These", "They",  "This",   "Those", "To",     "We",    "When",
      "While", "With"};
  return words;
}

std::string_view strip_edge_punct(std::string_view w) {
  auto is_punct = [](char c) {
    return c == '"' || c == '\'' || c == '(' || c == ')' || c == '[' || c == ']' || c == '.' ||
           c == ',' || c == ';' || c == ':' || c == '!' || c == '?';
  };
  while (!w.empty() && is_punct(w.front())) w.remove_prefix(1);
  while (!w.empty() && is_punct(w.back())) w.remove_suffix(1);
  return w;
}

// Capitalized word runs (at most three words each) become candidate keywords.
std::vector<std::string> stub_candidates(std::string_view chunk) {
  constexpr std::size_t kMaxCandidates = 15;
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::vector<std::string_view> run;
  auto flush = [&] {
    if (!run.empty()) {
      std::string kw;
      for (std::size_t i = 0; i < run.size(); ++i) {
        if (i) kw += ' ';
        kw += run[i];
      }
      if (seen.insert(text::ascii_lower(kw)).second) out.push_back(std::move(kw));
    }
    run.clear();
  };
  for (std::string_view raw : text::words(chunk)) {
    if (out.size() >= kMaxCandidates) break;
    const std::string_view w = strip_edge_punct(raw);
    const bool ends_clause = !raw.empty() && (raw.back() == ',' || raw.back() == '.' ||
                                              raw.back() == ';' || raw.back() == ':');
    const bool capitalized = !w.empty() && w.front() >= 'A' && w.front() <= 'Z' &&
                             w.find_first_of(",:") == std::string_view::npos &&
                             !stub_stopwords().contains(w);
    if (!capitalized) {
      flush();
      continue;
    }
    run.push_back(w);
    if (run.size() == kMaxKeywordTokens || ends_clause) flush();
  }
  if (out.size() < kMaxCandidates) flush();
  if (out.size() > kMaxCandidates) out.resize(kMaxCandidates);
  return out;
}

std::string_view after_marker(std::string_view prompt, std::string_view marker) {
  const auto pos = prompt.find(marker);
  if (pos == std::string_view::npos) return {};
  return prompt.substr(pos + marker.size());
}

bool starts_with_body_prefix(std::string_view prompt, std::string_view body) {
  const auto cut = body.find(kOpen);
  return prompt.starts_with(body.substr(0, cut));
}

}  // namespace

StubProvider::StubProvider(std::map<std::string, std::string> fixtures)
    : fixtures_(std::move(fixtures)) {}

StubProvider StubProvider::from_fixture_file(const std::string& path) {
  const auto doc = nlohmann::json::parse(files::read_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::kConfigInvalid, "stub fixture map must be a JSON object: " + path);
  }
  std::map<std::string, std::string> fixtures;
  for (const auto& [hash, response] : doc.items()) {
    if (!response.is_string()) {
      throw Error(ErrorCode::kConfigInvalid, "stub fixture value for " + hash + " is not text");
    }
    fixtures.emplace(hash, response.get<std::string>());
  }
  return StubProvider(std::move(fixtures));
}

ProviderReply StubProvider::send(const std::string& prompt, int /*max_response_tokens*/) {
  const std::string hash = prompt_hash(prompt);
  if (auto it = fixtures_.find(hash); it != fixtures_.end()) return {it->second, false};

  if (starts_with_body_prefix(prompt, kPageFilterBody)) return {"YES", false};

  if (starts_with_body_prefix(prompt, kKeywordFilterBody)) {
    return {std::string(after_marker(prompt, "\nKeyword list: ")), false};
  }

  if (starts_with_body_prefix(prompt, kKeywordExtractBody)) {
    const std::uint64_t seed = text::fnv1a64(prompt);
    std::vector<ScoredKeyword> pairs;
    for (auto& kw : stub_candidates(after_marker(prompt, "\nText: "))) {
      const auto score = static_cast<double>((seed ^ text::fnv1a64(text::ascii_lower(kw))) % 6);
      pairs.push_back({std::move(kw), score});
    }
    return {format_scored_keywords(pairs), false};
  }

  return {"stub:" + hash.substr(0, 16), false};
}

nlohmann::json StubProvider::describe() const {
  return {{"kind", "stub"}, {"fixtures", fixtures_.size()}};
}

// --- HTTP provider ------------------------------------------------------------

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw Error(ErrorCode::kConfigInvalid, "provider endpoint unset");
  if (config_.model.empty()) throw Error(ErrorCode::kConfigInvalid, "provider model unset");
}

ProviderReply HttpProvider::send(const std::string& prompt, int max_response_tokens) {
  const nlohmann::json body = {
      {"model", config_.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", config_.temperature},
      {"max_tokens", max_response_tokens},
  };
  http::Fields headers;
  if (!config_.api_key.empty()) headers.emplace_back("Authorization", "Bearer " + config_.api_key);
  const auto res =
      http::post(config_.endpoint, body.dump(), "application/json", headers, config_.timeout_seconds);
  if (!res) throw Error(ErrorCode::kTransientFailure, "no response from " + config_.endpoint);
  if (res->status == 429 || res->status >= 500) {
    throw Error(ErrorCode::kTransientFailure, "HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kProviderUnavailable, "HTTP " + std::to_string(res->status));
  }
  const auto doc = nlohmann::json::parse(res->body, nullptr, false);
  if (doc.is_discarded() || !doc.contains("choices") || !doc["choices"].is_array() ||
      doc["choices"].empty()) {
    throw Error(ErrorCode::kProviderUnavailable, "unexpected completion payload");
  }
  const auto& choice = doc["choices"][0];
  ProviderReply reply;
  if (choice.contains("message") && choice["message"].contains("content") &&
      choice["message"]["content"].is_string()) {
    reply.text = choice["message"]["content"].get<std::string>();
  } else if (choice.contains("text") && choice["text"].is_string()) {
    reply.text = choice["text"].get<std::string>();
  } else {
    throw Error(ErrorCode::kProviderUnavailable, "completion without text");
  }
  reply.truncated = choice.value("finish_reason", std::string{}) == "length";
  return reply;
}

nlohmann::json HttpProvider::describe() const {
  return {{"kind", "http"},
          {"endpoint", config_.endpoint},
          {"model", config_.model},
          {"temperature", config_.temperature}};
}

// --- gateway ----------------------------------------------------------------

Gateway::Gateway(std::shared_ptr<CompletionProvider> provider, RetryPolicy retry,
                 std::size_t max_in_flight)
    : provider_(std::move(provider)), retry_(retry), max_in_flight_(std::max<std::size_t>(1, max_in_flight)) {
  if (!provider_) throw Error(ErrorCode::kConfigInvalid, "no completion provider configured");
}

std::string Gateway::complete(const CompletionRequest& request) const {
  const std::string prompt = render(request.template_id, request.variables);
  auto delay = retry_.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    ProviderReply reply;
    try {
      reply = provider_->send(prompt, request.max_response_tokens);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kTransientFailure) throw;
      if (attempt >= retry_.max_retries) {
        throw Error(ErrorCode::kProviderUnavailable,
                    "gave up after " + std::to_string(attempt + 1) + " attempts: " + e.detail());
      }
      std::this_thread::sleep_for(delay);
      delay = std::chrono::milliseconds(
          static_cast<long long>(static_cast<double>(delay.count()) * retry_.backoff_multiplier));
      continue;
    }
    if (reply.truncated) {
      throw Error(ErrorCode::kResponseTooLong,
                  std::string(to_string(request.template_id)) + " response truncated");
    }
    return std::move(reply.text);
  }
}

std::vector<std::string> Gateway::complete_all(std::span<const CompletionRequest> requests) const {
  std::vector<std::string> results(requests.size());
  const std::size_t workers = std::min(max_in_flight_, requests.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < requests.size(); ++i) results[i] = complete(requests[i]);
    return results;
  }
  std::vector<std::exception_ptr> errors(requests.size());
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < requests.size(); i = next.fetch_add(1)) {
          try {
            results[i] = complete(requests[i]);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  // Lowest failing index wins so the surfaced error does not depend on scheduling.
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

// --- parsing ----------------------------------------------------------------

bool parse_yes_no(std::string_view text) {
  std::size_t i = 0;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
  while (i < text.size() && !alpha(text[i])) ++i;
  const std::size_t start = i;
  while (i < text.size() && alpha(text[i])) ++i;
  const std::string_view token = text.substr(start, i - start);
  if (text::iequals(token, "yes")) return true;
  if (text::iequals(token, "no")) return false;
  throw Error(ErrorCode::kUnparseableVerdict, std::string(text.substr(0, 80)));
}

namespace {

std::string_view strip_quotes(std::string_view s) {
  s = text::trim(s);
  while (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                           (s.front() == '\'' && s.back() == '\''))) {
    s = text::trim(s.substr(1, s.size() - 2));
  }
  return s;
}

std::optional<double> parse_score(std::string_view s) {
  s = text::trim(s);
  while (!s.empty() && s.back() == '.') s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

ScoredKeywordList parse_scored_keywords(std::string_view text) {
  ScoredKeywordList out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    const std::string_view pair = text::trim(text.substr(pos, comma - pos));
    pos = comma + 1;
    if (pair.empty()) continue;
    const auto colon = pair.rfind(':');
    if (colon == std::string_view::npos) {
      ++out.skipped;
      continue;
    }
    const std::string_view keyword = strip_quotes(pair.substr(0, colon));
    const auto score = parse_score(pair.substr(colon + 1));
    if (keyword.empty() || !score || text::word_count(keyword) > kMaxKeywordTokens) {
      ++out.skipped;
      continue;
    }
    out.entries.push_back({std::string(keyword), std::clamp(*score, kMinImportance, kMaxImportance)});
  }
  if (out.entries.empty()) {
    throw Error(ErrorCode::kEmptyResult, "no keyword:score pairs recovered");
  }
  return out;
}

std::string format_scored_keywords(std::span<const ScoredKeyword> entries) {
  std::string out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i) out += ", ";
    out += entries[i].keyword;
    out += ": ";
    out += text::format_number(entries[i].importance);
  }
  return out;
}

namespace {

std::string_view strip_list_marker(std::string_view item) {
  item = text::trim(item);
  constexpr std::string_view kBullet = "\xE2\x80\xA2";  // U+2022
  if (item.starts_with(kBullet)) {
    item.remove_prefix(kBullet.size());
  } else if (!item.empty() && (item.front() == '-' || item.front() == '*' || item.front() == '+')) {
    item.remove_prefix(1);
  } else {
    std::size_t i = 0;
    while (i < item.size() && item[i] >= '0' && item[i] <= '9') ++i;
    if (i > 0 && i < item.size() && (item[i] == '.' || item[i] == ')') &&
        (i + 1 == item.size() || item[i + 1] == ' ' || item[i + 1] == '\t')) {
      item.remove_prefix(i + 1);
    }
  }
  return strip_quotes(item);
}

}  // namespace

std::vector<std::string> parse_keyword_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t line_start = 0;
  while (line_start <= text.size()) {
    auto nl = text.find('\n', line_start);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = text::trim(text.substr(line_start, nl - line_start));
    line_start = nl + 1;
    if (line.empty() || line.back() == ':') continue;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      auto comma = line.find(',', pos);
      if (comma == std::string_view::npos) comma = line.size();
      const std::string_view item = strip_list_marker(line.substr(pos, comma - pos));
      pos = comma + 1;
      if (!item.empty()) out.emplace_back(item);
    }
  }
  if (out.empty()) throw Error(ErrorCode::kEmptyResult, "no keywords in list response");
  return out;
}

}  // namespace harvest::llm
