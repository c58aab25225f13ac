#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace harvest::llm {

enum class TemplateId { kPageFilter, kKeywordExtract, kKeywordFilter };

std::string_view to_string(TemplateId id);

// A prompt body with `{{name}}` placeholders.
struct PromptTemplate {
  TemplateId id;
  std::string_view body;
  std::vector<std::string_view> placeholders;
};

const PromptTemplate& prompt_template(TemplateId id);

using Variables = std::map<std::string, std::string, std::less<>>;

// Substitutes every placeholder in one pass; substituted values are never
// rescanned. Throws kMissingVariable naming the first unbound placeholder.
std::string render(TemplateId id, const Variables& variables);

struct CompletionRequest {
  TemplateId template_id = TemplateId::kPageFilter;
  Variables variables;
  int max_response_tokens = 1024;
};

// Validates that `variables` binds exactly the template's placeholders.
CompletionRequest make_request(TemplateId id, Variables variables, int max_response_tokens);

struct ProviderReply {
  std::string text;
  bool truncated = false;
};

// A text-completion backend. Implementations throw Error(kTransientFailure)
// for failures worth retrying and Error(kProviderUnavailable) otherwise.
class CompletionProvider {
 public:
  virtual ~CompletionProvider() = default;
  virtual ProviderReply send(const std::string& prompt, int max_response_tokens) = 0;
  // Settings worth recording in run metadata (kind, model, temperature).
  virtual nlohmann::json describe() const = 0;
};

// Key used by fixture maps: SHA-256 hex of the rendered prompt.
std::string prompt_hash(std::string_view prompt);

// Offline provider. Fixture responses win; otherwise the reply is derived
// from a stable hash of the prompt and shaped to the template it recognizes,
// so the whole pipeline can run without a model.
class StubProvider final : public CompletionProvider {
 public:
  StubProvider() = default;
  explicit StubProvider(std::map<std::string, std::string> fixtures);

  // Loads a JSON object of prompt-hash -> response text.
  static StubProvider from_fixture_file(const std::string& path);

  ProviderReply send(const std::string& prompt, int max_response_tokens) override;
  nlohmann::json describe() const override;

 private:
  std::map<std::string, std::string> fixtures_;
};

struct HttpProviderConfig {
  // Full URL of an OpenAI-compatible chat completions endpoint.
  std::string endpoint;
  std::string model;
  std::string api_key;
  double temperature = 0.0;
  int timeout_seconds = 120;
};

class HttpProvider final : public CompletionProvider {
 public:
  explicit HttpProvider(HttpProviderConfig config);

  ProviderReply send(const std::string& prompt, int max_response_tokens) override;
  nlohmann::json describe() const override;

 private:
  HttpProviderConfig config_;
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  double backoff_multiplier = 2.0;
};

class Gateway {
 public:
  Gateway(std::shared_ptr<CompletionProvider> provider, RetryPolicy retry = {},
          std::size_t max_in_flight = 1);

  // Renders, sends, and retries transient failures with exponential backoff.
  // kProviderUnavailable once retries are exhausted; kResponseTooLong when
  // the provider reports truncation.
  std::string complete(const CompletionRequest& request) const;

  // Runs up to max_in_flight requests concurrently; results keep input order.
  std::vector<std::string> complete_all(std::span<const CompletionRequest> requests) const;

  const CompletionProvider& provider() const { return *provider_; }
  std::size_t max_in_flight() const { return max_in_flight_; }

 private:
  std::shared_ptr<CompletionProvider> provider_;
  RetryPolicy retry_;
  std::size_t max_in_flight_;
};

// --- response parsing -------------------------------------------------------

// True iff the first alphabetic token is "yes", false iff "no"
// (case-insensitive); kUnparseableVerdict otherwise.
bool parse_yes_no(std::string_view text);

struct ScoredKeyword {
  std::string keyword;
  double importance = 0.0;

  bool operator==(const ScoredKeyword&) const = default;
};

inline constexpr double kMinImportance = 0.0;
inline constexpr double kMaxImportance = 5.0;
inline constexpr std::size_t kMaxKeywordTokens = 3;

struct ScoredKeywordList {
  std::vector<ScoredKeyword> entries;
  // Pairs dropped for a missing colon, non-numeric score, empty keyword, or
  // more than kMaxKeywordTokens words.
  std::size_t skipped = 0;
};

// "k1: 4, k2: 2" -> entries in input order. Splits each pair at its last
// colon and clamps scores to [0, 5]. kEmptyResult if nothing survives.
ScoredKeywordList parse_scored_keywords(std::string_view text);

// Inverse of parse_scored_keywords for valid lists.
std::string format_scored_keywords(std::span<const ScoredKeyword> entries);

// Comma- or line-separated list; bullets and numbering stripped, case kept.
std::vector<std::string> parse_keyword_list(std::string_view text);

}  // namespace harvest::llm
