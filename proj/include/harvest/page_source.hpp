#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace harvest::pages {

struct SourcePage {
  std::string title;
  std::string page_id;
  std::string body;
  std::string retrieved_for;
  std::string fetch_time;  // ISO-8601 UTC
  bool is_stub = false;     // only stub pages may have an empty body
};

nlohmann::json to_json(const SourcePage& page);
SourcePage page_from_json(const nlohmann::json& j);

struct RawPage {
  std::string title;
  std::string page_id;
  std::string content;
};

// A page-search/fetch backend. search() returns titles in backend rank order;
// fetch() returns nullopt when the title does not exist. Transport problems
// throw kBackendUnavailable.
class PageBackend {
 public:
  virtual ~PageBackend() = default;
  virtual std::vector<std::string> search(const std::string& term, std::size_t limit) = 0;
  virtual std::optional<RawPage> fetch(const std::string& title) = 0;
};

// Reads `<dir>/<encoded title>.txt` files. Search consults `<dir>/index.json`
// ({"term": ["Title", ...]}) when present, else case-insensitive title
// substring matching in filename order.
class FixtureBackend final : public PageBackend {
 public:
  explicit FixtureBackend(std::filesystem::path dir);

  std::vector<std::string> search(const std::string& term, std::size_t limit) override;
  std::optional<RawPage> fetch(const std::string& title) override;

  std::size_t fetch_calls() const { return fetch_calls_.load(); }

  static std::string file_name_for(std::string_view title);

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::vector<std::string>> index_;
  bool has_index_ = false;
  std::atomic<std::size_t> fetch_calls_{0};
};

// MediaWiki action API (list=search, prop=extracts with explaintext).
class MediaWikiBackend final : public PageBackend {
 public:
  explicit MediaWikiBackend(std::string api_url, int timeout_seconds = 30);

  std::vector<std::string> search(const std::string& term, std::size_t limit) override;
  std::optional<RawPage> fetch(const std::string& title) override;

 private:
  std::string api_url_;
  int timeout_seconds_;
};

// Cache key: lowercase, whitespace runs and underscores collapsed to '_'.
std::string normalize_title(std::string_view title);

// Removes wiki markup (templates, refs, tags, link brackets, emphasis quotes,
// heading markers). Plain prose passes through unchanged.
std::string strip_markup(std::string_view text);

class PageSource {
 public:
  PageSource(std::shared_ptr<PageBackend> backend, std::filesystem::path cache_dir);

  // Up to `limit` de-duplicated titles in backend order. limit must be >= 1.
  std::vector<std::string> search(const std::string& seed_term, std::size_t limit);

  // Cache first; on miss fetches, strips markup, and writes the cache
  // atomically. kPageNotFound for unknown titles.
  SourcePage fetch(const std::string& title, const std::string& retrieved_for = {});

  std::size_t backend_fetches() const { return backend_fetches_.load(); }

 private:
  std::filesystem::path cache_path(std::string_view title) const;

  std::shared_ptr<PageBackend> backend_;
  std::filesystem::path cache_dir_;
  std::atomic<std::size_t> backend_fetches_{0};
};

// First n whitespace-delimited words joined by single spaces. n must be >= 1.
std::string first_n_words(std::string_view body, std::size_t n);
inline std::string first_n_words(const SourcePage& page, std::size_t n) {
  return first_n_words(page.body, n);
}

}  // namespace harvest::pages
