#include "harvest/page_source.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <set>

#include "harvest/errors.hpp"
#include "harvest/files.hpp"
#include "harvest/text.hpp"
#include "http_client.hpp"

namespace harvest::pages {

namespace fs = std::filesystem;

nlohmann::json to_json(const SourcePage& page) {
  return {{"title", page.title},
          {"page_id", page.page_id},
          {"body", page.body},
          {"retrieved_for", page.retrieved_for},
          {"fetch_time", page.fetch_time},
          {"is_stub", page.is_stub}};
}

SourcePage page_from_json(const nlohmann::json& j) {
  SourcePage p;
  p.title = j.at("title").get<std::string>();
  p.page_id = j.value("page_id", std::string{});
  p.body = j.value("body", std::string{});
  p.retrieved_for = j.value("retrieved_for", std::string{});
  p.fetch_time = j.value("fetch_time", std::string{});
  p.is_stub = j.value("is_stub", false);
  return p;
}

namespace {

std::string percent_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) {
    if (c < 0x20 || c == '/' || c == '\\' || c == '%' || c == 0x7F) {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 0xF];
    } else {
      out += static_cast<char>(c);
    }
  }
  return out;
}

std::string percent_decode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size() && hex(s[i + 1]) >= 0 && hex(s[i + 2]) >= 0) {
      out += static_cast<char>(hex(s[i + 1]) * 16 + hex(s[i + 2]));
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

std::string utc_now_iso() {
  const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  const auto day = std::chrono::floor<std::chrono::days>(now);
  const std::chrono::hh_mm_ss hms{now - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "T%02d:%02d:%02dZ", static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return text::format_day(day.time_since_epoch().count()) + buf;
}

}  // namespace

// --- fixture backend ----------------------------------------------------------

FixtureBackend::FixtureBackend(fs::path dir) : dir_(std::move(dir)) {
  if (!fs::is_directory(dir_)) {
    throw Error(ErrorCode::kBackendUnavailable, "fixture directory missing: " + dir_.string());
  }
  const fs::path index = dir_ / "index.json";
  if (fs::exists(index)) {
    const auto doc = nlohmann::json::parse(files::read_file(index), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      throw Error(ErrorCode::kConfigInvalid, "fixture index must be a JSON object");
    }
    for (const auto& [term, titles] : doc.items()) {
      index_[text::ascii_lower(term)] = titles.get<std::vector<std::string>>();
    }
    has_index_ = true;
  }
}

std::string FixtureBackend::file_name_for(std::string_view title) {
  return percent_encode(title) + ".txt";
}

std::vector<std::string> FixtureBackend::search(const std::string& term, std::size_t limit) {
  std::vector<std::string> out;
  if (has_index_) {
    if (auto it = index_.find(text::ascii_lower(term)); it != index_.end()) out = it->second;
  } else {
    std::vector<std::string> titles;
    for (const auto& entry : fs::directory_iterator(dir_)) {
      const auto name = entry.path().filename().string();
      if (!entry.is_regular_file() || !name.ends_with(".txt")) continue;
      titles.push_back(percent_decode(std::string_view(name).substr(0, name.size() - 4)));
    }
    std::sort(titles.begin(), titles.end());
    const std::string needle = text::ascii_lower(term);
    for (auto& t : titles) {
      if (text::ascii_lower(t).find(needle) != std::string::npos) out.push_back(std::move(t));
    }
  }
  if (out.size() > limit) out.resize(limit);
  return out;
}

std::optional<RawPage> FixtureBackend::fetch(const std::string& title) {
  fetch_calls_.fetch_add(1);
  const fs::path path = dir_ / file_name_for(title);
  if (!fs::is_regular_file(path)) return std::nullopt;
  return RawPage{title, "fixture:" + normalize_title(title), files::read_file(path)};
}

// --- MediaWiki backend ----------------------------------------------------------

MediaWikiBackend::MediaWikiBackend(std::string api_url, int timeout_seconds)
    : api_url_(std::move(api_url)), timeout_seconds_(timeout_seconds) {
  if (api_url_.empty()) throw Error(ErrorCode::kConfigInvalid, "page backend URL unset");
}

namespace {
nlohmann::json get_json(const std::string& url, const http::Fields& query, int timeout) {
  const auto res = http::get(url, query, timeout);
  if (!res) throw Error(ErrorCode::kBackendUnavailable, "no response from " + url);
  if (res->status != 200) {
    throw Error(ErrorCode::kBackendUnavailable, "HTTP " + std::to_string(res->status));
  }
  auto doc = nlohmann::json::parse(res->body, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::kBackendUnavailable, "non-JSON reply");
  return doc;
}
}  // namespace

std::vector<std::string> MediaWikiBackend::search(const std::string& term, std::size_t limit) {
  const auto doc = get_json(api_url_,
                            {{"action", "query"},
                             {"list", "search"},
                             {"srsearch", term},
                             {"srnamespace", "0"},
                             {"srlimit", std::to_string(limit)},
                             {"format", "json"}},
                            timeout_seconds_);
  std::vector<std::string> out;
  if (!doc.contains("query") || !doc["query"].contains("search")) return out;
  for (const auto& hit : doc["query"]["search"]) {
    if (hit.contains("title") && hit["title"].is_string()) out.push_back(hit["title"].get<std::string>());
  }
  return out;
}

std::optional<RawPage> MediaWikiBackend::fetch(const std::string& title) {
  const auto doc = get_json(api_url_,
                            {{"action", "query"},
                             {"prop", "extracts"},
                             {"explaintext", "1"},
                             {"redirects", "1"},
                             {"titles", title},
                             {"format", "json"},
                             {"formatversion", "2"}},
                            timeout_seconds_);
  if (!doc.contains("query") || !doc["query"].contains("pages") || doc["query"]["pages"].empty()) {
    return std::nullopt;
  }
  const auto& page = doc["query"]["pages"][0];
  if (page.value("missing", false) || page.value("invalid", false)) return std::nullopt;
  RawPage raw;
  raw.title = page.value("title", title);
  raw.page_id = page.contains("pageid") ? page["pageid"].dump() : std::string{};
  raw.content = page.value("extract", std::string{});
  return raw;
}

// --- markup ---------------------------------------------------------------------

std::string normalize_title(std::string_view title) {
  std::string out;
  bool pending_sep = false;
  for (char c : text::trim(title)) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '_') {
      pending_sep = true;
      continue;
    }
    if (pending_sep && !out.empty()) out += '_';
    pending_sep = false;
    out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
  }
  return out;
}

namespace {

// Drops balanced `open ... close` spans, honoring nesting.
std::string drop_nested(std::string_view s, std::string_view open, std::string_view close) {
  std::string out;
  out.reserve(s.size());
  int depth = 0;
  for (std::size_t i = 0; i < s.size();) {
    if (s.substr(i).starts_with(open)) {
      ++depth;
      i += open.size();
    } else if (depth > 0 && s.substr(i).starts_with(close)) {
      --depth;
      i += close.size();
    } else {
      if (depth == 0) out += s[i];
      ++i;
    }
  }
  return out;
}

std::string drop_refs(std::string_view s) {
  constexpr auto npos = std::string_view::npos;
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    auto open = s.find("<ref", i);
    while (open != npos && open + 4 < s.size() && s[open + 4] != '>' && s[open + 4] != ' ' &&
           s[open + 4] != '/') {
      open = s.find("<ref", open + 1);
    }
    if (open == npos) {
      out.append(s.substr(i));
      break;
    }
    out.append(s.substr(i, open - i));
    const auto tag_end = s.find('>', open);
    if (tag_end == npos) {
      out.append(s.substr(open));
      break;
    }
    if (s[tag_end - 1] == '/') {
      i = tag_end + 1;
      continue;
    }
    const auto close = s.find("</ref>", tag_end);
    i = close == npos ? s.size() : close + 6;
  }
  return out;
}

std::string drop_tags(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '<' && i + 1 < s.size() &&
        (s[i + 1] == '/' || s[i + 1] == '!' || (s[i + 1] >= 'a' && s[i + 1] <= 'z') ||
         (s[i + 1] >= 'A' && s[i + 1] <= 'Z'))) {
      const auto end = s.find('>', i);
      const auto nl = s.find('\n', i);
      if (end != std::string_view::npos && (nl == std::string_view::npos || end < nl)) {
        i = end;
        continue;
      }
    }
    out += s[i];
  }
  return out;
}

std::string unwrap_links(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto open = s.find("[[", i);
    if (open == std::string_view::npos) {
      out.append(s.substr(i));
      break;
    }
    const auto close = s.find("]]", open + 2);
    if (close == std::string_view::npos) {
      out.append(s.substr(i));
      break;
    }
    out.append(s.substr(i, open - i));
    std::string_view inner = s.substr(open + 2, close - open - 2);
    if (const auto bar = inner.rfind('|'); bar != std::string_view::npos) inner = inner.substr(bar + 1);
    out.append(inner);
    i = close + 2;
  }
  return out;
}

std::string drop_emphasis_and_headings(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t line_start = 0;
  while (line_start < s.size()) {
    auto nl = s.find('\n', line_start);
    const bool has_nl = nl != std::string_view::npos;
    if (!has_nl) nl = s.size();
    std::string_view line = s.substr(line_start, nl - line_start);
    if (line.size() >= 4 && line.starts_with("==") && text::trim(line).ends_with("==")) {
      line = text::trim(line);
      while (line.starts_with("=")) line.remove_prefix(1);
      while (line.ends_with("=")) line.remove_suffix(1);
      line = text::trim(line);
    }
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '\'' && i + 1 < line.size() && line[i + 1] == '\'') {
        while (i < line.size() && line[i] == '\'') ++i;
        --i;
        continue;
      }
      out += line[i];
    }
    if (has_nl) out += '\n';
    line_start = nl + 1;
  }
  return out;
}

}  // namespace

std::string strip_markup(std::string_view text) {
  std::string s = drop_nested(text, "<!--", "-->");
  s = drop_refs(s);
  s = drop_nested(s, "{{", "}}");
  s = drop_tags(s);
  s = unwrap_links(s);
  return drop_emphasis_and_headings(s);
}

// --- page source ----------------------------------------------------------------

PageSource::PageSource(std::shared_ptr<PageBackend> backend, fs::path cache_dir)
    : backend_(std::move(backend)), cache_dir_(std::move(cache_dir)) {
  if (!backend_) throw Error(ErrorCode::kConfigInvalid, "no page backend configured");
  fs::create_directories(cache_dir_);
}

std::vector<std::string> PageSource::search(const std::string& seed_term, std::size_t limit) {
  if (limit < 1) throw Error(ErrorCode::kInvalidArgument, "search limit must be >= 1");
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (auto& title : backend_->search(seed_term, limit)) {
    if (out.size() >= limit) break;
    if (seen.insert(title).second) out.push_back(std::move(title));
  }
  return out;
}

fs::path PageSource::cache_path(std::string_view title) const {
  return cache_dir_ / (percent_encode(normalize_title(title)) + ".json");
}

SourcePage PageSource::fetch(const std::string& title, const std::string& retrieved_for) {
  if (text::trim(title).empty()) throw Error(ErrorCode::kInvalidArgument, "empty page title");
  const fs::path cached = cache_path(title);
  if (fs::exists(cached)) {
    const auto doc = nlohmann::json::parse(files::read_file(cached), nullptr, false);
    if (!doc.is_discarded()) return page_from_json(doc);
  }
  backend_fetches_.fetch_add(1);
  auto raw = backend_->fetch(title);
  if (!raw) throw Error(ErrorCode::kPageNotFound, title);
  SourcePage page;
  page.title = raw->title.empty() ? title : raw->title;
  page.page_id = raw->page_id;
  page.body = strip_markup(raw->content);
  page.retrieved_for = retrieved_for;
  page.fetch_time = utc_now_iso();
  page.is_stub = text::trim(page.body).empty();
  files::write_file_atomic(cached, to_json(page).dump());
  return page;
}

std::string first_n_words(std::string_view body, std::size_t n) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
  std::string out;
  std::size_t taken = 0;
  for (std::string_view w : text::words(body)) {
    if (taken == n) break;
    if (taken++) out += ' ';
    out += w;
  }
  return out;
}

}  // namespace harvest::pages
