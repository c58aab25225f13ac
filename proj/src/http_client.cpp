#include "http_client.hpp"

#include <httplib.h>

#include "harvest/errors.hpp"

namespace harvest::http {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kConfigInvalid, "URL without scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::optional<Response> to_response(const httplib::Result& res) {
  if (!res) return std::nullopt;
  return Response{res->status, res->body};
}

}  // namespace

std::optional<Response> post(const std::string& url, const std::string& body,
                             const std::string& content_type, const Fields& headers,
                             int timeout_seconds) {
  const SplitUrl parts = split_url(url);
  httplib::Client client(parts.origin);
  client.set_connection_timeout(timeout_seconds, 0);
  client.set_read_timeout(timeout_seconds, 0);
  client.set_write_timeout(timeout_seconds, 0);
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  return to_response(client.Post(parts.path, h, body, content_type));
}

std::optional<Response> get(const std::string& url, const Fields& query, int timeout_seconds) {
  const SplitUrl parts = split_url(url);
  httplib::Client client(parts.origin);
  client.set_connection_timeout(timeout_seconds, 0);
  client.set_read_timeout(timeout_seconds, 0);
  client.set_follow_location(true);
  httplib::Params params;
  for (const auto& [k, v] : query) params.emplace(k, v);
  return to_response(client.Get(parts.path, params, httplib::Headers{}));
}

}  // namespace harvest::http
