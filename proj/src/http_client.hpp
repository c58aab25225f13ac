#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace harvest::http {

using Fields = std::vector<std::pair<std::string, std::string>>;

struct Response {
  int status = 0;
  std::string body;
};

// Both return nullopt on transport failure (DNS, connect, timeout).
std::optional<Response> post(const std::string& url, const std::string& body,
                             const std::string& content_type, const Fields& headers,
                             int timeout_seconds);
std::optional<Response> get(const std::string& url, const Fields& query, int timeout_seconds);

}  // namespace harvest::http
