#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "harvest/corpus_builder.hpp"
#include "harvest/lexicon_pipeline.hpp"

namespace harvest::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

inline constexpr const char* kApiKeyEnvVar = "HARVEST_API_KEY";

struct ProviderSettings {
  std::string kind = "stub";  // "stub" | "http"
  std::string fixtures;       // stub: prompt-hash -> response JSON file
  std::string endpoint;
  std::string model;
  std::string api_key;  // HARVEST_API_KEY overrides; never written to manifests
  double temperature = 0.0;
  int timeout_seconds = 120;
  int max_retries = 3;
  int initial_backoff_ms = 500;
};

struct PageSettings {
  std::string backend = "mediawiki";  // "mediawiki" | "fixture"
  std::string fixture_dir;
  std::string api_url = "https://en.wikipedia.org/w/api.php";
  std::string cache_dir;  // defaults to <out>/page_cache
};

struct AdapterSettings {
  std::string kind = "stub";  // "stub" | "file" | "http"
  std::string command;
  std::string response_file;
  std::string url;
  std::size_t batch_size = 64;
};

// The shared configuration file. The salt is read from HARVEST_SALT only;
// HARVEST_API_KEY overrides provider.api_key.
struct RunConfig {
  lexicon::PipelineConfig pipeline;
  ProviderSettings provider;
  PageSettings pages;
  corpus::SubredditLists subreddits = corpus::SubredditLists::builtin_defaults();
  std::vector<std::string> dumps;
  std::string out;
  double max_skip_ratio = 0.01;
  bool match_selftext = false;
  std::string salt_source = "env:HARVEST_SALT";
  AdapterSettings adapter;
  std::size_t top_n = 20;
  std::size_t jobs = 1;

  nlohmann::json to_json() const;
  // Missing keys keep their defaults. kConfigInvalid on bad values.
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& path);
  void validate() const;
};

// Entry point behind the `harvest` executable; args excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace harvest::cli
