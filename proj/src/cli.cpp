#include "harvest/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "harvest/analytics.hpp"
#include "harvest/errors.hpp"
#include "harvest/files.hpp"
#include "harvest/llm_gateway.hpp"
#include "harvest/log.hpp"
#include "harvest/page_source.hpp"
#include "harvest/phrase_matcher.hpp"
#include "harvest/presets.hpp"

namespace harvest::cli {

namespace fs = std::filesystem;
using nlohmann::json;

// --- RunConfig -----------------------------------------------------------------------

json RunConfig::to_json() const {
  return {
      {"pipeline", pipeline.to_json()},
      {"provider",
       {{"kind", provider.kind},
        {"fixtures", provider.fixtures},
        {"endpoint", provider.endpoint},
        {"model", provider.model},
        {"temperature", provider.temperature},
        {"timeout_seconds", provider.timeout_seconds},
        {"max_retries", provider.max_retries},
        {"initial_backoff_ms", provider.initial_backoff_ms}}},
      {"pages",
       {{"backend", pages.backend},
        {"fixture_dir", pages.fixture_dir},
        {"api_url", pages.api_url},
        {"cache_dir", pages.cache_dir}}},
      {"subreddits", subreddits.to_json()},
      {"dumps", dumps},
      {"out", out},
      {"max_skip_ratio", max_skip_ratio},
      {"match_selftext", match_selftext},
      {"salt_source", salt_source},
      {"adapter",
       {{"kind", adapter.kind},
        {"command", adapter.command},
        {"response_file", adapter.response_file},
        {"url", adapter.url},
        {"batch_size", adapter.batch_size}}},
      {"top_n", top_n},
      {"jobs", jobs},
  };
}

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kConfigInvalid, "config must be a JSON object");
  try {
    RunConfig c;
    if (j.contains("pipeline")) c.pipeline = lexicon::PipelineConfig::from_json(j.at("pipeline"));
    if (const auto p = j.find("provider"); p != j.end()) {
      c.provider.kind = p->value("kind", c.provider.kind);
      c.provider.fixtures = p->value("fixtures", c.provider.fixtures);
      c.provider.endpoint = p->value("endpoint", c.provider.endpoint);
      c.provider.model = p->value("model", c.provider.model);
      c.provider.temperature = p->value("temperature", c.provider.temperature);
      c.provider.timeout_seconds = p->value("timeout_seconds", c.provider.timeout_seconds);
      c.provider.max_retries = p->value("max_retries", c.provider.max_retries);
      c.provider.initial_backoff_ms = p->value("initial_backoff_ms", c.provider.initial_backoff_ms);
      c.provider.api_key = p->value("api_key", c.provider.api_key);
    }
    if (const auto p = j.find("pages"); p != j.end()) {
      c.pages.backend = p->value("backend", c.pages.backend);
      c.pages.fixture_dir = p->value("fixture_dir", c.pages.fixture_dir);
      c.pages.api_url = p->value("api_url", c.pages.api_url);
      c.pages.cache_dir = p->value("cache_dir", c.pages.cache_dir);
    }
    if (j.contains("subreddits")) c.subreddits = corpus::SubredditLists::from_json(j.at("subreddits"));
    c.dumps = j.value("dumps", c.dumps);
    c.out = j.value("out", c.out);
    c.max_skip_ratio = j.value("max_skip_ratio", c.max_skip_ratio);
    c.match_selftext = j.value("match_selftext", c.match_selftext);
    if (j.contains("salt")) throw Error(ErrorCode::kConfigInvalid, "the salt is read from HARVEST_SALT only");
    if (const auto a = j.find("adapter"); a != j.end()) {
      c.adapter.kind = a->value("kind", c.adapter.kind);
      c.adapter.command = a->value("command", c.adapter.command);
      c.adapter.response_file = a->value("response_file", c.adapter.response_file);
      c.adapter.url = a->value("url", c.adapter.url);
      c.adapter.batch_size = a->value("batch_size", c.adapter.batch_size);
    }
    c.top_n = j.value("top_n", c.top_n);
    c.jobs = j.value("jobs", c.jobs);
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigInvalid, e.what());
  }
}

RunConfig RunConfig::load(const fs::path& path) {
  const json j = json::parse(files::read_file(path), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kConfigInvalid, path.string() + ": invalid JSON");
  return from_json(j);
}

void RunConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kConfigInvalid, what); };
  if (provider.kind != "stub" && provider.kind != "http") fail("provider.kind must be stub or http");
  if (provider.kind == "http" && (provider.endpoint.empty() || provider.model.empty())) {
    fail("provider.endpoint and provider.model are required for http");
  }
  if (provider.max_retries < 0 || provider.initial_backoff_ms < 0) fail("retry settings must be >= 0");
  if (pages.backend != "mediawiki" && pages.backend != "fixture") fail("pages.backend must be mediawiki or fixture");
  if (pages.backend == "fixture" && pages.fixture_dir.empty()) fail("pages.fixture_dir is required");
  if (!(max_skip_ratio >= 0.0 && max_skip_ratio <= 1.0)) fail("max_skip_ratio must be in [0,1]");
  if (adapter.kind != "stub" && adapter.kind != "file" && adapter.kind != "http") {
    fail("adapter.kind must be stub, file or http");
  }
  if (adapter.batch_size < 1) fail("adapter.batch_size must be >= 1");
  if (top_n < 1) fail("top_n must be >= 1");
  if (jobs < 1) fail("jobs must be >= 1");
  corpus::Classification{subreddits};
}

// --- helpers -------------------------------------------------------------------------

namespace {

json command_record(const std::string& name, const std::vector<std::string>& args) {
  return {{"subcommand", name}, {"argv", args}};
}

void write_json(const fs::path& path, const json& j) { files::write_file_atomic(path, j.dump(2) + "\n"); }

std::shared_ptr<llm::CompletionProvider> make_provider(const ProviderSettings& p) {
  if (p.kind == "stub") {
    if (p.fixtures.empty()) return std::make_shared<llm::StubProvider>();
    return std::make_shared<llm::StubProvider>(llm::StubProvider::from_fixture_file(p.fixtures));
  }
  llm::HttpProviderConfig hc;
  hc.endpoint = p.endpoint;
  hc.model = p.model;
  hc.temperature = p.temperature;
  hc.timeout_seconds = p.timeout_seconds;
  hc.api_key = p.api_key;
  if (const char* key = std::getenv(kApiKeyEnvVar); key && *key) hc.api_key = key;
  return std::make_shared<llm::HttpProvider>(std::move(hc));
}

std::shared_ptr<pages::PageBackend> make_backend(const PageSettings& p) {
  if (p.backend == "fixture") return std::make_shared<pages::FixtureBackend>(p.fixture_dir);
  return std::make_shared<pages::MediaWikiBackend>(p.api_url);
}

std::shared_ptr<analytics::ClassifierAdapter> make_adapter(const AdapterSettings& a, const fs::path& out) {
  if (a.kind == "stub") return std::make_shared<analytics::StubAdapter>();
  if (a.kind == "file") {
    return std::make_shared<analytics::FileExchangeAdapter>(
        analytics::FileExchangeAdapter::Options{out / "exchange", a.command, a.response_file});
  }
  if (a.url.empty()) throw Error(ErrorCode::kConfigInvalid, "adapter.url is required for http");
  return std::make_shared<analytics::HttpAdapter>(a.url);
}

corpus::PhraseMatcher load_matcher(const fs::path& lexicon_path) {
  std::vector<std::string> phrases;
  for (auto& e : lexicon::load_lexicon_file(lexicon_path)) phrases.push_back(std::move(e.keyword));
  if (phrases.empty()) throw Error(ErrorCode::kLexiconEmpty, lexicon_path.string());
  return corpus::PhraseMatcher(phrases);
}

void print_counts(const corpus::CorpusManifest& m) {
  for (const auto& [name, c] : m.counts) {
    std::cout << name << ": " << c.submissions << " submissions, " << c.comments << " comments\n";
  }
  std::cout << "total: " << m.totals.submissions << " submissions, " << m.totals.comments << " comments\n";
}

RunConfig base_config(const std::string& config_path) {
  return config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
}

struct DumpSets {
  std::vector<fs::path> submissions;
  std::vector<fs::path> comments;
  json skipped = json::array();
};

DumpSets sort_dumps(const std::vector<std::string>& dumps, const std::vector<std::string>& subs,
                    const std::vector<std::string>& coms) {
  DumpSets out;
  for (const auto& s : subs) out.submissions.emplace_back(s);
  for (const auto& c : coms) out.comments.emplace_back(c);
  for (const auto& d : dumps) {
    const auto kind = ingest::detect_kind(d);
    if (!kind) {
      log::warn("no records recognized in " + d + "; skipping");
      out.skipped.push_back(d);
    } else if (*kind == ingest::RecordKind::kSubmission) {
      out.submissions.emplace_back(d);
    } else {
      out.comments.emplace_back(d);
    }
  }
  return out;
}

// --- subcommands ---------------------------------------------------------------------

struct ExtractArgs {
  std::vector<std::string> seeds;
  std::string preset;
  std::string topic;
  std::string config;
  std::string out;
  std::string pages;
  std::string provider;
  std::string fixtures;
  std::size_t jobs = 0;
};

int cmd_extract(const ExtractArgs& a, const std::vector<std::string>& argv) {
  RunConfig cfg = base_config(a.config);
  if (!a.preset.empty()) {
    const auto preset = presets::lexicon_preset(a.preset);
    if (!preset) throw Error(ErrorCode::kConfigInvalid, "unknown preset " + a.preset);
    cfg.pipeline.seed_terms = preset->seed_terms;
    cfg.pipeline.topic = preset->topic;
  }
  if (!a.seeds.empty()) cfg.pipeline.seed_terms = a.seeds;
  if (!a.topic.empty()) cfg.pipeline.topic = a.topic;
  if (cfg.pipeline.topic.empty() && !cfg.pipeline.seed_terms.empty()) cfg.pipeline.topic = cfg.pipeline.seed_terms.front();
  if (!a.pages.empty()) {
    cfg.pages.backend = "fixture";
    cfg.pages.fixture_dir = a.pages;
  }
  if (!a.provider.empty()) cfg.provider.kind = a.provider;
  if (!a.fixtures.empty()) cfg.provider.fixtures = a.fixtures;
  if (!a.out.empty()) cfg.out = a.out;
  if (a.jobs > 0) cfg.jobs = a.jobs;
  if (cfg.out.empty()) throw Error(ErrorCode::kConfigInvalid, "--out is required");
  cfg.validate();
  cfg.pipeline.validate();

  const fs::path out = cfg.out;
  fs::create_directories(out);
  const fs::path cache = cfg.pages.cache_dir.empty() ? out / "page_cache" : fs::path(cfg.pages.cache_dir);
  pages::PageSource source(make_backend(cfg.pages), cache);
  llm::RetryPolicy retry;
  retry.max_retries = cfg.provider.max_retries;
  retry.initial_backoff = std::chrono::milliseconds(cfg.provider.initial_backoff_ms);
  const llm::Gateway gateway(make_provider(cfg.provider), retry, cfg.jobs);

  const auto result = lexicon::run_pipeline(cfg.pipeline, source, gateway, out / "stages");
  files::write_file_atomic(out / "lexicon.json", lexicon::serialize_lexicon(result.lexicon.entries));
  write_json(out / "manifest.json", {{"command", command_record("extract-keywords", argv)},
                                     {"config", cfg.to_json()},
                                     {"run", result.metadata}});
  std::cout << "lexicon: " << result.lexicon.entries.size() << " keywords -> " << (out / "lexicon.json").string()
            << "\n";
  return kExitOk;
}

struct CollectArgs {
  std::string lexicon;
  std::vector<std::string> dumps;
  std::vector<std::string> submissions;
  std::vector<std::string> comments;
  std::string subreddits;
  std::string config;
  std::string out;
  double max_skip_ratio = -1.0;
  bool match_selftext = false;
};

int cmd_collect(const CollectArgs& a, const std::vector<std::string>& argv) {
  RunConfig cfg = base_config(a.config);
  if (!a.subreddits.empty()) cfg.subreddits = corpus::SubredditLists::load(a.subreddits);
  if (!a.dumps.empty()) cfg.dumps = a.dumps;
  if (!a.out.empty()) cfg.out = a.out;
  if (a.max_skip_ratio >= 0) cfg.max_skip_ratio = a.max_skip_ratio;
  if (a.match_selftext) cfg.match_selftext = true;
  if (cfg.out.empty()) throw Error(ErrorCode::kConfigInvalid, "--out is required");
  cfg.validate();

  const std::string salt = corpus::salt_from_env();
  const auto matcher = load_matcher(a.lexicon);
  const DumpSets dumps = sort_dumps(cfg.dumps, a.submissions, a.comments);

  corpus::CollectOptions options;
  options.submission_dumps = dumps.submissions;
  options.comment_dumps = dumps.comments;
  options.stream = {ingest::Compression::kAuto, cfg.max_skip_ratio};
  options.match_selftext = cfg.match_selftext;
  options.lexicon_ref = a.lexicon;
  options.lexicon_sha256 = files::sha256_file_hex(a.lexicon);
  options.config = {{"command", command_record("collect", argv)},
                    {"run_config", cfg.to_json()},
                    {"skipped_inputs", dumps.skipped}};
  const auto manifest = corpus::collect(options, cfg.subreddits, matcher, salt, corpus::CorpusPaths{cfg.out});
  print_counts(manifest);
  return kExitOk;
}

struct RankArgs {
  std::string lexicon;
  std::vector<std::string> dumps;
  std::string out;
  double centric_ratio = 0.5;
  std::uint64_t min_matched = 1;
};

int cmd_rank(const RankArgs& a, const std::vector<std::string>& argv) {
  const auto matcher = load_matcher(a.lexicon);
  corpus::SubredditTally tally;
  for (const auto& d : a.dumps) {
    ingest::SubmissionStream stream(d);
    while (auto s = stream.next()) tally.add(*s, corpus::title_matches(s->title, matcher));
    stream.finish();
  }
  const auto ranked = tally.ranked();
  json profiles = json::array();
  for (const auto& p : ranked) {
    profiles.push_back({{"subreddit", p.name},
                        {"matched_submissions", p.matched_submissions},
                        {"total_submissions_seen", p.total_submissions_seen}});
  }
  const auto draft = corpus::suggest_lists(ranked, a.centric_ratio, a.min_matched);
  fs::create_directories(a.out);
  write_json(fs::path(a.out) / "ranking.json", profiles);
  write_json(fs::path(a.out) / "subreddits.draft.json", draft.to_json());
  write_json(fs::path(a.out) / "manifest.json", {{"command", command_record("rank-subreddits", argv)}});
  std::cout << ranked.size() << " subreddits ranked; draft lists are not applied automatically\n";
  return kExitOk;
}

struct SubsetArgs {
  std::string corpus;
  std::string lexicon;
  std::string out;
};

int cmd_subset(const SubsetArgs& a, const std::vector<std::string>& argv) {
  const auto matcher = load_matcher(a.lexicon);
  const corpus::CorpusPaths out{a.out};
  auto manifest = corpus::derive_subset(corpus::CorpusPaths{a.corpus}, matcher, out, a.lexicon,
                                        files::sha256_file_hex(a.lexicon));
  manifest.config = {{"command", command_record("subset", argv)}, {"parent_config", manifest.config}};
  write_json(out.manifest(), manifest.to_json());
  print_counts(manifest);
  return kExitOk;
}

struct AnalyzeArgs {
  std::string corpus;
  std::string adapter;
  std::string adapter_command;
  std::string adapter_responses;
  std::string adapter_url;
  std::string config;
  std::string out;
  std::size_t batch_size = 0;
  std::size_t top_n = 0;
  std::size_t jobs = 0;
  bool no_labels = false;
};

int cmd_analyze(const AnalyzeArgs& a, const std::vector<std::string>& argv) {
  RunConfig cfg = base_config(a.config);
  if (!a.adapter.empty()) cfg.adapter.kind = a.adapter;
  if (!a.adapter_command.empty()) cfg.adapter.command = a.adapter_command;
  if (!a.adapter_responses.empty()) cfg.adapter.response_file = a.adapter_responses;
  if (!a.adapter_url.empty()) cfg.adapter.url = a.adapter_url;
  if (a.batch_size > 0) cfg.adapter.batch_size = a.batch_size;
  if (a.top_n > 0) cfg.top_n = a.top_n;
  if (a.jobs > 0) cfg.jobs = a.jobs;
  if (!a.out.empty()) cfg.out = a.out;
  if (cfg.out.empty()) throw Error(ErrorCode::kConfigInvalid, "--out is required");
  cfg.validate();

  const fs::path out = cfg.out;
  fs::create_directories(out);
  analytics::AnalyzeOptions options;
  options.top_n = cfg.top_n;
  std::unique_ptr<analytics::ClassifierService> service;
  const fs::path cache = out / "label_cache.ndjson";
  if (!a.no_labels) {
    service = std::make_unique<analytics::ClassifierService>(make_adapter(cfg.adapter, out), cfg.adapter.batch_size,
                                                             cfg.jobs);
    service->load_cache(cache);
    options.classifier = service.get();
  }
  json bundle = analytics::analyze_corpus(a.corpus, options);
  bundle["metadata"]["command"] = command_record("analyze", argv);
  bundle["metadata"]["config"] = cfg.to_json();
  if (service) service->save_cache(cache);
  write_json(out / "analysis.json", bundle);
  write_json(out / "manifest.json", {{"command", command_record("analyze", argv)}, {"config", cfg.to_json()}});
  std::cout << "analysis: " << bundle["totals"]["submissions"] << " submissions, " << bundle["totals"]["comments"]
            << " comments -> " << (out / "analysis.json").string() << "\n";
  return kExitOk;
}

struct ReportArgs {
  std::string analysis;
  std::string format = "csv";
  std::string out;
};

int cmd_report(const ReportArgs& a, const std::vector<std::string>& argv) {
  fs::path analysis = a.analysis;
  if (fs::is_directory(analysis)) analysis /= "analysis.json";
  const json bundle = json::parse(files::read_file(analysis), nullptr, false);
  if (bundle.is_discarded()) throw Error(ErrorCode::kSchemaError, analysis.string() + ": invalid JSON");
  const fs::path out = a.out.empty() ? analysis.parent_path() / "report" : fs::path(a.out);
  if (a.format == "csv") {
    analytics::write_csv_report(bundle, out);
  } else {
    analytics::write_json_report(bundle, out);
  }
  write_json(out / "manifest.json", {{"command", command_record("report", argv)},
                                     {"analysis_sha256", files::sha256_file_hex(analysis)}});
  std::cout << "report (" << a.format << ") -> " << out.string() << "\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Topic lexicon extraction, corpus collection and discourse analytics."};
  app.name("harvest");
  app.require_subcommand(1);
  app.set_version_flag("--version", "harvest 1.0.0");
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract-keywords", "Build a keyword lexicon from seed terms");
  extract->add_option("--seeds", ex.seeds, "Seed terms (repeat or comma-separate)")->delimiter(',');
  extract->add_option("--preset", ex.preset, "Seed/topic preset")->check(CLI::IsMember({"main", "Z", "P"}));
  extract->add_option("--topic", ex.topic, "Topic phrase used in prompts");
  extract->add_option("--config", ex.config, "RunConfig JSON file")->check(CLI::ExistingFile);
  extract->add_option("--out", ex.out, "Output directory");
  extract->add_option("--pages", ex.pages, "Use a directory of page fixtures instead of MediaWiki");
  extract->add_option("--provider", ex.provider, "Completion provider")->check(CLI::IsMember({"stub", "http"}));
  extract->add_option("--fixtures", ex.fixtures, "Stub fixture map (prompt sha256 -> response)");
  extract->add_option("--jobs", ex.jobs, "Concurrent provider requests")->check(CLI::PositiveNumber);

  CollectArgs co;
  auto* collect = app.add_subcommand("collect", "Apply a lexicon and subreddit lists to dump files");
  collect->add_option("--lexicon", co.lexicon, "Lexicon JSON")->required()->check(CLI::ExistingFile);
  collect->add_option("--dumps", co.dumps, "Dump files; kind detected from content");
  collect->add_option("--submissions", co.submissions, "Submission dump files");
  collect->add_option("--comments", co.comments, "Comment dump files");
  collect->add_option("--subreddits-config", co.subreddits, "Two-list subreddit JSON")->check(CLI::ExistingFile);
  collect->add_option("--config", co.config, "RunConfig JSON file")->check(CLI::ExistingFile);
  collect->add_option("--out", co.out, "Corpus output directory");
  collect->add_option("--max-skip-ratio", co.max_skip_ratio, "Abort when malformed/lines exceeds this");
  collect->add_flag("--match-selftext", co.match_selftext, "Also match submission bodies");

  RankArgs ra;
  auto* rank = app.add_subcommand("rank-subreddits", "Rank subreddits by matched submissions and draft lists");
  rank->add_option("--lexicon", ra.lexicon, "Lexicon JSON")->required()->check(CLI::ExistingFile);
  rank->add_option("--dumps", ra.dumps, "Submission dump files")->required();
  rank->add_option("--out", ra.out, "Output directory")->required();
  rank->add_option("--centric-ratio", ra.centric_ratio, "Match ratio that proposes centric");
  rank->add_option("--min-matched", ra.min_matched, "Matches needed to propose centric");

  SubsetArgs su;
  auto* subset = app.add_subcommand("subset", "Derive a topic subset from a corpus");
  subset->add_option("--corpus", su.corpus, "Parent corpus directory")->required()->check(CLI::ExistingDirectory);
  subset->add_option("--subset-lexicon", su.lexicon, "Subset lexicon JSON")->required()->check(CLI::ExistingFile);
  subset->add_option("--out", su.out, "Subset output directory")->required();

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Compute the analysis bundle for a corpus");
  analyze->add_option("--corpus", an.corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
  analyze->add_option("--adapter", an.adapter, "Classifier adapter")->check(CLI::IsMember({"stub", "file", "http"}));
  analyze->add_option("--adapter-command", an.adapter_command, "file adapter: command run per batch");
  analyze->add_option("--adapter-responses", an.adapter_responses, "file adapter: precomputed response ndjson");
  analyze->add_option("--adapter-url", an.adapter_url, "http adapter endpoint");
  analyze->add_option("--batch-size", an.batch_size, "Comments per adapter call")->check(CLI::PositiveNumber);
  analyze->add_option("--top-n", an.top_n, "Subreddits per ranking")->check(CLI::PositiveNumber);
  analyze->add_option("--jobs", an.jobs, "Concurrent adapter batches")->check(CLI::PositiveNumber);
  analyze->add_option("--config", an.config, "RunConfig JSON file")->check(CLI::ExistingFile);
  analyze->add_option("--out", an.out, "Output directory");
  analyze->add_flag("--no-labels", an.no_labels, "Skip per-comment classification");

  ReportArgs re;
  auto* report = app.add_subcommand("report", "Write plot-ready files from an analysis bundle");
  report->add_option("--analysis", re.analysis, "analysis.json or its directory")->required()->check(CLI::ExistingPath);
  report->add_option("--format", re.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  report->add_option("--out", re.out, "Output directory (default: <analysis dir>/report)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (extract->parsed() && ex.seeds.empty() && ex.preset.empty() && ex.config.empty()) {
    std::cerr << "extract-keywords: --seeds is required\n" << extract->help();
    return kExitUsage;
  }
  log::set_level(verbose ? log::Level::kInfo : log::Level::kWarn);

  try {
    if (extract->parsed()) return cmd_extract(ex, args);
    if (collect->parsed()) return cmd_collect(co, args);
    if (rank->parsed()) return cmd_rank(ra, args);
    if (subset->parsed()) return cmd_subset(su, args);
    if (analyze->parsed()) return cmd_analyze(an, args);
    if (report->parsed()) return cmd_report(re, args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace harvest::cli
