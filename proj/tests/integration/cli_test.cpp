#include <gtest/gtest.h>

#include <json.hpp>

#include "harvest/corpus_builder.hpp"
#include "test_support.hpp"

using testsupport::CommandResult;
using testsupport::run_cli;
using testsupport::TempDir;

namespace {

const std::string kSalt = "HARVEST_SALT=integration-salt";

std::string pages_dir() { return (testsupport::fixture_dir() / "pages").string(); }

CommandResult extract(const TempDir& out, std::vector<std::string> extra = {}) {
  std::vector<std::string> args = {"extract-keywords", "--preset", "main", "--pages", pages_dir(),
                                   "--provider", "stub", "--out", out.path().string()};
  args.insert(args.end(), extra.begin(), extra.end());
  return run_cli(args);
}

struct DumpFiles {
  TempDir dir;
  testsupport::SyntheticDump dump = testsupport::make_synthetic_dump(4000, 77);
  DumpFiles() {
    testsupport::write_text(dir / "RS_2023-10.zst", testsupport::zstd_compress(testsupport::ndjson(dump.submissions), 3));
    testsupport::write_text(dir / "RC_2023-10.zst", testsupport::zstd_compress(testsupport::ndjson(dump.comments), 3));
    testsupport::write_text(dir / "lexicon.json", nlohmann::json(dump.lexicon).dump());
    harvest::corpus::SubredditLists lists{dump.centric, dump.inclusive, harvest::corpus::OverlapPolicy::kError};
    testsupport::write_text(dir / "subreddits.json", lists.to_json().dump());
  }
  std::vector<std::string> collect_args(const std::string& out) const {
    return {"collect", "--lexicon", (dir / "lexicon.json").string(), "--dumps", (dir / "RS_2023-10.zst").string(),
            (dir / "RC_2023-10.zst").string(), "--subreddits-config", (dir / "subreddits.json").string(), "--out", out};
  }
};

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli({}).exit_code, 2);
  EXPECT_EQ(run_cli({"no-such-command"}).exit_code, 2);
  TempDir out;
  const auto r = run_cli({"extract-keywords", "--out", out.path().string()});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("--seeds"), std::string::npos);
  EXPECT_EQ(run_cli({"collect", "--out", out.path().string()}).exit_code, 2);
  EXPECT_EQ(run_cli({"analyze", "--corpus", "/nonexistent/corpus"}).exit_code, 2);
}

TEST(Cli, HelpExitsZero) {
  const auto r = run_cli({"--help"});
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("extract-keywords"), std::string::npos);
}

TEST(Cli, ExtractMatchesGoldenLexicon) {
  TempDir out;
  const auto r = extract(out);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto lexicon = testsupport::read_text(out / "lexicon.json");
  EXPECT_EQ(lexicon, testsupport::read_text(testsupport::fixture_dir() / "golden" / "lexicon_main.json"));
  const auto manifest = nlohmann::json::parse(testsupport::read_text(out / "manifest.json"));
  EXPECT_EQ(manifest.at("config").at("pipeline").at("topic"), "Israel-Hamas war");
  EXPECT_FALSE(manifest.dump().find("api_key") != std::string::npos &&
               manifest.dump().find("secret") != std::string::npos);
}

TEST(Cli, ExtractIsReproducible) {
  TempDir a;
  TempDir b;
  ASSERT_EQ(extract(a).exit_code, 0);
  ASSERT_EQ(extract(b, {"--jobs", "4"}).exit_code, 0);
  EXPECT_EQ(testsupport::read_text(a / "lexicon.json"), testsupport::read_text(b / "lexicon.json"));
}

TEST(Cli, ProviderDownNamesStage) {
  TempDir out;
  nlohmann::json cfg = {{"provider",
                         {{"kind", "http"},
                          {"endpoint", "http://127.0.0.1:1/v1/chat/completions"},
                          {"model", "m"},
                          {"timeout_seconds", 2},
                          {"max_retries", 1},
                          {"initial_backoff_ms", 1}}}};
  testsupport::write_text(out / "config.json", cfg.dump());
  const auto r = run_cli({"extract-keywords", "--seeds", "Gaza", "--pages", pages_dir(), "--config",
                          (out / "config.json").string(), "--out", (out / "run").string()});
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("filter_pages"), std::string::npos) << r.err;
  EXPECT_FALSE(std::filesystem::exists(out / "run" / "lexicon.json"));
}

TEST(Cli, ConfigRejectsSalt) {
  TempDir out;
  testsupport::write_text(out / "config.json", R"({"salt": "x"})");
  const auto r = run_cli({"extract-keywords", "--seeds", "Gaza", "--pages", pages_dir(), "--config",
                          (out / "config.json").string(), "--out", out.path().string()});
  EXPECT_EQ(r.exit_code, 1);
}

TEST(Cli, CollectRequiresSalt) {
  DumpFiles d;
  TempDir out;
  const auto r = run_cli(d.collect_args((out / "corpus").string()));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("HARVEST_SALT"), std::string::npos) << r.err;
}

TEST(Cli, CollectSubsetAnalyzeReport) {
  DumpFiles d;
  TempDir out;
  const auto corpus = (out / "corpus").string();
  auto r = run_cli(d.collect_args(corpus), {kSalt});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("centric:"), std::string::npos);
  const auto ref = testsupport::reference_collect(d.dump, "integration-salt");
  EXPECT_EQ(testsupport::read_submissions(out / "corpus" / "submissions.ndjson"), ref.submissions);
  EXPECT_EQ(testsupport::read_comments(out / "corpus" / "comments.ndjson"), ref.comments);

  testsupport::write_text(out / "subset_lexicon.json", R"(["Iron Dome"])");
  r = run_cli({"subset", "--corpus", corpus, "--subset-lexicon", (out / "subset_lexicon.json").string(), "--out",
               (out / "subset").string()});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto subset_manifest = nlohmann::json::parse(testsupport::read_text(out / "subset" / "manifest.json"));
  EXPECT_TRUE(subset_manifest.contains("parent_manifest_sha256"));

  r = run_cli({"analyze", "--corpus", corpus, "--adapter", "stub", "--out", (out / "analysis").string()});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto bundle = nlohmann::json::parse(testsupport::read_text(out / "analysis" / "analysis.json"));
  EXPECT_EQ(bundle.at("totals").at("comments"), ref.comments.size());
  EXPECT_FALSE(bundle.at("label_means").is_null());
  EXPECT_TRUE(std::filesystem::exists(out / "analysis" / "label_cache.ndjson"));

  r = run_cli({"report", "--analysis", (out / "analysis").string(), "--format", "csv"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  for (const char* f : {"daily_submissions.csv", "daily_comments.csv", "popularity_sum.csv", "popularity_mean.csv",
                        "unique_authors.csv", "controversy_daily.csv", "subreddit_controversy.csv",
                        "top_subreddits.csv", "conversation_lengths.csv", "label_means/harm.csv",
                        "manifest.json"}) {
    EXPECT_TRUE(std::filesystem::exists(out / "analysis" / "report" / f)) << f;
  }
  r = run_cli({"report", "--analysis", (out / "analysis" / "analysis.json").string(), "--format", "json", "--out",
               (out / "json").string()});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(std::filesystem::exists(out / "json" / "report.json"));
}

TEST(Cli, CollectIsByteReproducible) {
  DumpFiles d;
  TempDir out;
  ASSERT_EQ(run_cli(d.collect_args((out / "a").string()), {kSalt}).exit_code, 0);
  ASSERT_EQ(run_cli(d.collect_args((out / "b").string()), {kSalt}).exit_code, 0);
  for (const char* f : {"submissions.ndjson", "comments.ndjson"}) {
    EXPECT_EQ(testsupport::read_text(out / "a" / f), testsupport::read_text(out / "b" / f)) << f;
  }
  ASSERT_EQ(run_cli({"analyze", "--corpus", (out / "a").string(), "--out", (out / "x").string()}).exit_code, 0);
  ASSERT_EQ(run_cli({"analyze", "--corpus", (out / "b").string(), "--out", (out / "y").string(), "--jobs", "3",
                     "--batch-size", "7"})
                .exit_code,
            0);
  auto strip = [](nlohmann::json j) {
    j.erase("metadata");
    return j.dump();
  };
  EXPECT_EQ(strip(nlohmann::json::parse(testsupport::read_text(out / "x" / "analysis.json"))),
            strip(nlohmann::json::parse(testsupport::read_text(out / "y" / "analysis.json"))));
}

TEST(Cli, EmptyAndUnreadableDumps) {
  DumpFiles d;
  TempDir out;
  testsupport::write_text(out / "empty.ndjson", "");
  auto args = d.collect_args((out / "corpus").string());
  args.insert(args.begin() + 4, (out / "empty.ndjson").string());
  const auto ok = run_cli(args, {kSalt});
  EXPECT_EQ(ok.exit_code, 0) << ok.err;

  const auto bad = run_cli({"collect", "--lexicon", (d.dir / "lexicon.json").string(), "--submissions",
                            "/nonexistent/RS.zst", "--subreddits-config", (d.dir / "subreddits.json").string(),
                            "--out", (out / "bad").string()},
                           {kSalt});
  EXPECT_EQ(bad.exit_code, 1);
  EXPECT_NE(bad.err.find("error:"), std::string::npos);
}

TEST(Cli, RankSubredditsDraftsLists) {
  DumpFiles d;
  TempDir out;
  const auto r = run_cli({"rank-subreddits", "--lexicon", (d.dir / "lexicon.json").string(), "--dumps",
                          (d.dir / "RS_2023-10.zst").string(), "--out", out.path().string()});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto ranking = nlohmann::json::parse(testsupport::read_text(out / "ranking.json"));
  ASSERT_TRUE(ranking.is_array());
  EXPECT_EQ(ranking.size(), 8u);
  EXPECT_NO_THROW(harvest::corpus::SubredditLists::load(out / "subreddits.draft.json"));
}
