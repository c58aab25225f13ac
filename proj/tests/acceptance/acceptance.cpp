#include <sys/resource.h>
#include <sys/wait.h>
#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "harvest/analytics.hpp"
#include "harvest/corpus_builder.hpp"
#include "harvest/dump_ingest.hpp"
#include "harvest/errors.hpp"
#include "harvest/lexicon_pipeline.hpp"
#include "harvest/presets.hpp"
#include "harvest/text.hpp"
#include "harvest/thread_assembler.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace harvest;
using ingest::CommentRecord;
using ingest::SubmissionRecord;
using testsupport::TempDir;

namespace {

// Pinned thresholds.
constexpr double kAggregationTolerance = 1e-9;
constexpr double kAggregationBudgetSeconds = 5.0;
constexpr int kAggregationTrials = 200;
constexpr int kContainmentTrials = 10000;
constexpr int kGoldenRuns = 3;
constexpr std::size_t kCollectRecords = 10000;
constexpr double kCollectBudgetSeconds = 10.0;
constexpr std::size_t kIngestLines = 1000000;
constexpr double kIngestBudgetSeconds = 60.0;
constexpr long kIngestMemoryBudgetKiB = 256L * 1024;
constexpr std::uint64_t kIngestMinBytes = 250ULL * 1000 * 1000;
constexpr int kForestTrials = 1000;
constexpr double kPopularityTolerance = 1e-9;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// --- 1 ---------------------------------------------------------------------------

Outcome aggregation_oracle() {
  std::mt19937 rng(101);
  const std::vector<std::string> vocab = {"Hamas", "hamas", "Gaza", "GAZA", "Gaza Strip", "West Bank",
                                          "IDF",   "Rafah", "ceasefire", "Ceasefire", "Iron Dome", "Al-Shifa",
                                          "Hezbollah", "Netanyahu", "Sinwar", "Khan Younis", "Jabalia",
                                          "Kibbutz Be'eri", "UNRWA", "Erez crossing"};
  const auto start = Clock::now();
  double worst = 0.0;
  for (int trial = 0; trial < kAggregationTrials; ++trial) {
    const int n_pages = 1 + static_cast<int>(rng() % 10);
    const int n_keywords = 1 + static_cast<int>(rng() % 20);
    std::vector<lexicon::PageKeyword> merged;
    std::map<std::string, double> oracle;
    for (int p = 0; p < n_pages; ++p) {
      const std::string page = "Page " + std::to_string(p);
      const int n_chunks = 1 + static_cast<int>(rng() % 5);
      std::vector<lexicon::ChunkScores> chunks;
      std::map<std::string, std::vector<double>> occurrences;
      for (int c = 0; c < n_chunks; ++c) {
        lexicon::ChunkScores cs{static_cast<std::size_t>(c), {}};
        const int n = static_cast<int>(rng() % 6);
        for (int k = 0; k < n; ++k) {
          const std::string kw = vocab[rng() % static_cast<std::size_t>(n_keywords)];
          const double score = static_cast<double>(rng() % 501) / 100.0;
          cs.entries.push_back({kw, score});
          occurrences[lower(kw)].push_back(score);
        }
        chunks.push_back(std::move(cs));
      }
      for (auto& pk : lexicon::merge_page_scores(page, chunks)) merged.push_back(std::move(pk));
      for (const auto& [key, scores] : occurrences) {
        double sum = 0.0;
        for (double s : scores) sum += s;
        oracle[key] += sum / static_cast<double>(scores.size());
      }
    }
    const auto got = lexicon::aggregate_corpus(merged, 100000);
    if (got.size() != oracle.size()) {
      return {false, "trial " + std::to_string(trial) + ": " + std::to_string(got.size()) + " keywords vs oracle " +
                         std::to_string(oracle.size())};
    }
    for (const auto& ck : got) {
      const auto it = oracle.find(lower(ck.keyword));
      if (it == oracle.end()) return {false, "unexpected keyword " + ck.keyword};
      worst = std::max(worst, std::abs(it->second - ck.importance));
    }
  }
  const double elapsed = seconds_since(start);
  const bool ok = worst <= kAggregationTolerance && elapsed < kAggregationBudgetSeconds;
  return {ok, std::to_string(kAggregationTrials) + " trials, max |delta| " + sci(worst) + ", " +
                  fmt(elapsed) + " s (limits " + sci(kAggregationTolerance) + ", " +
                  fmt(kAggregationBudgetSeconds) + " s)"};
}

// --- 2 ---------------------------------------------------------------------------

Outcome containment_fixpoint() {
  const std::vector<std::string> example = {"2023 Israel-Hamas war", "Hamas"};
  const auto filtered = lexicon::containment_filter(example);
  if (filtered != std::vector<std::string>{"Hamas"}) return {false, "worked example did not reduce to {Hamas}"};

  std::mt19937 rng(202);
  const std::vector<std::string> words = {"israel", "Hamas", "war", "gaza", "strip", "2023", "west", "bank"};
  for (int trial = 0; trial < kContainmentTrials; ++trial) {
    std::vector<std::string> in;
    const std::size_t n = 1 + rng() % 8;
    for (std::size_t i = 0; i < n; ++i) {
      std::string kw;
      const std::size_t len = 1 + rng() % 3;
      for (std::size_t k = 0; k < len; ++k) kw += (k ? (rng() % 3 ? " " : "-") : "") + words[rng() % words.size()];
      in.push_back(kw);
    }
    const auto once = lexicon::containment_filter(in);
    if (lexicon::containment_filter(once) != once) return {false, "not a fixpoint on trial " + std::to_string(trial)};
    for (std::size_t i = 0; i < once.size(); ++i) {
      for (std::size_t j = 0; j < once.size(); ++j) {
        if (i != j && lexicon::contains_token_run(text::match_tokens(once[i]), text::match_tokens(once[j]))) {
          return {false, "'" + once[i] + "' still contains '" + once[j] + "'"};
        }
      }
    }
  }
  return {true, "example reduced to {Hamas}; fixpoint held on " + std::to_string(kContainmentTrials) + " sets"};
}

// --- 3 ---------------------------------------------------------------------------

Outcome stub_golden() {
  const std::string pages = (testsupport::fixture_dir() / "pages").string();
  const std::string golden = testsupport::read_text(testsupport::fixture_dir() / "golden" / "lexicon_main.json");
  std::vector<std::string> outputs;
  const std::vector<std::string> jobs = {"1", "1", "1", "4", "8"};
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    TempDir out;
    const auto r = testsupport::run_cli({"extract-keywords", "--preset", "main", "--pages", pages, "--provider",
                                         "stub", "--jobs", jobs[i], "--out", out.path().string()});
    if (r.exit_code != 0) return {false, "run " + std::to_string(i) + " exited " + std::to_string(r.exit_code) + ": " + r.err};
    outputs.push_back(testsupport::read_text(out / "lexicon.json"));
  }
  for (const auto& o : outputs) {
    if (o != outputs.front()) return {false, "lexicon bytes differ between runs"};
  }
  if (outputs.front() != golden) return {false, "lexicon differs from the checked-in golden file"};
  return {true, std::to_string(kGoldenRuns) + " serial runs + 2 parallel settings (jobs 4, 8) byte-identical to golden (" +
                    std::to_string(golden.size()) + " bytes)"};
}

// --- shared corpus fixture ---------------------------------------------------------

struct CorpusFixture {
  TempDir dir;
  testsupport::SyntheticDump dump;
  corpus::SubredditLists lists;
  corpus::CorpusManifest manifest;
  double collect_seconds = 0.0;

  CorpusFixture(std::size_t records, std::uint64_t seed, const std::string& salt)
      : dump(testsupport::make_synthetic_dump(records, seed)) {
    testsupport::write_text(dir / "RS.zst", testsupport::zstd_compress(testsupport::ndjson(dump.submissions), 3));
    testsupport::write_text(dir / "RC.zst", testsupport::zstd_compress(testsupport::ndjson(dump.comments), 3));
    lists = {dump.centric, dump.inclusive, corpus::OverlapPolicy::kError};
    corpus::CollectOptions options;
    options.submission_dumps = {dir / "RS.zst"};
    options.comment_dumps = {dir / "RC.zst"};
    const auto start = Clock::now();
    manifest = corpus::collect(options, lists, corpus::PhraseMatcher(dump.lexicon), salt, corpus::CorpusPaths{corpus()});
    collect_seconds = seconds_since(start);
  }
  fs::path corpus() const { return dir / "corpus"; }
};

// --- 4 ---------------------------------------------------------------------------

Outcome collection_equivalence() {
  const CorpusFixture fx(kCollectRecords, 404, "acceptance-salt");
  const auto ref = testsupport::reference_collect(fx.dump, "acceptance-salt");
  const auto subs = testsupport::read_submissions(fx.corpus() / "submissions.ndjson");
  const auto coms = testsupport::read_comments(fx.corpus() / "comments.ndjson");
  if (subs != ref.submissions) return {false, "submissions differ from the reference"};
  if (coms != ref.comments) return {false, "comments differ from the reference"};
  std::set<std::string> ids;
  for (const auto& s : subs) ids.insert(s.id);
  std::size_t dangling = 0;
  for (const auto& c : coms) dangling += ids.count(std::string(ingest::strip_type_prefix(c.link_id))) ? 0 : 1;
  const bool ok = dangling == 0 && fx.collect_seconds < kCollectBudgetSeconds;
  return {ok, std::to_string(kCollectRecords) + " records -> " + std::to_string(subs.size()) + " submissions, " +
                  std::to_string(coms.size()) + " comments; " + std::to_string(dangling) + " dangling link_ids; " +
                  fmt(fx.collect_seconds) + " s (limit " + fmt(kCollectBudgetSeconds) + " s)"};
}

// --- 5 ---------------------------------------------------------------------------

std::vector<std::string> throughput_lexicon() {
  std::vector<std::string> lex;
  for (const auto& e : lexicon::load_lexicon_file(testsupport::fixture_dir() / "golden" / "lexicon_main.json")) {
    lex.push_back(e.keyword);
  }
  for (int i = 0; i < 168; ++i) lex.push_back("term" + std::to_string(i) + " phrase");
  return lex;
}

int ingest_worker(const std::string& path) {
  const auto lex = throughput_lexicon();
  const corpus::PhraseMatcher matcher(lex);
  ingest::SubmissionStream stream(path, {ingest::Compression::kNone, 0.0});
  std::uint64_t matched = 0;
  while (auto rec = stream.next()) matched += matcher.matches(rec->title) ? 1 : 0;
  stream.finish();
  std::cout << stream.stats().records_parsed << " " << matched << " " << stream.stats().bytes_read << "\n";
  return 0;
}

Outcome ingest_throughput() {
  TempDir dir;
  const fs::path dump = dir / "RS_large.ndjson";
  {
    std::ofstream out(dump, std::ios::binary);
    std::mt19937_64 rng(505);
    const std::vector<std::string> words = {"Gaza", "ceasefire", "talks", "Hamas", "market", "update", "weather",
                                            "Israel", "election", "football", "hostages", "recipe", "term7", "phrase"};
    std::string line;
    for (std::size_t i = 0; i < kIngestLines; ++i) {
      SubmissionRecord s;
      s.id = "x" + std::to_string(i);
      s.subreddit = i % 3 ? "worldnews" : "IsraelPalestine";
      for (int k = 0; k < 8; ++k) s.title += (k ? " " : "") + words[rng() % words.size()];
      s.selftext.assign(120 + rng() % 40, 'a' + static_cast<char>(i % 26));
      s.author = "user" + std::to_string(rng() % 100000);
      s.created_utc = 1696118400 + static_cast<std::int64_t>(rng() % 5000000);
      s.score = static_cast<std::int64_t>(rng() % 1000);
      line = ingest::to_ndjson(s);
      line.push_back('\n');
      out.write(line.data(), static_cast<std::streamsize>(line.size()));
    }
  }
  const auto size = fs::file_size(dump);
  const fs::path result = dir / "worker.out";

  const auto start = Clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) return {false, "fork failed"};
  if (pid == 0) {
    const int fd = ::open(result.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    ::dup2(fd, STDOUT_FILENO);
    ::execl("/proc/self/exe", "acceptance", "--ingest-worker", dump.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  int status = 0;
  struct rusage usage {};
  ::wait4(pid, &status, 0, &usage);
  const double elapsed = seconds_since(start);
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, "worker failed with status " + std::to_string(status)};

  std::istringstream in(testsupport::read_text(result));
  std::uint64_t parsed = 0;
  std::uint64_t matched = 0;
  std::uint64_t bytes = 0;
  in >> parsed >> matched >> bytes;
  const long peak_kib = usage.ru_maxrss;
  const bool ok = parsed == kIngestLines && bytes == size && size >= kIngestMinBytes && matched > 0 &&
                  elapsed < kIngestBudgetSeconds && peak_kib < kIngestMemoryBudgetKiB;
  return {ok, std::to_string(parsed) + " lines, " + std::to_string(size / 1000000) + " MB, " +
                  std::to_string(matched) + " title matches; " + fmt(elapsed) + " s, peak RSS " +
                  std::to_string(peak_kib / 1024) + " MiB (limits " + fmt(kIngestBudgetSeconds) + " s, " +
                  std::to_string(kIngestMemoryBudgetKiB / 1024) + " MiB)"};
}

// --- 6 ---------------------------------------------------------------------------

std::size_t count_tree(const std::vector<threads::CommentNode>& roots, std::set<const threads::CommentNode*>& seen) {
  std::size_t n = 0;
  std::vector<const threads::CommentNode*> stack;
  for (const auto& r : roots) stack.push_back(&r);
  while (!stack.empty()) {
    const auto* node = stack.back();
    stack.pop_back();
    if (!seen.insert(node).second) return static_cast<std::size_t>(-1);
    ++n;
    for (const auto& c : node->children) stack.push_back(&c);
  }
  return n;
}

Outcome thread_conservation() {
  std::mt19937 rng(606);
  std::uint64_t total_comments = 0;
  std::uint64_t total_orphans = 0;
  std::uint64_t cycles_planted = 0;
  for (int trial = 0; trial < kForestTrials; ++trial) {
    std::vector<SubmissionRecord> subs;
    std::vector<CommentRecord> coms;
    const int n_subs = 1 + static_cast<int>(rng() % 5);
    for (int s = 0; s < n_subs; ++s) {
      SubmissionRecord r;
      r.id = "s" + std::to_string(s);
      r.subreddit = "Gaza";
      r.title = "t";
      r.created_utc = 1000;
      subs.push_back(r);
    }
    const int n = static_cast<int>(rng() % 80);
    for (int i = 0; i < n; ++i) {
      CommentRecord c;
      c.id = "c" + std::to_string(i);
      const std::string link = "s" + std::to_string(rng() % static_cast<unsigned>(n_subs));
      c.link_id = "t3_" + link;
      const auto roll = rng() % 10;
      if (roll < 3) {
        c.parent_id = c.link_id;
      } else if (roll < 8) {
        c.parent_id = "t1_c" + std::to_string(rng() % static_cast<unsigned>(n));
      } else {
        c.parent_id = "t1_deleted" + std::to_string(i);
      }
      c.created_utc = 2000 + static_cast<std::int64_t>(rng() % 50);
      c.controversiality = static_cast<int>(rng() % 2);
      coms.push_back(c);
    }
    if (n >= 3 && trial % 4 == 0) {
      // Plant an explicit three-cycle inside one thread.
      for (int k = 0; k < 3; ++k) {
        coms[static_cast<std::size_t>(k)].link_id = "t3_s0";
        coms[static_cast<std::size_t>(k)].parent_id = "t1_c" + std::to_string((k + 1) % 3);
      }
      ++cycles_planted;
    }
    const auto all = threads::assemble_all(subs, coms);
    std::uint64_t sum = 0;
    std::set<const threads::CommentNode*> seen;
    std::size_t counted = 0;
    for (const auto& conv : all.conversations) {
      sum += conv.length;
      total_orphans += conv.orphan_count;
      const auto k = count_tree(conv.nodes, seen);
      if (k == static_cast<std::size_t>(-1)) return {false, "node visited twice in trial " + std::to_string(trial)};
      counted += k;
    }
    if (sum != coms.size() || counted != coms.size() || all.unattached_comments != 0) {
      return {false, "trial " + std::to_string(trial) + ": lengths " + std::to_string(sum) + ", nodes " +
                         std::to_string(counted) + ", comments " + std::to_string(coms.size())};
    }
    auto shuffled = coms;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto subs_shuffled = subs;
    std::shuffle(subs_shuffled.begin(), subs_shuffled.end(), rng);
    const auto again = threads::assemble_all(subs_shuffled, shuffled);
    for (std::size_t i = 0; i < all.conversations.size(); ++i) {
      if (threads::to_json(again.conversations[i]) != threads::to_json(all.conversations[i])) {
        return {false, "shuffle changed conversation " + all.conversations[i].root.id + " in trial " + std::to_string(trial)};
      }
    }
    total_comments += coms.size();
  }
  return {true, std::to_string(kForestTrials) + " forests, " + std::to_string(total_comments) + " comments, " +
                    std::to_string(total_orphans) + " orphans, " + std::to_string(cycles_planted) +
                    " planted cycles; sums conserved, shuffle-invariant"};
}

// --- 7 ---------------------------------------------------------------------------

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = testsupport::read_text(e.path());
  }
  return out;
}

double series_total(const nlohmann::json& series) {
  double t = 0.0;
  for (const auto& p : series.at("points")) t += p.at(1).get<double>();
  return t;
}

Outcome analytics_invariance() {
  const CorpusFixture fx(8000, 707, "salt-7");
  auto subs = testsupport::read_submissions(fx.corpus() / "submissions.ndjson");
  auto coms = testsupport::read_comments(fx.corpus() / "comments.ndjson");
  const auto manifest_json = fx.manifest.to_json();

  auto bundle_for = [&](const std::vector<SubmissionRecord>& s, const std::vector<CommentRecord>& c, std::size_t jobs) {
    analytics::ClassifierService svc(std::make_shared<analytics::StubAdapter>(), 37, jobs);
    analytics::AnalyzeOptions opts;
    opts.classifier = &svc;
    return analytics::analyze_records(s, c, opts, manifest_json);
  };
  const auto base = bundle_for(subs, coms, 1);
  std::mt19937 rng(77);
  std::shuffle(subs.begin(), subs.end(), rng);
  std::shuffle(coms.begin(), coms.end(), rng);
  const auto shuffled = bundle_for(subs, coms, 4);

  TempDir a;
  TempDir b;
  analytics::write_csv_report(base, a.path());
  analytics::write_json_report(base, a.path());
  analytics::write_csv_report(shuffled, b.path());
  analytics::write_json_report(shuffled, b.path());
  const auto files_a = read_tree(a.path());
  if (files_a != read_tree(b.path())) return {false, "report bundles differ after shuffling"};
  if (base.dump() != shuffled.dump()) return {false, "analysis bundles differ after shuffling"};

  const auto streamed = analytics::analyze_corpus(fx.corpus(), {});
  const auto& series = streamed.at("series");
  const double sub_total = series_total(series.at("daily_submissions"));
  const double com_total = series_total(series.at("daily_comments"));
  if (sub_total != static_cast<double>(fx.manifest.totals.submissions) ||
      com_total != static_cast<double>(fx.manifest.totals.comments)) {
    return {false, "daily totals do not equal manifest totals"};
  }

  for (const auto& row : base.at("subreddit_controversy")) {
    const double r = row.at("ratio");
    if (r < 0.0 || r > 1.0) return {false, "controversy ratio out of range"};
  }
  std::size_t label_points = 0;
  for (const auto& [label, s] : base.at("label_means").at("series").items()) {
    for (const auto& p : s.at("points")) {
      const double v = p.at(1);
      if (v < 0.0 || v > 1.0) return {false, "label mean out of range for " + label};
      ++label_points;
    }
  }

  std::map<std::string, double> count;
  std::map<std::string, double> sum;
  std::map<std::string, double> mean;
  for (const auto& p : base.at("series").at("daily_comments").at("points")) count[p.at(0)] = p.at(1);
  for (const auto& p : base.at("series").at("popularity_sum").at("points")) sum[p.at(0)] = p.at(1);
  for (const auto& p : base.at("series").at("popularity_mean").at("points")) mean[p.at(0)] = p.at(1);
  double worst = 0.0;
  for (const auto& [day, c] : count) {
    if (!sum.count(day) || !mean.count(day)) return {false, "popularity missing day " + day};
    worst = std::max(worst, std::abs(mean[day] * c - sum[day]) / std::max(1.0, std::abs(sum[day])));
  }
  if (worst > kPopularityTolerance) return {false, "mean x count deviates from sum by " + sci(worst)};
  return {true, std::to_string(files_a.size()) + " report files byte-identical after shuffle; totals " +
                    std::to_string(fx.manifest.totals.submissions) + "/" + std::to_string(fx.manifest.totals.comments) +
                    " match manifest; " + std::to_string(label_points) + " label means in [0,1]; max relative " +
                    "mean*count-sum error " + sci(worst) + " (limit " + sci(kPopularityTolerance) + ")"};
}

// --- 8 ---------------------------------------------------------------------------

Outcome subset_dominance() {
  const CorpusFixture fx(8000, 808, "salt-8");
  TempDir out;
  const std::vector<std::string> subset_lex = {"Iron Dome", "rockets", "ceasefire talks"};
  const auto m = corpus::derive_subset(corpus::CorpusPaths{fx.corpus()}, corpus::PhraseMatcher(subset_lex),
                                       corpus::CorpusPaths{out.path()});
  const auto parent_subs = testsupport::read_submissions(fx.corpus() / "submissions.ndjson");
  const auto parent_coms = testsupport::read_comments(fx.corpus() / "comments.ndjson");
  const auto subs = testsupport::read_submissions(out / "submissions.ndjson");
  const auto coms = testsupport::read_comments(out / "comments.ndjson");
  std::set<std::string> parent_s;
  std::set<std::string> parent_c;
  for (const auto& s : parent_subs) parent_s.insert(ingest::to_ndjson(s));
  for (const auto& c : parent_coms) parent_c.insert(ingest::to_ndjson(c));
  for (const auto& s : subs) {
    if (!parent_s.count(ingest::to_ndjson(s))) return {false, "subset submission not in parent: " + s.id};
  }
  for (const auto& c : coms) {
    if (!parent_c.count(ingest::to_ndjson(c))) return {false, "subset comment not in parent: " + c.id};
  }
  if (subs.empty()) return {false, "subset is empty; fixture does not exercise the check"};

  const auto parent = analytics::analyze_corpus(fx.corpus(), {});
  const auto child = analytics::analyze_corpus(out.path(), {});
  const std::vector<std::string> count_series = {"daily_submissions", "daily_comments", "unique_authors",
                                                 "controversy_daily"};
  std::size_t compared = 0;
  for (const auto& name : count_series) {
    std::map<std::string, double> p;
    for (const auto& pt : parent.at("series").at(name).at("points")) p[pt.at(0)] = pt.at(1);
    for (const auto& pt : child.at("series").at(name).at("points")) {
      const std::string day = pt.at(0);
      const double v = pt.at(1);
      if (!p.count(day) || v > p[day]) return {false, name + " exceeds parent on " + day};
      ++compared;
    }
  }
  return {true, std::to_string(subs.size()) + "/" + std::to_string(parent_subs.size()) + " submissions, " +
                    std::to_string(coms.size()) + "/" + std::to_string(parent_coms.size()) +
                    " comments; " + std::to_string(compared) + " daily points <= parent across " +
                    std::to_string(count_series.size()) + " count series; totals " + std::to_string(m.totals.submissions)};
}

// --- 9 ---------------------------------------------------------------------------

Outcome anonymization() {
  const CorpusFixture a(6000, 909, "salt-one");
  const CorpusFixture b(6000, 909, "salt-one");
  const CorpusFixture c(6000, 909, "salt-two");

  TempDir analysis;
  analytics::ClassifierService svc(std::make_shared<analytics::StubAdapter>());
  analytics::AnalyzeOptions opts;
  opts.classifier = &svc;
  const auto bundle = analytics::analyze_corpus(a.corpus(), opts);
  analytics::write_csv_report(bundle, analysis.path());
  analytics::write_json_report(bundle, analysis.path());
  testsupport::write_text(analysis / "analysis.json", bundle.dump(2));

  std::size_t files_scanned = 0;
  std::size_t planted = 0;
  for (const auto& root : {a.corpus(), analysis.path()}) {
    for (const auto& [name, body] : read_tree(root)) {
      ++files_scanned;
      for (const auto& author : a.dump.authors) {
        if (author.rfind("planted_user_", 0) != 0) continue;
        if (body.find(author) != std::string::npos) return {false, "raw author " + author + " found in " + name};
      }
    }
  }
  for (const auto& author : a.dump.authors) planted += author.rfind("planted_user_", 0) == 0 ? 1 : 0;

  for (const char* f : {"submissions.ndjson", "comments.ndjson"}) {
    if (testsupport::read_text(a.corpus() / f) != testsupport::read_text(b.corpus() / f)) {
      return {false, std::string("hashes unstable under a fixed salt in ") + f};
    }
  }
  const auto sa = testsupport::read_submissions(a.corpus() / "submissions.ndjson");
  const auto sc = testsupport::read_submissions(c.corpus() / "submissions.ndjson");
  if (sa.size() != sc.size()) return {false, "salt changed record selection"};
  std::size_t changed = 0;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    if (sa[i].author.empty()) continue;
    if (sa[i].author == sc[i].author) return {false, "hash unchanged under a different salt for " + sa[i].id};
    ++changed;
  }
  return {planted == 50, std::to_string(planted) + " planted usernames, 0 found in " + std::to_string(files_scanned) +
                             " output files; identical bytes under a fixed salt; " + std::to_string(changed) +
                             " author hashes all changed under a new salt"};
}

// --- 10 --------------------------------------------------------------------------

Outcome config_fidelity() {
  const std::vector<std::string> centric = {
      "Palestine", "IsraelPalestine", "AskMiddleEast", "IsraelHamasWar", "islam", "israelexposed", "exmuslim",
      "Jewish", "Judaism", "IsraelCrimes", "Palestinian_Violence", "AntiSemitismInReddit", "IsraelWarVideoReport",
      "IsraelUnderAttack", "Israel_Palestine", "IsraelICYMI", "IsraelWar", "IsrealPalestineWar_23", "MuslimLounge",
      "Muslim", "Gaza", "MuslimCorner", "IsraelVsHamas", "Israel", "PalestinianvsIsrael"};
  const std::vector<std::string> inclusive = {
      "AutoNewspaper", "worldnews", "news", "brasilnoticias", "AskReddit", "Destiny", "2ndYomKippurWar",
      "CombatFootage", "DisneyNewsfeed", "TrendingQuickTVnews", "Conservative", "BreakingNews24hr", "conspiracy",
      "EndlessWar", "PublicFreakout", "politics", "NoStupidQuestions", "SeenOnNews_longtail", "NBCauto", "raceplay",
      "FreeKarma4You", "europe", "NoFilterNews", "worldnewsvideo", "TheDeprogram", "Mexico_Videos", "dirtyr4r",
      "FRANCE24auto", "Ernesto_it", "honestheadlinenews", "conservatives", "N_N_N", "Judaism", "socialism",
      "Hasan_Piker", "TrendsNewsWorld", "NewsWhatever", "ItaliaBox", "VaushV", "theworldnews", "TopMindsOfReddit",
      "TIMESINDIAauto", "NonCredibleDefense", "rustjob", "CNNauto", "explainlikeimfive", "NewsOfTheStupid",
      "ReactJSJobs", "anime_titties", "therewasanattempt", "ukpolitics", "lebanon", "ALJAZEERAauto", "NYTauto",
      "BBCauto", "golangjob", "TWTauto", "geopolitics", "h3h3productions", "redscarepod", "GUARDIANauto",
      "TheMajorityReport", "worldpolitics2", "FOXauto", "war", "NewIran", "LabourUK", "canada", "JavaScriptJob",
      "telaviv", "Britain", "india", "neoliberal", "chomsky", "infomoney"};
  const std::map<std::string, std::vector<std::string>> seeds = {
      {"main", {"Israel–Hamas war", "Israel", "Hamas", "Palestinian", "Gaza"}},
      {"Z", {"Zionism", "antisemitism"}},
      {"P", {"Free Palestine", "Islamophobia"}}};

  std::vector<std::string> problems;
  const lexicon::PipelineConfig defaults;
  if (defaults.max_chunk_tokens != 3000 || lexicon::kDefaultMaxChunkTokens != 3000) problems.push_back("chunk limit");
  if (defaults.top_n != 200 || lexicon::kDefaultTopN != 200) problems.push_back("top_n");
  if (llm::kMinImportance != 0.0 || llm::kMaxImportance != 5.0) problems.push_back("score bounds");
  const auto clamped = llm::parse_scored_keywords("a: 9, b: -2");
  if (clamped.entries.at(0).importance != 5.0 || clamped.entries.at(1).importance != 0.0) {
    problems.push_back("score clamping");
  }
  const auto lists = corpus::SubredditLists::builtin_defaults();
  if (lists.centric != centric) problems.push_back("centric list");
  if (lists.inclusive != inclusive) problems.push_back("inclusive list");
  for (const auto& [name, expected] : seeds) {
    const auto preset = presets::lexicon_preset(name);
    if (!preset || preset->seed_terms != expected) problems.push_back("seeds for " + name);
    if (preset && presets::pipeline_config(*preset).max_chunk_tokens != 3000) problems.push_back("preset chunk limit " + name);
  }
  if (presets::lexicon_presets().size() != 3) problems.push_back("preset count");
  if (!problems.empty()) {
    std::string d = "mismatch:";
    for (const auto& p : problems) d += " " + p;
    return {false, d};
  }
  return {true, "chunk 3000, top_n 200, scores [0,5], lists " + std::to_string(centric.size()) + "+" +
                    std::to_string(inclusive.size()) + ", seeds for main/Z/P"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc == 3 && std::string(argv[1]) == "--ingest-worker") return ingest_worker(argv[2]);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"aggregation oracle equivalence", aggregation_oracle},
      {"containment example and fixpoint", containment_fixpoint},
      {"stub end-to-end golden", stub_golden},
      {"collection equivalence and closure", collection_equivalence},
      {"ingest throughput and memory", ingest_throughput},
      {"thread conservation", thread_conservation},
      {"analytics invariance and conservation", analytics_invariance},
      {"subset dominance", subset_dominance},
      {"anonymization", anonymization},
      {"config fidelity", config_fidelity},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << (i + 1) << "] " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failures == 0 ? 0 : 1;
}
