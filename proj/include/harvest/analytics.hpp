#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "harvest/dump_ingest.hpp"

namespace harvest::analytics {

// --- series ------------------------------------------------------------------------

struct DailyPoint {
  std::int64_t day = 0;  // days since 1970-01-01 (UTC)
  double value = 0.0;

  bool operator==(const DailyPoint&) const = default;
};

struct DailySeries {
  std::string metric_name;
  std::vector<DailyPoint> points;  // strictly increasing days
  std::vector<std::int64_t> gaps;  // days inside [first, last] without a point

  // Builds points from day -> value and fills in the gaps.
  static DailySeries from_map(std::string name, const std::map<std::int64_t, double>& values);

  std::optional<double> at(std::int64_t day) const;
  nlohmann::json to_json() const;
  // "date,value" header plus one row per point.
  std::string to_csv() const;
};

// --- labels ------------------------------------------------------------------------

inline constexpr std::array<std::string_view, 10> kMoralLabels = {
    "care", "harm", "fairness", "cheating", "loyalty", "betrayal", "authority", "subversion", "purity",
    "degradation"};
inline constexpr std::array<std::string_view, 5> kEmotionLabels = {"fear", "anger", "enjoyment", "sadness",
                                                                    "disgust_contempt"};
inline constexpr std::size_t kLabelCount = kMoralLabels.size() + kEmotionLabels.size();

// Independent per-label confidences in [0, 1]; no sum-to-one constraint.
struct LabelVector {
  std::array<double, kMoralLabels.size()> moral{};
  std::array<double, kEmotionLabels.size()> emotion{};

  // Moral labels first, then emotion labels.
  double operator[](std::size_t i) const;
  static std::string_view label_name(std::size_t i);

  nlohmann::json to_json() const;  // {"moral": {...}, "emotion": {...}}
  // Throws kSchemaError unless both maps carry exactly the expected labels
  // with numeric values in [0, 1].
  static LabelVector from_json(const nlohmann::json& j);

  bool operator==(const LabelVector&) const = default;
};

// --- classifier adapters -------------------------------------------------------------

struct ClassifyRequest {
  std::string id;
  std::string text;
};

// Exactly one of `labels` / `error` is set.
struct ClassifyResult {
  std::string id;
  std::optional<LabelVector> labels;
  std::string error;
};

class ClassifierAdapter {
 public:
  virtual ~ClassifierAdapter() = default;
  // One result per request, in request order. Per-item failures are reported
  // in ClassifyResult::error; kAdapterUnavailable when the whole call fails.
  virtual std::vector<ClassifyResult> classify_batch(std::span<const ClassifyRequest> batch) = 0;
  virtual nlohmann::json describe() const = 0;
};

// Confidences derived from a hash of (label, text). Reproducible, offline.
class StubAdapter final : public ClassifierAdapter {
 public:
  std::vector<ClassifyResult> classify_batch(std::span<const ClassifyRequest> batch) override;
  nlohmann::json describe() const override;
  static LabelVector labels_for(std::string_view text);
};

// Writes request ndjson ({id,text} per line) and reads response ndjson
// ({id,moral,emotion} or {id,error}). With a command, the command runs once
// per batch with HARVEST_REQUEST / HARVEST_RESPONSE in its environment and
// must write the response file. Without one, `response_file` is read once
// as a precomputed answer set.
class FileExchangeAdapter final : public ClassifierAdapter {
 public:
  struct Options {
    std::filesystem::path work_dir;
    std::string command;
    std::filesystem::path response_file;
  };

  explicit FileExchangeAdapter(Options options);
  std::vector<ClassifyResult> classify_batch(std::span<const ClassifyRequest> batch) override;
  nlohmann::json describe() const override;

 private:
  Options options_;
  std::atomic<std::uint64_t> batches_{0};
  std::optional<std::unordered_map<std::string, ClassifyResult>> precomputed_;
};

// POST {"items":[{id,text}...]} -> {"results":[{id,moral,emotion}|{id,error}...]}.
class HttpAdapter final : public ClassifierAdapter {
 public:
  HttpAdapter(std::string url, int timeout_seconds = 60);
  std::vector<ClassifyResult> classify_batch(std::span<const ClassifyRequest> batch) override;
  nlohmann::json describe() const override;

 private:
  std::string url_;
  int timeout_seconds_;
};

// Parses one response line; schema violations become per-item errors.
ClassifyResult parse_classify_result(const nlohmann::json& j);

// Batches requests, runs up to max_in_flight batches concurrently, and caches
// successful vectors by comment id. Failed items are not cached.
class ClassifierService {
 public:
  ClassifierService(std::shared_ptr<ClassifierAdapter> adapter, std::size_t batch_size = 64,
                    std::size_t max_in_flight = 4);

  // Results in request order.
  std::vector<ClassifyResult> classify(std::span<const ClassifyRequest> requests);

  std::optional<LabelVector> cached(const std::string& id) const;
  std::size_t adapter_calls() const { return adapter_calls_; }
  const ClassifierAdapter& adapter() const { return *adapter_; }

  // Cache persistence as ndjson, sorted by id.
  void load_cache(const std::filesystem::path& path);
  void save_cache(const std::filesystem::path& path) const;

 private:
  std::shared_ptr<ClassifierAdapter> adapter_;
  std::size_t batch_size_;
  std::size_t max_in_flight_;
  std::atomic<std::size_t> adapter_calls_{0};
  mutable std::shared_mutex cache_mutex_;
  std::unordered_map<std::string, LabelVector> cache_;
};

// --- aggregations -------------------------------------------------------------------

struct SubredditControversy {
  std::string name;
  std::uint64_t total_comments = 0;
  std::uint64_t controversial_comments = 0;
  double ratio = 0.0;

  bool operator==(const SubredditControversy&) const = default;
};

struct SubredditCount {
  std::string name;
  std::uint64_t count = 0;

  bool operator==(const SubredditCount&) const = default;
};

struct TopSubreddits {
  std::vector<SubredditCount> by_submissions;
  std::vector<SubredditCount> by_comments;
};

struct LabelMeans {
  std::vector<DailySeries> series;  // one per label, moral then emotion order
  std::uint64_t included = 0;
  std::uint64_t excluded = 0;  // comments without a vector
};

DailySeries daily_counts(std::span<const ingest::SubmissionRecord> records, std::string name = "daily_submissions");
DailySeries daily_counts(std::span<const ingest::CommentRecord> records, std::string name = "daily_comments");

struct PopularitySeries {
  DailySeries sum;
  DailySeries mean;
};
PopularitySeries popularity_series(std::span<const ingest::CommentRecord> comments);

DailySeries unique_authors_daily(std::span<const ingest::CommentRecord> comments);
// One point for every day with comments, zero when none were controversial.
DailySeries controversy_daily(std::span<const ingest::CommentRecord> comments);
// Sorted by total descending, then name.
std::vector<SubredditControversy> subreddit_controversy(std::span<const ingest::CommentRecord> comments);
// Ranked by count descending, ties by name; n >= 1.
TopSubreddits top_subreddits(std::span<const ingest::SubmissionRecord> submissions,
                             std::span<const ingest::CommentRecord> comments, std::size_t n = 20);

// `labels[i]` belongs to `comments[i]`; nullopt entries are excluded and counted.
LabelMeans label_daily_mean(std::span<const ingest::CommentRecord> comments,
                            std::span<const std::optional<LabelVector>> labels);

// Streaming accumulator behind every aggregation above. Results do not
// depend on the order records are added in.
class CorpusAccumulator {
 public:
  void add(const ingest::SubmissionRecord& s);
  void add(const ingest::CommentRecord& c);
  void add_labels(const ingest::CommentRecord& c, const std::optional<LabelVector>& labels);

  DailySeries daily_submissions() const;
  DailySeries daily_comments() const;
  PopularitySeries popularity() const;
  DailySeries unique_authors() const;
  DailySeries controversy() const;
  std::vector<SubredditControversy> subreddit_controversy() const;
  TopSubreddits top_subreddits(std::size_t n) const;
  LabelMeans label_means() const;
  // Comments per submission id, including submissions without comments.
  std::vector<std::uint64_t> conversation_lengths() const;
  std::uint64_t author_comments(const std::string& author_hash) const;

 private:
  struct PopularityDay {
    std::int64_t sum = 0;
    std::uint64_t count = 0;
  };
  struct LabelDay {
    std::uint64_t count = 0;
    std::array<unsigned __int128, kLabelCount> fixed{};
  };
  struct SubredditTotals {
    std::uint64_t submissions = 0;
    std::uint64_t comments = 0;
    std::uint64_t controversial = 0;
  };

  std::map<std::int64_t, std::uint64_t> submissions_per_day_;
  std::map<std::int64_t, std::uint64_t> comments_per_day_;
  std::map<std::int64_t, PopularityDay> popularity_;
  std::map<std::int64_t, std::unordered_set<std::string>> authors_;
  std::map<std::int64_t, std::uint64_t> controversial_per_day_;
  std::map<std::string, SubredditTotals> subreddits_;
  std::map<std::int64_t, LabelDay> labels_;
  std::uint64_t labels_excluded_ = 0;
  std::unordered_set<std::string> submission_ids_;
  std::unordered_map<std::string, std::uint64_t> comments_per_link_;
  std::unordered_map<std::string, std::uint64_t> comments_by_author_;
};

// --- analysis bundle ----------------------------------------------------------------

struct AnalyzeOptions {
  std::size_t top_n = 20;
  ClassifierService* classifier = nullptr;  // label means are skipped when null
  std::size_t classify_chunk = 4096;        // comments buffered per classify call
};

// Streams a corpus directory (submissions.ndjson, comments.ndjson,
// manifest.json) and returns the full analysis bundle.
nlohmann::json analyze_corpus(const std::filesystem::path& corpus_dir, const AnalyzeOptions& options);

// Bundle from already-loaded records; `manifest` is copied into metadata.
nlohmann::json analyze_records(std::span<const ingest::SubmissionRecord> submissions,
                               std::span<const ingest::CommentRecord> comments,
                               const AnalyzeOptions& options,
                               const nlohmann::json& manifest = nlohmann::json::object());

// Report file names, relative to the output directory.
std::vector<std::string> report_files();

// Writes one CSV per series (see report_files()) into out_dir.
void write_csv_report(const nlohmann::json& bundle, const std::filesystem::path& out_dir);
// Writes report.json: every series in a single document.
void write_json_report(const nlohmann::json& bundle, const std::filesystem::path& out_dir);

}  // namespace harvest::analytics
