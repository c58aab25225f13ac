#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "harvest/dump_ingest.hpp"
#include "harvest/phrase_matcher.hpp"

namespace harvest::corpus {

enum class Category { kCentric, kInclusive, kExcluded };

std::string_view to_string(Category c);

struct SubredditProfile {
  std::string name;
  std::uint64_t matched_submissions = 0;
  std::uint64_t total_submissions_seen = 0;
  Category category = Category::kExcluded;

  double match_ratio() const {
    return total_submissions_seen == 0
               ? 0.0
               : static_cast<double>(matched_submissions) / static_cast<double>(total_submissions_seen);
  }
};

enum class OverlapPolicy { kError, kCentricWins };

// The two-list subreddit configuration file.
struct SubredditLists {
  std::vector<std::string> centric;
  std::vector<std::string> inclusive;
  OverlapPolicy overlap = OverlapPolicy::kError;

  nlohmann::json to_json() const;
  static SubredditLists from_json(const nlohmann::json& j);
  static SubredditLists load(const std::filesystem::path& path);

  // 25 conflict-centric and 75 conflict-inclusive communities. One name
  // appears in both source tables, so these ship with kCentricWins.
  static SubredditLists builtin_defaults();
};

// Case-insensitive name -> category lookup. Throws kOverlappingLists when a
// name is in both lists under OverlapPolicy::kError.
class Classification {
 public:
  explicit Classification(const SubredditLists& lists);

  Category category(std::string_view subreddit) const;

 private:
  std::map<std::string, Category, std::less<>> by_name_;
};

// Per-subreddit match tallies; feed it one submission at a time.
class SubredditTally {
 public:
  void add(const ingest::SubmissionRecord& submission, bool matched);
  // Sorted by matched descending, then name.
  std::vector<SubredditProfile> ranked() const;

 private:
  std::map<std::string, SubredditProfile> profiles_;
};

// True iff some lexicon phrase occurs as a contiguous token run of the title.
inline bool title_matches(std::string_view title, const PhraseMatcher& lexicon) {
  return lexicon.matches(title);
}

std::vector<SubredditProfile> rank_subreddits(std::span<const ingest::SubmissionRecord> submissions,
                                              const PhraseMatcher& lexicon);

std::vector<SubredditProfile> classify_subreddits(std::vector<SubredditProfile> profiles,
                                                  const SubredditLists& lists);

// Draft configuration: match ratio >= centric_ratio (with at least
// min_matched matches) proposes centric; any other subreddit with matches
// proposes inclusive. Never applied automatically.
SubredditLists suggest_lists(std::span<const SubredditProfile> profiles, double centric_ratio = 0.5,
                             std::uint64_t min_matched = 1);

// --- anonymization ----------------------------------------------------------------

struct AuthorHash {
  std::string hex;  // 64 lowercase hex characters

  bool operator==(const AuthorHash&) const = default;
};

// SHA-256 of salt || author. kMissingSalt for an empty salt.
AuthorHash anonymize(std::string_view author, std::string_view salt);

inline constexpr const char* kSaltEnvVar = "HARVEST_SALT";
// Reads the salt from the environment only; kMissingSalt if unset or empty.
std::string salt_from_env(const char* var = kSaltEnvVar);

// --- collection -------------------------------------------------------------------

struct CorpusPaths {
  std::filesystem::path dir;

  std::filesystem::path submissions() const { return dir / "submissions.ndjson"; }
  std::filesystem::path comments() const { return dir / "comments.ndjson"; }
  std::filesystem::path manifest() const { return dir / "manifest.json"; }
};

struct ClassCounts {
  std::uint64_t submissions = 0;
  std::uint64_t comments = 0;
};

struct CorpusManifest {
  std::string lexicon_ref;
  std::string lexicon_sha256;
  std::vector<std::string> centric;
  std::vector<std::string> inclusive;
  std::string first_day;  // empty for an empty corpus
  std::string last_day;
  std::map<std::string, ClassCounts> counts;  // "centric" / "inclusive" / "subset"
  ClassCounts totals;
  std::string deleted_author_hash;
  std::string parent_manifest_sha256;  // subsets only
  nlohmann::json inputs = nlohmann::json::array();  // per-file ingest stats
  nlohmann::json config = nlohmann::json::object();

  nlohmann::json to_json() const;
  static CorpusManifest from_json(const nlohmann::json& j);
  static CorpusManifest load(const std::filesystem::path& path);
};

struct CollectOptions {
  std::vector<std::filesystem::path> submission_dumps;
  std::vector<std::filesystem::path> comment_dumps;
  ingest::StreamOptions stream{ingest::Compression::kAuto, 0.01};
  bool match_selftext = false;
  std::string lexicon_ref;
  std::string lexicon_sha256;
  nlohmann::json config = nlohmann::json::object();
};

// Centric subreddits keep every submission, inclusive ones only lexicon
// matches, excluded ones nothing. Comments are kept when their link_id names
// a kept submission. Pass one streams submissions and remembers kept ids;
// pass two streams comments. Authors are hashed before anything is written.
// manifest.json is written last, after both record files are in place.
CorpusManifest collect(const CollectOptions& options, const SubredditLists& lists,
                       const PhraseMatcher& lexicon, std::string_view salt,
                       const CorpusPaths& out);

// Keeps the parent corpus's submissions whose titles match `subset_lexicon`,
// plus their comments. Authors are already hashed and are copied as is.
CorpusManifest derive_subset(const CorpusPaths& parent, const PhraseMatcher& subset_lexicon,
                             const CorpusPaths& out, std::string lexicon_ref = {},
                             std::string lexicon_sha256 = {});

}  // namespace harvest::corpus
