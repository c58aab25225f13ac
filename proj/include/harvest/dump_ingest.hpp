#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "harvest/errors.hpp"

namespace harvest::ingest {

struct SubmissionRecord {
  std::string id;
  std::string subreddit;
  std::string title;
  std::string selftext;
  std::string author;
  std::int64_t created_utc = 0;
  std::int64_t score = 0;
  std::int64_t num_comments = 0;

  bool operator==(const SubmissionRecord&) const = default;
};

// link_id / parent_id keep their "t3_" / "t1_" prefixes verbatim.
struct CommentRecord {
  std::string id;
  std::string link_id;
  std::string parent_id;
  std::string body;
  std::string author;
  std::string subreddit;
  std::int64_t created_utc = 0;
  std::int64_t score = 0;
  int controversiality = 0;

  bool operator==(const CommentRecord&) const = default;
};

// Required: id, subreddit, title, created_utc > 0. Unknown fields ignored.
SubmissionRecord parse_submission(std::string_view line);
// Required: id, link_id, parent_id, created_utc > 0; controversiality in {0,1}.
CommentRecord parse_comment(std::string_view line);

nlohmann::json to_json(const SubmissionRecord& r);
nlohmann::json to_json(const CommentRecord& r);
// Single-line JSON with a fixed (sorted) key order, no trailing newline.
std::string to_ndjson(const SubmissionRecord& r);
std::string to_ndjson(const CommentRecord& r);

inline void parse_record(std::string_view line, SubmissionRecord& out) { out = parse_submission(line); }
inline void parse_record(std::string_view line, CommentRecord& out) { out = parse_comment(line); }

// Strips a "t1_" / "t3_" style type prefix.
std::string_view strip_type_prefix(std::string_view fullname);

struct IngestStats {
  std::uint64_t lines_read = 0;  // non-blank lines
  std::uint64_t records_parsed = 0;
  std::uint64_t lines_skipped_malformed = 0;
  std::uint64_t bytes_read = 0;  // decoded bytes, newlines included

  nlohmann::json to_json() const;
};

enum class Compression { kAuto, kNone, kZstd };
enum class RecordKind { kSubmission, kComment };

// Buffered line reader over plain or zstd-compressed files. Memory use is two
// fixed buffers plus the current line; lines longer than max_line_bytes are
// consumed but reported as oversized.
class LineReader {
 public:
  static constexpr std::size_t kDefaultMaxLineBytes = 64u << 20;

  explicit LineReader(const std::filesystem::path& path, Compression compression = Compression::kAuto,
                      std::size_t max_line_bytes = kDefaultMaxLineBytes);
  ~LineReader();
  LineReader(LineReader&&) noexcept;
  LineReader& operator=(LineReader&&) noexcept;

  // Next line without its terminator ("\n" or "\r\n"). False at end of input.
  // Throws kCorruptCompression with the compressed byte offset.
  bool next(std::string& line);
  bool last_line_oversized() const;

  bool compressed() const;
  std::uint64_t bytes_read() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Compression detect_compression(const std::filesystem::path& path);

// Peeks at the first parseable line: "title" => submission, "link_id" => comment.
std::optional<RecordKind> detect_kind(const std::filesystem::path& path);

struct StreamOptions {
  Compression compression = Compression::kAuto;
  // Abort with kSkipRatioExceeded once malformed/lines exceeds this (checked
  // at finish() and every 100k lines). Negative disables the check.
  double max_skip_ratio = -1.0;
};

// Yields records in file order; malformed lines are skipped and counted.
template <typename Record>
class RecordStream {
 public:
  explicit RecordStream(const std::filesystem::path& path, StreamOptions options = {})
      : reader_(path, options.compression), options_(options), path_(path.string()) {}

  std::optional<Record> next() {
    while (reader_.next(line_)) {
      stats_.bytes_read = reader_.bytes_read();
      if (is_blank(line_)) continue;
      ++stats_.lines_read;
      bool ok = !reader_.last_line_oversized();
      if (ok) {
        try {
          parse_record(line_, record_);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kMalformedRecord) throw;
          ok = false;
        }
      }
      if (!ok) {
        ++stats_.lines_skipped_malformed;
        if (stats_.lines_read % 100000 == 0) check_ratio();
        continue;
      }
      ++stats_.records_parsed;
      if (stats_.lines_read % 100000 == 0) check_ratio();
      return std::move(record_);
    }
    stats_.bytes_read = reader_.bytes_read();
    return std::nullopt;
  }

  // Call after exhausting the stream to apply the skip-ratio policy.
  void finish() const { check_ratio(); }

  const IngestStats& stats() const { return stats_; }

 private:
  static bool is_blank(const std::string& s) {
    for (char c : s) {
      if (c != ' ' && c != '\t' && c != '\r') return false;
    }
    return true;
  }

  void check_ratio() const {
    if (options_.max_skip_ratio < 0 || stats_.lines_read == 0) return;
    const double ratio =
        static_cast<double>(stats_.lines_skipped_malformed) / static_cast<double>(stats_.lines_read);
    if (ratio > options_.max_skip_ratio) {
      throw Error(ErrorCode::kSkipRatioExceeded,
                  path_ + ": " + std::to_string(stats_.lines_skipped_malformed) + " of " +
                      std::to_string(stats_.lines_read) + " lines malformed");
    }
  }

  LineReader reader_;
  StreamOptions options_;
  std::string path_;
  std::string line_;
  Record record_;
  IngestStats stats_;
};

using SubmissionStream = RecordStream<SubmissionRecord>;
using CommentStream = RecordStream<CommentRecord>;

}  // namespace harvest::ingest
