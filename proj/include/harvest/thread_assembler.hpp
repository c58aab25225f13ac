#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "harvest/dump_ingest.hpp"

namespace harvest::threads {

struct CommentNode {
  ingest::CommentRecord comment;
  bool orphan = false;  // parent missing, or cut out of a parent cycle
  std::vector<CommentNode> children;

  CommentNode() = default;
  CommentNode(const CommentNode&) = default;
  CommentNode(CommentNode&&) noexcept = default;
  CommentNode& operator=(const CommentNode&) = default;
  CommentNode& operator=(CommentNode&&) noexcept = default;
  // Destroys the subtree iteratively.
  ~CommentNode();
};

struct Conversation {
  ingest::SubmissionRecord root;
  std::vector<CommentNode> nodes;  // top-level replies
  std::uint64_t orphan_count = 0;
  std::uint64_t length = 0;        // comments only; the submission is not counted
  bool is_controversial = false;
};

// Throws kCrossThreadComment when a comment's link_id is not "t3_<root id>"
// (or the bare id). Comments whose parent is absent hang off the root as
// orphans. A parent_id loop is cut at its lexicographically smallest id,
// which then becomes an orphan. Siblings are ordered by created_utc, then id.
Conversation build(const ingest::SubmissionRecord& submission,
                   std::span<const ingest::CommentRecord> comments);

nlohmann::json to_json(const CommentNode& node);
nlohmann::json to_json(const Conversation& conversation);

// Builds every conversation in `submissions`, grouping comments by link_id.
// Comments whose submission is absent are ignored and counted.
struct AssembledCorpus {
  std::vector<Conversation> conversations;  // ordered by submission id
  std::uint64_t unattached_comments = 0;
};
AssembledCorpus assemble_all(std::span<const ingest::SubmissionRecord> submissions,
                             std::span<const ingest::CommentRecord> comments);

// Upper bounds of the histogram buckets. Lengths up to the first bound get
// their own exact bucket; beyond that buckets are (previous, bound].
struct Bucketing {
  std::uint64_t exact_up_to = 10;
  std::vector<std::uint64_t> bounds = {100, 1000, 10000, 100000, 1000000, 10000000};

  static Bucketing log10() { return {}; }
  std::string label(std::uint64_t length) const;
  // Sort key that keeps labels in numeric order.
  std::uint64_t order(std::uint64_t length) const;
};

struct HistogramBin {
  std::string bucket;
  std::uint64_t count = 0;

  bool operator==(const HistogramBin&) const = default;
};

// Non-empty buckets only, in ascending length order.
std::vector<HistogramBin> length_histogram(std::span<const std::uint64_t> lengths,
                                           const Bucketing& bucketing = Bucketing::log10());
std::vector<HistogramBin> length_histogram(std::span<const Conversation> conversations,
                                           const Bucketing& bucketing = Bucketing::log10());

// "bucket,count" header plus one row per bin.
std::string histogram_csv(std::span<const HistogramBin> bins);

}  // namespace harvest::threads
