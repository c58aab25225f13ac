#include "harvest/thread_assembler.hpp"

#include <algorithm>
#include <numeric>
#include <string_view>
#include <tuple>
#include <unordered_map>

#include "harvest/errors.hpp"

namespace harvest::threads {

using ingest::CommentRecord;
using ingest::SubmissionRecord;
using nlohmann::json;

namespace {

auto sort_key(const CommentRecord& c) {
  return std::tie(c.created_utc, c.id, c.link_id, c.parent_id, c.body, c.author, c.subreddit, c.score,
                  c.controversiality);
}

constexpr std::int64_t kRootParent = -1;

}  // namespace

Conversation build(const SubmissionRecord& submission, std::span<const CommentRecord> comments) {
  for (const auto& c : comments) {
    if (ingest::strip_type_prefix(c.link_id) != submission.id) {
      throw Error(ErrorCode::kCrossThreadComment,
                  "comment " + c.id + " has link_id " + c.link_id + ", expected t3_" + submission.id);
    }
  }

  const std::size_t n = comments.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return sort_key(comments[a]) < sort_key(comments[b]); });
  std::vector<const CommentRecord*> sorted(n);
  for (std::size_t i = 0; i < n; ++i) sorted[i] = &comments[order[i]];

  // First occurrence in canonical order wins when ids repeat.
  std::unordered_map<std::string_view, std::int64_t> index;
  index.reserve(n);
  for (std::size_t i = 0; i < n; ++i) index.emplace(sorted[i]->id, static_cast<std::int64_t>(i));

  Conversation conv;
  conv.root = submission;
  conv.length = n;

  std::vector<std::int64_t> parent(n, kRootParent);
  std::vector<bool> orphan(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string_view pid = sorted[i]->parent_id;
    const bool t3 = pid.starts_with("t3_");
    const std::string_view bare = ingest::strip_type_prefix(pid);
    if (!t3) {
      const auto it = index.find(bare);
      if (it != index.end()) {
        parent[i] = it->second;
        continue;
      }
    }
    if (bare != submission.id) orphan[i] = true;
  }

  // Parent links form a functional graph; cut each cycle at its smallest id.
  std::vector<std::uint8_t> state(n, 0);  // 0 new, 1 on current path, 2 done
  std::vector<std::int64_t> path;
  for (std::size_t start = 0; start < n; ++start) {
    if (state[start] != 0) continue;
    path.clear();
    std::int64_t v = static_cast<std::int64_t>(start);
    while (v != kRootParent && state[static_cast<std::size_t>(v)] == 0) {
      state[static_cast<std::size_t>(v)] = 1;
      path.push_back(v);
      v = parent[static_cast<std::size_t>(v)];
    }
    if (v != kRootParent && state[static_cast<std::size_t>(v)] == 1) {
      std::int64_t cut = v;
      for (std::int64_t u = parent[static_cast<std::size_t>(v)]; u != v; u = parent[static_cast<std::size_t>(u)]) {
        const auto& a = sorted[static_cast<std::size_t>(u)]->id;
        const auto& b = sorted[static_cast<std::size_t>(cut)]->id;
        if (a < b || (a == b && u < cut)) cut = u;
      }
      parent[static_cast<std::size_t>(cut)] = kRootParent;
      orphan[static_cast<std::size_t>(cut)] = true;
    }
    for (std::int64_t u : path) state[static_cast<std::size_t>(u)] = 2;
  }

  std::vector<std::vector<std::size_t>> kids(n);
  std::vector<std::size_t> top;
  for (std::size_t i = 0; i < n; ++i) {
    if (orphan[i]) ++conv.orphan_count;
    if (sorted[i]->controversiality == 1) conv.is_controversial = true;
    if (parent[i] == kRootParent) {
      top.push_back(i);
    } else {
      kids[static_cast<std::size_t>(parent[i])].push_back(i);
    }
  }

  // Post-order assembly without recursion so deep chains cannot exhaust the stack.
  std::vector<CommentNode> built(n);
  std::vector<std::pair<std::size_t, bool>> stack;
  for (auto it = top.rbegin(); it != top.rend(); ++it) stack.emplace_back(*it, false);
  while (!stack.empty()) {
    auto [v, expanded] = stack.back();
    stack.pop_back();
    if (!expanded) {
      stack.emplace_back(v, true);
      for (auto it = kids[v].rbegin(); it != kids[v].rend(); ++it) stack.emplace_back(*it, false);
      continue;
    }
    CommentNode& node = built[v];
    node.comment = *sorted[v];
    node.orphan = orphan[v];
    node.children.reserve(kids[v].size());
    for (std::size_t k : kids[v]) node.children.push_back(std::move(built[k]));
  }
  conv.nodes.reserve(top.size());
  for (std::size_t t : top) conv.nodes.push_back(std::move(built[t]));
  return conv;
}

CommentNode::~CommentNode() {
  std::vector<CommentNode> pending = std::move(children);
  while (!pending.empty()) {
    CommentNode node = std::move(pending.back());
    pending.pop_back();
    for (auto& child : node.children) pending.push_back(std::move(child));
    node.children.clear();
  }
}

json to_json(const CommentNode& node) {
  struct Frame {
    const CommentNode* node;
    json children = json::array();
    std::size_t next = 0;
  };
  std::vector<Frame> stack;
  stack.push_back({&node});
  json out;
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next < top.node->children.size()) {
      const CommentNode* child = &top.node->children[top.next++];
      stack.push_back({child});
      continue;
    }
    json j = ingest::to_json(top.node->comment);
    j["orphan"] = top.node->orphan;
    j["children"] = std::move(top.children);
    stack.pop_back();
    if (stack.empty()) {
      out = std::move(j);
    } else {
      stack.back().children.push_back(std::move(j));
    }
  }
  return out;
}

json to_json(const Conversation& conversation) {
  json children = json::array();
  for (const auto& c : conversation.nodes) children.push_back(to_json(c));
  return {{"submission", ingest::to_json(conversation.root)},
          {"length", conversation.length},
          {"orphan_count", conversation.orphan_count},
          {"is_controversial", conversation.is_controversial},
          {"children", std::move(children)}};
}

AssembledCorpus assemble_all(std::span<const SubmissionRecord> submissions,
                             std::span<const CommentRecord> comments) {
  std::vector<const SubmissionRecord*> roots;
  roots.reserve(submissions.size());
  for (const auto& s : submissions) roots.push_back(&s);
  std::sort(roots.begin(), roots.end(), [](const auto* a, const auto* b) {
    return std::tie(a->id, a->created_utc, a->subreddit, a->title) <
           std::tie(b->id, b->created_utc, b->subreddit, b->title);
  });
  roots.erase(std::unique(roots.begin(), roots.end(), [](const auto* a, const auto* b) { return a->id == b->id; }),
              roots.end());

  std::unordered_map<std::string_view, std::vector<CommentRecord>> by_link;
  for (const auto* r : roots) by_link.try_emplace(r->id);
  AssembledCorpus out;
  for (const auto& c : comments) {
    const auto it = by_link.find(ingest::strip_type_prefix(c.link_id));
    if (it == by_link.end()) {
      ++out.unattached_comments;
      continue;
    }
    it->second.push_back(c);
  }
  out.conversations.reserve(roots.size());
  for (const auto* r : roots) {
    auto& group = by_link[r->id];
    out.conversations.push_back(build(*r, group));
    group.clear();
    group.shrink_to_fit();
  }
  return out;
}

// --- length histogram ----------------------------------------------------------------

std::string Bucketing::label(std::uint64_t length) const {
  if (length <= exact_up_to) return std::to_string(length);
  std::uint64_t lo = exact_up_to + 1;
  for (std::uint64_t bound : bounds) {
    if (length <= bound) return std::to_string(lo) + "-" + std::to_string(bound);
    lo = bound + 1;
  }
  return ">" + std::to_string(lo - 1);
}

std::uint64_t Bucketing::order(std::uint64_t length) const {
  if (length <= exact_up_to) return length;
  std::uint64_t key = exact_up_to + 1;
  for (std::uint64_t bound : bounds) {
    if (length <= bound) return key;
    ++key;
  }
  return key;
}

std::vector<HistogramBin> length_histogram(std::span<const std::uint64_t> lengths, const Bucketing& bucketing) {
  std::map<std::uint64_t, HistogramBin> bins;
  for (std::uint64_t len : lengths) {
    auto& bin = bins[bucketing.order(len)];
    if (bin.count == 0) bin.bucket = bucketing.label(len);
    ++bin.count;
  }
  std::vector<HistogramBin> out;
  out.reserve(bins.size());
  for (auto& [key, bin] : bins) out.push_back(std::move(bin));
  return out;
}

std::vector<HistogramBin> length_histogram(std::span<const Conversation> conversations,
                                           const Bucketing& bucketing) {
  std::vector<std::uint64_t> lengths;
  lengths.reserve(conversations.size());
  for (const auto& c : conversations) lengths.push_back(c.length);
  return length_histogram(std::span<const std::uint64_t>(lengths), bucketing);
}

std::string histogram_csv(std::span<const HistogramBin> bins) {
  std::string out = "bucket,count\n";
  for (const auto& b : bins) out += b.bucket + "," + std::to_string(b.count) + "\n";
  return out;
}

}  // namespace harvest::threads
