#include "harvest/phrase_matcher.hpp"

#include <algorithm>
#include <queue>

#include "harvest/errors.hpp"
#include "harvest/text.hpp"

namespace harvest::corpus {

PhraseMatcher::PhraseMatcher(std::span<const std::string> phrases) {
  nodes_.emplace_back();
  std::string scratch;
  for (const auto& phrase : phrases) {
    std::vector<std::int32_t> ids;
    text::for_each_match_token(phrase, scratch, [&](std::string_view tok) {
      auto it = vocab_.find(tok);
      if (it == vocab_.end()) {
        const std::string& stored = vocab_storage_.emplace_back(tok);
        it = vocab_.emplace(stored, static_cast<std::int32_t>(vocab_.size())).first;
      }
      ids.push_back(it->second);
    });
    if (ids.empty()) continue;
    ++phrase_count_;
    std::int32_t node = kRoot;
    for (std::int32_t id : ids) {
      std::int32_t next = child(node, id);
      if (next < 0) {
        next = static_cast<std::int32_t>(nodes_.size());
        nodes_.emplace_back();
        auto& edges = nodes_[node].edges;
        edges.insert(std::upper_bound(edges.begin(), edges.end(), std::make_pair(id, next)),
                     {id, next});
      }
      node = next;
    }
    nodes_[node].accepts = true;
  }
  if (phrase_count_ == 0) throw Error(ErrorCode::kInvalidArgument, "matcher needs at least one phrase");

  // Breadth-first failure links; acceptance propagates along them.
  std::queue<std::int32_t> queue;
  for (auto [id, next] : nodes_[kRoot].edges) {
    nodes_[next].fail = kRoot;
    queue.push(next);
  }
  while (!queue.empty()) {
    const std::int32_t node = queue.front();
    queue.pop();
    for (auto [id, next] : nodes_[node].edges) {
      std::int32_t f = nodes_[node].fail;
      std::int32_t target = child(f, id);
      while (target < 0 && f != kRoot) {
        f = nodes_[f].fail;
        target = child(f, id);
      }
      nodes_[next].fail = (target >= 0 && target != next) ? target : kRoot;
      nodes_[next].accepts = nodes_[next].accepts || nodes_[nodes_[next].fail].accepts;
      queue.push(next);
    }
  }
}

std::int32_t PhraseMatcher::token_id(std::string_view token) const {
  const auto it = vocab_.find(token);
  return it == vocab_.end() ? -1 : it->second;
}

std::int32_t PhraseMatcher::child(std::int32_t node, std::int32_t token) const {
  const auto& edges = nodes_[node].edges;
  const auto it = std::lower_bound(edges.begin(), edges.end(), token,
                                   [](const auto& e, std::int32_t t) { return e.first < t; });
  return (it != edges.end() && it->first == token) ? it->second : -1;
}

bool PhraseMatcher::matches(std::string_view text) const {
  thread_local std::string scratch;
  std::int32_t state = kRoot;
  bool found = false;
  text::for_each_match_token(text, scratch, [&](std::string_view tok) {
    if (found) return;
    const std::int32_t id = token_id(tok);
    if (id < 0) {
      state = kRoot;
      return;
    }
    std::int32_t next = child(state, id);
    while (next < 0 && state != kRoot) {
      state = nodes_[state].fail;
      next = child(state, id);
    }
    state = next < 0 ? kRoot : next;
    if (nodes_[state].accepts) found = true;
  });
  return found;
}

}  // namespace harvest::corpus
