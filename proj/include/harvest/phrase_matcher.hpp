#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace harvest::corpus {

// Multi-phrase matcher over normalized tokens (see text::match_tokens).
// A phrase matches when its token sequence occurs as a contiguous run of the
// text's tokens. Aho-Corasick over token ids, so one pass per text
// regardless of how many phrases are loaded.
class PhraseMatcher {
 public:
  // Phrases without any token are ignored. Throws kInvalidArgument when no
  // phrase has a token.
  explicit PhraseMatcher(std::span<const std::string> phrases);

  bool matches(std::string_view text) const;

  std::size_t phrase_count() const { return phrase_count_; }

 private:
  static constexpr std::int32_t kRoot = 0;

  struct Node {
    std::vector<std::pair<std::int32_t, std::int32_t>> edges;  // (token id, node), sorted
    std::int32_t fail = kRoot;
    bool accepts = false;
  };

  std::int32_t token_id(std::string_view token) const;
  std::int32_t child(std::int32_t node, std::int32_t token) const;

  std::deque<std::string> vocab_storage_;
  std::unordered_map<std::string_view, std::int32_t> vocab_;
  std::vector<Node> nodes_;
  std::size_t phrase_count_ = 0;
};

}  // namespace harvest::corpus
