#include "harvest/corpus_builder.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "harvest/errors.hpp"
#include "harvest/files.hpp"
#include "harvest/text.hpp"

namespace harvest::corpus {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Category c) {
  switch (c) {
    case Category::kCentric: return "centric";
    case Category::kInclusive: return "inclusive";
    case Category::kExcluded: return "excluded";
  }
  return "excluded";
}

// --- subreddit lists ---------------------------------------------------------------

json SubredditLists::to_json() const {
  return {{"centric", centric},
          {"inclusive", inclusive},
          {"overlap", overlap == OverlapPolicy::kError ? "error" : "centric_wins"}};
}

SubredditLists SubredditLists::from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kConfigInvalid, "subreddit config must be an object");
  auto names = [&](const char* key) {
    std::vector<std::string> out;
    const auto it = j.find(key);
    if (it == j.end()) return out;
    if (!it->is_array()) throw Error(ErrorCode::kConfigInvalid, std::string(key) + " must be an array");
    for (const auto& v : *it) {
      if (!v.is_string() || text::trim(v.get_ref<const std::string&>()).empty()) {
        throw Error(ErrorCode::kConfigInvalid, std::string(key) + " entries must be non-empty strings");
      }
      out.emplace_back(text::trim(v.get_ref<const std::string&>()));
    }
    return out;
  };
  SubredditLists lists;
  lists.centric = names("centric");
  lists.inclusive = names("inclusive");
  const std::string overlap = j.value("overlap", std::string("error"));
  if (overlap == "error") {
    lists.overlap = OverlapPolicy::kError;
  } else if (overlap == "centric_wins") {
    lists.overlap = OverlapPolicy::kCentricWins;
  } else {
    throw Error(ErrorCode::kConfigInvalid, "overlap must be \"error\" or \"centric_wins\"");
  }
  return lists;
}

SubredditLists SubredditLists::load(const fs::path& path) {
  const json j = json::parse(files::read_file(path), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kConfigInvalid, path.string() + ": invalid JSON");
  return from_json(j);
}

SubredditLists SubredditLists::builtin_defaults() {
  SubredditLists lists;
  lists.centric = {
      "Palestine",          "IsraelPalestine",      "AskMiddleEast",   "IsraelHamasWar",
      "islam",              "israelexposed",        "exmuslim",        "Jewish",
      "Judaism",            "IsraelCrimes",         "Palestinian_Violence",
      "AntiSemitismInReddit", "IsraelWarVideoReport", "IsraelUnderAttack", "Israel_Palestine",
      "IsraelICYMI",        "IsraelWar",            "IsrealPalestineWar_23", "MuslimLounge",
      "Muslim",             "Gaza",                 "MuslimCorner",    "IsraelVsHamas",
      "Israel",             "PalestinianvsIsrael",
  };
  lists.inclusive = {
      "AutoNewspaper",   "worldnews",          "news",             "brasilnoticias",
      "AskReddit",       "Destiny",            "2ndYomKippurWar",  "CombatFootage",
      "DisneyNewsfeed",  "TrendingQuickTVnews", "Conservative",    "BreakingNews24hr",
      "conspiracy",      "EndlessWar",         "PublicFreakout",   "politics",
      "NoStupidQuestions", "SeenOnNews_longtail", "NBCauto",       "raceplay",
      "FreeKarma4You",   "europe",             "NoFilterNews",     "worldnewsvideo",
      "TheDeprogram",    "Mexico_Videos",      "dirtyr4r",         "FRANCE24auto",
      "Ernesto_it",      "honestheadlinenews", "conservatives",    "N_N_N",
      "Judaism",         "socialism",          "Hasan_Piker",      "TrendsNewsWorld",
      "NewsWhatever",    "ItaliaBox",          "VaushV",           "theworldnews",
      "TopMindsOfReddit", "TIMESINDIAauto",    "NonCredibleDefense", "rustjob",
      "CNNauto",         "explainlikeimfive",  "NewsOfTheStupid",  "ReactJSJobs",
      "anime_titties",   "therewasanattempt",  "ukpolitics",       "lebanon",
      "ALJAZEERAauto",   "NYTauto",            "BBCauto",          "golangjob",
      "TWTauto",         "geopolitics",        "h3h3productions",  "redscarepod",
      "GUARDIANauto",    "TheMajorityReport",  "worldpolitics2",   "FOXauto",
      "war",             "NewIran",            "LabourUK",         "canada",
      "JavaScriptJob",   "telaviv",            "Britain",          "india",
      "neoliberal",      "chomsky",            "infomoney",
  };
  lists.overlap = OverlapPolicy::kCentricWins;
  return lists;
}

Classification::Classification(const SubredditLists& lists) {
  for (const auto& name : lists.centric) by_name_.emplace(text::ascii_lower(name), Category::kCentric);
  for (const auto& name : lists.inclusive) {
    const auto [it, inserted] = by_name_.emplace(text::ascii_lower(name), Category::kInclusive);
    if (!inserted && it->second == Category::kCentric && lists.overlap == OverlapPolicy::kError) {
      throw Error(ErrorCode::kOverlappingLists, name + " is listed as both centric and inclusive");
    }
  }
}

Category Classification::category(std::string_view subreddit) const {
  const auto it = by_name_.find(text::ascii_lower(subreddit));
  return it == by_name_.end() ? Category::kExcluded : it->second;
}

// --- ranking -----------------------------------------------------------------------

void SubredditTally::add(const ingest::SubmissionRecord& submission, bool matched) {
  auto& p = profiles_[submission.subreddit];
  if (p.name.empty()) p.name = submission.subreddit;
  ++p.total_submissions_seen;
  if (matched) ++p.matched_submissions;
}

std::vector<SubredditProfile> SubredditTally::ranked() const {
  std::vector<SubredditProfile> out;
  out.reserve(profiles_.size());
  for (const auto& [name, p] : profiles_) out.push_back(p);
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.matched_submissions > b.matched_submissions;
  });
  return out;
}

std::vector<SubredditProfile> rank_subreddits(std::span<const ingest::SubmissionRecord> submissions,
                                              const PhraseMatcher& lexicon) {
  SubredditTally tally;
  for (const auto& s : submissions) tally.add(s, title_matches(s.title, lexicon));
  return tally.ranked();
}

std::vector<SubredditProfile> classify_subreddits(std::vector<SubredditProfile> profiles,
                                                  const SubredditLists& lists) {
  const Classification classification(lists);
  for (auto& p : profiles) p.category = classification.category(p.name);
  return profiles;
}

SubredditLists suggest_lists(std::span<const SubredditProfile> profiles, double centric_ratio,
                             std::uint64_t min_matched) {
  SubredditLists draft;
  for (const auto& p : profiles) {
    if (p.matched_submissions == 0) continue;
    if (p.matched_submissions >= min_matched && p.match_ratio() >= centric_ratio) {
      draft.centric.push_back(p.name);
    } else {
      draft.inclusive.push_back(p.name);
    }
  }
  return draft;
}

// --- anonymization -------------------------------------------------------------------

AuthorHash anonymize(std::string_view author, std::string_view salt) {
  if (salt.empty()) throw Error(ErrorCode::kMissingSalt, "anonymization salt is empty");
  std::string buf;
  buf.reserve(salt.size() + author.size());
  buf.append(salt).append(author);
  return {files::sha256_hex(buf)};
}

std::string salt_from_env(const char* var) {
  const char* v = std::getenv(var);
  if (!v || !*v) throw Error(ErrorCode::kMissingSalt, std::string(var) + " is not set");
  return v;
}

// --- manifest ------------------------------------------------------------------------

namespace {

json counts_json(const ClassCounts& c) { return {{"submissions", c.submissions}, {"comments", c.comments}}; }

ClassCounts counts_from_json(const json& j) {
  return {j.at("submissions").get<std::uint64_t>(), j.at("comments").get<std::uint64_t>()};
}

}  // namespace

json CorpusManifest::to_json() const {
  json counts_obj = json::object();
  for (const auto& [name, c] : counts) counts_obj[name] = counts_json(c);
  json j = {
      {"lexicon", {{"ref", lexicon_ref}, {"sha256", lexicon_sha256}}},
      {"subreddits", {{"centric", centric}, {"inclusive", inclusive}}},
      {"date_range", {{"first", first_day}, {"last", last_day}}},
      {"files", {{"submissions", "submissions.ndjson"}, {"comments", "comments.ndjson"}}},
      {"counts", counts_obj},
      {"totals", counts_json(totals)},
      {"deleted_author_hash", deleted_author_hash},
      {"crosspost_dedup", "none"},
      {"inputs", inputs},
      {"config", config},
  };
  if (!parent_manifest_sha256.empty()) j["parent_manifest_sha256"] = parent_manifest_sha256;
  return j;
}

CorpusManifest CorpusManifest::from_json(const json& j) {
  try {
    CorpusManifest m;
    m.lexicon_ref = j.at("lexicon").value("ref", "");
    m.lexicon_sha256 = j.at("lexicon").value("sha256", "");
    m.centric = j.at("subreddits").at("centric").get<std::vector<std::string>>();
    m.inclusive = j.at("subreddits").at("inclusive").get<std::vector<std::string>>();
    m.first_day = j.at("date_range").value("first", "");
    m.last_day = j.at("date_range").value("last", "");
    for (const auto& [name, c] : j.at("counts").items()) m.counts[name] = counts_from_json(c);
    m.totals = counts_from_json(j.at("totals"));
    m.deleted_author_hash = j.value("deleted_author_hash", "");
    m.parent_manifest_sha256 = j.value("parent_manifest_sha256", "");
    m.inputs = j.value("inputs", json::array());
    m.config = j.value("config", json::object());
    return m;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string("corpus manifest: ") + e.what());
  }
}

CorpusManifest CorpusManifest::load(const fs::path& path) {
  const json j = json::parse(files::read_file(path), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kSchemaError, path.string() + ": invalid JSON");
  return from_json(j);
}

// --- collection ----------------------------------------------------------------------

namespace {

// Buffered ndjson writer to "<path>.partial", renamed on commit.
class NdjsonWriter {
 public:
  explicit NdjsonWriter(fs::path path) : path_(std::move(path)), partial_(path_) {
    partial_ += ".partial";
    out_.rdbuf()->pubsetbuf(buf_.data(), static_cast<std::streamsize>(buf_.size()));
    out_.open(partial_, std::ios::binary | std::ios::trunc);
    if (!out_) throw Error(ErrorCode::kIoError, "cannot write " + partial_.string());
  }

  void write(const std::string& line) {
    out_.write(line.data(), static_cast<std::streamsize>(line.size()));
    out_.put('\n');
  }

  void commit() {
    out_.close();
    if (!out_) throw Error(ErrorCode::kIoError, "write failed: " + partial_.string());
    fs::rename(partial_, path_);
  }

 private:
  std::array<char, 1 << 16> buf_{};
  fs::path path_;
  fs::path partial_;
  std::ofstream out_;
};

struct KeptSubmission {
  std::string subreddit;
  Category category;
};

struct DayRange {
  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t hi = std::numeric_limits<std::int64_t>::min();

  void add(std::int64_t created_utc) {
    const std::int64_t day = text::utc_day(created_utc);
    lo = std::min(lo, day);
    hi = std::max(hi, day);
  }
  void apply(CorpusManifest& m) const {
    if (lo > hi) return;
    m.first_day = text::format_day(lo);
    m.last_day = text::format_day(hi);
  }
};

json input_entry(const fs::path& path, std::string_view kind, const ingest::IngestStats& stats) {
  json j = stats.to_json();
  j["path"] = path.string();
  j["kind"] = kind;
  return j;
}

std::string hashed(const std::string& author, std::string_view salt) {
  return author.empty() ? std::string() : anonymize(author, salt).hex;
}

}  // namespace

CorpusManifest collect(const CollectOptions& options, const SubredditLists& lists,
                       const PhraseMatcher& lexicon, std::string_view salt, const CorpusPaths& out) {
  if (salt.empty()) throw Error(ErrorCode::kMissingSalt, "anonymization salt is empty");
  const Classification classification(lists);
  fs::create_directories(out.dir);

  CorpusManifest manifest;
  manifest.lexicon_ref = options.lexicon_ref;
  manifest.lexicon_sha256 = options.lexicon_sha256;
  manifest.deleted_author_hash = anonymize("[deleted]", salt).hex;
  manifest.centric = lists.centric;
  manifest.inclusive = lists.inclusive;
  manifest.config = options.config;
  manifest.counts["centric"] = {};
  manifest.counts["inclusive"] = {};
  DayRange range;

  std::unordered_map<std::string, KeptSubmission> kept;
  NdjsonWriter submissions(out.submissions());
  for (const auto& path : options.submission_dumps) {
    ingest::SubmissionStream stream(path, options.stream);
    while (auto rec = stream.next()) {
      const Category category = classification.category(rec->subreddit);
      if (category == Category::kExcluded) continue;
      if (category == Category::kInclusive) {
        const bool hit = title_matches(rec->title, lexicon) ||
                         (options.match_selftext && lexicon.matches(rec->selftext));
        if (!hit) continue;
      }
      if (!kept.emplace(rec->id, KeptSubmission{rec->subreddit, category}).second) continue;
      rec->author = hashed(rec->author, salt);
      submissions.write(ingest::to_ndjson(*rec));
      ++manifest.counts[std::string(to_string(category))].submissions;
      ++manifest.totals.submissions;
      range.add(rec->created_utc);
    }
    stream.finish();
    manifest.inputs.push_back(input_entry(path, "submissions", stream.stats()));
  }

  NdjsonWriter comments(out.comments());
  for (const auto& path : options.comment_dumps) {
    ingest::CommentStream stream(path, options.stream);
    while (auto rec = stream.next()) {
      const auto it = kept.find(std::string(ingest::strip_type_prefix(rec->link_id)));
      if (it == kept.end()) continue;
      if (rec->subreddit.empty()) rec->subreddit = it->second.subreddit;
      rec->author = hashed(rec->author, salt);
      comments.write(ingest::to_ndjson(*rec));
      ++manifest.counts[std::string(to_string(it->second.category))].comments;
      ++manifest.totals.comments;
      range.add(rec->created_utc);
    }
    stream.finish();
    manifest.inputs.push_back(input_entry(path, "comments", stream.stats()));
  }

  range.apply(manifest);
  submissions.commit();
  comments.commit();
  files::write_file_atomic(out.manifest(), manifest.to_json().dump(2) + "\n");
  return manifest;
}

CorpusManifest derive_subset(const CorpusPaths& parent, const PhraseMatcher& subset_lexicon,
                             const CorpusPaths& out, std::string lexicon_ref,
                             std::string lexicon_sha256) {
  const CorpusManifest parent_manifest = CorpusManifest::load(parent.manifest());
  SubredditLists lists{parent_manifest.centric, parent_manifest.inclusive, OverlapPolicy::kCentricWins};
  const Classification classification(lists);
  fs::create_directories(out.dir);

  CorpusManifest manifest;
  manifest.lexicon_ref = std::move(lexicon_ref);
  manifest.lexicon_sha256 = std::move(lexicon_sha256);
  manifest.centric = parent_manifest.centric;
  manifest.inclusive = parent_manifest.inclusive;
  manifest.deleted_author_hash = parent_manifest.deleted_author_hash;
  manifest.parent_manifest_sha256 = files::sha256_file_hex(parent.manifest());
  manifest.config = parent_manifest.config;
  manifest.counts["centric"] = {};
  manifest.counts["inclusive"] = {};
  DayRange range;

  const ingest::StreamOptions strict{ingest::Compression::kNone, 0.0};
  std::unordered_map<std::string, Category> kept;
  NdjsonWriter submissions(out.submissions());
  {
    ingest::SubmissionStream stream(parent.submissions(), strict);
    while (auto rec = stream.next()) {
      if (!title_matches(rec->title, subset_lexicon)) continue;
      Category category = classification.category(rec->subreddit);
      if (category == Category::kExcluded) category = Category::kInclusive;
      kept.emplace(rec->id, category);
      submissions.write(ingest::to_ndjson(*rec));
      ++manifest.counts[std::string(to_string(category))].submissions;
      ++manifest.totals.submissions;
      range.add(rec->created_utc);
    }
    stream.finish();
    manifest.inputs.push_back(input_entry(parent.submissions(), "submissions", stream.stats()));
  }

  NdjsonWriter comments(out.comments());
  {
    ingest::CommentStream stream(parent.comments(), strict);
    while (auto rec = stream.next()) {
      const auto it = kept.find(std::string(ingest::strip_type_prefix(rec->link_id)));
      if (it == kept.end()) continue;
      comments.write(ingest::to_ndjson(*rec));
      ++manifest.counts[std::string(to_string(it->second))].comments;
      ++manifest.totals.comments;
      range.add(rec->created_utc);
    }
    stream.finish();
    manifest.inputs.push_back(input_entry(parent.comments(), "comments", stream.stats()));
  }

  range.apply(manifest);
  submissions.commit();
  comments.commit();
  files::write_file_atomic(out.manifest(), manifest.to_json().dump(2) + "\n");
  return manifest;
}

}  // namespace harvest::corpus
