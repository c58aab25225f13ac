#include "harvest/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "harvest/errors.hpp"
#include "harvest/files.hpp"
#include "harvest/text.hpp"
#include "harvest/thread_assembler.hpp"
#include "http_client.hpp"

namespace harvest::analytics {

namespace fs = std::filesystem;
using ingest::CommentRecord;
using ingest::SubmissionRecord;
using nlohmann::json;

namespace {

// Integral values print as integers so count series stay readable.
json number_json(double v) {
  if (std::isfinite(v) && v == std::trunc(v) && std::fabs(v) < 9007199254740992.0) {
    return static_cast<std::int64_t>(v);
  }
  return v;
}

std::string number_text(double v) {
  if (std::isfinite(v) && v == std::trunc(v) && std::fabs(v) < 9007199254740992.0) {
    return std::to_string(static_cast<std::int64_t>(v));
  }
  return text::format_number(v);
}

}  // namespace

// --- series ------------------------------------------------------------------------

DailySeries DailySeries::from_map(std::string name, const std::map<std::int64_t, double>& values) {
  DailySeries s;
  s.metric_name = std::move(name);
  s.points.reserve(values.size());
  std::optional<std::int64_t> prev;
  for (const auto& [day, value] : values) {
    if (prev) {
      for (std::int64_t d = *prev + 1; d < day; ++d) s.gaps.push_back(d);
    }
    s.points.push_back({day, value});
    prev = day;
  }
  return s;
}

std::optional<double> DailySeries::at(std::int64_t day) const {
  const auto it = std::lower_bound(points.begin(), points.end(), day,
                                   [](const DailyPoint& p, std::int64_t d) { return p.day < d; });
  if (it == points.end() || it->day != day) return std::nullopt;
  return it->value;
}

json DailySeries::to_json() const {
  json pts = json::array();
  for (const auto& p : points) pts.push_back(json::array({text::format_day(p.day), number_json(p.value)}));
  json gap_days = json::array();
  for (auto d : gaps) gap_days.push_back(text::format_day(d));
  return {{"metric", metric_name}, {"points", std::move(pts)}, {"gaps", std::move(gap_days)}};
}

std::string DailySeries::to_csv() const {
  std::string out = "date,value\n";
  for (const auto& p : points) out += text::format_day(p.day) + "," + number_text(p.value) + "\n";
  return out;
}

// --- labels ------------------------------------------------------------------------

double LabelVector::operator[](std::size_t i) const {
  return i < moral.size() ? moral[i] : emotion.at(i - moral.size());
}

std::string_view LabelVector::label_name(std::size_t i) {
  return i < kMoralLabels.size() ? kMoralLabels[i] : kEmotionLabels.at(i - kMoralLabels.size());
}

json LabelVector::to_json() const {
  json m = json::object();
  json e = json::object();
  for (std::size_t i = 0; i < moral.size(); ++i) m[std::string(kMoralLabels[i])] = moral[i];
  for (std::size_t i = 0; i < emotion.size(); ++i) e[std::string(kEmotionLabels[i])] = emotion[i];
  return {{"moral", std::move(m)}, {"emotion", std::move(e)}};
}

namespace {

template <std::size_t N>
void read_label_map(const json& j, const char* key, const std::array<std::string_view, N>& names,
                    std::array<double, N>& out) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_object()) {
    throw Error(ErrorCode::kSchemaError, std::string(key) + " must be an object");
  }
  if (it->size() != N) {
    throw Error(ErrorCode::kSchemaError, std::string(key) + " must have exactly " + std::to_string(N) +
                                             " labels, got " + std::to_string(it->size()));
  }
  for (std::size_t i = 0; i < N; ++i) {
    const auto v = it->find(std::string(names[i]));
    if (v == it->end()) throw Error(ErrorCode::kSchemaError, std::string(key) + " lacks " + std::string(names[i]));
    if (!v->is_number()) throw Error(ErrorCode::kSchemaError, std::string(names[i]) + " is not a number");
    const double d = v->get<double>();
    if (!(d >= 0.0 && d <= 1.0)) {
      throw Error(ErrorCode::kSchemaError, std::string(names[i]) + " outside [0,1]");
    }
    out[i] = d;
  }
}

}  // namespace

LabelVector LabelVector::from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kSchemaError, "label vector must be an object");
  LabelVector v;
  read_label_map(j, "moral", kMoralLabels, v.moral);
  read_label_map(j, "emotion", kEmotionLabels, v.emotion);
  return v;
}

// --- adapters ------------------------------------------------------------------------

ClassifyResult parse_classify_result(const json& j) {
  ClassifyResult r;
  if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) {
    throw Error(ErrorCode::kSchemaError, "classifier result lacks a string id");
  }
  r.id = j["id"].get<std::string>();
  if (const auto e = j.find("error"); e != j.end() && !e->is_null()) {
    r.error = e->is_string() ? e->get<std::string>() : e->dump();
    if (r.error.empty()) r.error = "error";
    return r;
  }
  try {
    r.labels = LabelVector::from_json(j);
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

LabelVector StubAdapter::labels_for(std::string_view text) {
  LabelVector v;
  auto conf = [&](std::string_view label) {
    std::string key(label);
    key.push_back('\x1f');
    key.append(text);
    return static_cast<double>(text::fnv1a64(key) % 1001) / 1000.0;
  };
  for (std::size_t i = 0; i < v.moral.size(); ++i) v.moral[i] = conf(kMoralLabels[i]);
  for (std::size_t i = 0; i < v.emotion.size(); ++i) v.emotion[i] = conf(kEmotionLabels[i]);
  return v;
}

std::vector<ClassifyResult> StubAdapter::classify_batch(std::span<const ClassifyRequest> batch) {
  std::vector<ClassifyResult> out;
  out.reserve(batch.size());
  for (const auto& r : batch) out.push_back({r.id, labels_for(r.text), {}});
  return out;
}

json StubAdapter::describe() const { return {{"kind", "stub"}}; }

namespace {

std::vector<ClassifyResult> align_results(std::span<const ClassifyRequest> batch,
                                          std::unordered_map<std::string, ClassifyResult>& by_id) {
  std::vector<ClassifyResult> out;
  out.reserve(batch.size());
  for (const auto& req : batch) {
    const auto it = by_id.find(req.id);
    if (it == by_id.end()) {
      out.push_back({req.id, std::nullopt, "no result returned"});
    } else {
      out.push_back(it->second);
    }
  }
  return out;
}

std::unordered_map<std::string, ClassifyResult> read_response_file(const fs::path& path) {
  std::unordered_map<std::string, ClassifyResult> by_id;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kAdapterUnavailable, "no response file " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) continue;
    try {
      ClassifyResult r = parse_classify_result(j);
      by_id.emplace(r.id, std::move(r));
    } catch (const Error&) {
      // Lines without an id cannot be attributed to any request.
    }
  }
  return by_id;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

}  // namespace

FileExchangeAdapter::FileExchangeAdapter(Options options) : options_(std::move(options)) {
  if (options_.command.empty()) {
    if (options_.response_file.empty()) {
      throw Error(ErrorCode::kConfigInvalid, "file-exchange adapter needs a command or a response file");
    }
    precomputed_ = read_response_file(options_.response_file);
  } else {
    fs::create_directories(options_.work_dir);
  }
}

std::vector<ClassifyResult> FileExchangeAdapter::classify_batch(std::span<const ClassifyRequest> batch) {
  if (precomputed_) return align_results(batch, *precomputed_);

  const std::uint64_t n = batches_.fetch_add(1);
  const fs::path request = options_.work_dir / ("request-" + std::to_string(n) + ".ndjson");
  const fs::path response = options_.work_dir / ("response-" + std::to_string(n) + ".ndjson");
  std::string body;
  for (const auto& r : batch) body += json{{"id", r.id}, {"text", r.text}}.dump() + "\n";
  files::write_file_atomic(request, body);
  fs::remove(response);

  const std::string cmd = "HARVEST_REQUEST=" + shell_quote(request.string()) +
                          " HARVEST_RESPONSE=" + shell_quote(response.string()) + " " + options_.command;
  const int status = std::system(cmd.c_str());
  if (status != 0) {
    throw Error(ErrorCode::kAdapterUnavailable, "classifier command exited with status " + std::to_string(status));
  }
  auto by_id = read_response_file(response);
  return align_results(batch, by_id);
}

json FileExchangeAdapter::describe() const {
  json j = {{"kind", "file"}};
  if (!options_.command.empty()) j["command"] = options_.command;
  if (!options_.response_file.empty()) j["response_file"] = options_.response_file.string();
  return j;
}

HttpAdapter::HttpAdapter(std::string url, int timeout_seconds)
    : url_(std::move(url)), timeout_seconds_(timeout_seconds) {}

std::vector<ClassifyResult> HttpAdapter::classify_batch(std::span<const ClassifyRequest> batch) {
  json items = json::array();
  for (const auto& r : batch) items.push_back({{"id", r.id}, {"text", r.text}});
  const auto resp = http::post(url_, json{{"items", std::move(items)}}.dump(), "application/json", {},
                               timeout_seconds_);
  if (!resp) throw Error(ErrorCode::kAdapterUnavailable, url_ + ": no response");
  if (resp->status != 200) {
    throw Error(ErrorCode::kAdapterUnavailable, url_ + ": HTTP " + std::to_string(resp->status));
  }
  const json doc = json::parse(resp->body, nullptr, false);
  if (doc.is_discarded() || !doc.contains("results") || !doc["results"].is_array()) {
    throw Error(ErrorCode::kAdapterUnavailable, url_ + ": malformed response body");
  }
  std::unordered_map<std::string, ClassifyResult> by_id;
  for (const auto& item : doc["results"]) {
    try {
      ClassifyResult r = parse_classify_result(item);
      by_id.emplace(r.id, std::move(r));
    } catch (const Error&) {
    }
  }
  return align_results(batch, by_id);
}

json HttpAdapter::describe() const { return {{"kind", "http"}, {"url", url_}}; }

// --- service -------------------------------------------------------------------------

ClassifierService::ClassifierService(std::shared_ptr<ClassifierAdapter> adapter, std::size_t batch_size,
                                     std::size_t max_in_flight)
    : adapter_(std::move(adapter)),
      batch_size_(std::max<std::size_t>(1, batch_size)),
      max_in_flight_(std::max<std::size_t>(1, max_in_flight)) {
  if (!adapter_) throw Error(ErrorCode::kInvalidArgument, "classifier service needs an adapter");
}

std::optional<LabelVector> ClassifierService::cached(const std::string& id) const {
  std::shared_lock lock(cache_mutex_);
  const auto it = cache_.find(id);
  if (it == cache_.end()) return std::nullopt;
  return it->second;
}

std::vector<ClassifyResult> ClassifierService::classify(std::span<const ClassifyRequest> requests) {
  std::vector<ClassifyResult> results(requests.size());
  std::vector<ClassifyRequest> pending;
  std::unordered_map<std::string, std::size_t> pending_index;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    results[i].id = requests[i].id;
    if (auto hit = cached(requests[i].id)) {
      results[i].labels = std::move(hit);
    } else if (pending_index.emplace(requests[i].id, pending.size()).second) {
      pending.push_back(requests[i]);
    }
  }

  const std::size_t batches = (pending.size() + batch_size_ - 1) / batch_size_;
  std::vector<std::vector<ClassifyResult>> batch_results(batches);
  std::vector<std::exception_ptr> errors(batches);
  auto run = [&](std::size_t b) {
    const std::size_t lo = b * batch_size_;
    const std::size_t hi = std::min(pending.size(), lo + batch_size_);
    const std::span<const ClassifyRequest> slice(pending.data() + lo, hi - lo);
    ++adapter_calls_;
    auto got = adapter_->classify_batch(slice);
    if (got.size() != slice.size()) {
      throw Error(ErrorCode::kSchemaError, "adapter returned " + std::to_string(got.size()) + " results for " +
                                               std::to_string(slice.size()) + " requests");
    }
    batch_results[b] = std::move(got);
  };
  const std::size_t workers = std::min(max_in_flight_, batches);
  if (workers <= 1) {
    for (std::size_t b = 0; b < batches; ++b) {
      try {
        run(b);
      } catch (...) {
        errors[b] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t b = next.fetch_add(1); b < batches; b = next.fetch_add(1)) {
          try {
            run(b);
          } catch (...) {
            errors[b] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  {
    std::unique_lock lock(cache_mutex_);
    for (auto& batch : batch_results) {
      for (auto& r : batch) {
        if (r.labels) cache_.insert_or_assign(r.id, *r.labels);
      }
    }
  }
  for (std::size_t i = 0; i < requests.size(); ++i) {
    if (results[i].labels) continue;
    const std::size_t p = pending_index.at(requests[i].id);
    const ClassifyResult& r = batch_results[p / batch_size_][p % batch_size_];
    results[i].labels = r.labels;
    results[i].error = r.labels ? std::string() : (r.error.empty() ? "no labels" : r.error);
  }
  return results;
}

void ClassifierService::load_cache(const fs::path& path) {
  if (!fs::exists(path)) return;
  std::ifstream in(path, std::ios::binary);
  std::string line;
  std::unique_lock lock(cache_mutex_);
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::kSchemaError, path.string() + ": invalid cache line");
    ClassifyResult r = parse_classify_result(j);
    if (r.labels) cache_.insert_or_assign(r.id, *r.labels);
  }
}

void ClassifierService::save_cache(const fs::path& path) const {
  std::vector<std::pair<std::string, LabelVector>> entries;
  {
    std::shared_lock lock(cache_mutex_);
    entries.assign(cache_.begin(), cache_.end());
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::string body;
  for (const auto& [id, v] : entries) {
    json j = v.to_json();
    j["id"] = id;
    body += j.dump() + "\n";
  }
  files::write_file_atomic(path, body);
}

// --- accumulator ---------------------------------------------------------------------

namespace {

constexpr double kFixedScale = 9007199254740992.0;  // 2^53

std::map<std::int64_t, double> as_values(const std::map<std::int64_t, std::uint64_t>& counts) {
  std::map<std::int64_t, double> out;
  for (const auto& [day, n] : counts) out.emplace(day, static_cast<double>(n));
  return out;
}

std::vector<SubredditCount> rank_counts(std::vector<SubredditCount> counts, std::size_t n) {
  std::sort(counts.begin(), counts.end(), [](const auto& a, const auto& b) {
    return a.count != b.count ? a.count > b.count : a.name < b.name;
  });
  if (counts.size() > n) counts.resize(n);
  return counts;
}

}  // namespace

void CorpusAccumulator::add(const SubmissionRecord& s) {
  ++submissions_per_day_[text::utc_day(s.created_utc)];
  ++subreddits_[s.subreddit].submissions;
  submission_ids_.insert(s.id);
}

void CorpusAccumulator::add(const CommentRecord& c) {
  const std::int64_t day = text::utc_day(c.created_utc);
  ++comments_per_day_[day];
  auto& pop = popularity_[day];
  pop.sum += c.score;
  ++pop.count;
  if (!c.author.empty()) {
    authors_[day].insert(c.author);
    ++comments_by_author_[c.author];
  }
  auto& flagged = controversial_per_day_[day];
  auto& sub = subreddits_[c.subreddit];
  ++sub.comments;
  if (c.controversiality == 1) {
    ++flagged;
    ++sub.controversial;
  }
  ++comments_per_link_[std::string(ingest::strip_type_prefix(c.link_id))];
}

void CorpusAccumulator::add_labels(const CommentRecord& c, const std::optional<LabelVector>& labels) {
  if (!labels) {
    ++labels_excluded_;
    return;
  }
  auto& day = labels_[text::utc_day(c.created_utc)];
  ++day.count;
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    const double conf = std::clamp((*labels)[i], 0.0, 1.0);
    day.fixed[i] += static_cast<std::uint64_t>(std::llround(conf * kFixedScale));
  }
}

DailySeries CorpusAccumulator::daily_submissions() const {
  return DailySeries::from_map("daily_submissions", as_values(submissions_per_day_));
}

DailySeries CorpusAccumulator::daily_comments() const {
  return DailySeries::from_map("daily_comments", as_values(comments_per_day_));
}

PopularitySeries CorpusAccumulator::popularity() const {
  std::map<std::int64_t, double> sum;
  std::map<std::int64_t, double> mean;
  for (const auto& [day, p] : popularity_) {
    sum.emplace(day, static_cast<double>(p.sum));
    mean.emplace(day, static_cast<double>(p.sum) / static_cast<double>(p.count));
  }
  return {DailySeries::from_map("popularity_sum", sum), DailySeries::from_map("popularity_mean", mean)};
}

DailySeries CorpusAccumulator::unique_authors() const {
  std::map<std::int64_t, double> values;
  for (const auto& [day, set] : authors_) values.emplace(day, static_cast<double>(set.size()));
  return DailySeries::from_map("unique_authors", values);
}

DailySeries CorpusAccumulator::controversy() const {
  return DailySeries::from_map("controversy_daily", as_values(controversial_per_day_));
}

std::vector<SubredditControversy> CorpusAccumulator::subreddit_controversy() const {
  std::vector<SubredditControversy> out;
  for (const auto& [name, t] : subreddits_) {
    if (t.comments == 0) continue;
    out.push_back({name, t.comments, t.controversial,
                   static_cast<double>(t.controversial) / static_cast<double>(t.comments)});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.total_comments != b.total_comments ? a.total_comments > b.total_comments : a.name < b.name;
  });
  return out;
}

TopSubreddits CorpusAccumulator::top_subreddits(std::size_t n) const {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "top_subreddits needs n >= 1");
  std::vector<SubredditCount> subs;
  std::vector<SubredditCount> coms;
  for (const auto& [name, t] : subreddits_) {
    if (t.submissions > 0) subs.push_back({name, t.submissions});
    if (t.comments > 0) coms.push_back({name, t.comments});
  }
  return {rank_counts(std::move(subs), n), rank_counts(std::move(coms), n)};
}

LabelMeans CorpusAccumulator::label_means() const {
  LabelMeans out;
  out.excluded = labels_excluded_;
  for (const auto& [day, d] : labels_) out.included += d.count;
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    std::map<std::int64_t, double> values;
    for (const auto& [day, d] : labels_) {
      values.emplace(day, static_cast<double>(d.fixed[i]) / static_cast<double>(d.count) / kFixedScale);
    }
    out.series.push_back(DailySeries::from_map(std::string(LabelVector::label_name(i)), values));
  }
  return out;
}

std::vector<std::uint64_t> CorpusAccumulator::conversation_lengths() const {
  std::vector<std::uint64_t> out;
  out.reserve(submission_ids_.size());
  for (const auto& id : submission_ids_) {
    const auto it = comments_per_link_.find(id);
    out.push_back(it == comments_per_link_.end() ? 0 : it->second);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t CorpusAccumulator::author_comments(const std::string& author_hash) const {
  const auto it = comments_by_author_.find(author_hash);
  return it == comments_by_author_.end() ? 0 : it->second;
}

// --- free functions ------------------------------------------------------------------

DailySeries daily_counts(std::span<const SubmissionRecord> records, std::string name) {
  CorpusAccumulator acc;
  for (const auto& r : records) acc.add(r);
  auto s = acc.daily_submissions();
  s.metric_name = std::move(name);
  return s;
}

DailySeries daily_counts(std::span<const CommentRecord> records, std::string name) {
  CorpusAccumulator acc;
  for (const auto& r : records) acc.add(r);
  auto s = acc.daily_comments();
  s.metric_name = std::move(name);
  return s;
}

PopularitySeries popularity_series(std::span<const CommentRecord> comments) {
  CorpusAccumulator acc;
  for (const auto& c : comments) acc.add(c);
  return acc.popularity();
}

DailySeries unique_authors_daily(std::span<const CommentRecord> comments) {
  CorpusAccumulator acc;
  for (const auto& c : comments) acc.add(c);
  return acc.unique_authors();
}

DailySeries controversy_daily(std::span<const CommentRecord> comments) {
  CorpusAccumulator acc;
  for (const auto& c : comments) acc.add(c);
  return acc.controversy();
}

std::vector<SubredditControversy> subreddit_controversy(std::span<const CommentRecord> comments) {
  CorpusAccumulator acc;
  for (const auto& c : comments) acc.add(c);
  return acc.subreddit_controversy();
}

TopSubreddits top_subreddits(std::span<const SubmissionRecord> submissions,
                             std::span<const CommentRecord> comments, std::size_t n) {
  CorpusAccumulator acc;
  for (const auto& s : submissions) acc.add(s);
  for (const auto& c : comments) acc.add(c);
  return acc.top_subreddits(n);
}

LabelMeans label_daily_mean(std::span<const CommentRecord> comments,
                            std::span<const std::optional<LabelVector>> labels) {
  if (labels.size() != comments.size()) {
    throw Error(ErrorCode::kInvalidArgument, "label_daily_mean needs one label slot per comment");
  }
  CorpusAccumulator acc;
  for (std::size_t i = 0; i < comments.size(); ++i) acc.add_labels(comments[i], labels[i]);
  return acc.label_means();
}

// --- bundle --------------------------------------------------------------------------

namespace {

void classify_into(CorpusAccumulator& acc, ClassifierService& service, std::vector<CommentRecord>& buffer,
                   std::uint64_t& failures) {
  if (buffer.empty()) return;
  std::vector<ClassifyRequest> requests;
  requests.reserve(buffer.size());
  for (const auto& c : buffer) requests.push_back({c.id, c.body});
  const auto results = service.classify(requests);
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    if (!results[i].labels) ++failures;
    acc.add_labels(buffer[i], results[i].labels);
  }
  buffer.clear();
}

json counts_list(const std::vector<SubredditCount>& list) {
  json out = json::array();
  for (std::size_t i = 0; i < list.size(); ++i) {
    out.push_back({{"rank", i + 1}, {"subreddit", list[i].name}, {"count", list[i].count}});
  }
  return out;
}

json bundle_from(const CorpusAccumulator& acc, const AnalyzeOptions& options, const json& manifest,
                 std::uint64_t submissions, std::uint64_t comments, std::uint64_t classify_failures) {
  const auto pop = acc.popularity();
  json series = json::object();
  series["daily_submissions"] = acc.daily_submissions().to_json();
  series["daily_comments"] = acc.daily_comments().to_json();
  series["popularity_sum"] = pop.sum.to_json();
  series["popularity_mean"] = pop.mean.to_json();
  series["unique_authors"] = acc.unique_authors().to_json();
  series["controversy_daily"] = acc.controversy().to_json();

  json controversy = json::array();
  for (const auto& s : acc.subreddit_controversy()) {
    controversy.push_back({{"subreddit", s.name},
                           {"total_comments", s.total_comments},
                           {"controversial_comments", s.controversial_comments},
                           {"ratio", s.ratio}});
  }
  const auto top = acc.top_subreddits(options.top_n);

  json labels = nullptr;
  if (options.classifier) {
    const auto means = acc.label_means();
    json per_label = json::object();
    for (const auto& s : means.series) per_label[s.metric_name] = s.to_json();
    labels = {{"included", means.included},
              {"excluded", means.excluded},
              {"failed", classify_failures},
              {"series", std::move(per_label)}};
  }

  const auto lengths = acc.conversation_lengths();
  json hist = json::array();
  for (const auto& bin : threads::length_histogram(std::span<const std::uint64_t>(lengths))) {
    hist.push_back({{"bucket", bin.bucket}, {"count", bin.count}});
  }

  json metadata = {{"top_n", options.top_n},
                   {"adapter", options.classifier ? options.classifier->adapter().describe() : json(nullptr)},
                   {"day_bucketing", "UTC"},
                   {"popularity", "score"},
                   {"conversation_length", "comments only"},
                   {"manifest", manifest}};
  const std::string deleted = manifest.is_object() ? manifest.value("deleted_author_hash", "") : "";
  if (!deleted.empty()) {
    metadata["deleted_author"] = {{"hash", deleted}, {"comments", acc.author_comments(deleted)},
                                  {"note", "all deleted accounts share one hash"}};
  }

  return {{"metadata", std::move(metadata)},
          {"totals", {{"submissions", submissions}, {"comments", comments}}},
          {"series", std::move(series)},
          {"subreddit_controversy", std::move(controversy)},
          {"top_subreddits", {{"submissions", counts_list(top.by_submissions)}, {"comments", counts_list(top.by_comments)}}},
          {"label_means", std::move(labels)},
          {"conversation_lengths", std::move(hist)}};
}

}  // namespace

json analyze_records(std::span<const SubmissionRecord> submissions, std::span<const CommentRecord> comments,
                     const AnalyzeOptions& options, const json& manifest) {
  CorpusAccumulator acc;
  for (const auto& s : submissions) acc.add(s);
  std::uint64_t failures = 0;
  std::vector<CommentRecord> buffer;
  for (const auto& c : comments) {
    acc.add(c);
    if (options.classifier) {
      buffer.push_back(c);
      if (buffer.size() >= options.classify_chunk) classify_into(acc, *options.classifier, buffer, failures);
    }
  }
  if (options.classifier) classify_into(acc, *options.classifier, buffer, failures);
  return bundle_from(acc, options, manifest, submissions.size(), comments.size(), failures);
}

json analyze_corpus(const fs::path& corpus_dir, const AnalyzeOptions& options) {
  json manifest = json::object();
  const fs::path manifest_path = corpus_dir / "manifest.json";
  if (fs::exists(manifest_path)) {
    manifest = json::parse(files::read_file(manifest_path), nullptr, false);
    if (manifest.is_discarded()) throw Error(ErrorCode::kSchemaError, manifest_path.string() + ": invalid JSON");
  }
  const ingest::StreamOptions strict{ingest::Compression::kAuto, 0.0};
  CorpusAccumulator acc;
  std::uint64_t submissions = 0;
  std::uint64_t comments = 0;
  {
    ingest::SubmissionStream stream(corpus_dir / "submissions.ndjson", strict);
    while (auto s = stream.next()) {
      acc.add(*s);
      ++submissions;
    }
    stream.finish();
  }
  std::uint64_t failures = 0;
  {
    ingest::CommentStream stream(corpus_dir / "comments.ndjson", strict);
    std::vector<CommentRecord> buffer;
    while (auto c = stream.next()) {
      acc.add(*c);
      ++comments;
      if (options.classifier) {
        buffer.push_back(std::move(*c));
        if (buffer.size() >= options.classify_chunk) classify_into(acc, *options.classifier, buffer, failures);
      }
    }
    stream.finish();
    if (options.classifier) classify_into(acc, *options.classifier, buffer, failures);
  }
  return bundle_from(acc, options, manifest, submissions, comments, failures);
}

// --- report --------------------------------------------------------------------------

namespace {

constexpr std::array<std::string_view, 6> kSeriesFiles = {"daily_submissions", "daily_comments", "popularity_sum",
                                                          "popularity_mean",   "unique_authors", "controversy_daily"};

std::string series_csv(const json& series) {
  std::string out = "date,value\n";
  for (const auto& p : series.at("points")) {
    const json& v = p.at(1);
    out += p.at(0).get<std::string>() + "," +
           (v.is_number_float() ? text::format_number(v.get<double>()) : v.dump()) + "\n";
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<std::string> report_files() {
  std::vector<std::string> out;
  for (auto name : kSeriesFiles) out.push_back(std::string(name) + ".csv");
  out.emplace_back("subreddit_controversy.csv");
  out.emplace_back("top_subreddits.csv");
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    out.push_back("label_means/" + std::string(LabelVector::label_name(i)) + ".csv");
  }
  out.emplace_back("conversation_lengths.csv");
  return out;
}

void write_csv_report(const json& bundle, const fs::path& out_dir) {
  try {
    fs::create_directories(out_dir / "label_means");
    for (auto name : kSeriesFiles) {
      files::write_file_atomic(out_dir / (std::string(name) + ".csv"),
                               series_csv(bundle.at("series").at(std::string(name))));
    }

    std::string controversy = "subreddit,total_comments,controversial_comments,ratio\n";
    for (const auto& s : bundle.at("subreddit_controversy")) {
      controversy += csv_field(s.at("subreddit").get<std::string>()) + "," + s.at("total_comments").dump() + "," +
                     s.at("controversial_comments").dump() + "," +
                     text::format_number(s.at("ratio").get<double>()) + "\n";
    }
    files::write_file_atomic(out_dir / "subreddit_controversy.csv", controversy);

    std::string top = "list,rank,subreddit,count\n";
    for (const char* list : {"submissions", "comments"}) {
      for (const auto& row : bundle.at("top_subreddits").at(list)) {
        top += std::string(list) + "," + row.at("rank").dump() + "," +
               csv_field(row.at("subreddit").get<std::string>()) + "," + row.at("count").dump() + "\n";
      }
    }
    files::write_file_atomic(out_dir / "top_subreddits.csv", top);

    const json& labels = bundle.at("label_means");
    for (std::size_t i = 0; i < kLabelCount; ++i) {
      const std::string name(LabelVector::label_name(i));
      const std::string body = labels.is_null() ? std::string("date,value\n")
                                                : series_csv(labels.at("series").at(name));
      files::write_file_atomic(out_dir / "label_means" / (name + ".csv"), body);
    }

    std::string hist = "bucket,count\n";
    for (const auto& bin : bundle.at("conversation_lengths")) {
      hist += bin.at("bucket").get<std::string>() + "," + bin.at("count").dump() + "\n";
    }
    files::write_file_atomic(out_dir / "conversation_lengths.csv", hist);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaError, std::string("analysis bundle: ") + e.what());
  }
}

void write_json_report(const json& bundle, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  files::write_file_atomic(out_dir / "report.json", bundle.dump(2) + "\n");
}

}  // namespace harvest::analytics
