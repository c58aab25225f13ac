#include "harvest/dump_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <vector>

#include <zstd.h>

namespace harvest::ingest {

namespace fs = std::filesystem;
using nlohmann::json;

// --- record parsing -------------------------------------------------------------

namespace {

[[noreturn]] void malformed(std::string reason) {
  throw Error(ErrorCode::kMalformedRecord, std::move(reason));
}

json parse_object(std::string_view line) {
  json doc = json::parse(line.begin(), line.end(), nullptr, false);
  if (doc.is_discarded()) malformed("invalid JSON");
  if (!doc.is_object()) malformed("not a JSON object");
  return doc;
}

const json* field(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string required_string(const json& obj, const char* key) {
  const json* f = field(obj, key);
  if (!f) malformed(std::string("missing ") + key);
  if (!f->is_string()) malformed(std::string(key) + " is not a string");
  auto s = f->get<std::string>();
  if (s.empty()) malformed(std::string("empty ") + key);
  return s;
}

std::string optional_string(const json& obj, const char* key) {
  const json* f = field(obj, key);
  if (!f) return {};
  if (!f->is_string()) malformed(std::string(key) + " is not a string");
  return f->get<std::string>();
}

std::optional<std::int64_t> as_integer(const json& v) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (!std::isfinite(d)) return std::nullopt;
    return static_cast<std::int64_t>(d);
  }
  if (v.is_string()) {
    const auto& s = v.get_ref<const std::string&>();
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec == std::errc() && ptr == s.data() + s.size()) return out;
    double d = 0;
    auto [p2, ec2] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (ec2 == std::errc() && p2 == s.data() + s.size() && std::isfinite(d)) {
      return static_cast<std::int64_t>(d);
    }
  }
  return std::nullopt;
}

std::int64_t optional_integer(const json& obj, const char* key, std::int64_t fallback) {
  const json* f = field(obj, key);
  if (!f) return fallback;
  auto v = as_integer(*f);
  if (!v) malformed(std::string(key) + " is not numeric");
  return *v;
}

std::int64_t required_timestamp(const json& obj) {
  const json* f = field(obj, "created_utc");
  if (!f) malformed("missing created_utc");
  auto v = as_integer(*f);
  if (!v) malformed("created_utc is not numeric");
  if (*v <= 0) malformed("created_utc must be positive");
  return *v;
}

}  // namespace

SubmissionRecord parse_submission(std::string_view line) {
  const json obj = parse_object(line);
  SubmissionRecord r;
  r.id = required_string(obj, "id");
  r.subreddit = required_string(obj, "subreddit");
  const json* title = field(obj, "title");
  if (!title) malformed("missing title");
  if (!title->is_string()) malformed("title is not a string");
  r.title = title->get<std::string>();
  r.created_utc = required_timestamp(obj);
  r.selftext = optional_string(obj, "selftext");
  r.author = optional_string(obj, "author");
  r.score = optional_integer(obj, "score", 0);
  r.num_comments = optional_integer(obj, "num_comments", 0);
  return r;
}

CommentRecord parse_comment(std::string_view line) {
  const json obj = parse_object(line);
  CommentRecord r;
  r.id = required_string(obj, "id");
  r.link_id = required_string(obj, "link_id");
  r.parent_id = required_string(obj, "parent_id");
  r.created_utc = required_timestamp(obj);
  r.body = optional_string(obj, "body");
  r.author = optional_string(obj, "author");
  r.subreddit = optional_string(obj, "subreddit");
  r.score = optional_integer(obj, "score", 0);
  const auto flag = optional_integer(obj, "controversiality", 0);
  if (flag != 0 && flag != 1) malformed("controversiality must be 0 or 1");
  r.controversiality = static_cast<int>(flag);
  return r;
}

json to_json(const SubmissionRecord& r) {
  return {{"id", r.id},
          {"subreddit", r.subreddit},
          {"title", r.title},
          {"selftext", r.selftext},
          {"author", r.author},
          {"created_utc", r.created_utc},
          {"score", r.score},
          {"num_comments", r.num_comments}};
}

json to_json(const CommentRecord& r) {
  return {{"id", r.id},
          {"link_id", r.link_id},
          {"parent_id", r.parent_id},
          {"body", r.body},
          {"author", r.author},
          {"subreddit", r.subreddit},
          {"created_utc", r.created_utc},
          {"score", r.score},
          {"controversiality", r.controversiality}};
}

std::string to_ndjson(const SubmissionRecord& r) { return to_json(r).dump(); }
std::string to_ndjson(const CommentRecord& r) { return to_json(r).dump(); }

std::string_view strip_type_prefix(std::string_view fullname) {
  if (fullname.size() > 3 && fullname[0] == 't' && fullname[1] >= '0' && fullname[1] <= '9' &&
      fullname[2] == '_') {
    return fullname.substr(3);
  }
  return fullname;
}

json IngestStats::to_json() const {
  return {{"lines_read", lines_read},
          {"records_parsed", records_parsed},
          {"lines_skipped_malformed", lines_skipped_malformed},
          {"bytes_read", bytes_read}};
}

// --- line reader ----------------------------------------------------------------

namespace {
constexpr unsigned char kZstdMagic[4] = {0x28, 0xB5, 0x2F, 0xFD};
// Pushshift archives are written with --long=31.
constexpr int kMaxWindowLog = 31;
}  // namespace

struct LineReader::Impl {
  std::FILE* file = nullptr;
  std::string path;
  bool zstd = false;
  ZSTD_DCtx* dctx = nullptr;
  std::size_t max_line_bytes = 0;

  std::vector<char> in_buf;
  ZSTD_inBuffer in{nullptr, 0, 0};
  std::uint64_t file_offset = 0;  // compressed bytes read from disk
  bool file_eof = false;
  std::size_t last_ret = 0;       // 0 when the last zstd frame is complete

  std::vector<char> out_buf;
  std::size_t out_pos = 0;
  std::size_t out_end = 0;

  std::uint64_t bytes = 0;
  bool oversized = false;

  ~Impl() {
    if (dctx) ZSTD_freeDCtx(dctx);
    if (file) std::fclose(file);
  }

  void read_compressed() {
    const std::size_t n = std::fread(in_buf.data(), 1, in_buf.size(), file);
    if (n < in_buf.size()) {
      if (std::ferror(file)) throw Error(ErrorCode::kFileUnreadable, path + ": read error");
      file_eof = true;
    }
    file_offset += n;
    in = {in_buf.data(), n, 0};
  }

  // Refills out_buf; false at end of input.
  bool fill() {
    out_pos = out_end = 0;
    if (!zstd) {
      // Bytes read during magic detection come first.
      if (in.pos < in.size) {
        const std::size_t n = std::min(in.size - in.pos, out_buf.size());
        std::memcpy(out_buf.data(), static_cast<const char*>(in.src) + in.pos, n);
        in.pos += n;
        out_end = n;
        return true;
      }
      if (file_eof) return false;
      const std::size_t n = std::fread(out_buf.data(), 1, out_buf.size(), file);
      if (n < out_buf.size()) {
        if (std::ferror(file)) throw Error(ErrorCode::kFileUnreadable, path + ": read error");
        file_eof = true;
      }
      out_end = n;
      return n > 0;
    }
    while (true) {
      if (in.pos == in.size) {
        if (file_eof) {
          if (last_ret != 0) {
            throw Error(ErrorCode::kCorruptCompression,
                        path + ": truncated zstd frame at byte " + std::to_string(file_offset));
          }
          return false;
        }
        read_compressed();
        if (in.size == 0) continue;
      }
      ZSTD_outBuffer out{out_buf.data(), out_buf.size(), 0};
      const std::size_t ret = ZSTD_decompressStream(dctx, &out, &in);
      if (ZSTD_isError(ret)) {
        const std::uint64_t at = file_offset - (in.size - in.pos);
        throw Error(ErrorCode::kCorruptCompression,
                    path + ": " + ZSTD_getErrorName(ret) + " near byte " + std::to_string(at));
      }
      last_ret = ret;
      if (out.pos > 0) {
        out_end = out.pos;
        return true;
      }
    }
  }
};

LineReader::LineReader(const fs::path& path, Compression compression, std::size_t max_line_bytes)
    : impl_(std::make_unique<Impl>()) {
  impl_->path = path.string();
  impl_->max_line_bytes = max_line_bytes;
  impl_->file = std::fopen(impl_->path.c_str(), "rb");
  if (!impl_->file) throw Error(ErrorCode::kFileUnreadable, impl_->path);
  impl_->in_buf.resize(ZSTD_DStreamInSize());
  impl_->out_buf.resize(ZSTD_DStreamOutSize());

  impl_->read_compressed();
  const bool magic = impl_->in.size >= 4 && std::memcmp(impl_->in_buf.data(), kZstdMagic, 4) == 0;
  impl_->zstd = compression == Compression::kZstd || (compression == Compression::kAuto && magic);
  if (impl_->zstd) {
    impl_->dctx = ZSTD_createDCtx();
    if (!impl_->dctx) throw Error(ErrorCode::kIoError, "cannot allocate zstd context");
    ZSTD_DCtx_setParameter(impl_->dctx, ZSTD_d_windowLogMax, kMaxWindowLog);
  }
}

LineReader::~LineReader() = default;
LineReader::LineReader(LineReader&&) noexcept = default;
LineReader& LineReader::operator=(LineReader&&) noexcept = default;

bool LineReader::next(std::string& line) {
  Impl& s = *impl_;
  line.clear();
  s.oversized = false;
  bool any = false;
  while (true) {
    if (s.out_pos < s.out_end) {
      const char* start = s.out_buf.data() + s.out_pos;
      const std::size_t avail = s.out_end - s.out_pos;
      const void* nl = std::memchr(start, '\n', avail);
      const std::size_t take = nl ? static_cast<std::size_t>(static_cast<const char*>(nl) - start) : avail;
      if (!s.oversized) {
        if (line.size() + take > s.max_line_bytes) {
          s.oversized = true;
          line.clear();
        } else {
          line.append(start, take);
        }
      }
      any = true;
      s.out_pos += take;
      s.bytes += take;
      if (nl) {
        ++s.out_pos;
        ++s.bytes;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
      }
    }
    if (!s.fill()) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return any;
    }
  }
}

bool LineReader::last_line_oversized() const { return impl_->oversized; }
bool LineReader::compressed() const { return impl_->zstd; }
std::uint64_t LineReader::bytes_read() const { return impl_->bytes; }

Compression detect_compression(const fs::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "rb");
  if (!f) throw Error(ErrorCode::kFileUnreadable, path.string());
  unsigned char head[4] = {0, 0, 0, 0};
  const std::size_t n = std::fread(head, 1, 4, f);
  std::fclose(f);
  return n == 4 && std::memcmp(head, kZstdMagic, 4) == 0 ? Compression::kZstd : Compression::kNone;
}

std::optional<RecordKind> detect_kind(const fs::path& path) {
  LineReader reader(path);
  std::string line;
  for (int checked = 0; checked < 100 && reader.next(line); ++checked) {
    const json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) continue;
    if (doc.contains("link_id")) return RecordKind::kComment;
    if (doc.contains("title")) return RecordKind::kSubmission;
  }
  return std::nullopt;
}

}  // namespace harvest::ingest
