#include <gtest/gtest.h>

#include "harvest/errors.hpp"
#include "harvest/files.hpp"
#include "harvest/text.hpp"
#include "test_support.hpp"

using namespace harvest;

TEST(Text, MatchTokensSplitOnPunctuation) {
  EXPECT_EQ(text::match_tokens("Israel-Hamas war!"), (std::vector<std::string>{"israel", "hamas", "war"}));
  EXPECT_EQ(text::match_tokens("  "), std::vector<std::string>{});
  EXPECT_EQ(text::match_tokens("Erdoğan's"), (std::vector<std::string>{"erdoğan", "s"}));
}

TEST(Text, UtcDayBoundaries) {
  EXPECT_EQ(text::utc_day(0), 0);
  EXPECT_EQ(text::utc_day(86399), 0);
  EXPECT_EQ(text::utc_day(86400), 1);
  EXPECT_EQ(text::utc_day(-1), -1);
  EXPECT_EQ(text::format_day(text::utc_day(1696636800)), "2023-10-07");
  EXPECT_EQ(text::format_day(0), "1970-01-01");
}

TEST(Text, FormatNumberRoundTrips) {
  for (double v : {0.0, 1.5, 0.1, 1.0 / 3.0, -2.25, 1e-9}) {
    EXPECT_EQ(std::stod(text::format_number(v)), v);
  }
  EXPECT_EQ(text::format_number(3.0), "3");
}

TEST(Files, Sha256KnownVector) {
  EXPECT_EQ(files::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Files, AtomicWriteReplacesContent) {
  testsupport::TempDir dir;
  files::write_file_atomic(dir / "a.txt", "one");
  files::write_file_atomic(dir / "a.txt", "two");
  EXPECT_EQ(files::read_file(dir / "a.txt"), "two");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++entries;
  EXPECT_EQ(entries, 1u);
}

TEST(Files, MissingFileIsUnreadable) {
  try {
    files::read_file("/nonexistent/file");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFileUnreadable);
  }
}
