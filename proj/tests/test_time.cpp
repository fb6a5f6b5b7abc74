#include "ciaf/digest.hpp"
#include "ciaf/label.hpp"
#include "ciaf/likert.hpp"
#include "ciaf/time.hpp"

#include "support.hpp"

#include <cmath>

#include <doctest.h>

using namespace ciaf;
using namespace std::chrono;

namespace {

Timestamp at(int y, int mo, int d, int h, int mi, int s, int ms = 0) {
  return Timestamp{sys_days{year{y} / mo / d}} + hours{h} + minutes{mi} + seconds{s} + milliseconds{ms};
}

}  // namespace

TEST_CASE("rfc3339 timestamps parse with and without offsets") {
  CHECK(parse_timestamp("2025-01-01T00:00:00Z") == at(2025, 1, 1, 0, 0, 0));
  CHECK(parse_timestamp("2025-01-01T00:00:00.250Z") == at(2025, 1, 1, 0, 0, 0, 250));
  CHECK(parse_timestamp("2025-01-01T02:00:00+02:00") == at(2025, 1, 1, 0, 0, 0));
  CHECK(parse_timestamp("2024-12-31T19:30:00-05:00") == at(2025, 1, 1, 0, 30, 0));
  CHECK(parse_timestamp("2025-01-01 00:00:00") == at(2025, 1, 1, 0, 0, 0));
}

TEST_CASE("azure portal export timestamps parse") {
  CHECK(parse_timestamp("1/1/2025, 12:00:00.000 AM") == at(2025, 1, 1, 0, 0, 0));
  CHECK(parse_timestamp("3/14/2024, 1:05:09.120 PM") == at(2024, 3, 14, 13, 5, 9, 120));
  CHECK(parse_timestamp("3/14/2024, 12:30:00.000 PM") == at(2024, 3, 14, 12, 30, 0));
}

TEST_CASE("malformed timestamps are rejected") {
  for (const char* bad : {"", "yesterday", "2025-13-01T00:00:00Z", "2025-02-30T00:00:00Z", "2025-01-01T25:00:00Z",
                          "13/1/2025, 1:00:00.000 AM", "2025-01-01T00:00:00Zjunk"}) {
    CAPTURE(bad);
    CHECK_FALSE(parse_timestamp(bad).has_value());
  }
}

TEST_CASE("formatting round-trips") {
  const Timestamp t = at(2025, 6, 30, 23, 59, 59, 7);
  CHECK(format_timestamp(t) == "2025-06-30T23:59:59.007Z");
  CHECK(format_timestamp(at(2025, 6, 30, 23, 59, 59)) == "2025-06-30T23:59:59Z");
  CHECK(parse_timestamp(format_timestamp(t)) == t);
  CHECK(format_minute(floor_minute(t)) == "2025-06-30T23:59:00Z");
}

TEST_CASE("windows are half-open") {
  const TimeWindow w = make_window(at(2025, 1, 1, 0, 1, 0), at(2025, 1, 1, 0, 3, 0));
  CHECK(w.contains(at(2025, 1, 1, 0, 1, 0)));
  CHECK(w.contains(at(2025, 1, 1, 0, 2, 59, 999)));
  CHECK_FALSE(w.contains(at(2025, 1, 1, 0, 3, 0)));
  CHECK_THROWS_AS(make_window(w.end, w.start), std::invalid_argument);
  CHECK_THROWS_AS(make_window(w.start, w.start), std::invalid_argument);

  const TimeWindow other{at(2025, 1, 1, 0, 2, 0), at(2025, 1, 1, 0, 5, 0)};
  CHECK(intersect(w, other) == TimeWindow{at(2025, 1, 1, 0, 2, 0), at(2025, 1, 1, 0, 3, 0)});
  CHECK_FALSE(intersect(w, TimeWindow{w.end, at(2025, 1, 1, 1, 0, 0)}).has_value());
}

TEST_CASE("sha256 matches published test vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");

  testing_support::TempDir dir;
  testing_support::spit(dir / "f.txt", "abc");
  CHECK(sha256_file(dir / "f.txt") == sha256_hex("abc"));
}

TEST_CASE("labels parse in both vocabularies") {
  CHECK(parse_label("Legit") == ClassificationLabel::Normal);
  CHECK(parse_label("normal") == ClassificationLabel::Normal);
  CHECK(parse_label("MALICIOUS") == ClassificationLabel::Malicious);
  CHECK(parse_label("ransomware") == ClassificationLabel::Malicious);
  CHECK_FALSE(parse_label("maybe").has_value());
  CHECK(to_string(ClassificationLabel::Normal) == "Legit");
}

TEST_CASE("likert names and ranks") {
  CHECK(scheme_size(LikertScheme::Seven) == 7);
  CHECK(scheme_size(LikertScheme::Five) == 5);
  CHECK(rank_in(LikertName::ExtremelyLow, LikertScheme::Seven) == 0);
  CHECK(rank_in(LikertName::High, LikertScheme::Seven) == 4);
  CHECK(rank_in(LikertName::High, LikertScheme::Five) == 3);
  CHECK_FALSE(rank_in(LikertName::ExtremelyHigh, LikertScheme::Five).has_value());
  CHECK(parse_likert_name("Very High") == LikertName::VeryHigh);
  CHECK(parse_likert_name("extremely_low") == LikertName::ExtremelyLow);
  CHECK(parse_likert_name("very-low") == LikertName::VeryLow);
  CHECK_FALSE(parse_likert_name("medium").has_value());
  CHECK(parse_scheme("5") == LikertScheme::Five);
  CHECK(parse_scheme("seven") == LikertScheme::Seven);
}

TEST_CASE("z binning edges") {
  auto name = [](double z, LikertScheme s = LikertScheme::Seven) { return level_for_z(z, s).name(); };
  CHECK(name(0.0) == LikertName::Normal);
  CHECK(name(1.0) == LikertName::Normal);
  CHECK(name(-1.0) == LikertName::Normal);
  CHECK(name(std::nextafter(1.0, 2.0)) == LikertName::High);
  CHECK(name(2.0) == LikertName::High);
  CHECK(name(-2.0) == LikertName::Low);
  CHECK(name(std::nextafter(-2.0, -3.0)) == LikertName::VeryLow);
  CHECK(name(std::nextafter(-1.0, -2.0)) == LikertName::Low);
  CHECK(name(3.0) == LikertName::VeryHigh);
  CHECK(name(-3.0) == LikertName::VeryLow);
  CHECK(name(3.1) == LikertName::ExtremelyHigh);
  CHECK(name(-3.1) == LikertName::ExtremelyLow);
  CHECK(name(3.1, LikertScheme::Five) == LikertName::VeryHigh);
  CHECK(name(-9.0, LikertScheme::Five) == LikertName::VeryLow);
}
