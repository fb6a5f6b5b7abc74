#include "ciaf/time.hpp"

#include <cctype>
#include <cstdio>
#include <stdexcept>

namespace ciaf {
namespace {

using namespace std::chrono;

class Scanner {
 public:
  explicit Scanner(std::string_view s) : s_(s) {}

  bool done() const { return pos_ == s_.size(); }
  char peek() const { return done() ? '\0' : s_[pos_]; }

  bool accept(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  // Reads between min_digits and max_digits decimal digits.
  std::optional<int> number(std::size_t min_digits, std::size_t max_digits) {
    std::size_t start = pos_;
    int value = 0;
    while (pos_ < s_.size() && pos_ - start < max_digits &&
           std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      value = value * 10 + (s_[pos_] - '0');
      ++pos_;
    }
    if (pos_ - start < min_digits) return std::nullopt;
    return value;
  }

  // Fractional seconds of arbitrary length, truncated to milliseconds.
  std::optional<int> fraction_ms() {
    std::size_t start = pos_;
    int ms = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      if (pos_ - start < 3) ms = ms * 10 + (s_[pos_] - '0');
      ++pos_;
    }
    std::size_t n = pos_ - start;
    if (n == 0) return std::nullopt;
    for (std::size_t i = n; i < 3; ++i) ms *= 10;
    return ms;
  }

  void skip_spaces() {
    while (pos_ < s_.size() && s_[pos_] == ' ') ++pos_;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

std::optional<Timestamp> assemble(int y, int mo, int d, int h, int mi, int s, int ms) {
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) return std::nullopt;
  return Timestamp{sys_days{ymd}} + hours{h} + minutes{mi} + seconds{s} + milliseconds{ms};
}

std::optional<Timestamp> parse_rfc3339(std::string_view text) {
  Scanner sc(text);
  auto y = sc.number(4, 4);
  if (!y || !sc.accept('-')) return std::nullopt;
  auto mo = sc.number(2, 2);
  if (!mo || !sc.accept('-')) return std::nullopt;
  auto d = sc.number(2, 2);
  if (!d) return std::nullopt;
  if (!(sc.accept('T') || sc.accept('t') || sc.accept(' '))) return std::nullopt;
  auto h = sc.number(2, 2);
  if (!h || !sc.accept(':')) return std::nullopt;
  auto mi = sc.number(2, 2);
  if (!mi || !sc.accept(':')) return std::nullopt;
  auto s = sc.number(2, 2);
  if (!s) return std::nullopt;
  int ms = 0;
  if (sc.accept('.')) {
    auto f = sc.fraction_ms();
    if (!f) return std::nullopt;
    ms = *f;
  }
  auto ts = assemble(*y, *mo, *d, *h, *mi, *s, ms);
  if (!ts) return std::nullopt;
  if (sc.done() || sc.accept('Z') || sc.accept('z')) {
    return sc.done() ? ts : std::nullopt;
  }
  int sign = 0;
  if (sc.accept('+')) sign = 1;
  else if (sc.accept('-')) sign = -1;
  else return std::nullopt;
  auto oh = sc.number(2, 2);
  if (!oh) return std::nullopt;
  sc.accept(':');
  auto om = sc.number(2, 2);
  if (!om || !sc.done() || *oh > 23 || *om > 59) return std::nullopt;
  return *ts - sign * (hours{*oh} + minutes{*om});
}

// M/D/YYYY, h:mm:ss.fff AM/PM
std::optional<Timestamp> parse_portal(std::string_view text) {
  Scanner sc(text);
  auto mo = sc.number(1, 2);
  if (!mo || !sc.accept('/')) return std::nullopt;
  auto d = sc.number(1, 2);
  if (!d || !sc.accept('/')) return std::nullopt;
  auto y = sc.number(4, 4);
  if (!y) return std::nullopt;
  sc.accept(',');
  sc.skip_spaces();
  auto h = sc.number(1, 2);
  if (!h || !sc.accept(':')) return std::nullopt;
  auto mi = sc.number(2, 2);
  if (!mi || !sc.accept(':')) return std::nullopt;
  auto s = sc.number(2, 2);
  if (!s) return std::nullopt;
  int ms = 0;
  if (sc.accept('.')) {
    auto f = sc.fraction_ms();
    if (!f) return std::nullopt;
    ms = *f;
  }
  sc.skip_spaces();
  int hour = *h;
  if (hour < 1 || hour > 12) return std::nullopt;
  char c = static_cast<char>(std::toupper(static_cast<unsigned char>(sc.peek())));
  if (c != 'A' && c != 'P') return std::nullopt;
  sc.accept(sc.peek());
  if (!(sc.accept('M') || sc.accept('m')) || !sc.done()) return std::nullopt;
  if (c == 'A' && hour == 12) hour = 0;
  if (c == 'P' && hour != 12) hour += 12;
  return assemble(*y, *mo, *d, hour, *mi, *s, ms);
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.find('/') != std::string_view::npos) return parse_portal(text);
  return parse_rfc3339(text);
}

std::string format_timestamp(Timestamp ts) {
  auto day = floor<days>(ts);
  year_month_day ymd{day};
  hh_mm_ss<milliseconds> tod{ts - day};
  char buf[40];
  int ms = static_cast<int>(tod.subseconds().count());
  if (ms != 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", int(ymd.year()),
                  unsigned(ymd.month()), unsigned(ymd.day()), int(tod.hours().count()),
                  int(tod.minutes().count()), int(tod.seconds().count()), ms);
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", int(ymd.year()),
                  unsigned(ymd.month()), unsigned(ymd.day()), int(tod.hours().count()),
                  int(tod.minutes().count()), int(tod.seconds().count()));
  }
  return buf;
}

std::string format_minute(Minute m) { return format_timestamp(Timestamp{m}); }

TimeWindow make_window(Timestamp start, Timestamp end) {
  if (!(start < end)) {
    throw std::invalid_argument("time window start must precede end: " +
                                format_timestamp(start) + " >= " + format_timestamp(end));
  }
  return TimeWindow{start, end};
}

std::optional<TimeWindow> intersect(const TimeWindow& a, const TimeWindow& b) {
  TimeWindow w{std::max(a.start, b.start), std::min(a.end, b.end)};
  if (!w.valid()) return std::nullopt;
  return w;
}

std::string format_window(const TimeWindow& w) {
  return "[" + format_timestamp(w.start) + ", " + format_timestamp(w.end) + ")";
}

}  // namespace ciaf
