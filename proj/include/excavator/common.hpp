#pragma once

#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace excavator {

// Raised by every module for contract violations and unreadable inputs.
// `stage` names the pipeline stage so the CLI can report where a run died.
class Error : public std::runtime_error {
 public:
  Error(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

// Calendar month. Ordered, and convertible to a dense ordinal so month
// arithmetic is plain integer arithmetic.
struct YearMonth {
  int year = 1970;
  int month = 1;  // 1..12

  constexpr int ordinal() const noexcept { return year * 12 + (month - 1); }

  static constexpr YearMonth from_ordinal(int ord) noexcept {
    int y = ord / 12;
    int m = ord % 12;
    if (m < 0) {
      m += 12;
      --y;
    }
    return YearMonth{y, m + 1};
  }

  constexpr YearMonth plus(int months) const noexcept {
    return from_ordinal(ordinal() + months);
  }

  auto operator<=>(const YearMonth&) const = default;

  std::string str() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
    return buf;
  }

  // Accepts "YYYY-MM" and any longer ISO-8601 prefix such as "YYYY-MM-DD"
  // or "YYYY-MM-DDThh:mm:ssZ"; the day and time are truncated away.
  static std::optional<YearMonth> parse(std::string_view s) {
    if (s.size() < 7 || s[4] != '-') return std::nullopt;
    for (int i : {0, 1, 2, 3, 5, 6})
      if (s[i] < '0' || s[i] > '9') return std::nullopt;
    if (s.size() > 7 && s[7] != '-') return std::nullopt;
    int y = (s[0] - '0') * 1000 + (s[1] - '0') * 100 + (s[2] - '0') * 10 + (s[3] - '0');
    int m = (s[5] - '0') * 10 + (s[6] - '0');
    if (m < 1 || m > 12) return std::nullopt;
    return YearMonth{y, m};
  }
};

// Half-open token range [begin, end).
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  constexpr std::size_t size() const noexcept { return end - begin; }
  constexpr bool empty() const noexcept { return end <= begin; }
  constexpr bool contains(std::size_t i) const noexcept { return i >= begin && i < end; }
  constexpr bool overlaps(const TokenSpan& o) const noexcept {
    return begin < o.end && o.begin < end;
  }
  auto operator<=>(const TokenSpan&) const = default;
};

// Half-open byte range into a document body.
struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  auto operator<=>(const CharSpan&) const = default;
};

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace excavator
