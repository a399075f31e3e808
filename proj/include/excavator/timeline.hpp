#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "excavator/common.hpp"
#include "excavator/corpus.hpp"
#include "excavator/event_extraction.hpp"

namespace excavator {

// Articles per normalization unit: M_t = articles(t) / kPopularityDivisor.
inline constexpr double kPopularityDivisor = 500.0;

struct MonthlyCounts {
  std::string event_type;
  std::optional<std::string> geo;
  std::map<YearMonth, std::size_t> counts;

  std::size_t at(YearMonth m) const {
    auto it = counts.find(m);
    return it == counts.end() ? 0 : it->second;
  }
};

// Mentions without a month are not counted. Under a geo restriction,
// mentions without a geo are not counted either.
inline MonthlyCounts event_monthly_counts(std::span<const EventMention> mentions, std::string_view type,
                                          const std::optional<std::string>& geo = std::nullopt) {
  MonthlyCounts out{std::string(type), geo, {}};
  for (const auto& m : mentions) {
    if (m.event_type != type || !m.month) continue;
    if (geo && (!m.geo || *m.geo != *geo)) continue;
    ++out.counts[*m.month];
  }
  return out;
}

struct MonthRange {
  YearMonth from;
  YearMonth to;

  bool contains(YearMonth m) const { return m >= from && m <= to; }
};

struct PopularityOptions {
  std::size_t window = 3;  // odd
  double divisor = kPopularityDivisor;
  // Strict: always divide the window sum by `window`, counting months that
  // are outside the range or have no articles as zero.
  bool strict_window = false;
};

struct PopularityPoint {
  YearMonth month;
  double score = 0.0;
  bool operator==(const PopularityPoint&) const = default;
};

struct PopularitySeries {
  std::string event_type;
  std::optional<std::string> geo;
  std::size_t window = 3;
  double divisor = kPopularityDivisor;
  std::vector<PopularityPoint> points;   // strictly increasing months
  std::vector<YearMonth> skipped_months; // in range, no published articles
};

// Score at month t is the mean over t' in [t - window/2, t + window/2] of
// N(t') / M(t'), M(t') = articles(t') / divisor. Window months outside the
// range or without articles are left out of the mean (the mean divides by
// the number of months that remain); a month whose whole window is left out
// gets no point. The strict option divides by `window` instead.
inline PopularitySeries popularity_series(const MonthlyCounts& counts, const CorpusStats& stats, MonthRange range,
                                          const PopularityOptions& opts = {}) {
  if (opts.window == 0 || opts.window % 2 == 0) throw Error("timeline", "window must be an odd number of months");
  if (range.to < range.from) throw Error("timeline", "empty month range");
  if (!(opts.divisor > 0.0)) throw Error("timeline", "divisor must be positive");
  PopularitySeries s{counts.event_type, counts.geo, opts.window, opts.divisor, {}, {}};
  const int half = static_cast<int>(opts.window / 2);
  for (int t = range.from.ordinal(); t <= range.to.ordinal(); ++t) {
    const auto month = YearMonth::from_ordinal(t);
    if (stats.articles(month) == 0) s.skipped_months.push_back(month);
    double sum = 0.0;
    std::size_t included = 0;
    for (int k = t - half; k <= t + half; ++k) {
      const auto m = YearMonth::from_ordinal(k);
      if (!range.contains(m)) continue;
      const auto articles = stats.articles(m);
      if (articles == 0) continue;
      const double normalizer = static_cast<double>(articles) / opts.divisor;
      sum += static_cast<double>(counts.at(m)) / normalizer;
      ++included;
    }
    if (included == 0) continue;
    const double denom = opts.strict_window ? static_cast<double>(opts.window) : static_cast<double>(included);
    s.points.push_back({month, sum / denom});
  }
  return s;
}

// Pearson r over the months both series share. Empty when either side is
// constant on the overlap.
inline std::optional<double> pearson_correlation(const PopularitySeries& a, const PopularitySeries& b) {
  std::vector<double> xs, ys;
  std::size_t j = 0;
  for (const auto& p : a.points) {
    while (j < b.points.size() && b.points[j].month < p.month) ++j;
    if (j < b.points.size() && b.points[j].month == p.month) {
      xs.push_back(p.score);
      ys.push_back(b.points[j].score);
    }
  }
  if (xs.size() < 2) throw Error("timeline", "correlation needs at least two overlapping months");
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Geo ids with the most mentions of `type`, restricted to ids starting with
// `prefix` (e.g. "US-" for U.S. states). Ties go to the smaller id.
inline std::vector<std::pair<std::string, std::size_t>> top_geos(std::span<const EventMention> mentions,
                                                                std::string_view type, std::size_t k,
                                                                std::string_view prefix = "US-") {
  std::map<std::string, std::size_t> totals;
  for (const auto& m : mentions)
    if (m.event_type == type && m.geo && m.geo->starts_with(prefix)) ++totals[*m.geo];
  std::vector<std::pair<std::string, std::size_t>> ranked(totals.begin(), totals.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

inline nlohmann::json series_to_json(const PopularitySeries& s) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : s.points) points.push_back({{"month", p.month.str()}, {"score", p.score}});
  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& m : s.skipped_months) skipped.push_back(m.str());
  return {{"event", s.event_type},
          {"geo", s.geo ? nlohmann::json(*s.geo) : nlohmann::json(nullptr)},
          {"window", s.window},
          {"divisor", s.divisor},
          {"points", std::move(points)},
          {"skipped_months", std::move(skipped)}};
}

}  // namespace excavator
