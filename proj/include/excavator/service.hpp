#pragma once

#include <algorithm>
#include <charconv>
#include <map>
#include <optional>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "excavator/pipeline.hpp"
#include "excavator/tcag.hpp"
#include "excavator/timeline.hpp"

namespace excavator {

struct Response {
  int status = 200;
  std::string body;
};

using QueryParams = std::map<std::string, std::string>;

// Read-only JSON API over a Snapshot. handle() is a pure function of the
// snapshot and the request, so identical requests get identical bodies.
class Service {
 public:
  explicit Service(const Snapshot& snapshot) : snap_(&snapshot) {}

  Response handle(std::string_view path, const QueryParams& params) const {
    try {
      if (path == "/api/taxonomy") return taxonomy();
      if (path == "/api/tcag") return tcag(params);
      if (path == "/api/timeline") return timeline(params);
      if (path == "/api/timelines/top_states") return top_states(params);
      if (path == "/api/correlate") return correlate(params);
      if (path == "/api/evidence") return evidence(params);
      return error(404, "no such endpoint: " + std::string(path));
    } catch (const BadRequest& e) {
      return error(400, e.what());
    } catch (const NotFound& e) {
      return error(404, e.what());
    } catch (const Unprocessable& e) {
      return error(422, e.what());
    } catch (const std::exception& e) {
      return error(500, e.what());
    }
  }

 private:
  struct BadRequest : std::runtime_error {
    using std::runtime_error::runtime_error;
  };
  struct Unprocessable : std::runtime_error {
    using std::runtime_error::runtime_error;
  };

  static Response ok(const json& j) { return {200, j.dump(2) + "\n"}; }
  static Response error(int status, const std::string& message) {
    return {status, json{{"error", message}, {"status", status}}.dump(2) + "\n"};
  }

  static std::optional<std::string> get(const QueryParams& p, const std::string& key) {
    auto it = p.find(key);
    if (it == p.end() || it->second.empty()) return std::nullopt;
    return it->second;
  }

  static std::string require(const QueryParams& p, const std::string& key) {
    auto v = get(p, key);
    if (!v) throw BadRequest("missing query parameter '" + key + "'");
    return *v;
  }

  static std::optional<YearMonth> month_param(const QueryParams& p, const std::string& key) {
    auto v = get(p, key);
    if (!v) return std::nullopt;
    auto m = YearMonth::parse(*v);
    if (!m || v->size() != 7) throw BadRequest("parameter '" + key + "' must be YYYY-MM, got '" + *v + "'");
    return m;
  }

  static std::optional<std::size_t> count_param(const QueryParams& p, const std::string& key) {
    auto v = get(p, key);
    if (!v) return std::nullopt;
    std::size_t out = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc{} || ptr != v->data() + v->size())
      throw BadRequest("parameter '" + key + "' must be a non-negative integer, got '" + *v + "'");
    return out;
  }

  static bool flag_param(const QueryParams& p, const std::string& key) {
    auto v = get(p, key);
    if (!v) return false;
    if (*v == "1" || *v == "true") return true;
    if (*v == "0" || *v == "false") return false;
    throw BadRequest("parameter '" + key + "' must be true or false");
  }

  std::string event_param(const QueryParams& p, const std::string& key) const {
    auto name = require(p, key);
    if (!snap_->taxonomy().contains(name)) throw BadRequest("unknown event type '" + name + "'");
    return name;
  }

  MonthRange range_param(const QueryParams& p) const {
    MonthRange r = snap_->stats().range;
    if (auto from = month_param(p, "from")) r.from = *from;
    if (auto to = month_param(p, "to")) r.to = *to;
    if (r.to < r.from) throw BadRequest("'from' is after 'to'");
    return r;
  }

  PopularityOptions window_param(const QueryParams& p) const {
    PopularityOptions opts;
    if (auto w = count_param(p, "window")) opts.window = *w;
    if (opts.window == 0 || opts.window % 2 == 0) throw BadRequest("window must be odd");
    opts.strict_window = flag_param(p, "strict_window");
    return opts;
  }

  PopularitySeries series(const std::string& event, const std::optional<std::string>& geo, const QueryParams& p) const {
    auto counts = event_monthly_counts(snap_->mentions(), event, geo);
    return popularity_series(counts, snap_->stats().corpus, range_param(p), window_param(p));
  }

  Response taxonomy() const {
    const auto& tax = snap_->taxonomy();
    json types = json::array();
    for (const auto& [name, t] : tax.types()) {
      auto anc = tax.ancestors(name);
      types.push_back({{"name", name},
                       {"description", t.description},
                       {"parents", t.parents},
                       {"ancestors", std::vector<std::string>(anc.begin(), anc.end())}});
    }
    return ok({{"version", tax.version()}, {"source", tax.source_text()}, {"types", std::move(types)}});
  }

  Response tcag(const QueryParams& p) const {
    FilterSpec f;
    f.geo = get(p, "geo");
    f.month = month_param(p, "month");
    if (auto m = count_param(p, "min_count")) f.min_edge_count = *m;
    f.strict = flag_param(p, "strict");
    if (f.month && !snap_->stats().range.contains(*f.month))
      throw BadRequest("month " + f.month->str() + " is outside the corpus range");
    auto focus = get(p, "focus");
    if (f == FilterSpec{} && !focus) return {200, snap_->tcag_bytes()};
    auto g = snap_->build(f);
    if (!focus) return ok(tcag_to_json(g));
    auto roles = assign_focus_colors(g, *focus);
    auto j = tcag_to_json(g, &roles);
    j["focus"] = *focus;
    return ok(j);
  }

  Response timeline(const QueryParams& p) const {
    auto event = event_param(p, "event");
    return ok(series_to_json(series(event, get(p, "geo"), p)));
  }

  Response top_states(const QueryParams& p) const {
    auto event = event_param(p, "event");
    std::size_t k = count_param(p, "k").value_or(10);
    if (k == 0) throw BadRequest("k must be positive");
    json states = json::array();
    for (const auto& [geo, total] : top_geos(snap_->mentions(), event, k))
      states.push_back({{"geo", geo}, {"mentions", total}, {"series", series_to_json(series(event, geo, p))}});
    return ok({{"event", event}, {"k", k}, {"states", std::move(states)}});
  }

  Response correlate(const QueryParams& p) const {
    auto left = event_param(p, "left_event");
    auto right = event_param(p, "right_event");
    auto geo = get(p, "geo");
    auto a = series(left, geo, p);
    auto b = series(right, geo, p);
    std::optional<double> r;
    try {
      r = pearson_correlation(a, b);
    } catch (const Error& e) {
      throw Unprocessable(e.what());
    }
    return ok({{"left_event", left},
               {"right_event", right},
               {"geo", geo ? json(*geo) : json(nullptr)},
               {"r", r ? json(*r) : json(nullptr)},
               {"defined", r.has_value()},
               {"left", series_to_json(a)},
               {"right", series_to_json(b)}});
  }

  // Evidence sentences for one edge, most confident first, then oldest
  // document first; relations without a document month sort last.
  Response evidence(const QueryParams& p) const {
    auto kind_name = require(p, "kind");
    auto kind = parse_relation_type(kind_name);
    if (!kind) throw BadRequest("kind must be Causes, Mitigates or Before");
    auto left = event_param(p, "left");
    auto right = event_param(p, "right");
    std::size_t limit = count_param(p, "limit").value_or(10);
    std::size_t offset = count_param(p, "offset").value_or(0);
    if (limit == 0 || limit > 100) throw BadRequest("limit must be between 1 and 100");

    std::vector<const RelationMention*> hits;
    for (const auto& r : snap_->relations())
      if (r.type == *kind && r.left_type == left && r.right_type == right) hits.push_back(&r);
    std::stable_sort(hits.begin(), hits.end(), [](const RelationMention* a, const RelationMention* b) {
      if (a->confidence != b->confidence) return a->confidence > b->confidence;
      if (a->published_month != b->published_month) {
        if (!a->published_month) return false;
        if (!b->published_month) return true;
        return *a->published_month < *b->published_month;
      }
      return a->id < b->id;
    });
    json items = json::array();
    for (std::size_t i = offset; i < hits.size() && i < offset + limit; ++i) items.push_back(relation_to_json(*hits[i]));
    return ok({{"kind", kind_name},
               {"left", left},
               {"right", right},
               {"total", hits.size()},
               {"offset", offset},
               {"limit", limit},
               {"items", std::move(items)}});
  }

  const Snapshot* snap_;
};

// Routes every GET to service.handle().
inline void install_routes(const Service& service, httplib::Server& server) {
  server.Get(R"(/.*)", [&service](const httplib::Request& req, httplib::Response& res) {
    QueryParams params;
    for (const auto& [k, v] : req.params) params.emplace(k, v);
    auto out = service.handle(req.path, params);
    res.status = out.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_content(out.body, "application/json");
  });
}

// Blocks serving `service` on host:port until the server is stopped.
inline void serve(const Service& service, const std::string& host, int port, httplib::Server& server) {
  install_routes(service, server);
  if (!server.listen(host, port)) throw Error("serve", "cannot bind " + host + ":" + std::to_string(port));
}

}  // namespace excavator
