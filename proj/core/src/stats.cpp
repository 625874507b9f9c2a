#include "crowdimpute/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "crowdimpute/error.hpp"
#include "crowdimpute/text.hpp"

namespace crowdimpute {

using nlohmann::json;

double quantile_sorted(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw PreconditionError("quantile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

GroupStat group_stat(const std::vector<double>& v) {
  GroupStat g;
  g.count = v.size();
  if (v.empty()) return g;
  for (double x : v) g.mean += x;
  g.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - g.mean) * (x - g.mean);
    g.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return g;
}

int observed_decimals(const std::vector<double>& values) {
  for (int d = 0; d < 6; ++d) {
    const double scale = std::pow(10.0, d);
    const bool ok = std::all_of(values.begin(), values.end(), [&](double v) {
      const double s = v * scale;
      return std::abs(s - std::round(s)) < 1e-6 * std::max(1.0, std::abs(s));
    });
    if (ok) return d;
  }
  return 6;
}

// Pairwise-complete columns as doubles; categorical columns expand to
// indicators for one category.
struct Pair {
  std::vector<double> x;
  std::vector<double> y;
};

Pair pair_observed(const Dataset& d, std::size_t a, std::size_t b) {
  Pair p;
  for (std::size_t r = 0; r < d.rows(); ++r) {
    if (d.missing(r, a) || d.missing(r, b)) continue;
    p.x.push_back(d.value(r, a));
    p.y.push_back(d.value(r, b));
  }
  return p;
}

std::vector<double> indicator(const std::vector<double>& codes, std::size_t category) {
  std::vector<double> out(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) {
    out[i] = codes[i] == static_cast<double>(category) ? 1.0 : 0.0;
  }
  return out;
}

// Strongest-magnitude correlation over indicator expansions; keeps the sign.
std::optional<double> association(const Dataset& d, std::size_t a, std::size_t b) {
  const auto& sa = d.column(a);
  const auto& sb = d.column(b);
  const auto p = pair_observed(d, a, b);
  auto expand = [](const ColumnSpec& spec, const std::vector<double>& v) {
    std::vector<std::vector<double>> out;
    if (!spec.categorical()) {
      out.push_back(v);
    } else if (spec.categories.size() == 2) {
      out.push_back(indicator(v, 1));
    } else {
      for (std::size_t k = 0; k < spec.categories.size(); ++k) out.push_back(indicator(v, k));
    }
    return out;
  };
  std::optional<double> best;
  for (const auto& xa : expand(sa, p.x)) {
    for (const auto& xb : expand(sb, p.y)) {
      auto r = pearson(xa, xb);
      if (r && (!best || std::abs(*r) > std::abs(*best))) best = r;
    }
  }
  return best;
}

std::vector<Stratum> make_strata(const Dataset& d, std::size_t target, std::size_t by,
                                 const ColumnStats& by_stats) {
  const auto p = pair_observed(d, by, target);
  if (p.x.empty()) return {};
  std::vector<double> edges{by_stats.min};
  for (double q : {by_stats.p25, by_stats.median, by_stats.p75}) {
    // Edges are quoted in survey text with at most one decimal.
    const double e = round_to(q, std::min(by_stats.decimals, 1));
    if (e > edges.back() && e < by_stats.max) edges.push_back(e);
  }
  edges.push_back(by_stats.max);
  if (edges.size() < 2 || edges.front() == edges.back()) return {};

  const std::size_t buckets = edges.size() - 1;
  std::vector<std::vector<double>> members(buckets);
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    std::size_t k = 0;
    while (k + 1 < buckets && p.x[i] > edges[k + 1]) ++k;
    members[k].push_back(p.y[i]);
  }
  std::vector<Stratum> out;
  for (std::size_t k = 0; k < buckets; ++k) {
    if (members[k].empty()) continue;
    out.push_back({edges[k], edges[k + 1], group_stat(members[k])});
  }
  return out;
}

}  // namespace

const Stratum& StratifiedMeans::lookup(double x) const {
  if (strata.empty()) throw PreconditionError("stratified means without strata");
  if (x <= strata.front().hi) return strata.front();
  for (const auto& s : strata) {
    if (x > s.lo && x <= s.hi) return s;
  }
  // Gaps between non-empty buckets or values beyond the max: nearest bucket.
  const Stratum* best = &strata.front();
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& s : strata) {
    const double dist = x < s.lo ? s.lo - x : (x > s.hi ? x - s.hi : 0.0);
    if (dist < best_dist) {
      best_dist = dist;
      best = &s;
    }
  }
  return *best;
}

const GroupedMeans* SummaryStats::grouped_means(std::size_t target, std::size_t by) const {
  for (const auto& g : grouped) {
    if (g.target == target && g.by == by) return &g;
  }
  return nullptr;
}

const StratifiedMeans* SummaryStats::stratified_means(std::size_t target, std::size_t by) const {
  for (const auto& s : stratified) {
    if (s.target == target && s.by == by) return &s;
  }
  return nullptr;
}

SummaryStats summarize(const Dataset& d) {
  if (d.rows() == 0) throw PreconditionError("summarize: dataset has no rows");
  SummaryStats s;
  s.schema = d.schema();
  s.rows = d.rows();
  const std::size_t p = d.cols();
  const auto id = d.id_column_index();

  for (std::size_t c = 0; c < p; ++c) {
    const auto& spec = d.column(c);
    ColumnStats cs;
    cs.name = spec.name;
    cs.kind = spec.kind;
    auto values = d.observed_values(c);
    cs.observed = values.size();
    cs.flagged = values.empty();
    if (spec.categorical()) {
      cs.counts.assign(spec.categories.size(), 0);
      for (double v : values) ++cs.counts[static_cast<std::size_t>(v)];
      cs.proportions.assign(spec.categories.size(), 0.0);
      if (!values.empty()) {
        for (std::size_t k = 0; k < cs.counts.size(); ++k) {
          cs.proportions[k] =
              static_cast<double>(cs.counts[k]) / static_cast<double>(values.size());
        }
      }
    } else if (!values.empty()) {
      std::sort(values.begin(), values.end());
      cs.min = values.front();
      cs.max = values.back();
      cs.p25 = quantile_sorted(values, 0.25);
      cs.median = quantile_sorted(values, 0.5);
      cs.p75 = quantile_sorted(values, 0.75);
      const auto g = group_stat(values);
      cs.mean = g.mean;
      cs.sd = g.sd;
      cs.decimals = observed_decimals(values);
    }
    s.columns.push_back(std::move(cs));
  }

  s.association.assign(p, std::vector<std::optional<double>>(p));
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a + 1; b < p; ++b) {
      if (a == id || b == id || s.columns[a].flagged || s.columns[b].flagged) continue;
      const auto r = association(d, a, b);
      s.association[a][b] = r;
      s.association[b][a] = r;
    }
  }

  for (std::size_t t = 0; t < p; ++t) {
    if (d.column(t).categorical() || t == id || s.columns[t].flagged) continue;
    for (std::size_t by = 0; by < p; ++by) {
      if (by == t || by == id || s.columns[by].flagged) continue;
      if (d.column(by).categorical()) {
        GroupedMeans g{t, by, {}};
        std::vector<std::vector<double>> members(d.column(by).categories.size());
        for (std::size_t r = 0; r < d.rows(); ++r) {
          if (d.missing(r, t) || d.missing(r, by)) continue;
          members[static_cast<std::size_t>(d.value(r, by))].push_back(d.value(r, t));
        }
        for (const auto& m : members) g.groups.push_back(group_stat(m));
        s.grouped.push_back(std::move(g));
      } else {
        auto strata = make_strata(d, t, by, s.columns[by]);
        if (!strata.empty()) s.stratified.push_back({t, by, std::move(strata)});
      }
    }
  }
  return s;
}

std::vector<RankedColumn> correlation_rank(const SummaryStats& s, std::string_view target) {
  const auto t = s.schema.find(target);
  if (!t) throw PreconditionError("correlation_rank: unknown target '" + std::string(target) + "'");
  std::vector<RankedColumn> out;
  for (std::size_t c = 0; c < s.columns.size(); ++c) {
    if (c == *t) continue;
    if (const auto& r = s.association[*t][c]) out.push_back({s.columns[c].name, std::abs(*r)});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RankedColumn& a, const RankedColumn& b) { return a.score > b.score; });
  return out;
}

json summary_to_json(const SummaryStats& s) {
  json cols = json::array();
  for (const auto& c : s.columns) {
    json jc{{"name", c.name}, {"observed", c.observed}, {"flagged", c.flagged}};
    if (c.kind == ColumnKind::categorical) {
      jc["kind"] = "categorical";
      jc["counts"] = c.counts;
      jc["proportions"] = c.proportions;
    } else {
      jc["kind"] = "continuous";
      if (!c.flagged) {
        jc.update({{"min", c.min}, {"p25", c.p25}, {"median", c.median}, {"p75", c.p75},
                   {"max", c.max}, {"mean", c.mean}, {"sd", c.sd}, {"decimals", c.decimals}});
      }
    }
    cols.push_back(std::move(jc));
  }
  json assoc = json::array();
  for (std::size_t a = 0; a < s.association.size(); ++a) {
    for (std::size_t b = a + 1; b < s.association.size(); ++b) {
      if (const auto& r = s.association[a][b]) {
        assoc.push_back({{"a", s.columns[a].name}, {"b", s.columns[b].name}, {"r", *r}});
      }
    }
  }
  json grouped = json::array();
  for (const auto& g : s.grouped) {
    json groups = json::array();
    const auto& cats = s.schema.columns[g.by].categories;
    for (std::size_t k = 0; k < g.groups.size(); ++k) {
      groups.push_back({{"category", cats[k]}, {"count", g.groups[k].count},
                        {"mean", g.groups[k].mean}, {"sd", g.groups[k].sd}});
    }
    grouped.push_back(
        {{"target", s.columns[g.target].name}, {"by", s.columns[g.by].name}, {"groups", groups}});
  }
  json stratified = json::array();
  for (const auto& st : s.stratified) {
    json strata = json::array();
    for (const auto& b : st.strata) {
      strata.push_back({{"lo", b.lo}, {"hi", b.hi}, {"count", b.stat.count},
                        {"mean", b.stat.mean}, {"sd", b.stat.sd}});
    }
    stratified.push_back(
        {{"target", s.columns[st.target].name}, {"by", s.columns[st.by].name}, {"strata", strata}});
  }
  return {{"rows", s.rows},
          {"columns", std::move(cols)},
          {"associations", std::move(assoc)},
          {"grouped_means", std::move(grouped)},
          {"stratified_means", std::move(stratified)}};
}

}  // namespace crowdimpute
