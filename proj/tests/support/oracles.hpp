#pragma once

// Reference implementations used only by tests. Each one evaluates the defining formula directly
// and shares no code with the library path it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracle {

struct Params {
  int match = 2, mismatch = -1, gap = -2;
};

/// Exhaustive enumeration of every global alignment (no memoisation).
inline std::int64_t best_alignment_score(const std::vector<std::string>& a, std::size_t i,
                                         const std::vector<std::string>& b, std::size_t j, const Params& p) {
  if (i == a.size() && j == b.size()) return 0;
  std::int64_t best = INT64_MIN;
  if (i < a.size() && j < b.size()) {
    best = std::max(best, (a[i] == b[j] ? p.match : p.mismatch) + best_alignment_score(a, i + 1, b, j + 1, p));
  }
  if (i < a.size()) best = std::max(best, p.gap + best_alignment_score(a, i + 1, b, j, p));
  if (j < b.size()) best = std::max(best, p.gap + best_alignment_score(a, i, b, j + 1, p));
  return best;
}

inline std::int64_t best_alignment_score(const std::vector<std::string>& a, const std::vector<std::string>& b,
                                         const Params& p = {}) {
  return best_alignment_score(a, 0, b, 0, p);
}

/// Full (n+1)x(m+1) edit matrix over bytes (callers pass ASCII).
inline std::size_t edit_distance(const std::string& s, const std::string& t) {
  std::vector<std::vector<std::size_t>> d(s.size() + 1, std::vector<std::size_t>(t.size() + 1));
  for (std::size_t i = 0; i <= s.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= t.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= s.size(); ++i) {
    for (std::size_t j = 1; j <= t.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (s[i - 1] == t[j - 1] ? 0u : 1u)});
    }
  }
  return d[s.size()][t.size()];
}

/// cov(x,y) / (sd(x) sd(y)) in long double, two-pass.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  long double mx = 0, my = 0;
  for (double v : x) mx += v;
  for (double v : y) my += v;
  mx /= x.size();
  my /= y.size();
  long double cov = 0, vx = 0, vy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cov += (x[i] - mx) * (y[i] - my);
    vx += (x[i] - mx) * (x[i] - mx);
    vy += (y[i] - my) * (y[i] - my);
  }
  return static_cast<double>(cov / std::sqrt(vx * vy));
}

/// rank(v_i) = #{v_j < v_i} + (#{v_j == v_i} + 1) / 2
inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::size_t less = 0, equal = 0;
    for (double w : v) {
      less += w < v[i];
      equal += w == v[i];
    }
    r[i] = static_cast<double>(less) + (static_cast<double>(equal) + 1.0) / 2.0;
  }
  return r;
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(ranks(x), ranks(y));
}

inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::vector<std::string> inter, uni;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(uni));
  return uni.empty() ? 1.0 : static_cast<double>(inter.size()) / static_cast<double>(uni.size());
}

/// Direct evaluation: rel = softmax(original logits); DCG over the deid ranking; divide by DCG over
/// the original ranking. Ranking = logit descending, code ascending.
inline double nsdcg(const std::map<std::string, double>& original, const std::map<std::string, double>& deid) {
  long double z = 0;
  for (const auto& [c, l] : original) z += std::exp(static_cast<long double>(l));
  auto rel = [&](const std::string& c) { return std::exp(static_cast<long double>(original.at(c))) / z; };
  auto order = [](const std::map<std::string, double>& logits) {
    std::vector<std::pair<std::string, double>> v(logits.begin(), logits.end());
    std::stable_sort(v.begin(), v.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
    return v;  // map iteration is code-ascending, stable sort keeps that on ties
  };
  auto dcg = [&](const std::map<std::string, double>& logits) {
    long double s = 0;
    const auto v = order(logits);
    for (std::size_t k = 0; k < v.size(); ++k) s += rel(v[k].first) / std::log2(static_cast<long double>(k + 2));
    return s;
  };
  return static_cast<double>(dcg(deid) / dcg(original));
}

}  // namespace oracle
