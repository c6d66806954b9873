#pragma once

// Brute-force LP oracle in exact rational arithmetic: enumerates every basis
// of active constraints. Only usable for a handful of variables.

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <vector>

#include "stratinv/simplex.hpp"

namespace oracle {

using Rational = boost::multiprecision::cpp_rational;

// Rows and bounds must be finite; coefficients are converted exactly from
// their double values.
inline std::optional<Rational> enumerate_vertices(const stratinv::LinearProgram& lp) {
  const int n = lp.num_vars();
  // Every constraint as g.x <= h, equalities stored twice but marked.
  struct Halfspace {
    std::vector<Rational> g;
    Rational h;
    bool equality;
  };
  std::vector<Halfspace> hs;
  for (int i = 0; i < lp.num_rows(); ++i) {
    std::vector<Rational> g(n, 0);
    for (std::size_t p = 0; p < lp.rows[i].size(); ++p)
      g[lp.rows[i].index[p]] += Rational(lp.rows[i].value[p]);
    Rational b(lp.rhs[i]);
    switch (lp.senses[i]) {
      case stratinv::RowSense::LessEqual: hs.push_back({g, b, false}); break;
      case stratinv::RowSense::GreaterEqual: {
        for (auto& v : g) v = -v;
        hs.push_back({g, -b, false});
        break;
      }
      case stratinv::RowSense::Equal: hs.push_back({g, b, true}); break;
    }
  }
  for (int j = 0; j < n; ++j) {
    std::vector<Rational> g(n, 0);
    g[j] = 1;
    hs.push_back({g, Rational(lp.upper[j]), false});
    g[j] = -1;
    hs.push_back({g, -Rational(lp.lower[j]), false});
  }
  const int m = static_cast<int>(hs.size());

  auto feasible = [&](const std::vector<Rational>& x) {
    for (const auto& h : hs) {
      Rational s = 0;
      for (int j = 0; j < n; ++j) s += h.g[j] * x[j];
      if (s > h.h) return false;
      if (h.equality && s != h.h) return false;
    }
    return true;
  };

  std::optional<Rational> best;
  // Iterate all n-subsets of the m halfspaces.
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  if (n == 0) return Rational(0);
  while (true) {
    // Solve the square system by Gauss-Jordan.
    std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n + 1));
    for (int r = 0; r < n; ++r) {
      for (int j = 0; j < n; ++j) a[r][j] = hs[idx[r]].g[j];
      a[r][n] = hs[idx[r]].h;
    }
    bool singular = false;
    for (int col = 0; col < n && !singular; ++col) {
      int piv = -1;
      for (int r = col; r < n; ++r)
        if (a[r][col] != 0) { piv = r; break; }
      if (piv < 0) { singular = true; break; }
      std::swap(a[piv], a[col]);
      for (int r = 0; r < n; ++r) {
        if (r == col || a[r][col] == 0) continue;
        Rational f = a[r][col] / a[col][col];
        for (int j = col; j <= n; ++j) a[r][j] -= f * a[col][j];
      }
    }
    if (!singular) {
      std::vector<Rational> x(n);
      for (int j = 0; j < n; ++j) x[j] = a[j][n] / a[j][j];
      if (feasible(x)) {
        Rational obj = 0;
        for (int j = 0; j < n; ++j) obj += Rational(lp.objective[j]) * x[j];
        if (!best || obj > *best) best = obj;
      }
    }
    int k = n - 1;
    while (k >= 0 && idx[k] == m - n + k) --k;
    if (k < 0) break;
    ++idx[k];
    for (int j = k + 1; j < n; ++j) idx[j] = idx[j - 1] + 1;
  }
  return best;
}

}  // namespace oracle
