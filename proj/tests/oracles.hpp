#pragma once

// Brute-force reference computations used by the tests. Nothing here calls
// into the library's own solvers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "rfv/geometry.hpp"
#include "rfv/system.hpp"

namespace oracle {

using Vec = std::vector<long double>;
using Mat = std::vector<Vec>;

// Gaussian elimination with full pivoting; returns false when singular.
inline bool solve(Mat a, Vec b, Vec& x) {
  const std::size_t n = b.size();
  std::vector<std::size_t> col(n);
  for (std::size_t i = 0; i < n; ++i) col[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pr = k, pc = k;
    long double best = 0;
    for (std::size_t i = k; i < n; ++i) {
      for (std::size_t j = k; j < n; ++j) {
        if (std::fabs(a[i][j]) > best) {
          best = std::fabs(a[i][j]);
          pr = i;
          pc = j;
        }
      }
    }
    if (best == 0) return false;
    std::swap(a[k], a[pr]);
    std::swap(b[k], b[pr]);
    for (auto& row : a) std::swap(row[k], row[pc]);
    std::swap(col[k], col[pc]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const long double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  Vec y(n);
  for (std::size_t i = n; i-- > 0;) {
    long double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * y[j];
    y[i] = s / a[i][i];
  }
  x.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) x[col[i]] = y[i];
  return true;
}

inline long double determinant(Mat a) {
  const std::size_t n = a.size();
  long double det = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::fabs(a[i][k]) > std::fabs(a[p][k])) p = i;
    }
    if (a[p][k] == 0) return 0;
    if (p != k) {
      std::swap(a[p], a[k]);
      det = -det;
    }
    det *= a[k][k];
    for (std::size_t i = k + 1; i < n; ++i) {
      const long double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
    }
  }
  return det;
}

inline std::vector<rfv::geometry::Point> simplex_points(const rfv::geometry::Triangulation& tri, std::size_t s) {
  std::vector<rfv::geometry::Point> pts;
  for (std::size_t v : tri.simplices()[s].vertices) pts.push_back(tri.vertices()[v]);
  return pts;
}

// |det[v1 - v0, ..., vd - v0]| / d!
inline long double volume(const std::vector<rfv::geometry::Point>& pts) {
  const std::size_t d = pts.size() - 1;
  Mat m(d, Vec(d));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) m[i][j] = static_cast<long double>(pts[i + 1][j]) - pts[0][j];
  }
  long double f = 1;
  for (std::size_t i = 2; i <= d; ++i) f *= static_cast<long double>(i);
  return std::fabs(determinant(m)) / f;
}

struct Sphere {
  Vec center;
  long double radius2 = 0;
};

// Circumsphere from 2 (v_i - v_0) . c = |v_i|^2 - |v_0|^2.
inline Sphere circumsphere(const std::vector<rfv::geometry::Point>& pts) {
  const std::size_t d = pts.size() - 1;
  Mat a(d, Vec(d));
  Vec b(d);
  for (std::size_t i = 0; i < d; ++i) {
    long double rhs = 0;
    for (std::size_t j = 0; j < d; ++j) {
      const long double vi = pts[i + 1][j], v0 = pts[0][j];
      a[i][j] = 2 * (vi - v0);
      rhs += vi * vi - v0 * v0;
    }
    b[i] = rhs;
  }
  Sphere s;
  solve(a, b, s.center);
  for (std::size_t j = 0; j < d; ++j) {
    const long double diff = pts[0][j] - s.center[j];
    s.radius2 += diff * diff;
  }
  return s;
}

// Barycentric coordinates: sum_i w_i (v_i - v_0) = q - v_0 for i >= 1,
// w_0 = 1 - sum, all in long double.
inline Vec barycentric(const std::vector<rfv::geometry::Point>& pts, const std::vector<double>& q) {
  const std::size_t d = q.size();
  Mat a(d, Vec(d));
  Vec b(d);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < d; ++i) a[j][i] = static_cast<long double>(pts[i + 1][j]) - pts[0][j];
    b[j] = static_cast<long double>(q[j]) - pts[0][j];
  }
  Vec x;
  solve(a, b, x);
  Vec w(d + 1);
  long double sum = 0;
  for (std::size_t i = 0; i < d; ++i) {
    w[i + 1] = x[i];
    sum += x[i];
  }
  w[0] = 1 - sum;
  return w;
}

inline std::vector<rfv::geometry::Point> random_sites(std::size_t n, std::size_t d, std::mt19937_64& rng,
                                                      double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<rfv::geometry::Point> sites(n, rfv::geometry::Point(d));
  for (auto& p : sites) {
    for (double& c : p) c = u(rng);
  }
  return sites;
}

inline std::vector<double> random_point(std::size_t d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> q(d);
  for (double& c : q) c = u(rng);
  return q;
}

// Count of empty-circumsphere violations: a vertex outside the simplex that is
// strictly inside its circumsphere beyond a relative tolerance.
inline std::size_t circumsphere_violations(const rfv::geometry::Triangulation& tri, long double rel_tol = 1e-9L) {
  std::size_t bad = 0;
  const auto& verts = tri.vertices();
  for (std::size_t s = 0; s < tri.simplices().size(); ++s) {
    const auto pts = simplex_points(tri, s);
    const Sphere sphere = circumsphere(pts);
    const auto& own = tri.simplices()[s].vertices;
    for (std::size_t v = 0; v < verts.size(); ++v) {
      if (std::find(own.begin(), own.end(), v) != own.end()) continue;
      long double d2 = 0;
      for (std::size_t j = 0; j < tri.dimension(); ++j) {
        const long double diff = verts[v][j] - sphere.center[j];
        d2 += diff * diff;
      }
      if (d2 < sphere.radius2 * (1 - rel_tol)) ++bad;
    }
  }
  return bad;
}

// Bounding-simplex volume minus the summed simplex volumes, relative.
inline long double tiling_volume_error(const rfv::geometry::Triangulation& tri) {
  std::vector<rfv::geometry::Point> outer(tri.vertices().begin(), tri.vertices().begin() + tri.dimension() + 1);
  const long double total = volume(outer);
  long double sum = 0;
  for (std::size_t s = 0; s < tri.simplices().size(); ++s) sum += volume(simplex_points(tri, s));
  return std::fabs(sum - total) / total;
}

// Simplices containing q by the oracle's barycentric test.
inline std::vector<std::size_t> containing(const rfv::geometry::Triangulation& tri, const std::vector<double>& q,
                                           long double tol) {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < tri.simplices().size(); ++s) {
    const Vec w = barycentric(simplex_points(tri, s), q);
    bool inside = true;
    for (long double x : w) inside = inside && x >= -tol;
    if (inside) out.push_back(s);
  }
  return out;
}

struct Inference {
  std::vector<double> outputs;  // all m + r rows, externals first
  std::vector<double> memberships;
};

// Inference straight from the definitions: first simplex that contains I by
// exhaustive scan, clamped weights of its site vertices, weighted affine sums.
inline Inference infer(const rfv::geometry::Triangulation& tri, const std::vector<rfv::FuzzyRule>& rules,
                       const std::vector<double>& input) {
  const auto hits = containing(tri, input, 1e-9L);
  Inference out;
  out.memberships.assign(rules.size(), 0.0);
  if (hits.empty()) return out;
  const auto& vs = tri.simplices()[hits.front()].vertices;
  const Vec w = barycentric(simplex_points(tri, hits.front()), input);
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (tri.is_bounding_vertex(vs[i])) continue;
    out.memberships[vs[i] - tri.dimension() - 1] = static_cast<double>(std::clamp(w[i], 0.0L, 1.0L));
  }
  const std::size_t rows = rules.front().output_count();
  std::vector<long double> acc(rows, 0.0L);
  for (std::size_t k = 0; k < rules.size(); ++k) {
    for (std::size_t i = 0; i < rows; ++i) {
      long double y = rules[k].at(i, 0);
      for (std::size_t j = 0; j < input.size(); ++j) y += static_cast<long double>(rules[k].at(i, j + 1)) * input[j];
      acc[i] += y * out.memberships[k];
    }
  }
  out.outputs.assign(acc.begin(), acc.end());
  return out;
}

}  // namespace oracle
