#pragma once

// Finite phase-space point sets and the relation algebra used to push wave
// front sets through operator kernels:
//   A' o B = {(x, xi) : (x, y, xi, -eta) in A for some (y, eta) in B}.
// Points of A live in T*R^{2d} with coordinate order (x, y, xi, eta).

#include <algorithm>
#include <cmath>
#include <vector>

#include <nlohmann/json.hpp>

#include "gswf/aniso_geometry.hpp"
#include "gswf/errors.hpp"

namespace gswf {

struct PointSet {
  std::vector<PhasePoint> points;
  double tolerance = 1e-9;

  PointSet() = default;
  explicit PointSet(double tol) : tolerance(tol) {
    if (!(tol > 0.0)) throw DomainError("PointSet: tolerance must be positive");
  }

  void add(PhasePoint p) {
    if (!points.empty() && p.dim() != points.front().dim()) throw DomainError("PointSet: mixed dimensions");
    if (p.is_zero()) throw DomainError("PointSet: zero is not a phase-space direction");
    points.push_back(std::move(p));
  }
  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  // Sorts lexicographically by flat coordinates and drops exact duplicates.
  void canonicalize() {
    std::sort(points.begin(), points.end(), [](const PhasePoint& a, const PhasePoint& b) { return a.flat() < b.flat(); });
    points.erase(std::unique(points.begin(), points.end(),
                             [](const PhasePoint& a, const PhasePoint& b) { return a.flat() == b.flat(); }),
                 points.end());
  }

  bool contains(const PhasePoint& p) const {
    return std::any_of(points.begin(), points.end(), [&](const PhasePoint& q) { return detail::dist(p.flat(), q.flat()) <= tolerance; });
  }
};

namespace detail {

inline std::size_t half_dim(const PhasePoint& a) {
  if (a.dim() % 2 != 0) throw DomainError("relation: kernel points need an even position dimension");
  return a.dim() / 2;
}

// (x, xi) block and (y, -eta) block of a kernel point.
inline PhasePoint block13(const PhasePoint& a) {
  const std::size_t d = half_dim(a);
  return PhasePoint(std::vector<double>(a.x.begin(), a.x.begin() + d), std::vector<double>(a.xi.begin(), a.xi.begin() + d));
}
inline PhasePoint block2neg4(const PhasePoint& a) {
  const std::size_t d = half_dim(a);
  std::vector<double> eta(a.xi.begin() + d, a.xi.end());
  for (auto& v : eta) v = -v;
  return PhasePoint(std::vector<double>(a.x.begin() + d, a.x.end()), eta);
}

inline PointSet collect(const PointSet& A, std::vector<PhasePoint> pts) {
  PointSet out(A.tolerance);
  for (auto& p : pts) {
    if (!p.is_zero()) out.points.push_back(std::move(p));
  }
  out.canonicalize();
  return out;
}

}  // namespace detail

inline PointSet proj_13(const PointSet& A) {
  std::vector<PhasePoint> pts;
  for (const auto& a : A.points) pts.push_back(detail::block13(a));
  return detail::collect(A, std::move(pts));
}

inline PointSet proj_2neg4(const PointSet& A) {
  std::vector<PhasePoint> pts;
  for (const auto& a : A.points) pts.push_back(detail::block2neg4(a));
  return detail::collect(A, std::move(pts));
}

// A' o B with (y, eta) matched against B within A's tolerance. The result is
// canonical (sorted, duplicate free).
inline PointSet compose(const PointSet& A, const PointSet& B) {
  std::vector<PhasePoint> pts;
  for (const auto& a : A.points) {
    const std::size_t d = detail::half_dim(a);
    for (const auto& b : B.points) {
      if (b.dim() != d) throw DomainError("compose: B has the wrong dimension for A");
      double r2 = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double dy = a.x[d + i] - b.x[i];
        const double deta = a.xi[d + i] + b.xi[i];
        r2 += dy * dy + deta * deta;
      }
      if (std::sqrt(r2) <= A.tolerance) {
        pts.push_back(detail::block13(a));
        break;
      }
    }
  }
  return detail::collect(A, std::move(pts));
}

// Every scaled point projects (within tolerance) onto the projection of some member.
inline bool sconic_closure_check(const PointSet& S, const AnisoIndex& idx, const std::vector<double>& scales) {
  for (double mu : scales) {
    if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError("sconic_closure_check: scales must be positive");
  }
  std::vector<SphereDirection> dirs;
  dirs.reserve(S.size());
  for (const auto& p : S.points) dirs.push_back(project(idx, p));
  for (const auto& p : S.points) {
    for (double mu : scales) {
      const auto q = project(idx, scale_point(idx, p, mu));
      const bool ok = std::any_of(dirs.begin(), dirs.end(), [&](const SphereDirection& z) {
        double r2 = 0.0;
        for (std::size_t i = 0; i < z.z.size(); ++i) r2 += (z.z[i] - q.z[i]) * (z.z[i] - q.z[i]);
        return std::sqrt(r2) <= S.tolerance;
      });
      if (!ok) return false;
    }
  }
  return true;
}

inline nlohmann::json to_json(const PointSet& s) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& p : s.points) a.push_back(p.flat());
  return a;
}

// Reads [[...], ...]; each row is a flat phase point (x..., xi...).
inline PointSet point_set_from_json(const nlohmann::json& j, double tol) {
  if (!j.is_array()) throw ConfigError("point set: expected an array of coordinate arrays");
  PointSet s(tol);
  for (const auto& row : j) {
    if (!row.is_array() || row.empty() || row.size() % 2 != 0) throw ConfigError("point set: rows need an even, positive length");
    try {
      s.add(PhasePoint::from_flat(row.get<std::vector<double>>()));
    } catch (const DomainError& e) {
      throw ConfigError(std::string("point set: ") + e.what());
    }
  }
  return s;
}

}  // namespace gswf
