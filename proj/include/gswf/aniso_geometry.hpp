#pragma once

// Anisotropic phase-space geometry.
//
// A phase-space point (x, xi) in R^{2d} is scaled along the curve
// mu -> (mu^t x, mu^s xi). The anisotropic radius lambda(x, xi) is the unique
// positive root of  lambda^{-2t}|x|^2 + lambda^{-2s}|xi|^2 = 1,  and the
// projection onto the unit sphere follows the curve back to lambda = 1.
// Both only depend on sigma = s/t once the radius is rescaled, so the sphere
// projection and both neighborhood families are parametrized by sigma.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "gswf/errors.hpp"

namespace gswf {

// Decay index t and regularity index s.
struct AnisoIndex {
  double t = 1.0;
  double s = 1.0;

  AnisoIndex() = default;
  AnisoIndex(double t_, double s_) : t(t_), s(s_) {
    if (!(t > 0.0) || !(s > 0.0) || !(t + s > 1.0)) {
      throw DomainError("AnisoIndex requires t > 0, s > 0 and t + s > 1");
    }
  }

  double sigma() const { return s / t; }

  // The Gaussian window lies in the test space only when both indices exceed 1/2.
  bool window_admissible() const { return t > 0.5 && s > 0.5; }

  friend bool operator==(const AnisoIndex&, const AnisoIndex&) = default;
};

struct PhasePoint {
  std::vector<double> x;
  std::vector<double> xi;

  PhasePoint() = default;
  PhasePoint(std::vector<double> x_, std::vector<double> xi_) : x(std::move(x_)), xi(std::move(xi_)) {
    if (x.size() != xi.size()) throw DomainError("PhasePoint: x and xi dimensions differ");
  }
  PhasePoint(double x1, double xi1) : x{x1}, xi{xi1} {}

  std::size_t dim() const { return x.size(); }

  // Concatenated (x, xi) coordinates.
  std::vector<double> flat() const {
    std::vector<double> z(x);
    z.insert(z.end(), xi.begin(), xi.end());
    return z;
  }

  static PhasePoint from_flat(std::span<const double> z) {
    if (z.size() % 2 != 0) throw DomainError("PhasePoint::from_flat: odd length");
    const std::size_t d = z.size() / 2;
    return PhasePoint(std::vector<double>(z.begin(), z.begin() + d),
                      std::vector<double>(z.begin() + d, z.end()));
  }

  bool is_zero() const {
    return std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; }) &&
           std::all_of(xi.begin(), xi.end(), [](double v) { return v == 0.0; });
  }
};

namespace detail {

inline double norm(std::span<const double> v) {
  double acc = 0.0;
  for (double a : v) acc += a * a;
  return std::sqrt(acc);
}

inline double dist(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc);
}

// lambda^{-2t} nx^2 + lambda^{-2s} nxi^2
inline double lambda_equation(double lam, double nx, double nxi, double t, double s) {
  return std::pow(lam, -2.0 * t) * nx * nx + std::pow(lam, -2.0 * s) * nxi * nxi;
}

}  // namespace detail

// Unit vector in R^{2d}, stored as the concatenated (x, xi) block.
struct SphereDirection {
  std::vector<double> z;

  SphereDirection() = default;
  explicit SphereDirection(std::vector<double> z_) : z(std::move(z_)) {
    if (z.empty() || z.size() % 2 != 0) throw DomainError("SphereDirection: need even positive length");
    if (std::abs(detail::norm(z) - 1.0) > 1e-12) throw DomainError("SphereDirection: not a unit vector");
  }

  // Normalizes z instead of requiring |z| = 1.
  static SphereDirection normalized(std::vector<double> z) {
    const double n = detail::norm(z);
    if (n == 0.0) throw DomainError("SphereDirection::normalized: zero vector");
    for (double& v : z) v /= n;
    SphereDirection out;
    out.z = std::move(z);
    return out;
  }

  // Direction at angle theta on the circle of a one-dimensional phase space.
  static SphereDirection from_angle(double theta) {
    SphereDirection out;
    out.z = {std::cos(theta), std::sin(theta)};
    return out;
  }

  std::size_t dim() const { return z.size() / 2; }
  PhasePoint point() const { return PhasePoint::from_flat(z); }
  double angle() const { return std::atan2(z[1], z[0]); }
};

// Angle between two unit vectors, in radians.
inline double angle_between(const SphereDirection& a, const SphereDirection& b) {
  double dot = 0.0;
  for (std::size_t i = 0; i < a.z.size(); ++i) dot += a.z[i] * b.z[i];
  return std::acos(std::clamp(dot, -1.0, 1.0));
}

// Anisotropic radius lambda_{t,s}(p). Bracketed bisection on log(lambda)
// followed by one Newton step; the defining map is strictly decreasing.
inline double lambda_solve(const AnisoIndex& idx, const PhasePoint& p) {
  if (p.is_zero()) throw DomainError("lambda_solve: zero phase-space point");
  const double nx = detail::norm(p.x);
  const double nxi = detail::norm(p.xi);
  const double t = idx.t, s = idx.s;
  if (nxi == 0.0) return std::pow(nx, 1.0 / t);
  if (nx == 0.0) return std::pow(nxi, 1.0 / s);

  const double a = std::pow(nx, 1.0 / t);
  const double b = std::pow(nxi, 1.0 / s);
  // F(max(a,b)) >= 1 and F(max(a,b) * 2^{1/(2 min(t,s))}) <= 1.
  double lo = std::log(std::max(a, b));
  double hi = lo + std::log(2.0) / (2.0 * std::min(t, s));
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (detail::lambda_equation(std::exp(mid), nx, nxi, t, s) > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double lam = std::exp(0.5 * (lo + hi));
  const double f = detail::lambda_equation(lam, nx, nxi, t, s) - 1.0;
  const double df = -2.0 * t * std::pow(lam, -2.0 * t - 1.0) * nx * nx -
                    2.0 * s * std::pow(lam, -2.0 * s - 1.0) * nxi * nxi;
  const double polished = lam - f / df;
  if (polished > 0.0 && std::abs(detail::lambda_equation(polished, nx, nxi, t, s) - 1.0) <= std::abs(f)) {
    lam = polished;
  }
  return lam;
}

// Same root from the norms |x|, |xi| directly. Newton on L = log(lambda)
// started at max(log a, log b) where F >= 1; F is convex and decreasing in L so
// the iterates increase monotonically to the root. Used in bulk lattice sweeps.
inline double lambda_from_norms(double nx, double nxi, double t, double s) {
  if (nxi == 0.0) return std::pow(nx, 1.0 / t);
  if (nx == 0.0) return std::pow(nxi, 1.0 / s);
  const double la = std::log(nx) / t;
  const double lb = std::log(nxi) / s;
  double L = std::max(la, lb);
  for (int it = 0; it < 60; ++it) {
    const double e1 = std::exp(2.0 * t * (la - L));
    const double e2 = std::exp(2.0 * s * (lb - L));
    const double f = e1 + e2 - 1.0;
    if (f <= 0.0) break;
    const double df = -2.0 * t * e1 - 2.0 * s * e2;
    const double step = -f / df;
    L += step;
    if (step < 1e-15 * std::max(1.0, std::abs(L))) break;
  }
  return std::exp(L);
}

// (mu^t x, mu^s xi)
inline PhasePoint scale_point(const AnisoIndex& idx, const PhasePoint& p, double mu) {
  if (!(mu > 0.0)) throw DomainError("scale_point: mu must be positive");
  PhasePoint out = p;
  const double ft = std::pow(mu, idx.t);
  const double fs = std::pow(mu, idx.s);
  for (double& v : out.x) v *= ft;
  for (double& v : out.xi) v *= fs;
  return out;
}

// Projection onto the unit sphere along the curve through p. Depends only on s/t.
inline SphereDirection project(const AnisoIndex& idx, const PhasePoint& p) {
  const double lam = lambda_solve(idx, p);
  SphereDirection out;
  out.z.reserve(2 * p.dim());
  for (double v : p.x) out.z.push_back(v * std::pow(lam, -idx.t));
  for (double v : p.xi) out.z.push_back(v * std::pow(lam, -idx.s));
  // Renormalize away the last ulp of bisection error.
  const double n = detail::norm(out.z);
  for (double& v : out.z) v /= n;
  return out;
}

// Projection in the normalized convention t = 1, s = sigma.
inline SphereDirection project_sigma(double sigma, const PhasePoint& p) {
  if (!(sigma > 0.0)) throw DomainError("project_sigma: sigma must be positive");
  AnisoIndex idx;
  idx.t = 1.0;
  idx.s = sigma;
  return project(idx, p);
}

// Membership in Gamma_{sigma, z0, eps}: |z0 - p_{1,sigma}(p)| < eps.
inline bool in_gamma_nbhd(double sigma, const SphereDirection& z0, double eps, const PhasePoint& p) {
  if (p.is_zero()) throw DomainError("in_gamma_nbhd: zero phase-space point");
  const SphereDirection q = project_sigma(sigma, p);
  return detail::dist(z0.z, q.z) < eps;
}

// Smallest distance between (mu y, mu^sigma eta) and z0 over mu > 0, with the
// minimizing mu. A log-spaced scan picks the basin, golden-section refines it.
inline std::pair<double, double> gamma_tilde_distance(double sigma, const SphereDirection& z0,
                                                      const PhasePoint& p) {
  if (p.is_zero()) throw DomainError("gamma_tilde_distance: zero phase-space point");
  const std::vector<double> target = z0.z;
  auto distance = [&](double logmu) {
    const double mu = std::exp(logmu);
    const double fs = std::pow(mu, sigma);
    double acc = 0.0;
    const std::size_t d = p.dim();
    for (std::size_t i = 0; i < d; ++i) {
      const double a = mu * p.x[i] - target[i];
      const double b = fs * p.xi[i] - target[d + i];
      acc += a * a + b * b;
    }
    return std::sqrt(acc);
  };
  const double lo = std::log(1e-4), hi = std::log(1e4);
  constexpr int kScan = 200;
  int best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kScan; ++i) {
    const double v = distance(lo + (hi - lo) * i / kScan);
    if (v < best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = lo + (hi - lo) * std::max(best - 1, 0) / kScan;
  double b = lo + (hi - lo) * std::min(best + 1, kScan) / kScan;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a), e = a + gr * (b - a);
  double fc = distance(c), fe = distance(e);
  for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
    if (fc < fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - gr * (b - a);
      fc = distance(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + gr * (b - a);
      fe = distance(e);
    }
  }
  const double xm = 0.5 * (a + b);
  const double fm = distance(xm);
  if (fm <= best_val) return {fm, std::exp(xm)};
  return {best_val, std::exp(lo + (hi - lo) * best / kScan)};
}

// Membership in the second neighborhood type: some mu > 0 rescales p into the
// open eps-ball around z0.
inline bool in_gamma_tilde_nbhd(double sigma, const SphereDirection& z0, double eps, const PhasePoint& p) {
  return gamma_tilde_distance(sigma, z0, p).first < eps;
}

// inf over w in G of |p_{1,sigma}(p) - w|.
inline double dist_to_conic_set(double sigma, std::span<const SphereDirection> G, const PhasePoint& p) {
  if (G.empty()) throw DomainError("dist_to_conic_set: empty direction set");
  if (p.is_zero()) throw DomainError("dist_to_conic_set: zero phase-space point");
  const SphereDirection q = project_sigma(sigma, p);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& w : G) best = std::min(best, detail::dist(q.z, w.z));
  return best;
}

// Constants c1, c2 with c1 (|x|^{1/t} + |xi|^{1/s}) <= lambda <= c2 (|x|^{1/t} + |xi|^{1/s}).
// lambda lies in [m, m 2^{1/(2 min(t,s))}] with m = max(|x|^{1/t}, |xi|^{1/s}).
inline std::pair<double, double> growth_bound_constants(const AnisoIndex& idx) {
  return {0.5, std::pow(2.0, 1.0 / (2.0 * std::min(idx.t, idx.s)))};
}

}  // namespace gswf
