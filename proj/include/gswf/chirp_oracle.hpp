#pragma once

// Predicted wave front sets of chirps u = e^{i phi(x)} with polynomial phase,
// in the three index regimes: s = t(m-1) (graph of grad phi_m), s > t(m-1)
// (position axis), s < t(m-1) with elliptic phi_m (frequency axis).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gswf/aniso_geometry.hpp"
#include "gswf/errors.hpp"
#include "gswf/polynomial.hpp"
#include "gswf/wf_estimator.hpp"

namespace gswf {

// Exact index value, parsed from "p/q" or a decimal literal such as "1.2".
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational parse(const std::string& text) {
    auto fail = [&]() -> Rational { throw ConfigError("rational: cannot parse '" + text + "'"); };
    if (text.empty()) return fail();
    const auto slash = text.find('/');
    try {
      if (slash != std::string::npos) {
        std::size_t used = 0;
        const std::int64_t p = std::stoll(text.substr(0, slash), &used);
        if (used != slash) return fail();
        const std::string rest = text.substr(slash + 1);
        const std::int64_t q = std::stoll(rest, &used);
        if (used != rest.size() || q == 0) return fail();
        return make(p, q);
      }
      const auto dot = text.find('.');
      std::string digits = text;
      std::int64_t den = 1;
      if (dot != std::string::npos) {
        const std::string frac = text.substr(dot + 1);
        if (frac.size() > 15) return fail();
        digits = text.substr(0, dot) + frac;
        for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
      }
      std::size_t used = 0;
      const std::int64_t p = std::stoll(digits, &used);
      if (used != digits.size()) return fail();
      return make(p, den);
    } catch (const std::logic_error&) {
      return fail();
    }
  }

  static Rational make(std::int64_t p, std::int64_t q) {
    if (q == 0) throw DomainError("rational: zero denominator");
    if (q < 0) {
      p = -p;
      q = -q;
    }
    const std::int64_t g = std::gcd(p < 0 ? -p : p, q);
    return {p / (g == 0 ? 1 : g), q / (g == 0 ? 1 : g)};
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  // Sign of a*k - b for integer k, exactly.
  static int compare_scaled(const Rational& a, std::int64_t k, const Rational& b) {
    const __int128 lhs = static_cast<__int128>(a.num) * k * b.den;
    const __int128 rhs = static_cast<__int128>(b.num) * a.den;
    return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
  }
};

struct ExactIndex {
  Rational t;
  Rational s;
};

enum class ChirpRegime { GradientGraph, XAxis, XiAxis };

inline std::string regime_name(ChirpRegime r) {
  switch (r) {
    case ChirpRegime::GradientGraph: return "gradient-graph";
    case ChirpRegime::XAxis: return "x-axis";
    case ChirpRegime::XiAxis: return "xi-axis";
  }
  return "unknown";
}

namespace detail {

// Deterministic unit vectors in R^d: both signs for d = 1, a uniform circle
// for d = 2, seeded Gaussian draws otherwise.
inline std::vector<std::vector<double>> unit_vectors(int d, int count) {
  std::vector<std::vector<double>> out;
  if (d == 1) return {{1.0}, {-1.0}};
  if (d == 2) {
    for (int k = 0; k < count; ++k) {
      const double a = 2 * std::numbers::pi * k / count;
      out.push_back({std::cos(a), std::sin(a)});
    }
    return out;
  }
  std::mt19937_64 rng(12345);
  std::normal_distribution<double> g;
  for (int k = 0; k < count; ++k) {
    std::vector<double> v(d);
    double n = 0;
    for (auto& c : v) {
      c = g(rng);
      n += c * c;
    }
    for (auto& c : v) c /= std::sqrt(n);
    out.push_back(v);
  }
  return out;
}

}  // namespace detail

struct WFPrediction {
  ChirpRegime kind = ChirpRegime::GradientGraph;
  bool equality = false;
  // The index sits on the edge of the regime's hypothesis (t(m-1) = 1 in the
  // position-axis case); the prediction is extrapolated there.
  bool boundary = false;
  AnisoIndex idx;
  PolynomialData principal;
  int dim = 1;

  // Sample of unit directions in the predicted set.
  std::vector<SphereDirection> directions(int sweep = 400, int angular = 64) const {
    std::vector<SphereDirection> out;
    const auto units = detail::unit_vectors(dim, angular);
    auto push = [&](std::vector<double> z) { out.push_back(SphereDirection::normalized(std::move(z))); };
    if (kind == ChirpRegime::XAxis || kind == ChirpRegime::XiAxis) {
      for (const auto& u : units) {
        std::vector<double> z(2 * dim, 0.0);
        for (int i = 0; i < dim; ++i) z[(kind == ChirpRegime::XAxis ? 0 : dim) + i] = u[i];
        push(z);
      }
      return out;
    }
    const double lo = std::log(1e-2), hi = std::log(1e2);
    for (const auto& u : units) {
      for (int k = 0; k < sweep; ++k) {
        const double r = std::exp(lo + (hi - lo) * k / (sweep - 1));
        std::vector<double> x(dim);
        for (int i = 0; i < dim; ++i) x[i] = r * u[i];
        const auto g = principal.grad(x);
        const PhasePoint p(x, g);
        out.push_back(project(idx, p));
      }
    }
    return out;
  }

  // Directions with near-duplicates (angle < 1e-9) removed.
  std::vector<SphereDirection> distinct_directions() const {
    std::vector<SphereDirection> out;
    for (const auto& z : directions()) {
      const bool seen = std::any_of(out.begin(), out.end(), [&](const auto& o) { return angle_between(o, z) < 1e-9; });
      if (!seen) out.push_back(z);
    }
    return out;
  }
};

inline bool is_elliptic(const PolynomialData& principal, int sphere_samples = 720) {
  if (!principal.is_homogeneous()) throw DomainError("is_elliptic: phase must be homogeneous");
  const int d = principal.dim();
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& u : detail::unit_vectors(d, std::max(sphere_samples, 8))) lo = std::min(lo, std::abs(principal.eval(u)));
  return lo > 1e-9;
}

namespace detail {

// Sign of s - t(m-1): exact when rationals are given, else with 1e-12 slack.
inline int regime_sign(const AnisoIndex& idx, int m, const std::optional<ExactIndex>& exact) {
  if (exact) return -Rational::compare_scaled(exact->t, m - 1, exact->s);
  const double diff = idx.s - idx.t * (m - 1);
  if (std::abs(diff) <= 1e-12) return 0;
  return diff > 0 ? 1 : -1;
}

// Sign of t(m-1) - 1, and of s - 1.
inline int sign_vs_one(const std::optional<Rational>& r, double v, std::int64_t k) {
  if (r) return Rational::compare_scaled(*r, k, Rational{1, 1});
  const double diff = v * k - 1.0;
  if (std::abs(diff) <= 1e-12) return 0;
  return diff > 0 ? 1 : -1;
}

}  // namespace detail

inline WFPrediction predict_chirp_wf(const PolynomialData& phase, const AnisoIndex& idx,
                                     const std::optional<ExactIndex>& exact = std::nullopt) {
  const int m = phase.degree();
  if (m < 2) throw DomainError("predict_chirp_wf: phase degree must be at least 2");
  if (exact && (std::abs(exact->t.value() - idx.t) > 1e-12 || std::abs(exact->s.value() - idx.s) > 1e-12)) {
    throw DomainError("predict_chirp_wf: exact index disagrees with the numeric index");
  }
  WFPrediction p;
  p.idx = idx;
  p.dim = phase.dim();
  p.principal = phase.principal_part();
  const bool parity = phase.is_even() || phase.is_odd();
  const int sign = detail::regime_sign(idx, m, exact);
  const int tm1 = detail::sign_vs_one(exact ? std::optional<Rational>(exact->t) : std::nullopt, idx.t, m - 1);
  if (sign == 0) {
    if (tm1 <= 0) throw UnsupportedRegime("predict_chirp_wf: graph regime needs t > 1/(m-1)");
    p.kind = ChirpRegime::GradientGraph;
    p.equality = p.dim == 1 && parity;
  } else if (sign > 0) {
    if (tm1 < 0) throw UnsupportedRegime("predict_chirp_wf: position-axis regime needs t(m-1) >= 1");
    p.kind = ChirpRegime::XAxis;
    p.boundary = tm1 == 0;
    p.equality = p.dim == 1 && parity;
  } else {
    const int s1 = detail::sign_vs_one(exact ? std::optional<Rational>(exact->s) : std::nullopt, idx.s, 1);
    if (s1 <= 0) throw UnsupportedRegime("predict_chirp_wf: frequency-axis regime needs s > 1");
    if (!is_elliptic(p.principal)) throw PreconditionError("predict_chirp_wf: frequency-axis regime needs elliptic phi_m");
    p.kind = ChirpRegime::XiAxis;
    p.equality = p.dim == 1 && phase.is_even();
  }
  return p;
}

struct WFComparison {
  std::vector<SphereDirection> violations;
  std::vector<SphereDirection> misses;
  double max_angle_error = 0.0;
  int predicted = 0;
  int reachable = 0;
  int matched = 0;
  bool equality_checked = false;
  bool pass = true;

  double coverage() const { return reachable == 0 ? 1.0 : static_cast<double>(matched) / reachable; }
};

// Violations: singular directions farther than tol from the predicted set.
// Misses (only when the prediction is an equality): predicted directions with
// no singular direction within tol, counted over those the estimate could
// resolve (some resolved entry within tol).
inline WFComparison compare_wf(const WFEstimate& est, const WFPrediction& pred, double tol_angle) {
  if (std::abs(est.idx.t - pred.idx.t) > 1e-12 || std::abs(est.idx.s - pred.idx.s) > 1e-12) {
    throw DomainError("compare_wf: estimate and prediction use different indices");
  }
  WFComparison r;
  const auto dense = pred.directions();
  const auto distinct = pred.distinct_directions();
  r.predicted = static_cast<int>(distinct.size());
  const auto sing = est.singular_directions();
  for (const auto& z : sing) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : dense) best = std::min(best, angle_between(z, q));
    r.max_angle_error = std::max(r.max_angle_error, best);
    if (best > tol_angle) r.violations.push_back(z);
  }
  for (const auto& q : distinct) {
    const bool visible = est.entries.empty() || std::any_of(est.entries.begin(), est.entries.end(), [&](const WFEntry& e) {
                           return e.resolved && angle_between(e.dir, q) <= tol_angle;
                         });
    if (!visible) continue;
    ++r.reachable;
    const bool hit = std::any_of(sing.begin(), sing.end(), [&](const auto& z) { return angle_between(z, q) <= tol_angle; });
    if (hit) {
      ++r.matched;
    } else {
      r.misses.push_back(q);
    }
  }
  r.equality_checked = pred.equality;
  r.pass = r.violations.empty() && (!pred.equality || r.misses.empty());
  return r;
}

inline nlohmann::json to_json(const WFPrediction& p) {
  nlohmann::json dirs = nlohmann::json::array();
  for (const auto& z : p.distinct_directions()) dirs.push_back(z.z);
  return {{"regime", regime_name(p.kind)}, {"equality", p.equality}, {"boundary", p.boundary}, {"directions", dirs}};
}

inline nlohmann::json to_json(const WFComparison& c) {
  auto list = [](const std::vector<SphereDirection>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& z : v) a.push_back(z.z);
    return a;
  };
  return {{"violations", list(c.violations)},
          {"misses", list(c.misses)},
          {"max_angle_error", c.max_angle_error},
          {"predicted", c.predicted},
          {"reachable", c.reachable},
          {"matched", c.matched},
          {"coverage", c.coverage()},
          {"equality_checked", c.equality_checked},
          {"pass", c.pass}};
}

}  // namespace gswf
