#pragma once

// Real polynomials in d variables stored as multi-index -> coefficient terms.
// Used both as chirp phases phi(x) and as evolution symbols p(xi).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gswf/errors.hpp"

namespace gswf {

using MultiIndex = std::vector<int>;

inline int order(const MultiIndex& a) { return std::accumulate(a.begin(), a.end(), 0); }

class PolynomialData {
 public:
  PolynomialData() = default;
  explicit PolynomialData(int dim) : dim_(dim) {
    if (dim < 1) throw DomainError("PolynomialData: dim must be positive");
  }

  // Adds c * x^alpha, merging with an existing term of the same multi-index.
  PolynomialData& add(const MultiIndex& alpha, double c) {
    if (static_cast<int>(alpha.size()) != dim_) throw DomainError("PolynomialData: multi-index dimension mismatch");
    if (std::any_of(alpha.begin(), alpha.end(), [](int a) { return a < 0; })) {
      throw DomainError("PolynomialData: negative exponent");
    }
    if (!std::isfinite(c)) throw DomainError("PolynomialData: non-finite coefficient");
    terms_[alpha] += c;
    return *this;
  }

  // Convenience for one variable: sum_k coeffs[k] x^k.
  static PolynomialData univariate(std::span<const double> coeffs) {
    PolynomialData p(1);
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      if (coeffs[k] != 0.0) p.add({static_cast<int>(k)}, coeffs[k]);
    }
    return p;
  }
  static PolynomialData monomial(int dim, const MultiIndex& alpha, double c = 1.0) {
    PolynomialData p(dim);
    p.add(alpha, c);
    return p;
  }

  int dim() const { return dim_; }
  const std::map<MultiIndex, double>& terms() const { return terms_; }

  // Largest |alpha| with a nonzero coefficient; 0 for the zero polynomial.
  int degree() const {
    int m = 0;
    for (const auto& [a, c] : terms_) {
      if (c != 0.0) m = std::max(m, order(a));
    }
    return m;
  }

  double eval(std::span<const double> x) const {
    check_dim(x.size());
    double acc = 0.0;
    for (const auto& [a, c] : terms_) {
      double term = c;
      for (int i = 0; i < dim_; ++i) term *= ipow(x[i], a[i]);
      acc += term;
    }
    return acc;
  }

  // Extended-precision evaluation for large phases where rounding noise in
  // double would show up in STFT magnitudes.
  long double eval_long(std::span<const double> x) const {
    check_dim(x.size());
    long double acc = 0.0L;
    for (const auto& [a, c] : terms_) {
      long double term = c;
      for (int i = 0; i < dim_; ++i) {
        for (int k = 0; k < a[i]; ++k) term *= static_cast<long double>(x[i]);
      }
      acc += term;
    }
    return acc;
  }

  std::vector<double> grad(std::span<const double> x) const {
    check_dim(x.size());
    std::vector<double> g(dim_, 0.0);
    for (const auto& [a, c] : terms_) {
      for (int j = 0; j < dim_; ++j) {
        if (a[j] == 0) continue;
        double term = c * a[j];
        for (int i = 0; i < dim_; ++i) term *= ipow(x[i], i == j ? a[i] - 1 : a[i]);
        g[j] += term;
      }
    }
    return g;
  }

  // Terms of top order only.
  PolynomialData principal_part() const {
    PolynomialData out(dim_);
    const int m = degree();
    for (const auto& [a, c] : terms_) {
      if (c != 0.0 && order(a) == m) out.terms_[a] = c;
    }
    return out;
  }

  bool is_homogeneous() const {
    const int m = degree();
    return std::all_of(terms_.begin(), terms_.end(),
                       [m](const auto& kv) { return kv.second == 0.0 || order(kv.first) == m; });
  }

  // p(-x) = p(x), checked term by term.
  bool is_even() const {
    return std::all_of(terms_.begin(), terms_.end(),
                       [](const auto& kv) { return kv.second == 0.0 || order(kv.first) % 2 == 0; });
  }
  // p(-x) = -p(x)
  bool is_odd() const {
    return std::all_of(terms_.begin(), terms_.end(),
                       [](const auto& kv) { return kv.second == 0.0 || order(kv.first) % 2 == 1; });
  }

  // sup of |grad p| over the box |x_i - c_i| <= r, estimated on a dense grid
  // per axis plus the corners. Exact for d = 1 polynomials of degree <= 2.
  double max_grad_norm(std::span<const double> center, double r, int per_axis = 65) const {
    check_dim(center.size());
    std::vector<int> counter(dim_, 0);
    std::vector<double> x(dim_);
    double best = 0.0;
    while (true) {
      for (int i = 0; i < dim_; ++i) x[i] = center[i] - r + 2.0 * r * counter[i] / (per_axis - 1);
      const auto g = grad(x);
      double n2 = 0.0;
      for (double v : g) n2 += v * v;
      best = std::max(best, std::sqrt(n2));
      int k = 0;
      while (k < dim_ && ++counter[k] == per_axis) counter[k++] = 0;
      if (k == dim_) break;
    }
    return best;
  }

  // q(z) = p(center + z), expanded binomially per axis.
  PolynomialData shifted(std::span<const double> center) const {
    check_dim(center.size());
    PolynomialData out(dim_);
    for (const auto& [a, c] : terms_) {
      if (c == 0.0) continue;
      MultiIndex k(dim_, 0);
      while (true) {
        double coef = c;
        for (int i = 0; i < dim_; ++i) coef *= binom(a[i], k[i]) * ipow(center[i], a[i] - k[i]);
        if (coef != 0.0) out.terms_[k] += coef;
        int i = 0;
        while (i < dim_ && ++k[i] > a[i]) k[i++] = 0;
        if (i == dim_) break;
      }
    }
    return out;
  }

  double coefficient(const MultiIndex& alpha) const {
    auto it = terms_.find(alpha);
    return it == terms_.end() ? 0.0 : it->second;
  }

  nlohmann::json to_json() const {
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& [a, c] : terms_) coeffs.push_back({{"alpha", a}, {"c", c}});
    return {{"dim", dim_}, {"coeffs", coeffs}};
  }

  static PolynomialData from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("dim") || !j.contains("coeffs")) {
      throw ConfigError("polynomial: expected {\"dim\", \"coeffs\"}");
    }
    PolynomialData p(j.at("dim").get<int>());
    for (const auto& term : j.at("coeffs")) {
      if (!term.contains("alpha") || !term.contains("c")) throw ConfigError("polynomial: term needs alpha and c");
      p.add(term.at("alpha").get<MultiIndex>(), term.at("c").get<double>());
    }
    return p;
  }

 private:
  static double ipow(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
  }
  static double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  }
  void check_dim(std::size_t n) const {
    if (static_cast<int>(n) != dim_) throw DomainError("PolynomialData: argument dimension mismatch");
  }

  int dim_ = 1;
  std::map<MultiIndex, double> terms_;
};

}  // namespace gswf
