#pragma once

// Test signals on centered uniform grids, closed-form distributional signals,
// tensor products and the unitary Fourier transform with the (2 pi)^{-d/2}
// normalization.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gswf/errors.hpp"
#include "gswf/fft.hpp"
#include "gswf/polynomial.hpp"

namespace gswf {

using cplx = std::complex<double>;

// Samples of a function of d variables at x_j = (j - n/2) dx per axis,
// stored row-major with the last axis fastest.
struct SampledSignal {
  int dim = 1;
  int n = 0;
  double dx = 0.0;
  std::vector<cplx> values;

  SampledSignal() = default;
  SampledSignal(int dim_, int n_, double dx_) : dim(dim_), n(n_), dx(dx_) {
    validate_shape();
    values.assign(total(), cplx(0.0, 0.0));
  }
  SampledSignal(int dim_, int n_, double dx_, std::vector<cplx> v) : dim(dim_), n(n_), dx(dx_), values(std::move(v)) {
    validate_shape();
    if (values.size() != total()) throw DomainError("SampledSignal: value count must be n^dim");
    for (const auto& z : values) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw DomainError("SampledSignal: non-finite value");
    }
  }

  std::size_t total() const {
    std::size_t t = 1;
    for (int i = 0; i < dim; ++i) t *= static_cast<std::size_t>(n);
    return t;
  }
  double coord(int j) const { return (j - n / 2) * dx; }
  double half_extent() const { return 0.5 * n * dx; }
  // Grid spacing of the Fourier transform.
  double dxi() const { return 2.0 * std::numbers::pi / (n * dx); }
  double xi_max() const { return std::numbers::pi / dx; }

  // Per-axis indices of a flat index.
  std::vector<int> unravel(std::size_t flat) const {
    std::vector<int> idx(dim);
    for (int a = dim - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(flat % n);
      flat /= n;
    }
    return idx;
  }
  std::vector<double> point(std::size_t flat) const {
    std::vector<double> x(dim);
    for (int a = dim - 1; a >= 0; --a) {
      x[a] = coord(static_cast<int>(flat % n));
      flat /= n;
    }
    return x;
  }

  double l2_norm() const {
    double acc = 0.0;
    for (const auto& z : values) acc += std::norm(z);
    return std::sqrt(acc * std::pow(dx, dim));
  }

 private:
  void validate_shape() const {
    if (dim < 1) throw DomainError("SampledSignal: dim must be positive");
    if (n < 16 || !fft::is_power_of_two(static_cast<std::size_t>(n))) {
      throw DomainError("SampledSignal: n must be a power of two >= 16");
    }
    if (!(dx > 0.0) || !std::isfinite(dx)) throw DomainError("SampledSignal: dx must be positive");
  }
};

// K(x_i, y_j) = k((i - j) dx) on the n x n grid of spacing dx, stored through
// k alone: k1d has 2n samples with k1d.values[m] = k((m - n) dx).
struct ConvolutionKernel {
  int dim = 2;
  int n = 0;
  double dx = 0.0;
  SampledSignal k1d;

  ConvolutionKernel() = default;
  explicit ConvolutionKernel(SampledSignal k) : n(k.n / 2), dx(k.dx), k1d(std::move(k)) {
    if (k1d.dim != 1 || n < 16) throw DomainError("ConvolutionKernel: k must be one-dimensional with at least 32 samples");
  }

  cplx value(int i, int j) const { return k1d.values[i - j + n]; }
  double coord(int j) const { return (j - n / 2) * dx; }
  double half_extent() const { return 0.5 * n * dx; }
  double xi_max() const { return std::numbers::pi / dx; }

  SampledSignal materialize() const {
    if (static_cast<std::size_t>(n) * n > (std::size_t{1} << 26)) {
      throw RangeError("ConvolutionKernel: grid too large to materialize");
    }
    SampledSignal out(2, n, dx);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) out.values[static_cast<std::size_t>(i) * n + j] = value(i, j);
    }
    return out;
  }
};

// Signals handled in closed form rather than sampled.
enum class AnalyticKind { DiracDelta, ConstantOne, Gaussian, PolyChirp, Tensor };

struct AnalyticSignal {
  AnalyticKind kind = AnalyticKind::Gaussian;
  int dim = 1;
  double width = 1.0;
  PolynomialData phase;
  std::vector<AnalyticSignal> factors;  // Tensor: u(x_1..x_k) v(x_k+1..x_d)

  static AnalyticSignal dirac_delta(int dim = 1) { return {AnalyticKind::DiracDelta, check_dim(dim), 1.0, {}, {}}; }
  static AnalyticSignal constant_one(int dim = 1) { return {AnalyticKind::ConstantOne, check_dim(dim), 1.0, {}, {}}; }
  static AnalyticSignal gaussian(double width, int dim = 1) {
    if (!(width > 0.0)) throw DomainError("AnalyticSignal: gaussian width must be positive");
    return {AnalyticKind::Gaussian, check_dim(dim), width, {}, {}};
  }
  static AnalyticSignal chirp(const PolynomialData& phase) {
    for (const auto& [a, c] : phase.terms()) {
      if (!std::isfinite(c)) throw DomainError("AnalyticSignal: chirp phase must have finite real coefficients");
    }
    return {AnalyticKind::PolyChirp, phase.dim(), 1.0, phase, {}};
  }

  static AnalyticSignal tensor(const AnalyticSignal& u, const AnalyticSignal& v) {
    AnalyticSignal t{AnalyticKind::Tensor, u.dim + v.dim, 1.0, {}, {u, v}};
    return t;
  }

  // Pointwise value; only meaningful for function-valued kinds.
  cplx value(std::span<const double> x) const {
    switch (kind) {
      case AnalyticKind::ConstantOne:
        return {1.0, 0.0};
      case AnalyticKind::Gaussian: {
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        return std::pow(std::numbers::pi, -0.25 * dim) * std::pow(width, -0.5 * dim) * std::exp(-r2 / (2 * width * width));
      }
      case AnalyticKind::PolyChirp:
        return std::polar(1.0, phase.eval(x));
      case AnalyticKind::Tensor: {
        const int k = factors[0].dim;
        return factors[0].value(x.subspan(0, k)) * factors[1].value(x.subspan(k));
      }
      case AnalyticKind::DiracDelta:
        break;
    }
    throw DomainError("AnalyticSignal: the delta has no pointwise values");
  }

  std::string name() const {
    switch (kind) {
      case AnalyticKind::DiracDelta: return "dirac-delta";
      case AnalyticKind::ConstantOne: return "constant-one";
      case AnalyticKind::Gaussian: return "gaussian";
      case AnalyticKind::PolyChirp: return "poly-chirp";
      case AnalyticKind::Tensor: return factors[0].name() + "*" + factors[1].name();
    }
    return "unknown";
  }

 private:
  static int check_dim(int d) {
    if (d < 1) throw DomainError("AnalyticSignal: dim must be positive");
    return d;
  }
};

namespace detail {

// Visits every grid point of an n^d lattice with its coordinates.
template <class F>
void for_each_point(int dim, int n, double dx, F&& f) {
  std::vector<int> idx(dim, 0);
  std::vector<double> x(dim, -(n / 2) * dx);
  std::size_t flat = 0;
  while (true) {
    f(flat, std::span<const double>(x));
    ++flat;
    int a = dim - 1;
    while (a >= 0) {
      if (++idx[a] < n) {
        x[a] = (idx[a] - n / 2) * dx;
        break;
      }
      idx[a] = 0;
      x[a] = -(n / 2) * dx;
      --a;
    }
    if (a < 0) break;
  }
}

inline void check_phase_resolution(const PolynomialData& phase, int n, double dx,
                                   const std::function<bool(std::span<const double>)>& active) {
  const double limit = 0.9 * std::numbers::pi;
  double worst = 0.0;
  for_each_point(phase.dim(), n, dx, [&](std::size_t, std::span<const double> x) {
    if (active && !active(x)) return;
    const auto g = phase.grad(x);
    double gn = 0.0;
    for (double v : g) gn += v * v;
    worst = std::max(worst, std::sqrt(gn) * dx);
  });
  if (worst > limit) {
    std::ostringstream os;
    os << "chirp phase not resolved: max |grad phi| dx = " << worst << " exceeds 0.9 pi; use dx <= "
       << dx * limit / worst;
    throw AliasingError(os.str());
  }
}

}  // namespace detail

// pi^{-d/4} w^{-d/2} exp(-|x|^2 / (2 w^2)); refuses grids that cut off more
// than 1e-10 of the mass.
inline SampledSignal make_gaussian(int d, int n, double dx, double width) {
  if (!(width > 0.0)) throw DomainError("make_gaussian: width must be positive");
  SampledSignal s(d, n, dx);
  // Mass outside the cube, bounded by d times the 1-d tail.
  const double tail = d * std::erfc(s.half_extent() / width);
  if (tail > 1e-10) {
    std::ostringstream os;
    os << "make_gaussian: grid half-extent " << s.half_extent() << " truncates " << tail << " of the mass";
    throw ResolutionError(os.str());
  }
  const double amp = std::pow(std::numbers::pi, -0.25 * d) * std::pow(width, -0.5 * d);
  detail::for_each_point(d, n, dx, [&](std::size_t k, std::span<const double> x) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    s.values[k] = amp * std::exp(-r2 / (2 * width * width));
  });
  return s;
}

// exp(i phi(x)) on the grid.
inline SampledSignal make_chirp(const PolynomialData& phase, int n, double dx) {
  SampledSignal s(phase.dim(), n, dx);
  detail::check_phase_resolution(phase, n, dx, {});
  detail::for_each_point(s.dim, n, dx, [&](std::size_t k, std::span<const double> x) {
    s.values[k] = std::polar(1.0, phase.eval(x));
  });
  return s;
}

// exp(i phi(x)) exp(-|x|^2 / (2 env^2)). The resolution guard only looks at
// points where the envelope exceeds 1e-10.
inline SampledSignal make_windowed_chirp(const PolynomialData& phase, int n, double dx, double envelope_width) {
  if (!(envelope_width > 0.0)) throw DomainError("make_windowed_chirp: envelope width must be positive");
  SampledSignal s(phase.dim(), n, dx);
  const double r_active = envelope_width * std::sqrt(2.0 * std::log(1e10));
  detail::check_phase_resolution(phase, n, dx, [&](std::span<const double> x) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return r2 <= r_active * r_active;
  });
  detail::for_each_point(s.dim, n, dx, [&](std::size_t k, std::span<const double> x) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    s.values[k] = std::polar(std::exp(-r2 / (2 * envelope_width * envelope_width)), phase.eval(x));
  });
  return s;
}

SampledSignal tensor(const SampledSignal& u, const SampledSignal& v);

// Samples an analytic function-valued signal on a grid.
inline SampledSignal sample(const AnalyticSignal& a, int n, double dx) {
  if (a.kind == AnalyticKind::DiracDelta) throw DomainError("sample: the delta cannot be sampled");
  if (a.kind == AnalyticKind::Gaussian) return make_gaussian(a.dim, n, dx, a.width);
  if (a.kind == AnalyticKind::PolyChirp) return make_chirp(a.phase, n, dx);
  if (a.kind == AnalyticKind::Tensor) return tensor(sample(a.factors[0], n, dx), sample(a.factors[1], n, dx));
  SampledSignal s(a.dim, n, dx);
  std::fill(s.values.begin(), s.values.end(), cplx(1.0, 0.0));
  return s;
}

// Unitary Fourier transform on the centered grid. The output lives on the
// frequency grid xi_k = (k - n/2) dxi, returned as a signal with dx = dxi.
inline SampledSignal fourier(const SampledSignal& sig, bool inverse = false) {
  SampledSignal out = sig;
  out.dx = sig.dxi();
  const int n = sig.n;
  // (-1)^{sum j} before and (-1)^{sum k} after re-centers both grids; n/2 is
  // even for n >= 16 so no global phase is left over.
  auto checker = [&](std::vector<cplx>& v) {
    for (std::size_t k = 0; k < v.size(); ++k) {
      std::size_t f = k;
      int parity = 0;
      for (int a = 0; a < sig.dim; ++a) {
        parity += static_cast<int>(f % n);
        f /= n;
      }
      if (parity & 1) v[k] = -v[k];
    }
  };
  checker(out.values);
  fft::transform(out.values, std::vector<int>(sig.dim, n), !inverse);
  checker(out.values);
  const double scale = std::pow(sig.dx / std::sqrt(2.0 * std::numbers::pi), sig.dim);
  for (auto& z : out.values) z *= scale;
  return out;
}

// (u ⊗ v)(x, y) = u(x) v(y).
inline SampledSignal tensor(const SampledSignal& u, const SampledSignal& v) {
  if (std::abs(u.dx - v.dx) > 1e-15 * std::max(u.dx, v.dx)) throw DomainError("tensor: grid spacings differ");
  if (u.n != v.n) throw DomainError("tensor: sample counts differ");
  SampledSignal out(u.dim + v.dim, u.n, u.dx);
  const std::size_t nv = v.values.size();
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    for (std::size_t j = 0; j < nv; ++j) out.values[i * nv + j] = u.values[i] * v.values[j];
  }
  return out;
}

// CSV: a "n,dx,dim" header line with its values, then one row per sample
// with index, coordinates, re, im.
inline void write_signal_csv(const SampledSignal& s, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("write_signal_csv: cannot open " + path);
  os << std::setprecision(17);
  os << "n,dx,dim\n" << s.n << ',' << s.dx << ',' << s.dim << '\n';
  os << "index";
  for (int a = 0; a < s.dim; ++a) os << ",x" << a;
  os << ",re,im\n";
  for (std::size_t k = 0; k < s.values.size(); ++k) {
    os << k;
    for (double c : s.point(k)) os << ',' << c;
    os << ',' << s.values[k].real() << ',' << s.values[k].imag() << '\n';
  }
}

inline SampledSignal read_signal_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("read_signal_csv: cannot open " + path);
  std::string line;
  std::getline(is, line);
  if (line.rfind("n,dx,dim", 0) != 0) throw ConfigError("read_signal_csv: missing n,dx,dim header in " + path);
  std::getline(is, line);
  int n = 0, dim = 0;
  double dx = 0.0;
  {
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    if (!(ls >> n >> dx >> dim)) throw ConfigError("read_signal_csv: malformed header values in " + path);
  }
  std::getline(is, line);  // column names
  SampledSignal s;
  try {
    s = SampledSignal(dim, n, dx);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("read_signal_csv: ") + e.what());
  }
  std::size_t count = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::size_t k = 0;
    ls >> k;
    double c = 0.0;
    for (int a = 0; a < dim; ++a) ls >> c;
    double re = 0.0, im = 0.0;
    if (!(ls >> re >> im) || k >= s.values.size()) throw ConfigError("read_signal_csv: malformed row in " + path);
    s.values[k] = {re, im};
    ++count;
  }
  if (count != s.values.size()) throw ConfigError("read_signal_csv: expected n^dim rows in " + path);
  return s;
}

}  // namespace gswf
