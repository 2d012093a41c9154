#pragma once

// Short-time Fourier transform against Gaussian windows:
//   V(x, xi) = (2 pi)^{-d/2} int u(y) conj(phi(y - x)) e^{-i y xi} dy,
// pointwise (direct quadrature or closed form), on lattices via FFT, its
// inversion, the Moyal identity, and the two seminorm families.

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "gswf/aniso_geometry.hpp"
#include "gswf/errors.hpp"
#include "gswf/parallel.hpp"
#include "gswf/signal.hpp"

namespace gswf {

struct WindowSpec {
  double width = 1.0;
  bool normalized = true;

  WindowSpec() = default;
  explicit WindowSpec(double w, bool unit = true) : width(w), normalized(unit) {
    if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("WindowSpec: width must be positive");
  }

  double amplitude(int d) const {
    return normalized ? std::pow(std::numbers::pi, -0.25 * d) * std::pow(width, -0.5 * d) : 1.0;
  }
  double value(double r2, int d) const { return amplitude(d) * std::exp(-r2 / (2.0 * width * width)); }
  // Beyond this distance the window is below 1e-16 of its peak.
  double support_radius() const { return 8.6 * width; }
  double l2_norm(int d) const {
    return amplitude(d) * std::pow(std::numbers::pi * width * width, 0.25 * d);
  }
};

using SignalRef = std::variant<const SampledSignal*, const AnalyticSignal*, const ConvolutionKernel*>;

namespace detail {

inline double inv_sqrt_2pi_pow(int d) { return std::pow(2.0 * std::numbers::pi, -0.5 * d); }

inline void check_point_dim(const PhasePoint& p, int d) {
  if (static_cast<int>(p.x.size()) != d || static_cast<int>(p.xi.size()) != d) {
    throw DomainError("stft: phase point dimension does not match the signal");
  }
}

inline cplx stft_sampled(const SampledSignal& u, const WindowSpec& w, const PhasePoint& p) {
  const int d = u.dim;
  check_point_dim(p, d);
  const double limit = 0.8 * u.half_extent();
  for (double xv : p.x) {
    if (std::abs(xv) > limit) {
      std::ostringstream os;
      os << "stft_point: x = " << xv << " lies outside 80% of the grid half-extent " << u.half_extent();
      throw TruncationError(os.str());
    }
  }
  // Index window per axis where the Gaussian is above round-off.
  const double R = w.support_radius();
  std::vector<int> lo(d), hi(d);
  for (int a = 0; a < d; ++a) {
    lo[a] = std::max(0, static_cast<int>(std::floor((p.x[a] - R) / u.dx)) + u.n / 2);
    hi[a] = std::min(u.n - 1, static_cast<int>(std::ceil((p.x[a] + R) / u.dx)) + u.n / 2);
  }
  // Per-axis factors of the separable kernel phi(y - x) e^{-i y xi}.
  const double amp1 = w.amplitude(1);
  const double inv2w2 = 1.0 / (2.0 * w.width * w.width);
  std::vector<std::vector<cplx>> fac(d);
  for (int a = 0; a < d; ++a) {
    fac[a].resize(hi[a] - lo[a] + 1);
    for (int j = lo[a]; j <= hi[a]; ++j) {
      const double y = u.coord(j);
      fac[a][j - lo[a]] = amp1 * std::exp(-(y - p.x[a]) * (y - p.x[a]) * inv2w2) * std::polar(1.0, -y * p.xi[a]);
    }
  }
  cplx acc(0.0, 0.0);
  if (d == 1) {
    for (int j = lo[0]; j <= hi[0]; ++j) acc += u.values[j] * fac[0][j - lo[0]];
  } else if (d == 2) {
    for (int i = lo[0]; i <= hi[0]; ++i) {
      const cplx* row = u.values.data() + static_cast<std::size_t>(i) * u.n;
      cplx inner(0.0, 0.0);
      for (int j = lo[1]; j <= hi[1]; ++j) inner += row[j] * fac[1][j - lo[1]];
      acc += inner * fac[0][i - lo[0]];
    }
  } else {
    std::vector<int> k = lo;
    while (true) {
      std::size_t flat = 0;
      cplx f(1.0, 0.0);
      for (int a = 0; a < d; ++a) {
        flat = flat * u.n + k[a];
        f *= fac[a][k[a] - lo[a]];
      }
      acc += u.values[flat] * f;
      int a = d - 1;
      while (a >= 0 && ++k[a] > hi[a]) {
        k[a] = lo[a];
        --a;
      }
      if (a < 0) break;
    }
  }
  return acc * std::pow(u.dx, d) * inv_sqrt_2pi_pow(d);
}

// Writing a = y' + z, the y'-sum of the two Gaussian window factors is done
// in closed form, leaving
//   V = c e^{-w^2 zeta^2 / 4} e^{-i (x+y) zeta / 2} dx sum_m k(z_m) e^{-(x-y-z_m)^2 / 4w^2} e^{-i z_m kappa}
// with zeta = xi + eta, kappa = (xi - eta) / 2.
inline cplx stft_convolution(const ConvolutionKernel& K, const WindowSpec& w, const PhasePoint& p) {
  check_point_dim(p, 2);
  const double limit = 0.8 * K.half_extent();
  for (double xv : p.x) {
    if (std::abs(xv) > limit) {
      std::ostringstream os;
      os << "stft_point: x = " << xv << " lies outside 80% of the grid half-extent " << K.half_extent();
      throw TruncationError(os.str());
    }
  }
  const double D = p.x[0] - p.x[1];
  const double zeta = p.xi[0] + p.xi[1];
  const double kappa = 0.5 * (p.xi[0] - p.xi[1]);
  const double ww = w.width * w.width;
  const double reach = std::sqrt(2.0) * w.support_radius();
  const int lo = std::max(1, static_cast<int>(std::floor((D - reach) / K.dx)) + K.n);
  const int hi = std::min(2 * K.n - 1, static_cast<int>(std::ceil((D + reach) / K.dx)) + K.n);
  // exp(-(D - z)^2 / 4w^2 - i z kappa) is the exponential of a quadratic in m;
  // step it by ratios and resynchronize every 256 terms.
  const double e2 = -K.dx * K.dx / (4.0 * ww);
  auto term = [&](int m) {
    const double z = (m - K.n) * K.dx;
    return std::exp(cplx(-(D - z) * (D - z) / (4.0 * ww), -z * kappa));
  };
  auto ratio = [&](int m) {
    const double z = (m - K.n) * K.dx;
    return std::exp(cplx(e2 + 2.0 * (D - z) * K.dx / (4.0 * ww), -K.dx * kappa));
  };
  const cplx step2 = std::exp(cplx(2.0 * e2, 0.0));
  cplx acc(0.0, 0.0), f, r;
  for (int m = lo; m <= hi; ++m) {
    if ((m - lo) % 256 == 0) {
      f = term(m);
      r = ratio(m);
    }
    acc += K.k1d.values[m] * f;
    f *= r;
    r *= step2;
  }
  const double amp1 = w.amplitude(1);
  const double c = amp1 * amp1 * w.width * std::sqrt(std::numbers::pi) * K.dx * inv_sqrt_2pi_pow(2);
  return acc * c * std::exp(cplx(-ww * zeta * zeta / 4.0, -0.5 * (p.x[0] + p.x[1]) * zeta));
}

// Closed-form STFT of a normalized Gaussian of width a.
inline cplx stft_gaussian(double a, const WindowSpec& w, const PhasePoint& p) {
  const int d = static_cast<int>(p.dim());
  const double ww = w.width * w.width;
  const double P = 1.0 / (a * a) + 1.0 / ww;
  double x2 = 0.0, xi2 = 0.0, xxi = 0.0;
  for (int i = 0; i < d; ++i) {
    x2 += p.x[i] * p.x[i];
    xi2 += p.xi[i] * p.xi[i];
    xxi += p.x[i] * p.xi[i];
  }
  const double amp_u = std::pow(std::numbers::pi, -0.25 * d) * std::pow(a, -0.5 * d);
  const double mag = inv_sqrt_2pi_pow(d) * amp_u * w.amplitude(d) * std::pow(2.0 * std::numbers::pi / P, 0.5 * d) *
                     std::exp(-x2 / (2.0 * (a * a + ww)) - xi2 / (2.0 * P));
  return std::polar(mag, -xxi / (ww * P));
}

// Chirp STFT by trapezoidal quadrature in z = y - x. The phase is re-expanded
// around x so that large constant and linear parts never enter the sum.
inline cplx stft_chirp(const PolynomialData& phase, const WindowSpec& w, const PhasePoint& p) {
  const int d = phase.dim();
  check_point_dim(p, d);
  PolynomialData q = phase.shifted(p.x);
  const double base = q.coefficient(MultiIndex(d, 0));
  PolynomialData r(d);
  for (const auto& [a, c] : q.terms()) {
    if (order(a) == 0) continue;
    double cc = c;
    if (order(a) == 1) {
      const int axis = static_cast<int>(std::find(a.begin(), a.end(), 1) - a.begin());
      cc -= p.xi[axis];
    }
    if (cc != 0.0) r.add(a, cc);
  }
  const double R = w.support_radius();
  const std::vector<double> origin(d, 0.0);
  const double fmax = r.max_grad_norm(origin, R, d == 1 ? 257 : 33);
  // Trapezoid aliasing error ~ exp(-(2 pi / h - fmax)^2 w^2 / 2) < 1e-22.
  const double h = 2.0 * std::numbers::pi / (1.05 * fmax + 10.0 / w.width);
  const int m = static_cast<int>(std::ceil(R / h));
  const double amp = w.amplitude(d);
  const double inv2w2 = 1.0 / (2.0 * w.width * w.width);
  std::vector<int> k(d, -m);
  std::vector<double> z(d);
  cplx acc(0.0, 0.0);
  while (true) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) {
      z[a] = k[a] * h;
      r2 += z[a] * z[a];
    }
    const long double ph = std::fmod(r.eval_long(z), 2.0L * std::numbers::pi_v<long double>);
    acc += std::polar(amp * std::exp(-r2 * inv2w2), static_cast<double>(ph));
    int a = d - 1;
    while (a >= 0 && ++k[a] > m) {
      k[a] = -m;
      --a;
    }
    if (a < 0) break;
  }
  double xxi = 0.0;
  for (int i = 0; i < d; ++i) xxi += p.x[i] * p.xi[i];
  return acc * std::pow(h, d) * inv_sqrt_2pi_pow(d) * std::polar(1.0, base - xxi);
}

inline cplx stft_analytic(const AnalyticSignal& u, const WindowSpec& w, const PhasePoint& p) {
  const int d = u.dim;
  check_point_dim(p, d);
  double x2 = 0.0, xi2 = 0.0, xxi = 0.0;
  for (int i = 0; i < d; ++i) {
    x2 += p.x[i] * p.x[i];
    xi2 += p.xi[i] * p.xi[i];
    xxi += p.x[i] * p.xi[i];
  }
  switch (u.kind) {
    case AnalyticKind::DiracDelta:
      return inv_sqrt_2pi_pow(d) * w.value(x2, d);
    case AnalyticKind::ConstantOne: {
      // e^{-i x xi} times the Fourier transform of the window.
      const double mag = w.amplitude(d) * std::pow(w.width, d) * std::exp(-0.5 * w.width * w.width * xi2);
      return std::polar(mag, -xxi);
    }
    case AnalyticKind::Gaussian:
      return stft_gaussian(u.width, w, p);
    case AnalyticKind::PolyChirp:
      return stft_chirp(u.phase, w, p);
    case AnalyticKind::Tensor: {
      // The window is a product over coordinates, so V(u ⊗ v) = V u · V v.
      const int k = u.factors[0].dim;
      const PhasePoint a(std::vector<double>(p.x.begin(), p.x.begin() + k), std::vector<double>(p.xi.begin(), p.xi.begin() + k));
      const PhasePoint b(std::vector<double>(p.x.begin() + k, p.x.end()), std::vector<double>(p.xi.begin() + k, p.xi.end()));
      return stft_analytic(u.factors[0], w, a) * stft_analytic(u.factors[1], w, b);
    }
  }
  throw DomainError("stft: unknown analytic kind");
}

}  // namespace detail

inline cplx stft_point(const SampledSignal& u, const WindowSpec& w, const PhasePoint& p) {
  return detail::stft_sampled(u, w, p);
}
inline cplx stft_point(const AnalyticSignal& u, const WindowSpec& w, const PhasePoint& p) {
  return detail::stft_analytic(u, w, p);
}
inline cplx stft_point(const ConvolutionKernel& u, const WindowSpec& w, const PhasePoint& p) {
  return detail::stft_convolution(u, w, p);
}
inline cplx stft_point(const SignalRef& u, const WindowSpec& w, const PhasePoint& p) {
  return std::visit([&](const auto* s) { return stft_point(*s, w, p); }, u);
}
inline int signal_dim(const SignalRef& u) {
  return std::visit([](const auto* s) { return s->dim; }, u);
}

// STFT on the lattice of positions x_m = (m stride - n/2) dx (per axis) times
// the full frequency grid of the signal. Values are stored position-major.
struct StftGrid {
  int dim = 1;
  int n = 0;
  double dx = 0.0;
  int stride = 1;
  std::vector<cplx> values;

  int n_pos() const { return n / stride; }
  std::size_t pos_count() const { return ipow(n_pos()); }
  std::size_t freq_count() const { return ipow(n); }
  double dxi() const { return 2.0 * std::numbers::pi / (n * dx); }
  double pos_spacing() const { return stride * dx; }
  double position(int m) const { return (m * stride - n / 2) * dx; }
  double frequency(int k) const { return (k - n / 2) * dxi(); }
  cplx& at(std::size_t pos, std::size_t freq) { return values[pos * freq_count() + freq]; }
  const cplx& at(std::size_t pos, std::size_t freq) const { return values[pos * freq_count() + freq]; }

  // Phase-space coordinates of a (position, frequency) pair of flat indices.
  PhasePoint point(std::size_t pos, std::size_t freq) const {
    PhasePoint p;
    p.x.resize(dim);
    p.xi.resize(dim);
    for (int a = dim - 1; a >= 0; --a) {
      p.x[a] = position(static_cast<int>(pos % n_pos()));
      p.xi[a] = frequency(static_cast<int>(freq % n));
      pos /= n_pos();
      freq /= n;
    }
    return p;
  }

 private:
  std::size_t ipow(int b) const {
    std::size_t r = 1;
    for (int i = 0; i < dim; ++i) r *= static_cast<std::size_t>(b);
    return r;
  }
};

inline StftGrid stft_grid(const SampledSignal& u, const WindowSpec& w, int stride = 1, int threads = 0) {
  if (stride < 1 || u.n % stride != 0) throw DomainError("stft_grid: stride must divide n");
  StftGrid g;
  g.dim = u.dim;
  g.n = u.n;
  g.dx = u.dx;
  g.stride = stride;
  g.values.assign(g.pos_count() * g.freq_count(), cplx(0.0, 0.0));
  const std::size_t nf = g.freq_count();
  parallel_for(g.pos_count(), threads, [&](std::size_t pos) {
    std::vector<double> xm(u.dim);
    std::size_t f = pos;
    for (int a = u.dim - 1; a >= 0; --a) {
      xm[a] = g.position(static_cast<int>(f % g.n_pos()));
      f /= g.n_pos();
    }
    SampledSignal seg(u.dim, u.n, u.dx);
    for (std::size_t k = 0; k < nf; ++k) {
      const auto y = u.point(k);
      double r2 = 0.0;
      for (int a = 0; a < u.dim; ++a) r2 += (y[a] - xm[a]) * (y[a] - xm[a]);
      seg.values[k] = u.values[k] * w.value(r2, u.dim);
    }
    const SampledSignal spec = fourier(seg, false);
    std::copy(spec.values.begin(), spec.values.end(), g.values.begin() + pos * nf);
  });
  return g;
}

// u(y) = (2 pi)^{-d/2} int int V(x, xi) e^{i y xi} phi(y - x) dx dxi, with both
// integrals replaced by lattice sums.
inline SampledSignal istft(const StftGrid& V, const WindowSpec& w) {
  if (!w.normalized) throw DomainError("istft: the window must have unit L2 norm");
  SampledSignal out(V.dim, V.n, V.dx);
  const std::size_t nf = V.freq_count();
  const double cell = std::pow(V.pos_spacing(), V.dim);
  SampledSignal spec(V.dim, V.n, V.dxi());
  for (std::size_t pos = 0; pos < V.pos_count(); ++pos) {
    std::copy(V.values.begin() + pos * nf, V.values.begin() + (pos + 1) * nf, spec.values.begin());
    const SampledSignal seg = fourier(spec, true);
    std::vector<double> xm(V.dim);
    std::size_t f = pos;
    for (int a = V.dim - 1; a >= 0; --a) {
      xm[a] = V.position(static_cast<int>(f % V.n_pos()));
      f /= V.n_pos();
    }
    for (std::size_t k = 0; k < nf; ++k) {
      const auto y = out.point(k);
      double r2 = 0.0;
      for (int a = 0; a < V.dim; ++a) r2 += (y[a] - xm[a]) * (y[a] - xm[a]);
      out.values[k] += seg.values[k] * w.value(r2, V.dim) * cell;
    }
  }
  return out;
}

// Discrete (V_1, V_2) over the lattice.
inline cplx stft_inner(const StftGrid& a, const StftGrid& b) {
  if (a.values.size() != b.values.size() || a.dx != b.dx || a.stride != b.stride) {
    throw DomainError("stft_inner: lattices differ");
  }
  cplx acc(0.0, 0.0);
  for (std::size_t i = 0; i < a.values.size(); ++i) acc += a.values[i] * std::conj(b.values[i]);
  return acc * std::pow(a.pos_spacing() * a.dxi(), a.dim);
}

inline cplx l2_inner(const SampledSignal& u, const SampledSignal& f) {
  if (u.values.size() != f.values.size()) throw DomainError("l2_inner: sizes differ");
  cplx acc(0.0, 0.0);
  for (std::size_t i = 0; i < u.values.size(); ++i) acc += u.values[i] * std::conj(f.values[i]);
  return acc * std::pow(u.dx, u.dim);
}

// |(u, f) - (V u, V f)| for a unit-norm window.
inline double moyal_error(const SampledSignal& u, const SampledSignal& f, const WindowSpec& w, int stride = 1) {
  const StftGrid vu = stft_grid(u, w, stride);
  const StftGrid vf = stft_grid(f, w, stride);
  return std::abs(l2_inner(u, f) - stft_inner(vu, vf));
}

struct SeminormResult {
  double value = 0.0;
  bool divergent = false;
  // Location of the supremum (finite case).
  std::vector<double> argmax;
};

// sup over the lattice of exp(r (|x|^{1/t} + |xi|^{1/s})) |V(x, xi)|. Values
// below 1e-14 of the peak magnitude count as zero. A supremum within two cells
// of the lattice boundary, or one that keeps growing over three nested boxes,
// is reported as divergent.
inline SeminormResult stft_seminorm(const StftGrid& V, const AnisoIndex& idx, double r) {
  if (!(r > 0.0)) throw DomainError("stft_seminorm: r must be positive");
  SeminormResult res;
  double peak = 0.0;
  for (const auto& z : V.values) peak = std::max(peak, std::abs(z));
  if (peak == 0.0) return res;
  const double floor = 1e-14 * peak;
  const double X = 0.5 * V.n * V.dx, F = std::numbers::pi / V.dx;
  const double fractions[3] = {0.5, 0.75, 1.0 + 1e-12};
  double sup[3] = {0.0, 0.0, 0.0};
  std::size_t best_pos = 0, best_freq = 0;
  const int np = V.n_pos();
  for (std::size_t pos = 0; pos < V.pos_count(); ++pos) {
    for (std::size_t fr = 0; fr < V.freq_count(); ++fr) {
      const double mag = std::abs(V.at(pos, fr));
      if (mag <= floor) continue;
      const PhasePoint p = V.point(pos, fr);
      double xmax = 0.0, ximax = 0.0;
      for (int a = 0; a < V.dim; ++a) {
        xmax = std::max(xmax, std::abs(p.x[a]));
        ximax = std::max(ximax, std::abs(p.xi[a]));
      }
      const double val =
          std::exp(r * (std::pow(detail::norm(p.x), 1.0 / idx.t) + std::pow(detail::norm(p.xi), 1.0 / idx.s))) * mag;
      for (int b = 0; b < 3; ++b) {
        if (xmax <= fractions[b] * X && ximax <= fractions[b] * F && val > sup[b]) {
          sup[b] = val;
          if (b == 2) {
            best_pos = pos;
            best_freq = fr;
          }
        }
      }
    }
  }
  bool near_edge = false;
  {
    std::size_t pos = best_pos, fr = best_freq;
    for (int a = 0; a < V.dim; ++a) {
      const int m = static_cast<int>(pos % np), k = static_cast<int>(fr % V.n);
      if (m < 2 || m >= np - 2 || k < 2 || k >= V.n - 2) near_edge = true;
      pos /= np;
      fr /= V.n;
    }
  }
  const bool growing = sup[1] > sup[0] * (1 + 1e-12) && sup[2] > sup[1] * (1 + 1e-12);
  if (near_edge || growing || !std::isfinite(sup[2])) {
    res.value = std::numeric_limits<double>::infinity();
    res.divergent = true;
    return res;
  }
  res.value = sup[2];
  res.argmax = V.point(best_pos, best_freq).flat();
  return res;
}

inline SeminormResult stft_seminorm(const SampledSignal& u, const WindowSpec& w, const AnisoIndex& idx, double r,
                                    int stride = 1) {
  return stft_seminorm(stft_grid(u, w, stride), idx, r);
}

// sup over |alpha|, |beta| <= max_order of
//   sup_x |x^alpha D^beta f(x)| / (h^{|alpha + beta|} alpha!^t beta!^s),
// with spectral derivatives. Factorial weights are handled in logs.
inline SeminormResult classical_seminorm(const SampledSignal& u, const AnisoIndex& idx, double h, int max_order) {
  if (!(h > 0.0)) throw DomainError("classical_seminorm: h must be positive");
  if (max_order < 0 || max_order > 8) throw DomainError("classical_seminorm: max_order must lie in [0, 8]");
  const int d = u.dim;
  const SampledSignal spec = fourier(u, false);
  double total = 0.0, edge = 0.0;
  const double cut = 0.9 * u.xi_max();
  for (std::size_t k = 0; k < spec.values.size(); ++k) {
    const double e = std::norm(spec.values[k]);
    total += e;
    for (double c : spec.point(k)) {
      if (std::abs(c) > cut) {
        edge += e;
        break;
      }
    }
  }
  if (total > 0.0 && edge / total > 1e-8) {
    std::ostringstream os;
    os << "classical_seminorm: spectral energy fraction " << edge / total
       << " near Nyquist makes derivatives unreliable; refine dx";
    throw ResolutionError(os.str());
  }

  // All multi-indices of order <= max_order.
  std::vector<MultiIndex> indices;
  {
    MultiIndex a(d, 0);
    while (true) {
      if (order(a) <= max_order) indices.push_back(a);
      int i = 0;
      while (i < d && ++a[i] > max_order) a[i++] = 0;
      if (i == d) break;
    }
  }
  auto log_fact = [](const MultiIndex& a) {
    double s = 0.0;
    for (int v : a) s += std::lgamma(v + 1.0);
    return s;
  };

  SeminormResult res;
  double best = 0.0;
  for (const auto& beta : indices) {
    SampledSignal deriv = spec;
    for (std::size_t k = 0; k < deriv.values.size(); ++k) {
      const auto xi = spec.point(k);
      double m = 1.0;
      for (int a = 0; a < d; ++a) {
        for (int j = 0; j < beta[a]; ++j) m *= xi[a];
      }
      deriv.values[k] *= m;  // D = -i d/dx, so D^beta -> xi^beta
    }
    SampledSignal db = fourier(deriv, true);
    db.dx = u.dx;
    for (const auto& alpha : indices) {
      const double log_w = (order(alpha) + order(beta)) * std::log(h) + idx.t * log_fact(alpha) + idx.s * log_fact(beta);
      for (std::size_t k = 0; k < db.values.size(); ++k) {
        const double mag = std::abs(db.values[k]);
        if (mag == 0.0) continue;
        double lx = 0.0;
        bool zero = false;
        const auto x = u.point(k);
        for (int a = 0; a < d; ++a) {
          if (alpha[a] == 0) continue;
          if (x[a] == 0.0) {
            zero = true;
            break;
          }
          lx += alpha[a] * std::log(std::abs(x[a]));
        }
        if (zero) continue;
        const double val = std::exp(lx + std::log(mag) - log_w);
        if (val > best) {
          best = val;
          res.argmax = x;
        }
      }
    }
  }
  res.value = best;
  return res;
}

// CSV export: x..., xi..., re, im, abs.
inline void write_stft_csv(const StftGrid& V, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("write_stft_csv: cannot open " + path);
  os << std::setprecision(17);
  for (int a = 0; a < V.dim; ++a) os << "x" << a << ',';
  for (int a = 0; a < V.dim; ++a) os << "xi" << a << ',';
  os << "re,im,abs\n";
  for (std::size_t pos = 0; pos < V.pos_count(); ++pos) {
    for (std::size_t fr = 0; fr < V.freq_count(); ++fr) {
      const PhasePoint p = V.point(pos, fr);
      const cplx z = V.at(pos, fr);
      for (double c : p.x) os << c << ',';
      for (double c : p.xi) os << c << ',';
      os << z.real() << ',' << z.imag() << ',' << std::abs(z) << '\n';
    }
  }
}

}  // namespace gswf
