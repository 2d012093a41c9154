#pragma once

// Wave front set estimation. For each sampled sphere direction z0 the STFT
// magnitude is followed along lambda -> (lambda^t x0, lambda^s xi0); an
// exponential rate is fitted to log |V| and small rates mark z0 as singular.
// In one dimension each lambda-shell of the profile also takes the supremum
// over the direction's angular cell, which is what the definition asks for
// (a supremum over a neighborhood of z0, not a single curve).

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gswf/aniso_geometry.hpp"
#include "gswf/errors.hpp"
#include "gswf/fft.hpp"
#include "gswf/parallel.hpp"
#include "gswf/stft.hpp"

namespace gswf {

// Phase-space box |x_i| <= x_max, |xi_i| <= xi_max where STFT values are trusted.
struct Reach {
  double x_max = 0.0;
  double xi_max = 0.0;
};

inline Reach default_reach(const SampledSignal& u, const WindowSpec& w) {
  const double H = u.half_extent();
  const double X = std::min(0.8 * H, H - w.support_radius());
  if (!(X > 0.0)) throw ResolutionError("default_reach: grid too small for the window");
  return {X, 0.8 * u.xi_max()};
}

struct DecayProfile {
  SphereDirection direction;
  std::vector<double> lambdas;
  std::vector<double> magnitudes;
  std::vector<bool> floor_mask;
  bool clipped = false;
  bool neighborhood = false;
  std::vector<std::string> warnings;
};

struct RateFit {
  double rhat = std::numeric_limits<double>::infinity();
  double intercept = 0.0;
  double residual = 0.0;
  int n_valid = 0;

  bool sentinel() const { return std::isinf(rhat); }
};

struct WFEntry {
  SphereDirection dir;
  RateFit fit;
  bool singular = false;
  bool resolved = true;
  double lambda_max = 0.0;
  double last_magnitude = 0.0;
};

struct WFEstimate {
  AnisoIndex idx;
  double r_threshold = 1.0;
  double floor = 1e-14;
  double window_width = 1.0;
  Reach reach;
  std::vector<WFEntry> entries;

  std::vector<SphereDirection> singular_directions() const {
    std::vector<SphereDirection> out;
    for (const auto& e : entries) {
      if (e.singular) out.push_back(e.dir);
    }
    return out;
  }
  std::size_t singular_count() const {
    return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const auto& e) { return e.singular; }));
  }
};

struct EstimatorOptions {
  int sphere_samples = 720;
  double lambda_min = 2.0;
  double lambda_cap = std::numeric_limits<double>::infinity();
  int n_lambda = 24;
  double r_threshold = 1.0;
  double floor = 1e-14;
  std::optional<Reach> reach;
  bool neighborhood = true;
  // Directions whose curve leaves the reach before lambda_min * min_span are
  // left unresolved rather than classified.
  double min_span = 1.25;
  int threads = 0;
  std::vector<SphereDirection> directions;
};

// Uniform angles on the unit circle of the (x, xi) plane.
inline std::vector<SphereDirection> circle_directions(int count) {
  if (count < 4) throw DomainError("circle_directions: need at least 4 samples");
  std::vector<SphereDirection> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) out.push_back(SphereDirection::from_angle(2.0 * std::numbers::pi * k / count));
  return out;
}

// Largest lambda keeping the curve point through z inside the reach box.
inline double curve_lambda_max(const AnisoIndex& idx, const SphereDirection& z, const Reach& reach, double cap) {
  double lam = cap;
  const std::size_t d = z.dim();
  for (std::size_t i = 0; i < d; ++i) {
    if (std::abs(z.z[i]) > 1e-300) lam = std::min(lam, std::pow(reach.x_max / std::abs(z.z[i]), 1.0 / idx.t));
    if (std::abs(z.z[d + i]) > 1e-300) lam = std::min(lam, std::pow(reach.xi_max / std::abs(z.z[d + i]), 1.0 / idx.s));
  }
  return lam;
}

inline std::vector<double> geometric_lambdas(double lo, double hi, int count) {
  if (count < 2 || !(lo > 0.0) || !(hi > lo)) throw RangeError("geometric_lambdas: need 0 < lo < hi and count >= 2");
  std::vector<double> out(count);
  const double step = std::log(hi / lo) / (count - 1);
  for (int k = 0; k < count; ++k) out[k] = lo * std::exp(step * k);
  out.back() = hi;
  return out;
}

namespace detail {

inline bool point_in_reach(const PhasePoint& p, const Reach& r) {
  for (double v : p.x) {
    if (std::abs(v) > r.x_max * (1 + 1e-12)) return false;
  }
  for (double v : p.xi) {
    if (std::abs(v) > r.xi_max * (1 + 1e-12)) return false;
  }
  return true;
}

inline Reach resolve_reach(const SignalRef& u, const WindowSpec& w, const std::optional<Reach>& given) {
  std::optional<std::pair<double, double>> grid;  // half-extent, xi_max
  if (const auto* s = std::get_if<const SampledSignal*>(&u)) grid = {{(*s)->half_extent(), (*s)->xi_max()}};
  if (const auto* k = std::get_if<const ConvolutionKernel*>(&u)) grid = {{(*k)->half_extent(), (*k)->xi_max()}};
  if (given) {
    if (!(given->x_max > 0.0) || !(given->xi_max > 0.0)) throw DomainError("reach: box must be positive");
    if (grid && (given->x_max > 0.8 * grid->first || given->xi_max > grid->second)) {
      throw RangeError("reach: box exceeds the sampled grid");
    }
    return *given;
  }
  if (!grid) throw PreconditionError("reach: analytic signals need an explicit phase-space box");
  const double H = grid->first;
  const double X = std::min(0.8 * H, H - w.support_radius());
  if (!(X > 0.0)) throw ResolutionError("default_reach: grid too small for the window");
  return {X, 0.8 * grid->second};
}

}  // namespace detail

// |V| along the curve through z0 at geometric lambdas in lambda_range.
// Samples leaving the reach are dropped with a warning.
inline DecayProfile decay_profile(const SignalRef& u, const WindowSpec& w, const AnisoIndex& idx,
                                  const SphereDirection& z0, std::pair<double, double> lambda_range, int n_samples,
                                  std::optional<Reach> reach = std::nullopt, double floor = 1e-14) {
  if (n_samples < 8) throw RangeError("decay_profile: need at least 8 samples");
  if (static_cast<int>(z0.dim()) != signal_dim(u)) throw DomainError("decay_profile: direction dimension mismatch");
  const Reach box = detail::resolve_reach(u, w, reach);
  DecayProfile prof;
  prof.direction = z0;
  const auto lams = geometric_lambdas(lambda_range.first, lambda_range.second, n_samples);
  const PhasePoint base = z0.point();
  for (double lam : lams) {
    const PhasePoint p = scale_point(idx, base, lam);
    if (!detail::point_in_reach(p, box)) {
      prof.clipped = true;
      continue;
    }
    const double mag = std::abs(stft_point(u, w, p));
    prof.lambdas.push_back(lam);
    prof.magnitudes.push_back(mag);
    prof.floor_mask.push_back(mag <= floor);
  }
  if (prof.clipped) {
    std::ostringstream os;
    os << "curve leaves the reachable box; lambda range clipped to " << prof.lambdas.size() << " samples";
    prof.warnings.push_back(os.str());
  }
  if (prof.lambdas.size() < 8) throw RangeError("decay_profile: fewer than 8 reachable samples");
  return prof;
}

// Least squares line through (lambda, log |V|) over samples above the floor;
// rhat is minus the slope. Fewer than three valid samples gives the +inf
// sentinel (decay beyond the floor counts as faster than any exponential).
inline RateFit fit_rate(const DecayProfile& p, double floor = 1e-14) {
  RateFit fit;
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < p.lambdas.size(); ++k) {
    if (p.magnitudes[k] > floor && !(k < p.floor_mask.size() && p.floor_mask[k])) {
      xs.push_back(p.lambdas[k]);
      ys.push_back(std::log(p.magnitudes[k]));
    }
  }
  fit.n_valid = static_cast<int>(xs.size());
  if (fit.n_valid < 3) return fit;
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  const double slope = sxy / sxx;
  fit.rhat = -slope;
  fit.intercept = my - slope * mx;
  double ss = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double e = ys[k] - (fit.intercept + slope * xs[k]);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

namespace detail {

// Max of |V| per (direction cell, lambda shell), filled from an STFT lattice
// covering the reach box. Only for one-dimensional signals.
class ShellSup {
 public:
  ShellSup(const AnisoIndex& idx, const std::vector<SphereDirection>& dirs, const std::vector<std::vector<double>>& lams,
           const Reach& reach, double floor)
      : idx_(idx), lams_(lams), reach_(reach), floor_(floor) {
    order_.resize(dirs.size());
    for (std::size_t k = 0; k < dirs.size(); ++k) order_[k] = {dirs[k].angle(), static_cast<int>(k)};
    std::sort(order_.begin(), order_.end());
    log_lo_.resize(dirs.size());
    step_.resize(dirs.size());
    for (std::size_t k = 0; k < dirs.size(); ++k) {
      if (lams[k].size() < 2) continue;
      log_lo_[k] = std::log(lams[k].front());
      step_[k] = std::log(lams[k].back() / lams[k].front()) / (lams[k].size() - 1);
    }
  }

  std::vector<std::vector<double>> empty_bins() const {
    std::vector<std::vector<double>> b(lams_.size());
    for (std::size_t k = 0; k < lams_.size(); ++k) b[k].assign(lams_[k].size(), 0.0);
    return b;
  }

  void add(std::vector<std::vector<double>>& bins, double x, double xi, double mag) const {
    if (!(mag > floor_)) return;
    if (std::abs(x) > reach_.x_max || std::abs(xi) > reach_.xi_max) return;
    const double ax = std::abs(x), axi = std::abs(xi);
    if (ax == 0.0 && axi == 0.0) return;
    const double lam = lambda_from_norms(ax, axi, idx_.t, idx_.s);
    const double zx = x * std::pow(lam, -idx_.t), zxi = xi * std::pow(lam, -idx_.s);
    const int k = nearest(std::atan2(zxi, zx));
    const auto& L = lams_[k];
    if (L.size() < 2) return;
    const double pos = (std::log(lam) - log_lo_[k]) / step_[k];
    const long j = std::lround(pos);
    if (j < 0 || j >= static_cast<long>(L.size())) return;
    bins[k][j] = std::max(bins[k][j], mag);
  }

 private:
  int nearest(double angle) const {
    auto it = std::lower_bound(order_.begin(), order_.end(), std::make_pair(angle, -1));
    auto wrap_dist = [](double a, double b) {
      double d = std::abs(a - b);
      return std::min(d, 2.0 * std::numbers::pi - d);
    };
    const auto& after = it == order_.end() ? order_.front() : *it;
    const auto& before = it == order_.begin() ? order_.back() : *(it - 1);
    return wrap_dist(angle, after.first) <= wrap_dist(angle, before.first) ? after.second : before.second;
  }

  AnisoIndex idx_;
  const std::vector<std::vector<double>>& lams_;
  Reach reach_;
  double floor_;
  std::vector<std::pair<double, int>> order_;
  std::vector<double> log_lo_, step_;
};

// Visits |V| on a lattice covering the reach box: positions every w/4, and
// for each position the frequencies of one FFT of the windowed segment.
template <class Visit>
void lattice_sampled(const SampledSignal& u, const WindowSpec& w, const Reach& reach, std::size_t chunk,
                     std::size_t n_chunks, Visit&& visit) {
  const int stride = std::max(1, static_cast<int>(std::lround(0.25 * w.width / u.dx)));
  const int N = static_cast<int>(fft::next_power_of_two(static_cast<std::size_t>(std::ceil(2.0 * w.support_radius() / u.dx)) + 1));
  const double inv2w2 = 1.0 / (2.0 * w.width * w.width);
  const double amp = w.amplitude(1);
  const double scale = u.dx / std::sqrt(2.0 * std::numbers::pi);
  const double dxi = 2.0 * std::numbers::pi / (N * u.dx);
  std::vector<int> centers;
  for (int c = u.n / 2 % stride; c < u.n; c += stride) {
    if (std::abs(u.coord(c)) <= reach.x_max) centers.push_back(c);
  }
  std::vector<cplx> seg(N);
  for (std::size_t m = chunk; m < centers.size(); m += n_chunks) {
    const int c = centers[m];
    const double xm = u.coord(c);
    for (int l = 0; l < N; ++l) {
      const int j = c - N / 2 + l;
      if (j < 0 || j >= u.n) {
        seg[l] = 0.0;
        continue;
      }
      const double y = u.coord(j);
      seg[l] = u.values[j] * (amp * std::exp(-(y - xm) * (y - xm) * inv2w2)) * ((l & 1) ? -1.0 : 1.0);
    }
    fft::transform1d(seg, true);
    for (int k = 0; k < N; ++k) {
      const double xi = (k - N / 2) * dxi;
      if (std::abs(xi) > reach.xi_max) continue;
      visit(xm, xi, std::abs(seg[k]) * scale);
    }
  }
}

// Same lattice for a polynomial chirp, sampled exactly around each position.
// The phase is re-expanded as phi(x_m) + phi'(x_m) z + r(z); only r enters the
// FFT, and the linear part becomes a frequency offset.
template <class Visit>
void lattice_chirp(const PolynomialData& phase, const WindowSpec& w, const Reach& reach, std::size_t chunk,
                   std::size_t n_chunks, Visit&& visit) {
  const double R = w.support_radius();
  const double dxpos = 0.25 * w.width;
  const int npos = static_cast<int>(std::floor(reach.x_max / dxpos));
  const double inv2w2 = 1.0 / (2.0 * w.width * w.width);
  const double amp = w.amplitude(1);
  const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  std::vector<cplx> seg;
  for (int m = -npos + static_cast<int>(chunk); m <= npos; m += static_cast<int>(n_chunks)) {
    const double xm = m * dxpos;
    const double c[1] = {xm};
    const PolynomialData q = phase.shifted(c);
    const double q1 = q.coefficient({1});
    PolynomialData r(1);
    for (const auto& [a, coef] : q.terms()) {
      if (a[0] >= 2) r.add(a, coef);
    }
    const double zero[1] = {0.0};
    const double fmax = r.max_grad_norm(zero, R, 257);
    const double nyq = 1.05 * fmax + 12.0 / w.width;
    if (q1 + nyq < -reach.xi_max || q1 - nyq > reach.xi_max) continue;
    const double dy = std::numbers::pi / nyq;
    const int N = static_cast<int>(fft::next_power_of_two(static_cast<std::size_t>(std::ceil(std::max(2.0 * R, 8.0 * std::numbers::pi * w.width) / dy))));
    seg.assign(N, cplx(0.0, 0.0));
    for (int l = 0; l < N; ++l) {
      const double z = (l - N / 2) * dy;
      if (std::abs(z) > R) continue;
      const double zz[1] = {z};
      const double ph = static_cast<double>(std::fmod(r.eval_long(zz), two_pi));
      seg[l] = std::polar(amp * std::exp(-z * z * inv2w2), ph) * ((l & 1) ? -1.0 : 1.0);
    }
    fft::transform1d(seg, true);
    const double scale = dy / std::sqrt(2.0 * std::numbers::pi);
    const double dnu = 2.0 * std::numbers::pi / (N * dy);
    for (int k = 0; k < N; ++k) {
      const double xi = q1 + (k - N / 2) * dnu;
      if (std::abs(xi) > reach.xi_max) continue;
      visit(xm, xi, std::abs(seg[k]) * scale);
    }
  }
}

// Closed-form kinds on a rectangular lattice.
template <class Visit>
void lattice_closed_form(const AnalyticSignal& u, const WindowSpec& w, const Reach& reach, std::size_t chunk,
                         std::size_t n_chunks, Visit&& visit) {
  const double dxpos = 0.25 * w.width, dxi = 0.25 / w.width;
  const int npos = static_cast<int>(std::floor(reach.x_max / dxpos));
  const int nfreq = static_cast<int>(std::floor(reach.xi_max / dxi));
  for (int m = -npos + static_cast<int>(chunk); m <= npos; m += static_cast<int>(n_chunks)) {
    for (int k = -nfreq; k <= nfreq; ++k) {
      const PhasePoint p(m * dxpos, k * dxi);
      visit(p.x[0], p.xi[0], std::abs(stft_point(u, w, p)));
    }
  }
}

inline std::vector<std::vector<double>> shell_sups(const SignalRef& u, const WindowSpec& w, const ShellSup& sup,
                                                   const Reach& reach, int threads) {
  const int T = std::max(1, threads <= 0 ? default_threads() : threads);
  std::vector<std::vector<std::vector<double>>> parts(T);
  parallel_for(static_cast<std::size_t>(T), T, [&](std::size_t c) {
    auto bins = sup.empty_bins();
    auto visit = [&](double x, double xi, double mag) { sup.add(bins, x, xi, mag); };
    if (const auto* s = std::get_if<const SampledSignal*>(&u)) {
      lattice_sampled(**s, w, reach, c, T, visit);
    } else {
      const AnalyticSignal& a = *std::get<const AnalyticSignal*>(u);
      if (a.kind == AnalyticKind::PolyChirp) {
        lattice_chirp(a.phase, w, reach, c, T, visit);
      } else {
        lattice_closed_form(a, w, reach, c, T, visit);
      }
    }
    parts[c] = std::move(bins);
  });
  auto out = sup.empty_bins();
  for (const auto& p : parts) {
    for (std::size_t k = 0; k < out.size(); ++k) {
      for (std::size_t j = 0; j < out[k].size(); ++j) out[k][j] = std::max(out[k][j], p[k][j]);
    }
  }
  return out;
}

inline WFEntry classify(const DecayProfile& prof, double lambda_max, double threshold, double floor) {
  WFEntry e;
  e.dir = prof.direction;
  e.lambda_max = lambda_max;
  e.fit = fit_rate(prof, floor);
  e.last_magnitude = prof.magnitudes.empty() ? 0.0 : prof.magnitudes.back();
  e.singular = !e.fit.sentinel() && e.fit.rhat <= threshold && e.last_magnitude > floor;
  return e;
}

}  // namespace detail

// Profiles for a list of directions (curve values, plus cell suprema for
// one-dimensional signals when enabled). Exposed for export and diagnostics.
inline std::vector<DecayProfile> wf_profiles(const SignalRef& u, const WindowSpec& w, const AnisoIndex& idx,
                                             const std::vector<SphereDirection>& dirs, const EstimatorOptions& opt,
                                             const Reach& box, std::vector<double>* lambda_max_out = nullptr) {
  if (opt.n_lambda < 8) throw RangeError("estimate_wf: need at least 8 lambda samples");
  const std::size_t K = dirs.size();
  if (K == 0) {
    if (lambda_max_out) lambda_max_out->clear();
    return {};
  }
  std::vector<std::vector<double>> lams(K);
  std::vector<double> lmax(K);
  for (std::size_t k = 0; k < K; ++k) {
    lmax[k] = curve_lambda_max(idx, dirs[k], box, opt.lambda_cap);
    if (lmax[k] >= opt.lambda_min * opt.min_span) lams[k] = geometric_lambdas(opt.lambda_min, lmax[k], opt.n_lambda);
  }
  std::vector<DecayProfile> profs(K);
  parallel_for(K, opt.threads, [&](std::size_t k) {
    DecayProfile& p = profs[k];
    p.direction = dirs[k];
    const PhasePoint base = dirs[k].point();
    for (double lam : lams[k]) {
      const double mag = std::abs(stft_point(u, w, scale_point(idx, base, lam)));
      p.lambdas.push_back(lam);
      p.magnitudes.push_back(mag);
    }
  });
  if (opt.neighborhood && signal_dim(u) == 1) {
    const detail::ShellSup sup(idx, dirs, lams, box, opt.floor);
    const auto bins = detail::shell_sups(u, w, sup, box, opt.threads);
    for (std::size_t k = 0; k < K; ++k) {
      profs[k].neighborhood = true;
      for (std::size_t j = 0; j < profs[k].magnitudes.size(); ++j) {
        profs[k].magnitudes[j] = std::max(profs[k].magnitudes[j], bins[k][j]);
      }
    }
  }
  for (auto& p : profs) {
    p.floor_mask.resize(p.magnitudes.size());
    for (std::size_t j = 0; j < p.magnitudes.size(); ++j) p.floor_mask[j] = p.magnitudes[j] <= opt.floor;
  }
  if (lambda_max_out) *lambda_max_out = lmax;
  return profs;
}

inline WFEstimate estimate_wf(const SignalRef& u, const WindowSpec& w, const AnisoIndex& idx,
                              const EstimatorOptions& opt = {}) {
  const int d = signal_dim(u);
  std::vector<SphereDirection> dirs = opt.directions;
  if (dirs.empty()) {
    if (d != 1) throw PreconditionError("estimate_wf: supply directions for multi-dimensional signals");
    if (opt.sphere_samples < 90) throw DomainError("estimate_wf: need at least 90 sphere samples in one dimension");
    dirs = circle_directions(opt.sphere_samples);
  }
  for (const auto& z : dirs) {
    if (static_cast<int>(z.dim()) != d) throw DomainError("estimate_wf: direction dimension mismatch");
  }
  const Reach box = detail::resolve_reach(u, w, opt.reach);
  std::vector<double> lmax;
  const auto profs = wf_profiles(u, w, idx, dirs, opt, box, &lmax);
  WFEstimate est;
  est.idx = idx;
  est.r_threshold = opt.r_threshold;
  est.floor = opt.floor;
  est.window_width = w.width;
  est.reach = box;
  est.entries.reserve(dirs.size());
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    if (profs[k].lambdas.empty()) {
      WFEntry e;
      e.dir = dirs[k];
      e.resolved = false;
      e.lambda_max = lmax[k];
      est.entries.push_back(e);
      continue;
    }
    est.entries.push_back(detail::classify(profs[k], lmax[k], opt.r_threshold, opt.floor));
  }
  return est;
}

// ---- four-dimensional phase space (kernels of one-dimensional operators) ----

// Toroidal coordinates on S^3 with (x, xi) and (y, eta) as paired planes:
//   (x, y, xi, eta) = (cos a cos b, sin a cos c, cos a sin b, sin a sin c).
// Spacing h is tuned so that the count is close to target.
inline std::vector<SphereDirection> sphere3_directions(int target) {
  auto build = [](double h) {
    std::vector<SphereDirection> out;
    const int na = std::max(1, static_cast<int>(std::ceil(0.5 * std::numbers::pi / h)));
    for (int i = 0; i < na; ++i) {
      const double a = (i + 0.5) * 0.5 * std::numbers::pi / na;
      const int nb = std::max(1, static_cast<int>(std::lround(2 * std::numbers::pi * std::cos(a) / h)));
      const int nc = std::max(1, static_cast<int>(std::lround(2 * std::numbers::pi * std::sin(a) / h)));
      for (int jb = 0; jb < nb; ++jb) {
        const double b = 2 * std::numbers::pi * (jb + 0.5 * (i % 2)) / nb;
        for (int jc = 0; jc < nc; ++jc) {
          const double c = 2 * std::numbers::pi * (jc + 0.25 * (i % 2)) / nc;
          out.push_back(SphereDirection::normalized(
              {std::cos(a) * std::cos(b), std::sin(a) * std::cos(c), std::cos(a) * std::sin(b), std::sin(a) * std::sin(c)}));
        }
      }
    }
    return out;
  };
  double lo = 0.01, hi = 1.5;
  for (int it = 0; it < 40; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (static_cast<int>(build(mid).size()) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return build(hi);
}

// Approximate nearest-neighbour spacing of sphere3_directions(target).
inline double sphere3_spacing(int target) {
  // Volume of S^3 is 2 pi^2; one cube of side h per point.
  return std::cbrt(2.0 * std::numbers::pi * std::numbers::pi / target);
}

// Points in a geodesic cap of radius rho around z: a Fibonacci spiral of
// tangent directions with radii filling the ball, plus a small seeded jitter.
inline std::vector<SphereDirection> cap_refinement(const SphereDirection& z, double rho, int count, std::mt19937_64& rng) {
  const std::size_t D = z.z.size();
  std::vector<std::vector<double>> basis;
  for (std::size_t e = 0; e < D && basis.size() + 1 < D; ++e) {
    std::vector<double> v(D, 0.0);
    v[e] = 1.0;
    auto sub = [&](const std::vector<double>& b) {
      double dot = 0;
      for (std::size_t i = 0; i < D; ++i) dot += v[i] * b[i];
      for (std::size_t i = 0; i < D; ++i) v[i] -= dot * b[i];
    };
    sub(z.z);
    for (const auto& b : basis) sub(b);
    const double n = detail::norm(v);
    if (n < 1e-8) continue;
    for (auto& c : v) c /= n;
    basis.push_back(v);
  }
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  std::vector<SphereDirection> out;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    // Fibonacci direction on S^2 in the tangent space.
    const double u = 1.0 - 2.0 * (i + 0.5) / count;
    const double ring = std::sqrt(std::max(0.0, 1.0 - u * u));
    const double phi = golden * i;
    const double t[3] = {ring * std::cos(phi), ring * std::sin(phi), u};
    const double rad = rho * std::cbrt((i + 0.5) / count) * (1.0 + jitter(rng));
    std::vector<double> p = z.z;
    for (std::size_t b = 0; b < basis.size() && b < 3; ++b) {
      for (std::size_t k = 0; k < D; ++k) p[k] += rad * t[b] * basis[b][k];
    }
    out.push_back(SphereDirection::normalized(p));
  }
  return out;
}

struct KernelEstimatorOptions {
  EstimatorOptions base;
  int coarse_directions = 3500;
  int max_directions = 8000;
  int refine_per_singular = 12;
  std::uint64_t seed = 0;
};

// WF estimate of a two-variable kernel on S^3 by single-curve profiles.
// A coarse toroidal sweep is refined in caps around the singular directions.
inline WFEstimate estimate_kernel_wf(const SignalRef& ref, const WindowSpec& w, const AnisoIndex& idx,
                                     const KernelEstimatorOptions& kopt = {}) {
  if (signal_dim(ref) != 2) throw DomainError("estimate_kernel_wf: kernel must be a function of two variables");
  EstimatorOptions opt = kopt.base;
  opt.neighborhood = false;
  opt.directions = sphere3_directions(kopt.coarse_directions);
  WFEstimate est = estimate_wf(ref, w, idx, opt);
  std::mt19937_64 rng(kopt.seed);
  const auto sing = est.singular_directions();
  const int budget = kopt.max_directions - static_cast<int>(est.entries.size());
  if (!sing.empty() && budget > 0) {
    const int per = std::min(kopt.refine_per_singular, budget / static_cast<int>(sing.size()));
    if (per > 0) {
      const double rho = 0.5 * sphere3_spacing(static_cast<int>(opt.directions.size()));
      std::vector<SphereDirection> extra;
      for (const auto& z : sing) {
        auto cap = cap_refinement(z, rho, per, rng);
        extra.insert(extra.end(), cap.begin(), cap.end());
      }
      opt.directions = extra;
      const WFEstimate more = estimate_wf(ref, w, idx, opt);
      est.entries.insert(est.entries.end(), more.entries.begin(), more.entries.end());
    }
  }
  return est;
}

inline WFEstimate estimate_kernel_wf(const SampledSignal& K, const WindowSpec& w, const AnisoIndex& idx,
                                     const KernelEstimatorOptions& kopt = {}) {
  return estimate_kernel_wf(SignalRef(&K), w, idx, kopt);
}
inline WFEstimate estimate_kernel_wf(const ConvolutionKernel& K, const WindowSpec& w, const AnisoIndex& idx,
                                     const KernelEstimatorOptions& kopt = {}) {
  return estimate_kernel_wf(SignalRef(&K), w, idx, kopt);
}

// Largest angle from a direction of `from` to the nearest one of `to` (0 for
// empty `from`, pi when only `to` is empty).
inline double directed_set_angle(const std::vector<SphereDirection>& from, const std::vector<SphereDirection>& to) {
  if (from.empty()) return 0.0;
  if (to.empty()) return std::numbers::pi;
  double worst = 0.0;
  for (const auto& a : from) {
    double best = std::numbers::pi;
    for (const auto& b : to) best = std::min(best, angle_between(a, b));
    worst = std::max(worst, best);
  }
  return worst;
}

struct GraphCondition {
  bool wf1_empty = true;
  bool wf2_empty = true;
  std::vector<SphereDirection> offenders;
};

// Angle between a unit vector and the coordinate plane spanned by axes i, j.
inline double angle_to_plane(const std::vector<double>& z, std::size_t i, std::size_t j) {
  return std::acos(std::clamp(std::sqrt(z[i] * z[i] + z[j] * z[j]), 0.0, 1.0));
}

// WF_1: singular directions near {(x, 0, xi, 0)}; WF_2: near {(0, y, 0, -eta)}.
// Coordinates are ordered (x, y, xi, eta).
inline GraphCondition check_graph_condition(const WFEstimate& wf, double eps_angle) {
  GraphCondition g;
  for (const auto& e : wf.entries) {
    if (!e.singular) continue;
    if (e.dir.z.size() != 4) throw DomainError("check_graph_condition: expects directions on S^3");
    const bool near1 = angle_to_plane(e.dir.z, 0, 2) < eps_angle;
    const bool near2 = angle_to_plane(e.dir.z, 1, 3) < eps_angle;
    if (near1) g.wf1_empty = false;
    if (near2) g.wf2_empty = false;
    if (near1 || near2) g.offenders.push_back(e.dir);
  }
  return g;
}

struct ConeConstant {
  bool ok = true;
  double c = 1.0;
  std::string failure;
};

// Smallest c with c^{-1} A < B < c A on every singular direction, where
// A = |x|^{1/t} + |xi|^{1/s} and B = |y|^{1/t} + |eta|^{1/s}.
inline ConeConstant cone_constant(const WFEstimate& wf, const AnisoIndex& idx) {
  ConeConstant res;
  for (const auto& e : wf.entries) {
    if (!e.singular) continue;
    const auto& z = e.dir.z;
    if (z.size() != 4) throw DomainError("cone_constant: expects directions on S^3");
    const double A = std::pow(std::abs(z[0]), 1 / idx.t) + std::pow(std::abs(z[2]), 1 / idx.s);
    const double B = std::pow(std::abs(z[1]), 1 / idx.t) + std::pow(std::abs(z[3]), 1 / idx.s);
    if (A < 1e-12 || B < 1e-12) {
      res.ok = false;
      res.c = std::numeric_limits<double>::infinity();
      res.failure = "singular direction with a vanishing block; graph condition violated";
      return res;
    }
    res.c = std::max(res.c, std::max(A / B, B / A));
  }
  return res;
}

// ---- export ----

inline nlohmann::json to_json(const SphereDirection& z) { return z.z; }

inline nlohmann::json to_json(const RateFit& f) {
  nlohmann::json j;
  j["rhat"] = f.sentinel() ? nlohmann::json("inf") : nlohmann::json(f.rhat);
  j["intercept"] = f.intercept;
  j["residual"] = f.residual;
  j["n_valid"] = f.n_valid;
  return j;
}

inline nlohmann::json to_json(const WFEstimate& est) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : est.entries) {
    nlohmann::json j = to_json(e.fit);
    j["dir"] = e.dir.z;
    j["singular"] = e.singular;
    j["resolved"] = e.resolved;
    j["lambda_max"] = e.lambda_max;
    entries.push_back(j);
  }
  return {{"idx", {{"t", est.idx.t}, {"s", est.idx.s}}},
          {"threshold", est.r_threshold},
          {"floor", est.floor},
          {"window_width", est.window_width},
          {"reach", {{"x_max", est.reach.x_max}, {"xi_max", est.reach.xi_max}}},
          {"singular_count", est.singular_count()},
          {"entries", entries}};
}

inline void write_profile_csv(const DecayProfile& p, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("write_profile_csv: cannot open " + path);
  os << std::setprecision(17) << "lambda,magnitude,log_magnitude\n";
  for (std::size_t k = 0; k < p.lambdas.size(); ++k) {
    os << p.lambdas[k] << ',' << p.magnitudes[k] << ',';
    if (p.magnitudes[k] > 0) {
      os << std::log(p.magnitudes[k]);
    } else {
      os << "-inf";
    }
    os << '\n';
  }
}

}  // namespace gswf
