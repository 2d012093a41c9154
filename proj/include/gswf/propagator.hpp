#pragma once

// Exact spectral solver for du/dt + i p(D) u = 0, the convolution kernel of
// e^{-itp(D)}, the Hamiltonian flow of the principal symbol and the induced
// transport of wave front directions.

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "gswf/aniso_geometry.hpp"
#include "gswf/errors.hpp"
#include "gswf/fft.hpp"
#include "gswf/polynomial.hpp"
#include "gswf/signal.hpp"

namespace gswf {

struct EvolutionSpec {
  PolynomialData symbol;
  double time = 0.0;

  EvolutionSpec() = default;
  EvolutionSpec(PolynomialData p, double t) : symbol(std::move(p)), time(t) { validate(); }

  void validate() const {
    if (symbol.degree() < 2) throw DomainError("EvolutionSpec: symbol order must be at least 2");
    if (!std::isfinite(time)) throw DomainError("EvolutionSpec: time must be finite");
  }
  int order() const { return symbol.degree(); }

  nlohmann::json to_json() const { return {{"symbol", symbol.to_json()}, {"time", time}}; }
  static EvolutionSpec from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("symbol") || !j.contains("time")) {
      throw ConfigError("evolution: expected {\"symbol\", \"time\"}");
    }
    try {
      return EvolutionSpec(PolynomialData::from_json(j.at("symbol")), j.at("time").get<double>());
    } catch (const DomainError& e) {
      throw ConfigError(std::string("evolution: ") + e.what());
    }
  }
};

namespace detail {

// Largest |t (p(xi + e_a dxi) - p(xi))| over the frequency lattice and axes.
inline double multiplier_step(const EvolutionSpec& spec, int d, int n, double dxi) {
  double worst = 0.0;
  std::vector<double> xi(d), nb(d);
  for_each_point(d, n, dxi, [&](std::size_t, std::span<const double> f) {
    std::copy(f.begin(), f.end(), xi.begin());
    const double p0 = spec.symbol.eval(xi);
    for (int a = 0; a < d; ++a) {
      nb = xi;
      nb[a] += dxi;
      worst = std::max(worst, std::abs(spec.time * (spec.symbol.eval(nb) - p0)));
    }
  });
  return worst;
}

inline void check_multiplier_resolution(const EvolutionSpec& spec, int d, int n, double dxi) {
  const double limit = 0.9 * std::numbers::pi;
  const double worst = multiplier_step(spec, d, n, dxi);
  if (worst > limit) {
    // The step scales roughly like 1/n at fixed dx.
    const auto suggest = fft::next_power_of_two(static_cast<std::size_t>(std::ceil(n * worst / limit)));
    std::ostringstream os;
    os << "propagator phase not resolved: max |t dp| per frequency bin = " << worst << " exceeds 0.9 pi; use n >= "
       << suggest << " at the same dx";
    throw AliasingError(os.str());
  }
}

}  // namespace detail

inline SampledSignal propagate(const SampledSignal& u0, const EvolutionSpec& spec) {
  spec.validate();
  if (spec.symbol.dim() != u0.dim) throw DomainError("propagate: symbol dimension does not match the signal");
  if (spec.time == 0.0) return u0;
  detail::check_multiplier_resolution(spec, u0.dim, u0.n, u0.dxi());
  SampledSignal hat = fourier(u0);
  detail::for_each_point(u0.dim, u0.n, hat.dx, [&](std::size_t k, std::span<const double> xi) {
    hat.values[k] *= std::polar(1.0, -spec.time * spec.symbol.eval(xi));
  });
  SampledSignal out = fourier(hat, true);
  out.dx = u0.dx;
  return out;
}

struct KernelSignal {
  ConvolutionKernel kernel;  // K(x, y) on the n x n grid, x the first axis
  double mollifier_width = 0.0;
};

// K_t(x, y) = k_t(x - y) with k_t = (2 pi)^{-1/2} F^{-1}(e^{-itp} m), where
// m(xi) = exp(-xi^2 / (2 w_moll^2)) makes k_t a function. Default
// w_moll = 0.25 xi_max.
inline KernelSignal kernel_signal(const EvolutionSpec& spec, int n, double dx,
                                  std::optional<double> mollifier_width = std::nullopt) {
  spec.validate();
  if (spec.symbol.dim() != 1) throw DomainError("kernel_signal: only one-dimensional symbols");
  const SampledSignal grid(1, n, dx);
  const double wm = mollifier_width.value_or(0.25 * grid.xi_max());
  if (!(wm > 0.0)) throw DomainError("kernel_signal: mollifier width must be positive");
  const int n2 = 2 * n;
  const double dxi = 2.0 * std::numbers::pi / (n2 * dx);
  detail::check_multiplier_resolution(spec, 1, n2, dxi);
  SampledSignal hat(1, n2, dxi);
  for (int k = 0; k < n2; ++k) {
    const double xi = hat.coord(k);
    const double xs[1] = {xi};
    hat.values[k] = std::polar(std::exp(-xi * xi / (2 * wm * wm)), -spec.time * spec.symbol.eval(xs));
  }
  SampledSignal k = fourier(hat, true);
  k.dx = dx;
  for (auto& v : k.values) v /= std::sqrt(2.0 * std::numbers::pi);
  return {ConvolutionKernel(std::move(k)), wm};
}

inline PhasePoint hamiltonian_flow(const EvolutionSpec& spec, const PhasePoint& p0) {
  if (static_cast<int>(p0.dim()) != spec.symbol.dim()) throw DomainError("hamiltonian_flow: dimension mismatch");
  const auto g = spec.symbol.principal_part().grad(p0.xi);
  PhasePoint out = p0;
  for (std::size_t i = 0; i < out.x.size(); ++i) out.x[i] += spec.time * g[i];
  return out;
}

// Image of WF directions under the flow. At idx.t = idx.s (m-1) directions are
// lifted at lambda = 1, flowed and projected back; for idx.t > idx.s (m-1) the
// set is invariant.
inline std::vector<SphereDirection> predict_transport(const std::vector<SphereDirection>& wf_in,
                                                      const EvolutionSpec& spec, const AnisoIndex& idx) {
  spec.validate();
  const int m = spec.order();
  const double r0 = idx.s * (m - 1);
  const double tol = 1e-12;
  if (!(r0 > 1.0 + tol) || idx.t < r0 - tol) {
    throw UnsupportedRegime("predict_transport: needs t >= s(m-1) > 1");
  }
  if (idx.t > r0 + tol || spec.time == 0.0) return wf_in;
  std::vector<SphereDirection> out;
  out.reserve(wf_in.size());
  for (const auto& z : wf_in) out.push_back(project(idx, hamiltonian_flow(spec, z.point())));
  return out;
}

}  // namespace gswf
