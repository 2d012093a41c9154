#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "gswf/propagator.hpp"
#include "gswf/stft.hpp"

using namespace gswf;
using C = std::complex<double>;

namespace {

PolynomialData xi2() { return PolynomialData::monomial(1, {2}); }

double rel_l2(const SampledSignal& a, const SampledSignal& b) {
  double num = 0, den = 0;
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    num += std::norm(a.values[k] - b.values[k]);
    den += std::norm(b.values[k]);
  }
  return std::sqrt(num / den);
}

// exp(-beta x^2) evolved by e^{-it D^2}: (1 + 4 i beta t)^{-1/2} exp(-beta x^2 / (1 + 4 i beta t)).
SampledSignal gaussian_chirp(C beta, double t, int n, double dx) {
  SampledSignal s(1, n, dx);
  const C q = 1.0 + 4.0 * C(0, 1) * beta * t;
  for (int j = 0; j < n; ++j) {
    const double x = s.coord(j);
    s.values[j] = std::exp(-beta * x * x / q) / std::sqrt(q);
  }
  return s;
}

}  // namespace

TEST(Propagator, ZeroTimeIsIdentity) {
  const auto u = make_windowed_chirp(PolynomialData::monomial(1, {2}), 1024, 0.04, 3.0);
  const auto v = propagate(u, EvolutionSpec(xi2(), 0.0));
  EXPECT_EQ(u.values, v.values);
}

TEST(Propagator, UnitaryInvertibleAndGroupLaw) {
  const auto u = make_windowed_chirp(PolynomialData::univariate(std::vector<double>{0, 0.5, 1.0}), 4096, 0.04, 3.0);
  const EvolutionSpec a(xi2(), 0.1), b(xi2(), 0.05), ab(xi2(), 0.15), back(xi2(), -0.1);
  const auto ua = propagate(u, a);
  EXPECT_LT(std::abs(ua.l2_norm() / u.l2_norm() - 1.0), 1e-10);
  EXPECT_LT(rel_l2(propagate(ua, back), u), 1e-9);
  EXPECT_LT(rel_l2(propagate(propagate(u, a), b), propagate(u, ab)), 1e-9);
}

TEST(Propagator, EvolvedGaussianChirpMatchesClosedForm) {
  const int n = 2048;
  const double dx = 0.05, t = 0.25;
  const C beta(1.0 / 18.0, -1.0);
  const auto u0 = gaussian_chirp(beta, 0.0, n, dx);
  const auto ut = propagate(u0, EvolutionSpec(xi2(), t));
  EXPECT_LT(rel_l2(ut, gaussian_chirp(beta, t, n, dx)), 1e-9);
}

TEST(Propagator, GuardRejectsUnresolvedMultiplier) {
  const auto u = make_gaussian(1, 1024, 0.04, 1.0);
  try {
    propagate(u, EvolutionSpec(xi2(), 0.25));
    FAIL() << "expected AliasingError";
  } catch (const AliasingError& e) {
    EXPECT_NE(std::string(e.what()).find("use n >="), std::string::npos);
  }
  EXPECT_NO_THROW(propagate(u, EvolutionSpec(xi2(), 0.02)));
}

TEST(EvolutionSpec, ValidationAndJson) {
  EXPECT_THROW(EvolutionSpec(PolynomialData::monomial(1, {1}), 0.1), DomainError);
  const EvolutionSpec s(PolynomialData::univariate(std::vector<double>{0, 1, 3}), -0.4);
  const auto r = EvolutionSpec::from_json(s.to_json());
  EXPECT_EQ(r.time, -0.4);
  EXPECT_EQ(r.symbol.coefficient({2}), 3.0);
  EXPECT_THROW(EvolutionSpec::from_json(nlohmann::json{{"time", 1}}), ConfigError);
  EXPECT_THROW(EvolutionSpec::from_json(nlohmann::json{{"time", 1}, {"symbol", PolynomialData::monomial(1, {1}).to_json()}}),
               ConfigError);
}

TEST(Kernel, ZeroTimeIsMollifierOnDiagonal) {
  const int n = 64;
  const double dx = 0.1;
  auto check = [&](std::optional<double> width, double tol) {
    const auto ks = kernel_signal(EvolutionSpec(xi2(), 0.0), n, dx, width);
    const double wm = ks.mollifier_width;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double z = (i - j) * dx;
        const double want = wm / std::sqrt(2 * std::numbers::pi) * std::exp(-0.5 * wm * wm * z * z);
        EXPECT_LT(std::abs(ks.kernel.value(i, j) - want), tol);
      }
    }
  };
  // The default width leaves a relative tail e^{-8} at the band edge; the
  // discrete transform then differs from the continuum by that order.
  const double wm = 0.25 * std::numbers::pi / dx;
  EXPECT_DOUBLE_EQ(kernel_signal(EvolutionSpec(xi2(), 0.0), n, dx).mollifier_width, wm);
  check(std::nullopt, 1e-3 * wm);
  check(0.12 * std::numbers::pi / dx, 1e-10);
}

TEST(Kernel, FreeParticleKernelMatchesClosedForm) {
  const int n = 128;
  const double dx = 0.25, t = 0.3;
  const auto ks = kernel_signal(EvolutionSpec(xi2(), t), n, dx, 0.12 * std::numbers::pi / dx);
  const double wm = ks.mollifier_width;
  const C a = 1.0 / (2 * wm * wm) + C(0, t);
  double worst = 0;
  for (int k = 1; k < 2 * n; ++k) {
    const double z = (k - n) * dx;
    const C want = std::exp(-z * z / (4.0 * a)) / std::sqrt(2.0 * a) / std::sqrt(2 * std::numbers::pi);
    worst = std::max(worst, std::abs(ks.kernel.k1d.values[k] - want));
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(Kernel, TranslationStructure) {
  const int n = 64;
  const auto ks = kernel_signal(EvolutionSpec(PolynomialData::univariate(std::vector<double>{0, 0.3, 1.0}), 0.2), n, 0.25);
  const auto K = ks.kernel.materialize();
  for (int a = 1; a < 5; ++a) {
    for (int i = 0; i + a < n; ++i) {
      for (int j = 0; j + a < n; ++j) {
        EXPECT_EQ(K.values[static_cast<std::size_t>(i + a) * n + j + a], K.values[static_cast<std::size_t>(i) * n + j]);
      }
    }
  }
}

TEST(Flow, HamiltonianFlow) {
  const EvolutionSpec s(xi2(), 0.5);
  const auto p = hamiltonian_flow(s, PhasePoint(0.0, 1.0));
  EXPECT_DOUBLE_EQ(p.x[0], 1.0);
  EXPECT_DOUBLE_EQ(p.xi[0], 1.0);
  // Lower-order terms do not move singularities.
  const EvolutionSpec low(PolynomialData::univariate(std::vector<double>{0, 7.0, 1.0}), 0.5);
  EXPECT_DOUBLE_EQ(hamiltonian_flow(low, PhasePoint(0.0, 1.0)).x[0], 1.0);
  const PhasePoint q(0.3, -1.7);
  const auto once = hamiltonian_flow(EvolutionSpec(xi2(), 0.7), q);
  const auto twice = hamiltonian_flow(EvolutionSpec(xi2(), 0.2), hamiltonian_flow(EvolutionSpec(xi2(), 0.5), q));
  EXPECT_NEAR(once.x[0], twice.x[0], 1e-14);
  EXPECT_EQ(hamiltonian_flow(EvolutionSpec(xi2(), 0.0), q).x[0], q.x[0]);
}

TEST(Flow, PredictTransport) {
  const EvolutionSpec s(xi2(), 0.25);
  const std::vector<SphereDirection> in{SphereDirection::normalized({1, 2}), SphereDirection::normalized({-1, -2})};
  const auto out = predict_transport(in, s, AnisoIndex(1.2, 1.2));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_LT(angle_between(out[0], SphereDirection::normalized({2, 2})), 1e-12);
  EXPECT_LT(angle_between(out[1], SphereDirection::normalized({-2, -2})), 1e-12);
  const auto same = predict_transport(in, s, AnisoIndex(3.0, 1.2));
  EXPECT_EQ(same[0].z, in[0].z);
  EXPECT_EQ(predict_transport(in, EvolutionSpec(xi2(), 0.0), AnisoIndex(1.2, 1.2))[0].z, in[0].z);
  EXPECT_THROW(predict_transport(in, s, AnisoIndex(1.0, 1.0)), UnsupportedRegime);
  EXPECT_THROW(predict_transport(in, s, AnisoIndex(1.1, 1.2)), UnsupportedRegime);
}

TEST(Flow, TransportIsRepresentativeIndependent) {
  // Cubic symbol, idx (2.4, 1.2): lifting at lambda = 1 or lambda = 3 gives the same direction.
  const EvolutionSpec s(PolynomialData::monomial(1, {3}), 0.4);
  const AnisoIndex idx(2.4, 1.2);
  const auto z = SphereDirection::normalized({0.3, -0.8});
  const auto a = predict_transport({z}, s, idx)[0];
  const auto b = project(idx, hamiltonian_flow(s, scale_point(idx, z.point(), 3.0)));
  EXPECT_LT(angle_between(a, b), 1e-12);
}

TEST(Kernel, ConvolutionStftMatchesGridQuadrature) {
  const int n = 256;
  const double dx = 0.2;
  const auto ks = kernel_signal(EvolutionSpec(xi2(), 0.3), n, dx);
  const auto K = ks.kernel.materialize();
  const WindowSpec w{0.7, true};
  const PhasePoint pts[] = {PhasePoint({0.3, -1.1}, {2.0, -4.5}), PhasePoint({-2.0, 1.5}, {-6.0, 7.0}),
                            PhasePoint({0.0, 0.0}, {0.0, 0.0}), PhasePoint({3.0, 3.0}, {10.0, -10.0})};
  for (const auto& p : pts) {
    const C a = stft_point(ks.kernel, w, p), b = stft_point(K, w, p);
    EXPECT_LT(std::abs(a - b), 1e-12 * std::max(1.0, std::abs(b))) << a << " vs " << b;
  }
  EXPECT_THROW(stft_point(ks.kernel, w, PhasePoint({21.0, 0.0}, {0.0, 0.0})), TruncationError);
}
