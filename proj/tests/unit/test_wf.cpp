#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gswf/wf_estimator.hpp"

using namespace gswf;

namespace {

DecayProfile synthetic(double (*f)(double), double lo, double hi, int n) {
  DecayProfile p;
  p.lambdas = geometric_lambdas(lo, hi, n);
  for (double l : p.lambdas) {
    p.magnitudes.push_back(f(l));
    p.floor_mask.push_back(f(l) <= 1e-14);
  }
  return p;
}

double angle_to_axis(const SphereDirection& z, double axis_angle) {
  double d = std::abs(std::remainder(z.angle() - axis_angle, std::numbers::pi));
  return d;
}

}  // namespace

TEST(FitRate, RecoversExponentialRate) {
  const auto p = synthetic([](double l) { return 0.7 * std::exp(-3.0 * l); }, 2.0, 9.0, 24);
  const auto f = fit_rate(p);
  EXPECT_NEAR(f.rhat, 3.0, 1e-9);
  EXPECT_NEAR(f.intercept, std::log(0.7), 1e-8);
  EXPECT_LT(f.residual, 1e-9);
}

TEST(FitRate, ConstantHasZeroRate) {
  const auto p = synthetic([](double) { return 0.25; }, 2.0, 50.0, 24);
  EXPECT_NEAR(fit_rate(p).rhat, 0.0, 1e-12);
}

TEST(FitRate, SuperExponentialDecayIsFast) {
  const auto p = synthetic([](double l) { return std::exp(-l * l); }, 2.0, 20.0, 24);
  const auto f = fit_rate(p);
  EXPECT_FALSE(f.sentinel());
  EXPECT_GT(f.rhat, 5.0);
}

TEST(FitRate, FewValidSamplesGiveSentinel) {
  const auto p = synthetic([](double l) { return std::exp(-30.0 * l); }, 1.0, 10.0, 24);
  const auto f = fit_rate(p);
  EXPECT_TRUE(f.sentinel());
  EXPECT_LT(f.n_valid, 3);
}

TEST(Geometry, CurveLambdaMaxHitsBox) {
  const AnisoIndex idx(1.0, 2.0);
  const auto z = SphereDirection::normalized({0.6, 0.8});
  const Reach box{30.0, 50.0};
  const double lam = curve_lambda_max(idx, z, box, 1e9);
  EXPECT_NEAR(lam, std::min(30.0 / 0.6, std::sqrt(50.0 / 0.8)), 1e-12);
  EXPECT_NEAR(curve_lambda_max(idx, z, box, 3.0), 3.0, 0.0);
}

TEST(DecayProfile, ClipsAtReachAndWarns) {
  const auto g = AnalyticSignal::gaussian(1.0);
  const WindowSpec w{1.0, true};
  const auto z = SphereDirection::from_angle(0.3);
  const auto p = decay_profile(&g, w, AnisoIndex(1, 1), z, {1.0, 40.0}, 16, Reach{10.0, 10.0});
  EXPECT_TRUE(p.clipped);
  EXPECT_FALSE(p.warnings.empty());
  for (double l : p.lambdas) EXPECT_LE(l * std::cos(0.3), 10.0 + 1e-9);
  EXPECT_THROW(decay_profile(&g, w, AnisoIndex(1, 1), z, {5.0, 400.0}, 16, Reach{10.0, 10.0}), RangeError);
  EXPECT_THROW(decay_profile(&g, w, AnisoIndex(1, 1), z, {1.0, 4.0}, 4, Reach{10.0, 10.0}), RangeError);
}

TEST(DecayProfile, MatchesClosedFormAlongCurve) {
  const auto one = AnalyticSignal::constant_one();
  const WindowSpec w{1.0, true};
  const auto z = SphereDirection::from_angle(0.2);
  const auto p = decay_profile(&one, w, AnisoIndex(1, 1), z, {1.0, 10.0}, 8, Reach{100.0, 100.0});
  for (std::size_t k = 0; k < p.lambdas.size(); ++k) {
    const double xi = p.lambdas[k] * std::sin(0.2);
    EXPECT_NEAR(p.magnitudes[k], std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * xi * xi), 1e-12);
  }
}

TEST(DecayProfile, AnalyticWithoutReachIsRejected) {
  const auto one = AnalyticSignal::constant_one();
  EXPECT_THROW(decay_profile(&one, WindowSpec{1.0, true}, AnisoIndex(1, 1), SphereDirection::from_angle(0), {1, 10}, 8),
               PreconditionError);
}

TEST(EstimateWf, GaussianIsRegularEverywhere) {
  const auto g = AnalyticSignal::gaussian(1.0);
  EstimatorOptions opt;
  opt.reach = Reach{12.0, 12.0};
  const auto est = estimate_wf(&g, WindowSpec{1.0, true}, AnisoIndex(1, 1), opt);
  EXPECT_EQ(est.entries.size(), 720u);
  EXPECT_EQ(est.singular_count(), 0u);
}

TEST(EstimateWf, SampledGaussianIsRegularEverywhere) {
  const auto u = make_gaussian(1, 1024, 0.05, 1.0);
  EstimatorOptions opt;
  opt.sphere_samples = 360;
  const auto est = estimate_wf(&u, WindowSpec{1.0, true}, AnisoIndex(1, 1), opt);
  EXPECT_EQ(est.singular_count(), 0u);
  std::vector<double> lmax{1.0};
  EXPECT_TRUE(wf_profiles(&u, WindowSpec{1.0, true}, AnisoIndex(1, 1), {}, opt, est.reach, &lmax).empty());
  EXPECT_TRUE(lmax.empty());
}

TEST(EstimateWf, ConstantIsSingularAlongPositionAxis) {
  const auto one = AnalyticSignal::constant_one();
  EstimatorOptions opt;
  opt.reach = Reach{100.0, 100.0};
  const auto est = estimate_wf(&one, WindowSpec{1.0, true}, AnisoIndex(1, 1), opt);
  bool plus = false, minus = false;
  for (const auto& e : est.entries) {
    if (!e.singular) continue;
    EXPECT_LT(angle_to_axis(e.dir, 0.0), 0.2) << e.dir.angle();
    if (e.dir.z[0] > 0.999) plus = true;
    if (e.dir.z[0] < -0.999) minus = true;
  }
  EXPECT_TRUE(plus);
  EXPECT_TRUE(minus);
}

TEST(EstimateWf, DeltaIsSingularAlongFrequencyAxis) {
  const auto delta = AnalyticSignal::dirac_delta();
  EstimatorOptions opt;
  opt.reach = Reach{100.0, 100.0};
  const auto est = estimate_wf(&delta, WindowSpec{1.0, true}, AnisoIndex(1, 1), opt);
  bool plus = false, minus = false;
  for (const auto& e : est.entries) {
    if (!e.singular) continue;
    EXPECT_LT(angle_to_axis(e.dir, 0.5 * std::numbers::pi), 0.2) << e.dir.angle();
    if (e.dir.z[1] > 0.999) plus = true;
    if (e.dir.z[1] < -0.999) minus = true;
  }
  EXPECT_TRUE(plus);
  EXPECT_TRUE(minus);
}

TEST(EstimateWf, NeighborhoodSupDominatesCurve) {
  const auto c = AnalyticSignal::chirp(PolynomialData::monomial(1, {2}));
  EstimatorOptions opt;
  opt.sphere_samples = 180;
  opt.reach = Reach{30.0, 60.0};
  opt.n_lambda = 12;
  const WindowSpec w{1.0, true};
  const AnisoIndex idx(1, 1);
  EstimatorOptions curve = opt;
  curve.neighborhood = false;
  const Reach box = *opt.reach;
  const auto dirs = circle_directions(180);
  const auto a = wf_profiles(&c, w, idx, dirs, opt, box);
  const auto b = wf_profiles(&c, w, idx, dirs, curve, box);
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    for (std::size_t j = 0; j < a[k].magnitudes.size(); ++j) EXPECT_GE(a[k].magnitudes[j], b[k].magnitudes[j]);
  }
}

TEST(EstimateWf, LatticeAgreesWithPointwiseStft) {
  // Every lattice value must be a true |V| sample: compare a few against stft_point.
  const auto c = AnalyticSignal::chirp(PolynomialData::univariate(std::vector<double>{0.0, 0.3, 0.0, 0.05}));
  const WindowSpec w{1.0, true};
  int checked = 0;
  double worst = 0.0;
  detail::lattice_chirp(c.phase, w, Reach{6.0, 8.0}, 0, 1, [&](double x, double xi, double mag) {
    if (checked++ % 97 != 0) return;
    worst = std::max(worst, std::abs(mag - std::abs(stft_point(c, w, PhasePoint(x, xi)))));
  });
  EXPECT_GT(checked, 1000);
  EXPECT_LT(worst, 1e-10);
}

TEST(EstimateWf, SampledLatticeAgreesWithPointwiseStft) {
  const auto u = make_gaussian(1, 512, 0.05, 0.7);
  const WindowSpec w{1.0, true};
  int checked = 0;
  double worst = 0.0;
  detail::lattice_sampled(u, w, default_reach(u, w), 0, 1, [&](double x, double xi, double mag) {
    if (checked++ % 53 != 0) return;
    worst = std::max(worst, std::abs(mag - std::abs(stft_point(u, w, PhasePoint(x, xi)))));
  });
  EXPECT_GT(checked, 1000);
  EXPECT_LT(worst, 1e-12);
}

TEST(EstimateWf, DeterministicAcrossThreadCounts) {
  const auto c = AnalyticSignal::chirp(PolynomialData::monomial(1, {2}));
  EstimatorOptions opt;
  opt.sphere_samples = 180;
  opt.reach = Reach{40.0, 80.0};
  opt.threads = 1;
  const auto a = estimate_wf(&c, WindowSpec{1.0, true}, AnisoIndex(1.2, 1.2), opt);
  opt.threads = 4;
  const auto b = estimate_wf(&c, WindowSpec{1.0, true}, AnisoIndex(1.2, 1.2), opt);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  for (std::size_t k = 0; k < a.entries.size(); ++k) {
    EXPECT_EQ(a.entries[k].singular, b.entries[k].singular);
    if (!a.entries[k].fit.sentinel()) {
      EXPECT_EQ(a.entries[k].fit.rhat, b.entries[k].fit.rhat);
    }
  }
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(EstimateWf, ShortCurvesAreUnresolved) {
  const auto g = AnalyticSignal::gaussian(1.0);
  EstimatorOptions opt;
  opt.reach = Reach{2.2, 100.0};
  opt.sphere_samples = 90;
  const auto est = estimate_wf(&g, WindowSpec{1.0, true}, AnisoIndex(1, 1), opt);
  EXPECT_FALSE(est.entries[0].resolved);
  EXPECT_FALSE(est.entries[0].singular);
  EXPECT_TRUE(est.entries[22].resolved);
}

TEST(Sphere3, CountAndNormalization) {
  const auto dirs = sphere3_directions(3500);
  EXPECT_GT(dirs.size(), 3000u);
  EXPECT_LE(dirs.size(), 3500u);
  for (const auto& z : dirs) {
    double n = 0;
    for (double v : z.z) n += v * v;
    EXPECT_NEAR(n, 1.0, 1e-12);
  }
  // Coverage: random probe points have a sample within a few spacings.
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  const double h = sphere3_spacing(static_cast<int>(dirs.size()));
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = SphereDirection::normalized({g(rng), g(rng), g(rng), g(rng)});
    double best = 10;
    for (const auto& z : dirs) best = std::min(best, angle_between(p, z));
    EXPECT_LT(best, 1.5 * h);
  }
}

TEST(Sphere3, CapRefinementStaysInCap) {
  std::mt19937_64 rng(1);
  const auto z = SphereDirection::normalized({0.5, 0.5, 0.5, -0.5});
  const auto cap = cap_refinement(z, 0.1, 40, rng);
  ASSERT_EQ(cap.size(), 40u);
  for (const auto& p : cap) EXPECT_LT(angle_between(p, z), 0.11);
}

TEST(KernelChecks, GraphConditionAndConeConstant) {
  WFEstimate est;
  est.idx = AnisoIndex(1, 1);
  WFEntry e;
  e.singular = true;
  e.dir = SphereDirection::normalized({1, 1, 0, 0});
  est.entries.push_back(e);
  e.dir = SphereDirection::normalized({0.6, 0, 1, -1});
  est.entries.push_back(e);
  const auto g = check_graph_condition(est, 0.05);
  EXPECT_TRUE(g.wf1_empty);
  EXPECT_TRUE(g.wf2_empty);
  const auto c = cone_constant(est, est.idx);
  EXPECT_TRUE(c.ok);
  // A = |x| + |xi|, B = |y| + |eta|: first entry gives 1, second 1.6 / 1.
  EXPECT_NEAR(c.c, 1.6, 1e-12);

  e.dir = SphereDirection::normalized({1, 0, 0.3, 0});
  est.entries.push_back(e);
  const auto g2 = check_graph_condition(est, 0.05);
  EXPECT_FALSE(g2.wf1_empty);
  EXPECT_EQ(g2.offenders.size(), 1u);
  EXPECT_FALSE(cone_constant(est, est.idx).ok);
}
