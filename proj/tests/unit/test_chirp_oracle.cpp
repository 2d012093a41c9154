#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "gswf/chirp_oracle.hpp"

using namespace gswf;

namespace {

PolynomialData mono(int k) { return PolynomialData::monomial(1, {k}); }

bool contains_dir(const std::vector<SphereDirection>& v, std::vector<double> z, double tol) {
  const auto q = SphereDirection::normalized(std::move(z));
  return std::any_of(v.begin(), v.end(), [&](const auto& d) { return angle_between(d, q) < tol; });
}

WFEstimate estimate_from(const AnisoIndex& idx, const std::vector<std::pair<SphereDirection, bool>>& entries) {
  WFEstimate e;
  e.idx = idx;
  for (const auto& [d, s] : entries) {
    WFEntry en;
    en.dir = d;
    en.singular = s;
    e.entries.push_back(en);
  }
  return e;
}

}  // namespace

TEST(Rational, ParsesFractionsAndDecimals) {
  const auto a = Rational::parse("6/5");
  const auto b = Rational::parse("1.2");
  EXPECT_EQ(a.num, 6);
  EXPECT_EQ(a.den, 5);
  EXPECT_EQ(b.num, 6);
  EXPECT_EQ(b.den, 5);
  EXPECT_EQ(Rational::parse("-3").num, -3);
  EXPECT_THROW(Rational::parse("1/0"), ConfigError);
  EXPECT_THROW(Rational::parse("x"), ConfigError);
  EXPECT_THROW(Rational::parse("1.2.3"), ConfigError);
  EXPECT_EQ(Rational::compare_scaled(Rational::parse("0.4"), 3, Rational::parse("1.2")), 0);
}

TEST(ChirpOracle, QuadraticGraphRegime) {
  const auto p = predict_chirp_wf(mono(2), AnisoIndex(1.2, 1.2));
  EXPECT_EQ(p.kind, ChirpRegime::GradientGraph);
  EXPECT_TRUE(p.equality);
  const auto d = p.distinct_directions();
  ASSERT_EQ(d.size(), 2u);
  EXPECT_TRUE(contains_dir(d, {1, 2}, 1e-12));
  EXPECT_TRUE(contains_dir(d, {-1, -2}, 1e-12));
}

TEST(ChirpOracle, CubicAnisotropicGraph) {
  // (lambda^0.6 r, lambda^1.2 3r^2) on the unit circle: r^2 + 9 r^4 = 1.
  const double r = std::sqrt((-1.0 + std::sqrt(37.0)) / 18.0);
  const auto p = predict_chirp_wf(mono(3), AnisoIndex(0.6, 1.2));
  EXPECT_EQ(p.kind, ChirpRegime::GradientGraph);
  EXPECT_TRUE(p.equality);
  const auto d = p.distinct_directions();
  ASSERT_EQ(d.size(), 2u);
  EXPECT_TRUE(contains_dir(d, {r, 3 * r * r}, 1e-10));
  EXPECT_TRUE(contains_dir(d, {-r, 3 * r * r}, 1e-10));
}

TEST(ChirpOracle, GeneratorIsProjectionConsistent) {
  auto phi = PolynomialData::univariate(std::vector<double>{0.0, 1.0, 0.0, 0.0, 0.5});
  const AnisoIndex idx(0.5, 1.5);
  const auto p = predict_chirp_wf(phi, idx);
  const auto dirs = p.directions(50);
  ASSERT_EQ(dirs.size(), 100u);
  const double lo = std::log(1e-2), hi = std::log(1e2);
  for (int sgn = 0; sgn < 2; ++sgn) {
    for (int k = 0; k < 50; ++k) {
      const double x = (sgn == 0 ? 1 : -1) * std::exp(lo + (hi - lo) * k / 49);
      const PhasePoint pt(x, 2.0 * x * x * x);
      const SphereDirection one[1] = {dirs[sgn * 50 + k]};
      EXPECT_LT(dist_to_conic_set(idx.sigma(), one, pt), 1e-9);
    }
  }
}

TEST(ChirpOracle, PositionAxisRegime) {
  const auto p = predict_chirp_wf(mono(2), AnisoIndex(1.0, 2.5));
  EXPECT_EQ(p.kind, ChirpRegime::XAxis);
  EXPECT_TRUE(p.equality);
  EXPECT_TRUE(p.boundary);
  const auto d = p.distinct_directions();
  ASSERT_EQ(d.size(), 2u);
  EXPECT_TRUE(contains_dir(d, {1, 0}, 1e-15));
  EXPECT_TRUE(contains_dir(d, {-1, 0}, 1e-15));
  EXPECT_FALSE(predict_chirp_wf(mono(2), AnisoIndex(1.5, 2.5)).boundary);
}

TEST(ChirpOracle, FrequencyAxisRegime) {
  const auto odd = predict_chirp_wf(mono(3), AnisoIndex(1.5, 1.2));
  EXPECT_EQ(odd.kind, ChirpRegime::XiAxis);
  EXPECT_FALSE(odd.equality);
  const auto even = predict_chirp_wf(mono(2), AnisoIndex(1.5, 1.2));
  EXPECT_EQ(even.kind, ChirpRegime::XiAxis);
  EXPECT_TRUE(even.equality);
  EXPECT_TRUE(contains_dir(even.distinct_directions(), {0, -1}, 1e-15));
}

TEST(ChirpOracle, NonEllipticFrequencyRegimeIsRejected) {
  const auto phi = PolynomialData::monomial(2, {1, 1});
  EXPECT_THROW(predict_chirp_wf(phi, AnisoIndex(1.5, 1.2)), PreconditionError);
}

TEST(ChirpOracle, IndicesOutsideRegimesAreUnsupported) {
  EXPECT_THROW(predict_chirp_wf(mono(2), AnisoIndex(0.8, 0.8)), UnsupportedRegime);
  EXPECT_THROW(predict_chirp_wf(mono(2), AnisoIndex(0.9, 1.0)), UnsupportedRegime);
  EXPECT_THROW(predict_chirp_wf(mono(2), AnisoIndex(1.5, 0.9)), UnsupportedRegime);
  EXPECT_THROW(predict_chirp_wf(mono(1), AnisoIndex(1.5, 1.5)), DomainError);
}

TEST(ChirpOracle, ExactComparisonDecidesRegime) {
  // Within the floating slack the two indices look equal; as rationals they are not.
  const AnisoIndex idx(1.2, 1.2000000000001);
  EXPECT_EQ(predict_chirp_wf(mono(2), idx).kind, ChirpRegime::GradientGraph);
  const ExactIndex ex{Rational::parse("1.2"), Rational::parse("1.2000000000001")};
  EXPECT_EQ(predict_chirp_wf(mono(2), idx, ex).kind, ChirpRegime::XAxis);
  // 0.4 * 3 is not 1.2 in floating point, but the rationals agree.
  const ExactIndex q{Rational::parse("2/5"), Rational::parse("6/5")};
  EXPECT_EQ(predict_chirp_wf(mono(4), AnisoIndex(0.4, 1.2), q).kind, ChirpRegime::GradientGraph);
}

TEST(ChirpOracle, Ellipticity) {
  EXPECT_TRUE(is_elliptic(mono(2)));
  EXPECT_TRUE(is_elliptic(mono(3)));
  EXPECT_FALSE(is_elliptic(PolynomialData::monomial(2, {1, 1})));
  EXPECT_TRUE(is_elliptic(PolynomialData(2).add({2, 0}, 1.0).add({0, 2}, 1.0)));
  EXPECT_THROW(is_elliptic(PolynomialData::univariate(std::vector<double>{0, 1, 1})), DomainError);
}

TEST(CompareWf, ExactMatchPasses) {
  const AnisoIndex idx(1.2, 1.2);
  const auto p = predict_chirp_wf(mono(2), idx);
  const auto e = estimate_from(idx, {{SphereDirection::normalized({1, 2}), true},
                                     {SphereDirection::normalized({-1, -2}), true},
                                     {SphereDirection::normalized({1, 0}), false}});
  const auto r = compare_wf(e, p, 0.09);
  EXPECT_TRUE(r.pass);
  EXPECT_TRUE(r.violations.empty());
  EXPECT_TRUE(r.misses.empty());
  EXPECT_NEAR(r.max_angle_error, 0.0, 1e-12);
}

TEST(CompareWf, EmptyEstimateMissesEverything) {
  const AnisoIndex idx(1.2, 1.2);
  const auto p = predict_chirp_wf(mono(2), idx);
  const auto r = compare_wf(estimate_from(idx, {}), p, 0.09);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.misses.size(), 2u);
}

TEST(CompareWf, ViolationIsReported) {
  const AnisoIndex idx(1.2, 1.2);
  const auto p = predict_chirp_wf(mono(2), idx);
  const auto e = estimate_from(idx, {{SphereDirection::normalized({1, 2}), true},
                                     {SphereDirection::normalized({-1, -2}), true},
                                     {SphereDirection::normalized({0, 1}), true}});
  const auto r = compare_wf(e, p, 0.09);
  EXPECT_FALSE(r.pass);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_NEAR(r.max_angle_error, std::atan(0.5), 1e-12);
}

TEST(CompareWf, QuadraticChirpEstimatePasses) {
  const auto c = AnalyticSignal::chirp(mono(2));
  const AnisoIndex idx(1.2, 1.2);
  EstimatorOptions opt;
  opt.reach = Reach{100.0, 200.0};
  const auto est = estimate_wf(&c, WindowSpec{1.0, true}, idx, opt);
  const auto r = compare_wf(est, predict_chirp_wf(mono(2), idx), 0.09);
  EXPECT_TRUE(r.pass) << to_json(r).dump();
  EXPECT_LE(r.max_angle_error, 0.09);
}
