#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gswf/aniso_geometry.hpp"

using namespace gswf;

namespace {

double residual(const AnisoIndex& idx, const PhasePoint& p, double lam) {
  double nx = 0, nxi = 0;
  for (double v : p.x) nx += v * v;
  for (double v : p.xi) nxi += v * v;
  return std::abs(std::pow(lam, -2 * idx.t) * nx + std::pow(lam, -2 * idx.s) * nxi - 1.0);
}

}  // namespace

TEST(AnisoIndex, RejectsTrivialSpaces) {
  EXPECT_THROW(AnisoIndex(0.4, 0.5), DomainError);
  EXPECT_THROW(AnisoIndex(-1.0, 3.0), DomainError);
  EXPECT_NO_THROW(AnisoIndex(0.6, 0.6));
  EXPECT_DOUBLE_EQ(AnisoIndex(0.6, 1.2).sigma(), 2.0);
}

TEST(LambdaSolve, AxisClosedForms) {
  EXPECT_DOUBLE_EQ(lambda_solve({1, 2}, PhasePoint(0.0, 4.0)), 2.0);
  EXPECT_DOUBLE_EQ(lambda_solve({1, 2}, PhasePoint(3.0, 0.0)), 3.0);
}

TEST(LambdaSolve, UnitSphereIsFixed) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ang(0, 2 * std::numbers::pi), ix(0.55, 4.0);
  for (int i = 0; i < 200; ++i) {
    const double a = ang(rng);
    EXPECT_NEAR(lambda_solve({ix(rng), ix(rng)}, PhasePoint(std::cos(a), std::sin(a))), 1.0, 1e-12);
  }
}

TEST(LambdaSolve, ZeroPointIsDomainError) {
  EXPECT_THROW(lambda_solve({1, 2}, PhasePoint(0.0, 0.0)), DomainError);
  EXPECT_THROW(project({1, 2}, PhasePoint(0.0, 0.0)), DomainError);
}

TEST(LambdaSolve, ResidualAndQuasiHomogeneity) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ix(0.51, 5.0), coord(-50, 50), lmu(-4, 4);
  double worst_res = 0, worst_hom = 0;
  for (int i = 0; i < 10000; ++i) {
    const AnisoIndex idx(ix(rng), ix(rng));
    PhasePoint p({coord(rng), coord(rng)}, {coord(rng), coord(rng)});
    const double mu = std::exp(lmu(rng));
    const double lam = lambda_solve(idx, p);
    worst_res = std::max(worst_res, residual(idx, p, lam));
    const double lam2 = lambda_solve(idx, scale_point(idx, p, mu));
    worst_hom = std::max(worst_hom, std::abs(lam2 / (mu * lam) - 1.0));
  }
  EXPECT_LE(worst_res, 1e-12);
  EXPECT_LE(worst_hom, 1e-10);
}

TEST(LambdaSolve, MonotoneAlongCurves) {
  const AnisoIndex idx(0.7, 1.9);
  const PhasePoint p(0.3, -2.0);
  double prev = 0;
  for (double mu = 0.01; mu < 100; mu *= 1.3) {
    const double lam = lambda_solve(idx, scale_point(idx, p, mu));
    EXPECT_GT(lam, prev);
    prev = lam;
  }
}

TEST(LambdaSolve, FastSolverAgrees) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ix(0.51, 5.0), c(1e-3, 1e3);
  for (int i = 0; i < 2000; ++i) {
    const AnisoIndex idx(ix(rng), ix(rng));
    const double a = c(rng), b = c(rng);
    EXPECT_NEAR(lambda_from_norms(a, b, idx.t, idx.s) / lambda_solve(idx, PhasePoint(a, b)), 1.0, 1e-12);
  }
}

TEST(LambdaSolve, GrowthBounds) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ix(0.51, 5.0), coord(-30, 30);
  for (int i = 0; i < 2000; ++i) {
    const AnisoIndex idx(ix(rng), ix(rng));
    const PhasePoint p(coord(rng), coord(rng));
    const auto [c1, c2] = growth_bound_constants(idx);
    const double g = std::pow(std::abs(p.x[0]), 1 / idx.t) + std::pow(std::abs(p.xi[0]), 1 / idx.s);
    const double lam = lambda_solve(idx, p);
    EXPECT_LE(c1 * g, lam * (1 + 1e-12));
    EXPECT_LE(lam, c2 * g * (1 + 1e-12));
  }
}

TEST(Project, ExamplesAndScaleInvariance) {
  const AnisoIndex idx(1, 2);
  const auto d = project(idx, PhasePoint(0.0, 4.0));
  EXPECT_NEAR(d.z[0], 0.0, 1e-15);
  EXPECT_NEAR(d.z[1], 1.0, 1e-15);
  const auto d3 = project(idx, PhasePoint(0.0, 36.0));
  EXPECT_NEAR(d3.z[1], 1.0, 1e-15);
  const auto s = project(idx, PhasePoint(0.6, 0.8));
  EXPECT_NEAR(s.z[0], 0.6, 1e-13);
  EXPECT_NEAR(s.z[1], 0.8, 1e-13);
}

TEST(Project, IdempotentAndOnSphere) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ix(0.51, 4.0), coord(-20, 20);
  for (int i = 0; i < 1000; ++i) {
    const AnisoIndex idx(ix(rng), ix(rng));
    const PhasePoint p({coord(rng)}, {coord(rng)});
    const auto q = project(idx, p);
    const auto q2 = project(idx, q.point());
    EXPECT_NEAR(std::hypot(q.z[0], q.z[1]), 1.0, 1e-14);
    EXPECT_NEAR(q2.z[0], q.z[0], 1e-10);
    EXPECT_NEAR(q2.z[1], q.z[1], 1e-10);
    // Only s/t matters.
    const auto r = project_sigma(idx.sigma(), p);
    EXPECT_NEAR(r.z[0], q.z[0], 1e-10);
    EXPECT_NEAR(r.z[1], q.z[1], 1e-10);
  }
}

TEST(ScalePoint, Examples) {
  const auto q = scale_point({1, 2}, PhasePoint(1.0, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(q.x[0], 4.0);
  EXPECT_DOUBLE_EQ(q.xi[0], 16.0);
  const auto same = scale_point({1, 2}, PhasePoint(0.3, -0.7), 1.0);
  EXPECT_DOUBLE_EQ(same.x[0], 0.3);
  EXPECT_DOUBLE_EQ(same.xi[0], -0.7);
  EXPECT_THROW(scale_point({1, 2}, PhasePoint(1.0, 1.0), 0.0), DomainError);
}

TEST(Neighborhoods, GammaExamples) {
  const PhasePoint p(0.3, 2.0);
  const auto z0 = project_sigma(2.0, p);
  EXPECT_TRUE(in_gamma_nbhd(2.0, z0, 1e-9, p));
  EXPECT_TRUE(in_gamma_nbhd(2.0, SphereDirection::from_angle(1.0), 2.01, PhasePoint(-5.0, -1.0)));
  EXPECT_FALSE(in_gamma_nbhd(2.0, project_sigma(2.0, PhasePoint(0.0, 1.0)), 0.1, PhasePoint(1.0, 0.0)));
  EXPECT_THROW(in_gamma_nbhd(2.0, z0, 0.1, PhasePoint(0.0, 0.0)), DomainError);
}

TEST(Neighborhoods, GammaTildeExamples) {
  const auto z0 = SphereDirection::from_angle(0.7);
  for (double mu : {0.01, 0.5, 3.0, 200.0}) {
    const PhasePoint p = scale_point({1, 2}, z0.point(), mu);
    EXPECT_TRUE(in_gamma_tilde_nbhd(2.0, z0, 1e-6, p));
  }
  const SphereDirection up({0.0, 1.0});
  EXPECT_FALSE(in_gamma_tilde_nbhd(2.0, up, 0.1, PhasePoint(1.0, 0.0)));
  // Brute-force scan as an independent check of the minimum distance.
  double best = 1e9;
  for (double l = -3; l <= 3; l += 1e-3) best = std::min(best, std::hypot(std::pow(10, l), 1.0));
  EXPECT_GE(best, 1.0);
  EXPECT_NEAR(gamma_tilde_distance(2.0, up, PhasePoint(1.0, 0.0)).first, 1.0, 1e-4);
}

TEST(Neighborhoods, SampledEquivalence) {
  // For each eps there is delta with Gamma_delta inside Gamma-tilde_eps.
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ang(0, 2 * std::numbers::pi), lr(-3, 3);
  const double sigma = 2.0;
  for (double eps : {0.3, 0.1, 0.03}) {
    const double delta = eps / 4;
    for (int trial = 0; trial < 20; ++trial) {
      const auto z0 = SphereDirection::from_angle(ang(rng));
      for (int k = 0; k < 50; ++k) {
        const double a = z0.angle() + (2 * (k / 50.0) - 1) * delta * 0.99;
        const auto z = SphereDirection::from_angle(a);
        if (!(std::hypot(z.z[0] - z0.z[0], z.z[1] - z0.z[1]) < delta)) continue;
        const PhasePoint p = scale_point({1, sigma}, z.point(), std::exp(lr(rng)));
        EXPECT_TRUE(in_gamma_nbhd(sigma, z0, delta, p));
        EXPECT_TRUE(in_gamma_tilde_nbhd(sigma, z0, eps, p));
      }
    }
  }
}

TEST(Neighborhoods, DistToConicSet) {
  const std::vector<SphereDirection> G{SphereDirection({0.0, 1.0})};
  EXPECT_NEAR(dist_to_conic_set(2.0, G, PhasePoint(5.0, 0.0)), std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(dist_to_conic_set(2.0, G, PhasePoint(0.0, 9.0)), 0.0, 1e-14);
  EXPECT_THROW(dist_to_conic_set(2.0, std::vector<SphereDirection>{}, PhasePoint(1.0, 0.0)), DomainError);
}
