#include <gtest/gtest.h>

#include "delayoco/delayoco.hpp"

using namespace delayoco;

namespace {

DecisionVector sample_feasible(const Geometry& g, CounterRng& rng) {
  DecisionVector x(g.dim());
  if (g.kind() == SetKind::ProbabilitySimplex) {
    for (double& v : x) v = -std::log(rng.uniform01());
    const double s = vec::sum(x);
    for (double& v : x) v /= s;
    return x;
  }
  for (double& v : x) v = rng.normal();
  const double r = g.radius() * std::pow(rng.uniform01(), 1.0 / static_cast<double>(g.dim()));
  const double nx = g.norm(x);
  for (double& v : x) v *= r / nx;
  return x;
}

Vector feature(std::size_t n, CounterRng& rng) {
  Vector b(n);
  for (double& v : b) v = rng.uniform(-1, 1);
  return b;
}

std::vector<LossFunction> loss_zoo(const Geometry& geo, CounterRng& rng) {
  const std::size_t n = geo.dim();
  return {LossFunction::logistic(1.0, feature(n, rng)), LossFunction::logistic(-1.0, feature(n, rng)),
          LossFunction::squared(rng.normal(), feature(n, rng)),
          LossFunction::regularized_squared(rng.normal(), feature(n, rng), 0.1, geo)};
}

}  // namespace

TEST(LossValue, Examples) {
  EXPECT_NEAR(LossFunction::logistic(1, Vector{0, 0}).value(Vector{3, -2}), std::log(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(LossFunction::squared(0, Vector{1, 0}).value(Vector{2, 0}), 2.0);
  EXPECT_NEAR(LossFunction::logistic(-1, Vector{1}).value(Vector{1}), std::log1p(std::exp(1.0)), 1e-15);
  EXPECT_NEAR(LossFunction::logistic(-1, Vector{1}).value(Vector{1}), 1.31326, 1e-5);
}

TEST(LossValue, RegularizedAddsGammaPsi) {
  const Geometry geo = Geometry::euclidean(2, 3);
  const auto f = LossFunction::regularized_squared(1.0, Vector{1, 0}, 0.5, geo);
  EXPECT_DOUBLE_EQ(f.value(Vector{2, 1}), 0.5 * 1.0 + 0.5 * 2.5);
}

TEST(LossValue, RejectsBadInput) {
  EXPECT_THROW(LossFunction::logistic(0.5, Vector{1}), InvalidInput);
  EXPECT_THROW(LossFunction::squared(1, Vector{1, 2}).value(Vector{1}), DimensionMismatch);
  EXPECT_THROW(LossFunction::regularized_squared(1, Vector{1}, 0.0, Geometry::euclidean(1, 1)), InvalidInput);
}

TEST(LossValue, LogisticStableForLargeMargins) {
  const auto f = LossFunction::logistic(1, Vector{1});
  EXPECT_NEAR(f.value(Vector{-1000}), 1000.0, 1e-9);
  EXPECT_NEAR(f.value(Vector{1000}), 0.0, 1e-300);
  EXPECT_TRUE(std::isfinite(f.gradient(Vector{-1000})[0]));
}

TEST(LossGrad, Examples) {
  const Vector g = LossFunction::logistic(1, Vector{1, 0}).gradient(Vector{0, 0});
  EXPECT_DOUBLE_EQ(g[0], -0.5);
  EXPECT_DOUBLE_EQ(g[1], 0.0);
  EXPECT_EQ(LossFunction::squared(0, Vector{1, 0}).gradient(Vector{2, 0}), (Vector{2, 0}));
}

TEST(LossGrad, FiniteDifferencesAllKinds) {
  CounterRng rng(31, 0);
  for (const Geometry& geo : {Geometry::euclidean(5, 2), Geometry::simplex(5), Geometry::pnorm(5, 2, 1.5)}) {
    std::vector<Vector> pts;
    for (int i = 0; i < 100; ++i) {
      DecisionVector x = sample_feasible(geo, rng);
      if (geo.kind() == SetKind::ProbabilitySimplex) x = Geometry::floored(vec::add(x, Vector(5, 0.02)));
      pts.push_back(x);
    }
    for (const auto& f : loss_zoo(geo, rng)) {
      const double err = finite_diff_check([&](std::span<const double> x) { return f.value(x); },
                                           [&](std::span<const double> x) { return f.gradient(x); }, pts);
      EXPECT_LE(err, 1e-6) << geo.name() << " " << to_string(f.kind());
    }
  }
}

TEST(LossProperties, ConvexityThousandTriples) {
  CounterRng rng(37, 0);
  for (const Geometry& geo : {Geometry::euclidean(4, 2), Geometry::simplex(4), Geometry::pnorm(4, 2, 1.5)}) {
    const auto zoo = loss_zoo(geo, rng);
    int failures = 0;
    for (int i = 0; i < 1000; ++i) {
      const DecisionVector x = sample_feasible(geo, rng), y = sample_feasible(geo, rng);
      const double lam = rng.uniform01();
      DecisionVector m(x.size());
      for (std::size_t k = 0; k < x.size(); ++k) m[k] = lam * x[k] + (1 - lam) * y[k];
      for (const auto& f : zoo)
        if (f.value(m) > lam * f.value(x) + (1 - lam) * f.value(y) + 1e-9) ++failures;
    }
    EXPECT_EQ(failures, 0) << geo.name();
  }
}

TEST(LossProperties, RelativeStrongConvexity) {
  CounterRng rng(41, 0);
  for (const Geometry& geo : {Geometry::euclidean(4, 2), Geometry::simplex(4), Geometry::pnorm(4, 2, 1.5)}) {
    int failures = 0;
    for (int i = 0; i < 1000; ++i) {
      const double gamma = rng.uniform(0.01, 1.0);
      const auto f = LossFunction::regularized_squared(rng.normal(), feature(4, rng), gamma, geo);
      const DecisionVector x = sample_feasible(geo, rng);
      const DecisionVector y = geo.repair(sample_feasible(geo, rng));
      const double lhs = f.value(x) - f.value(y) - vec::dot(f.gradient(y), vec::sub(x, y));
      if (lhs < gamma * geo.bregman(x, y) - 1e-9) ++failures;
    }
    EXPECT_EQ(failures, 0) << geo.name();
  }
}

TEST(GradBound, Examples) {
  EXPECT_DOUBLE_EQ(grad_bound(LossFunction::logistic(1, Vector{1, -0.5, 0.2}), Geometry::simplex(3)).g_star, 1.0);
  EXPECT_DOUBLE_EQ(grad_bound(LossFunction::squared(0, Vector{1, 0}), Geometry::euclidean(2, 1)).g_star, 1.0);
  EXPECT_DOUBLE_EQ(grad_bound(LossFunction::logistic(1, Vector{0, 0}), Geometry::euclidean(2, 1)).g_star, 0.0);
}

TEST(GradBound, LogisticSimplexSampling) {
  CounterRng rng(43, 0);
  const Geometry geo = Geometry::simplex(3);
  const auto f = LossFunction::logistic(-1, Vector{1, -0.5, 0.2});
  double worst = 0.0;
  for (int i = 0; i < 100'000; ++i) worst = std::max(worst, geo.dual_norm(f.gradient(sample_feasible(geo, rng))));
  EXPECT_LE(worst, 1.0);
}

TEST(GradBound, SampledNormsNeverExceedBound) {
  CounterRng rng(47, 0);
  for (const Geometry& geo : {Geometry::euclidean(4, 2), Geometry::simplex(4), Geometry::pnorm(4, 2, 1.5)}) {
    for (int j = 0; j < 20; ++j) {
      for (const auto& f : loss_zoo(geo, rng)) {
        const double bound = grad_bound(f, geo).g_star;
        for (int i = 0; i < 200; ++i) {
          const DecisionVector x = geo.repair(sample_feasible(geo, rng));
          ASSERT_LE(geo.dual_norm(f.gradient(x)), bound * (1 + 1e-12)) << geo.name() << " " << to_string(f.kind());
        }
      }
    }
  }
}

TEST(LossSum, MatchesTermwiseSum) {
  CounterRng rng(53, 0);
  const Geometry geo = Geometry::simplex(4);
  LossSum sum(geo);
  std::vector<LossFunction> terms;
  for (int i = 0; i < 5; ++i)
    for (const auto& f : loss_zoo(geo, rng)) {
      terms.push_back(f);
      sum.add(f);
    }
  const DecisionVector x = sample_feasible(geo, rng);
  double v = 0.0;
  Vector g(4, 0.0);
  for (const auto& f : terms) {
    v += f.value(x);
    vec::axpy(1.0, f.gradient(x), g);
  }
  EXPECT_NEAR(sum.value(x), v, 1e-12 * (1 + std::abs(v)));
  const Vector gs = sum.gradient(x);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(gs[k], g[k], 1e-11);
  EXPECT_EQ(sum.size(), terms.size());
}
