#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "epinet/coupling.hpp"
#include "epinet/dynamics.hpp"
#include "epinet/model.hpp"

using namespace epinet;

namespace {

Model make_model(std::int64_t n, Kernel kernel, double lambda, double kappa0 = 1.0, double eta = 0.0) {
  ModelParams p;
  p.n = n;
  p.kernel = kernel;
  p.lambda = lambda;
  p.kappa0 = kappa0;
  p.eta = eta;
  return Model(p);
}

}  // namespace

TEST(Grids, Shapes) {
  const auto g = geometric_grid(0.01, 100.0, 5);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g.front(), 0.01);
  EXPECT_DOUBLE_EQ(g.back(), 100.0);
  EXPECT_NEAR(g[2], 1.0, 1e-12);
  const auto l = linear_grid(0.0, 1.0, 3);
  EXPECT_EQ(l, (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_THROW(geometric_grid(0.0, 1.0, 5), std::invalid_argument);
}

TEST(Simulate, SingleVertexMeanIsOne) {
  const Model m = make_model(1, Kernel::factor(1.0, 0.5), 0.5);
  const std::vector<Vertex> init{0};
  const auto s = sample_extinction_times(m, init, 1e9, 20000, 11);
  EXPECT_EQ(s.censored_count, 0u);
  EXPECT_LT(std::abs(s.mean - 1.0), 3.0 * s.std_error);
}

TEST(Simulate, ZeroLambdaHarmonicNumber) {
  const Model m = make_model(10, Kernel::factor(1.0, 0.5), 0.0);
  double h10 = 0.0;
  for (int k = 1; k <= 10; ++k) h10 += 1.0 / k;
  const auto s = sample_extinction_times(m, all_vertices(10), 1e9, 20000, 12);
  EXPECT_LT(std::abs(s.mean - h10), 3.0 * s.std_error);
}

TEST(Simulate, EmptyStartIsAbsorbed) {
  const Model m = make_model(20, Kernel::factor(1.0, 0.5), 0.5);
  SimConfig cfg;
  cfg.t_max = 5.0;
  const Trajectory t = simulate(m, {}, cfg);
  EXPECT_FALSE(t.censored);
  EXPECT_EQ(t.t_ext, 0.0);
  EXPECT_EQ(t.events, 0u);
  for (auto c : t.infected) EXPECT_EQ(c, 0u);
}

TEST(Simulate, NoEventAfterExtinction) {
  const Model m = make_model(30, Kernel::factor(1.0, 0.5), 0.2);
  ContactProcess p(m, all_vertices(30), 5);
  p.advance_until(1e6);
  ASSERT_TRUE(p.extinct());
  const auto events = p.events();
  const double te = p.extinction_time();
  p.advance_until(2e6);
  EXPECT_EQ(p.events(), events);
  EXPECT_EQ(p.extinction_time(), te);
  EXPECT_EQ(p.infected_count(), 0u);
}

TEST(Simulate, DeterministicReplay) {
  const Model m = make_model(200, Kernel::preferential_attachment(1.0, 0.7), 0.5, 1.0, 0.5);
  SimConfig cfg;
  cfg.t_max = 20.0;
  cfg.seed = 99;
  cfg.star_cut = 0.05;
  const Trajectory a = simulate(m, all_vertices(200), cfg);
  const Trajectory b = simulate(m, all_vertices(200), cfg);
  EXPECT_EQ(a.times, b.times);
  EXPECT_EQ(a.infected, b.infected);
  EXPECT_EQ(a.star_infected, b.star_infected);
  EXPECT_EQ(a.t_ext, b.t_ext);
  EXPECT_EQ(a.events, b.events);
  cfg.seed = 100;
  const Trajectory c = simulate(m, all_vertices(200), cfg);
  EXPECT_NE(a.events, c.events);
}

TEST(Simulate, IncrementalRatesSurviveAudit) {
  const Model m = make_model(150, Kernel::factor(2.0, 0.75), 0.6, 2.0, 1.0);
  ContactProcess p(m, all_vertices(150), 3, ResampleMethod::kBlocked, 50);
  EXPECT_NO_THROW(p.advance_until(10.0));
  EXPECT_NO_THROW(p.audit());
  SimConfig cfg;
  cfg.t_max = 10.0;
  cfg.audit_interval = 7;
  cfg.resample = ResampleMethod::kNaive;
  EXPECT_NO_THROW(simulate(m, all_vertices(150), cfg));
}

TEST(Simulate, BudgetExhaustionIsCensored) {
  const Model m = make_model(100, Kernel::factor(2.0, 0.75), 0.9);
  SimConfig cfg;
  cfg.t_max = 100.0;
  cfg.max_events = 500;
  const Trajectory t = simulate(m, all_vertices(100), cfg);
  EXPECT_TRUE(t.censored);
  EXPECT_LE(t.events, 500u);
}

TEST(Simulate, GraphPathIgnoresInfection) {
  const Model hot = make_model(30, Kernel::factor(1.0, 0.6), 0.8, 1.5);
  const Model cold = make_model(30, Kernel::factor(1.0, 0.6), 0.0, 1.5);
  int compared = 0;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    ContactProcess a(hot, all_vertices(30), seed);
    ContactProcess b(cold, all_vertices(30), seed);
    a.advance_until(1.0);
    b.advance_until(1.0);
    if (a.extinct() || b.extinct()) continue;
    ++compared;
    EXPECT_EQ(a.network().neighbors, b.network().neighbors);
  }
  EXPECT_GE(compared, 180);
}

TEST(Density, StartAndZeroLambda) {
  const Model m = make_model(20, Kernel::factor(1.0, 0.5), 0.0);
  const std::vector<double> times{0.0, 0.5, 1.0, 2.0};
  const auto d = estimate_density(m, times, 5000, 27);
  EXPECT_EQ(d.mean[0], 1.0);
  EXPECT_EQ(d.std_error[0], 0.0);
  for (std::size_t k = 1; k < times.size(); ++k)
    EXPECT_LT(std::abs(d.mean[k] - std::exp(-times[k])), 3.0 * d.std_error[k]) << "t=" << times[k];
}

TEST(Density, NonIncreasingInTime) {
  const Model m = make_model(200, Kernel::preferential_attachment(1.0, 0.7), 0.4);
  const std::vector<double> times{5.0, 10.0};
  const auto d = estimate_density(m, times, 400, 22);
  EXPECT_GE(d.mean[0], d.mean[1] - 3.0 * d.std_error[1]);
}

TEST(Density, ThreadCountDoesNotChangeResult) {
  const Model m = make_model(50, Kernel::factor(1.0, 0.6), 0.5);
  const std::vector<double> times{1.0, 2.0};
  const auto a = estimate_density(m, times, 64, 23, 1);
  const auto b = estimate_density(m, times, 64, 23, 4);
  EXPECT_EQ(a.samples.values, b.samples.values);
}

TEST(MonotoneCoupling, EqualRatesGiveIdenticalPaths) {
  const Model m = make_model(40, Kernel::factor(1.0, 0.6), 0.5);
  SimConfig cfg;
  cfg.t_max = 10.0;
  cfg.seed = 31;
  const auto init = all_vertices(40);
  const auto c = simulate_coupled_monotone(m, 0.5, 0.5, init, init, cfg);
  EXPECT_FALSE(c.violation);
  EXPECT_EQ(c.first.infected, c.second.infected);
  EXPECT_EQ(c.first.t_ext, c.second.t_ext);
}

TEST(MonotoneCoupling, EmptyFirstStaysEmpty) {
  const Model m = make_model(40, Kernel::factor(1.0, 0.6), 0.5);
  SimConfig cfg;
  cfg.t_max = 10.0;
  const auto c = simulate_coupled_monotone(m, 0.3, 0.6, {}, all_vertices(40), cfg);
  EXPECT_FALSE(c.violation);
  for (auto k : c.first.infected) EXPECT_EQ(k, 0u);
}

TEST(MonotoneCoupling, NoViolations) {
  const Model m = make_model(50, Kernel::factor(1.0, 0.5), 0.6);
  std::vector<Vertex> a{0, 1, 2, 3, 4};
  const auto audit = audit_monotone_coupling(m, 0.3, 0.6, a, all_vertices(50), 20.0, 200, 32);
  EXPECT_EQ(audit.violating_replicas, 0u);
  EXPECT_EQ(audit.violation_events, 0u);
  EXPECT_GT(audit.events, 0u);
}

TEST(MonotoneCoupling, RejectsBadInputs) {
  const Model m = make_model(10, Kernel::factor(1.0, 0.5), 0.6);
  SimConfig cfg;
  const std::vector<Vertex> a{0, 1}, b{1};
  EXPECT_THROW(simulate_coupled_monotone(m, 0.6, 0.3, b, a, cfg), std::invalid_argument);
  EXPECT_THROW(simulate_coupled_monotone(m, 0.3, 0.6, a, b, cfg), std::invalid_argument);
}

TEST(Duality, SameSetsAgree) {
  const Model m = make_model(30, Kernel::factor(1.0, 0.75), 0.5);
  const std::vector<Vertex> a{0, 7, 20};
  const auto d = estimate_duality_gap(m, a, a, 1.5, 20000, 41);
  EXPECT_LT(std::abs(d.gap()), 3.0 * d.combined_se());
}

TEST(Duality, ShortHorizonDisjointSets) {
  const Model m = make_model(30, Kernel::factor(1.0, 0.75), 0.5);
  const std::vector<Vertex> a{0, 1}, b{10, 11};
  const auto d = estimate_duality_gap(m, a, b, 1e-7, 2000, 42);
  EXPECT_EQ(d.p_ab, 0.0);
  EXPECT_EQ(d.p_ba, 0.0);
}

TEST(Duality, DisjointSetsAgree) {
  const Model m = make_model(50, Kernel::factor(1.0, 0.75), 0.5);
  const std::vector<Vertex> a{0, 1, 2, 3, 4}, b{45, 46, 47, 48, 49};
  const auto d = estimate_duality_gap(m, a, b, 2.0, 20000, 43);
  EXPECT_LT(std::abs(d.gap()), 3.0 * d.combined_se());
}
