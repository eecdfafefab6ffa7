#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "epinet/analysis.hpp"
#include "epinet/dynamics.hpp"
#include "epinet/oracle.hpp"

using namespace epinet;

namespace {

ModelParams small(std::int64_t n, Kernel k, double lambda, double kappa0 = 1.0, double eta = 0.0) {
  ModelParams p;
  p.n = n;
  p.kernel = k;
  p.lambda = lambda;
  p.kappa0 = kappa0;
  p.eta = eta;
  return p;
}

Kernel zero_kernel() {
  return Kernel::custom([](double, double) { return 0.0; }, 0.5);
}

std::uint32_t all_mask(std::size_t n) { return (1u << n) - 1; }

}  // namespace

TEST(Oracle, SingleVertex) {
  const auto sp = build_generator(small(1, Kernel::factor(1.0, 0.5), 0.5));
  EXPECT_EQ(sp.state_count(), 2u);
  ASSERT_EQ(sp.nonzeros(), 1u);
  EXPECT_EQ(sp.row_begin[1], 0u);
  EXPECT_EQ(sp.col[0], 0u);
  EXPECT_EQ(sp.rate[0], 1.0);
  EXPECT_DOUBLE_EQ(expected_extinction_time(sp, 1), 1.0);
  EXPECT_DOUBLE_EQ(expected_extinction_time_stationary(sp, 1), 1.0);
}

TEST(Oracle, NoEdgesIsPureDeathChain) {
  const auto sp = build_generator(small(2, zero_kernel(), 1.0));
  // Edge-free states only recover: no infections and no update moves.
  std::size_t moves = 0;
  for (std::uint32_t inf = 0; inf < 4; ++inf) {
    const std::size_t s = sp.encode(inf, 0);
    moves += sp.row_begin[s + 1] - sp.row_begin[s];
    for (std::size_t k = sp.row_begin[s]; k < sp.row_begin[s + 1]; ++k) {
      EXPECT_EQ(sp.edge_bits(sp.col[k]), sp.edge_bits(s));
      EXPECT_LT(sp.infection_bits(sp.col[k]), sp.infection_bits(s));
      EXPECT_EQ(sp.rate[k], 1.0);
    }
  }
  EXPECT_EQ(moves, 4u);
  EXPECT_NEAR(expected_extinction_time_stationary(sp, 3), 1.5, 1e-12);
}

TEST(Oracle, CertainEdgeClosedForm) {
  for (double lambda : {0.25, 0.5, 1.0, 2.0}) {
    const auto sp = build_generator(small(2, Kernel::factor(100.0, 0.5), lambda));
    EXPECT_NEAR(expected_extinction_time_stationary(sp, 3), 1.5 + lambda / 2.0, 1e-12) << lambda;
  }
}

TEST(Oracle, StateCountsAndSizeLimit) {
  EXPECT_EQ(build_generator(small(3, Kernel::factor(1.0, 0.5), 0.5)).state_count(), 64u);
  EXPECT_EQ(build_generator(small(4, Kernel::factor(1.0, 0.5), 0.5)).state_count(), 1024u);
  EXPECT_EQ(build_generator(small(5, Kernel::factor(1.0, 0.5), 0.5)).state_count(), 32768u);
  EXPECT_THROW(build_generator(small(6, Kernel::factor(1.0, 0.5), 0.5)), OracleSizeError);
}

TEST(Oracle, RowsSumToZero) {
  const auto sp = build_generator(small(3, Kernel::preferential_attachment(1.0, 0.6), 0.7, 1.3, 1.0));
  for (std::size_t s = 0; s < sp.state_count(); ++s) {
    double row = sp.diagonal[s];
    for (std::size_t k = sp.row_begin[s]; k < sp.row_begin[s + 1]; ++k) {
      EXPECT_GE(sp.rate[k], 0.0);
      EXPECT_NE(sp.col[k], s);
      row += sp.rate[k];
    }
    EXPECT_NEAR(row, 0.0, 1e-12);
  }
}

TEST(Oracle, UpdateRatesSumToKappa) {
  // From a state with no infection, every outgoing rate is an update; the
  // self-loop weight of each vertex is the probability of redrawing the same
  // neighbourhood.
  const auto p = small(3, Kernel::factor(0.8, 0.5), 0.5, 2.0, 1.0);
  const auto sp = build_generator(p);
  for (std::uint32_t eb = 0; eb < 8; ++eb) {
    const std::size_t s = sp.encode(0, eb);
    double self = 0.0;
    for (Vertex v = 0; v < 3; ++v) {
      double stay = 1.0;
      for (std::size_t e = 0; e < sp.edges.size(); ++e) {
        if (sp.edges[e].first != v && sp.edges[e].second != v) continue;
        const double q = sp.edge_probability[e];
        stay *= (eb >> e) & 1u ? q : 1.0 - q;
      }
      self += sp.kappa[v] * stay;
    }
    double total = 0.0;
    for (double k : sp.kappa) total += k;
    EXPECT_NEAR(-sp.diagonal[s], total - self, 1e-12);
  }
}

TEST(Oracle, DensityAtZeroAndWithoutInfection) {
  const auto sp = build_generator(small(3, Kernel::factor(1.0, 0.5), 0.5));
  EXPECT_NEAR(exact_density(sp, 0.0, all_mask(3)), 1.0, 1e-15);
  const auto sp0 = build_generator(small(2, Kernel::factor(1.0, 0.5), 0.0));
  for (double t : {0.1, 0.5, 1.0, 3.0}) EXPECT_NEAR(exact_density(sp0, t, 3), std::exp(-t), 1e-9);
}

TEST(Oracle, DensityMatchesMonteCarlo) {
  const auto p = small(3, Kernel::factor(1.0, 0.5), 0.5);
  const auto sp = build_generator(p);
  const Model m(p);
  const std::vector<double> times{0.5, 1.0, 2.0};
  const auto est = estimate_density(m, times, 100000, 61);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double exact = exact_density(sp, times[k], all_mask(3));
    EXPECT_LT(std::abs(est.mean[k] - exact), 3.0 * est.std_error[k]) << times[k];
  }
}

TEST(Oracle, SurvivalMatchesMonteCarlo) {
  const auto p = small(2, Kernel::factor(1.0, 0.5), 1.0);
  const auto sp = build_generator(p);
  const Model m(p);
  const std::vector<double> times{0.0, 0.5, 1.0, 2.0, 4.0};
  const auto curve = survival_curve(m, times, 50000, 62);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double exact = exact_survival(sp, times[k], all_mask(2));
    const double se = std::sqrt(exact * (1.0 - exact) / 50000.0);
    EXPECT_LE(std::abs(curve.survival[k] - exact), std::max(3.0 * se, 1e-12)) << times[k];
  }
}

TEST(Oracle, DualityExact) {
  for (std::int64_t n : {2, 3}) {
    const auto sp = build_generator(small(n, Kernel::preferential_attachment(1.0, 0.6), 0.8, 0.7, 1.0));
    for (std::uint32_t a = 0; a < static_cast<std::uint32_t>(n); ++a)
      for (std::uint32_t b = 0; b < static_cast<std::uint32_t>(n); ++b)
        for (double t : {0.3, 1.0, 2.5})
          EXPECT_NEAR(duality_probability(sp, 1u << a, 1u << b, t), duality_probability(sp, 1u << b, 1u << a, t), 1e-8);
  }
}

TEST(Oracle, ExtinctionTimeMonotoneInLambda) {
  for (std::int64_t n : {2, 3}) {
    double prev = 0.0;
    for (int k = 0; k <= 10; ++k) {
      const auto sp = build_generator(small(n, Kernel::factor(1.0, 0.5), 0.2 * k));
      const double e = expected_extinction_time_stationary(sp, all_mask(n));
      EXPECT_GE(e, prev - 1e-12);
      prev = e;
    }
  }
}

TEST(Oracle, AgreesWithSimulator) {
  const std::vector<ModelParams> cases{
      small(2, Kernel::factor(1.0, 0.5), 1.0),
      small(3, Kernel::factor(1.0, 0.5), 0.5),
      small(3, Kernel::preferential_attachment(2.0, 0.7), 1.5, 0.5, 1.0),
  };
  std::uint64_t seed = 70;
  for (const ModelParams& p : cases) {
    const auto sp = build_generator(p);
    const double exact = expected_extinction_time_stationary(sp, all_mask(static_cast<std::size_t>(p.n)));
    const Model m(p);
    const auto s = sample_extinction_times(m, all_vertices(m.size()), 1e9, 50000, ++seed);
    EXPECT_LT(std::abs(s.mean - exact), 3.0 * s.std_error) << "n=" << p.n << " exact " << exact << " mc " << s.mean;
  }
}

TEST(Oracle, FiveVertexSolve) {
  const auto p = small(5, Kernel::factor(1.0, 0.5), 0.8);
  const auto sp = build_generator(p);
  const double e = expected_extinction_time_stationary(sp, all_mask(5));
  double h5 = 0.0;
  for (int k = 1; k <= 5; ++k) h5 += 1.0 / k;
  EXPECT_GT(e, h5);
  const Model m(p);
  const auto s = sample_extinction_times(m, all_vertices(m.size()), 1e9, 50000, 75);
  EXPECT_LT(std::abs(s.mean - e), 3.0 * s.std_error) << "exact " << e << " mc " << s.mean;
}

TEST(Oracle, GeneratorDump) {
  const auto sp = build_generator(small(2, Kernel::factor(1.0, 0.5), 1.0));
  std::ostringstream os;
  write_generator(sp, os);
  std::istringstream in(os.str());
  std::size_t lines = 0, from = 0, to = 0;
  double rate = 0.0;
  while (in >> from >> to >> rate) {
    EXPECT_LT(from, sp.state_count());
    EXPECT_LT(to, sp.state_count());
    EXPECT_GT(rate, 0.0);
    ++lines;
  }
  EXPECT_EQ(lines, sp.nonzeros());
}
