#ifndef EPINET_ANALYSIS_HPP
#define EPINET_ANALYSIS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "epinet/dynamics.hpp"
#include "epinet/model.hpp"

namespace epinet {

struct PlateauOptions {
  double burn_in = 0.25;  // fraction of the horizon
  double window_lo = 0.5;
  double window_hi = 0.9;
  // Absolute window [t_lo, t_hi]; overrides the fractions when set.
  std::optional<std::pair<double, double>> window;
  // A plateau is flagged when the relative change across the window,
  // flatness * (t_hi - t_lo) / rho_hat, stays below this.
  double flat_tolerance = 0.25;
};

struct PlateauEstimate {
  double rho_hat = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double std_error = 0.0;
  // Max absolute slope between consecutive sub-window means.
  double flatness = 0.0;
  double relative_change = 0.0;
  bool plateau = false;
  bool all_extinct = false;
  std::size_t survivors = 0;
  std::size_t points = 0;
};

// Mean over replicas still infected at the end of the window.
PlateauEstimate plateau(const ReplicaDensities& samples, const PlateauOptions& options = {});
// A single deterministic curve (no standard error).
PlateauEstimate plateau(std::span<const double> times, std::span<const double> curve,
                        const PlateauOptions& options = {});

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;
  double r2 = 0.0;
};

// Least squares through (log lambda, log rho); needs >= 3 points,
// lambda in (0, 1), rho > 0 and at least two distinct lambdas.
ExponentFit fit_exponent(std::span<const double> lambdas, std::span<const double> rhos);

struct SurvivalCurve {
  std::vector<double> times;
  std::vector<double> survival;
  std::vector<double> lower;
  std::vector<double> upper;
  std::size_t replicas = 0;
};

// Wilson score interval for k successes out of n.
std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double z = 1.96);

// Empirical P(T_ext > t); censored runs count as alive through t_max.
SurvivalCurve survival_from_samples(const ExtinctionSample& sample, std::span<const double> times, double z = 1.96);

// Empty initial set means all vertices infected.
SurvivalCurve survival_curve(const Model& model, std::span<const double> times, std::size_t replicas,
                             std::uint64_t seed, unsigned threads = 0, std::span<const Vertex> initial = {},
                             double z = 1.96);

}  // namespace epinet

#endif  // EPINET_ANALYSIS_HPP
