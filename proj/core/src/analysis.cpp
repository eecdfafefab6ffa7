#include "epinet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace epinet {

namespace {

std::pair<double, double> resolve_window(std::span<const double> times, const PlateauOptions& o) {
  if (times.empty()) throw std::invalid_argument("plateau: empty curve");
  if (o.window) return *o.window;
  const double horizon = times.back();
  return {std::max(o.burn_in, o.window_lo) * horizon, o.window_hi * horizon};
}

std::vector<std::size_t> window_points(std::span<const double> times, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("plateau: window must satisfy t_lo < t_hi");
  std::vector<std::size_t> idx;
  for (std::size_t k = 0; k < times.size(); ++k)
    if (times[k] >= lo && times[k] <= hi) idx.push_back(k);
  if (idx.empty()) throw std::invalid_argument("plateau: no observation times inside the window");
  return idx;
}

// Max absolute slope between consecutive means of up to four sub-windows.
double flatness_of(std::span<const double> times, std::span<const double> mean, std::span<const std::size_t> idx) {
  const std::size_t parts = std::min<std::size_t>(4, idx.size());
  if (parts < 2) return 0.0;
  std::vector<double> tc(parts, 0.0), mc(parts, 0.0);
  for (std::size_t p = 0; p < parts; ++p) {
    const std::size_t b = p * idx.size() / parts, e = (p + 1) * idx.size() / parts;
    for (std::size_t q = b; q < e; ++q) {
      tc[p] += times[idx[q]];
      mc[p] += mean[idx[q]];
    }
    tc[p] /= static_cast<double>(e - b);
    mc[p] /= static_cast<double>(e - b);
  }
  double f = 0.0;
  for (std::size_t p = 1; p < parts; ++p) f = std::max(f, std::abs((mc[p] - mc[p - 1]) / (tc[p] - tc[p - 1])));
  return f;
}

void finish(PlateauEstimate& est, double tolerance) {
  if (est.rho_hat > 0.0) {
    est.relative_change = est.flatness * (est.t_hi - est.t_lo) / est.rho_hat;
    est.plateau = est.relative_change <= tolerance;
  } else {
    est.all_extinct = true;
    est.plateau = false;
  }
}

}  // namespace

PlateauEstimate plateau(const ReplicaDensities& s, const PlateauOptions& options) {
  const auto [lo, hi] = resolve_window(s.times, options);
  const auto idx = window_points(s.times, lo, hi);
  PlateauEstimate est;
  est.t_lo = lo;
  est.t_hi = hi;
  est.points = idx.size();
  const std::size_t last = idx.back();
  std::vector<double> per_replica;
  std::vector<double> mean(s.times.size(), 0.0);
  for (std::size_t r = 0; r < s.replicas; ++r) {
    if (!(s.at(r, last) > 0.0)) continue;
    double m = 0.0;
    for (std::size_t k : idx) {
      m += s.at(r, k);
      mean[k] += s.at(r, k);
    }
    per_replica.push_back(m / static_cast<double>(idx.size()));
  }
  est.survivors = per_replica.size();
  if (per_replica.empty()) {
    finish(est, options.flat_tolerance);
    return est;
  }
  const double k = static_cast<double>(per_replica.size());
  for (double& m : mean) m /= k;
  double sum = 0.0;
  for (double v : per_replica) sum += v;
  est.rho_hat = sum / k;
  if (per_replica.size() > 1) {
    double ss = 0.0;
    for (double v : per_replica) ss += (v - est.rho_hat) * (v - est.rho_hat);
    est.std_error = std::sqrt(ss / (k - 1.0) / k);
  }
  est.flatness = flatness_of(s.times, mean, idx);
  finish(est, options.flat_tolerance);
  return est;
}

PlateauEstimate plateau(std::span<const double> times, std::span<const double> curve, const PlateauOptions& options) {
  if (times.size() != curve.size()) throw std::invalid_argument("plateau: times and curve differ in length");
  const auto [lo, hi] = resolve_window(times, options);
  const auto idx = window_points(times, lo, hi);
  PlateauEstimate est;
  est.t_lo = lo;
  est.t_hi = hi;
  est.points = idx.size();
  double sum = 0.0;
  for (std::size_t k : idx) sum += curve[k];
  est.rho_hat = sum / static_cast<double>(idx.size());
  est.survivors = est.rho_hat > 0.0 ? 1 : 0;
  est.flatness = flatness_of(times, curve, idx);
  finish(est, options.flat_tolerance);
  return est;
}

ExponentFit fit_exponent(std::span<const double> lambdas, std::span<const double> rhos) {
  if (lambdas.size() != rhos.size()) throw std::invalid_argument("fit_exponent: size mismatch");
  if (lambdas.size() < 3) throw std::invalid_argument("fit_exponent: need at least 3 points");
  const std::size_t n = lambdas.size();
  std::vector<double> x(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(lambdas[i] > 0.0 && lambdas[i] < 1.0)) throw std::invalid_argument("fit_exponent: lambda outside (0, 1)");
    if (!(rhos[i] > 0.0)) throw std::invalid_argument("fit_exponent: rho must be positive");
    x[i] = std::log(lambdas[i]);
    y[i] = std::log(rhos[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_exponent: degenerate input (identical lambdas)");
  ExponentFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    fit.residuals.push_back(r);
    sse += r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return fit;
}

std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

SurvivalCurve survival_from_samples(const ExtinctionSample& sample, std::span<const double> times, double z) {
  SurvivalCurve c;
  c.replicas = sample.t_ext.size();
  for (double t : times) {
    std::size_t alive = 0;
    for (std::size_t r = 0; r < sample.t_ext.size(); ++r)
      if (sample.censored[r] || sample.t_ext[r] > t) ++alive;
    const auto [lo, hi] = wilson_interval(alive, c.replicas, z);
    c.times.push_back(t);
    c.survival.push_back(c.replicas ? static_cast<double>(alive) / static_cast<double>(c.replicas) : 0.0);
    c.lower.push_back(lo);
    c.upper.push_back(hi);
  }
  return c;
}

SurvivalCurve survival_curve(const Model& model, std::span<const double> times, std::size_t replicas,
                             std::uint64_t seed, unsigned threads, std::span<const Vertex> initial, double z) {
  if (times.empty()) throw std::invalid_argument("survival_curve: empty time grid");
  const double t_max = *std::max_element(times.begin(), times.end());
  const std::vector<Vertex> all = initial.empty() ? all_vertices(model.size()) : std::vector<Vertex>{};
  const auto sample = sample_extinction_times(model, initial.empty() ? std::span<const Vertex>(all) : initial,
                                              std::max(t_max, 1e-12), replicas, seed, threads);
  return survival_from_samples(sample, times, z);
}

}  // namespace epinet
