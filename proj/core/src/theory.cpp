#include "epinet/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace epinet {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kQuickDirect: return "QuickDirect";
    case Strategy::kQuickIndirect: return "QuickIndirect";
    case Strategy::kDelayedDirect: return "DelayedDirect";
    case Strategy::kDelayedIndirect: return "DelayedIndirect";
  }
  return "?";
}

std::string to_string(Phase p) {
  switch (p) {
    case Phase::kFastExtinction: return "Fast";
    case Phase::kSlowExtinction: return "Slow";
    case Phase::kBoundary: return "Boundary";
  }
  return "?";
}

std::string to_string(ScoringRegime r) {
  switch (r) {
    case ScoringRegime::kFactor: return "factor";
    case ScoringRegime::kPaHighGamma: return "pa-high-gamma";
    case ScoringRegime::kPaLowGammaSlow: return "pa-low-gamma-slow";
    case ScoringRegime::kPaLowGammaFast: return "pa-low-gamma-fast";
    case ScoringRegime::kCustom: return "custom";
  }
  return "?";
}

double theta(const ModelParams& params) {
  const double ge = params.kernel.gamma() * params.eta;
  return std::exp(-2.0 * (1.0 + params.kappa0 * std::pow(2.0, ge)));
}

double solve_log_T_rhs(double rhs) {
  if (!(rhs >= 0.0)) throw std::domain_error("solve_T: right-hand side must be >= 0");
  if (rhs == 0.0) return 0.0;
  if (std::isinf(rhs)) return rhs;
  // u -> u + 2 log u is increasing on (0, inf) and spans the real line.
  const double target = std::log(rhs);
  auto g = [target](double u) { return u + 2.0 * std::log(u) - target; };
  double hi = 1.0;
  while (g(hi) < 0.0) hi *= 2.0;
  double lo = hi / 2.0;
  while (g(lo) > 0.0) lo /= 2.0;
  for (;;) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  // Newton polish against the bracket's last-bit ambiguity.
  double u = 0.5 * (lo + hi);
  for (int k = 0; k < 3; ++k) {
    const double next = u - g(u) / (1.0 + 2.0 / u);
    if (next > 0.0) u = next;
  }
  return u;
}

double solve_T_rhs(double rhs) { return std::exp(solve_log_T_rhs(rhs)); }

double T_rhs(double a, double lambda, const ModelParams& params) {
  if (!(a > 0.0 && a < 1.0)) throw std::domain_error("T(a, lambda): a must lie in (0, 1)");
  if (!(lambda > 0.0)) throw std::domain_error("T(a, lambda): lambda must be > 0");
  const double c1 = kernel_bounds(params.kernel).c1;
  const double g = params.kernel.gamma();
  return c1 * theta(params) / (20.0 * params.kappa0 * params.kappa0) * lambda * lambda *
         std::pow(a, -g * (1.0 - 2.0 * params.eta));
}

double solve_T(double a, double lambda, const ModelParams& params) { return solve_T_rhs(T_rhs(a, lambda, params)); }

double time_scale(double x, double lambda, double gamma, double eta) {
  if (!(x > 0.0 && x <= 1.0)) throw std::domain_error("time_scale: x must lie in (0, 1]");
  return std::max(lambda * lambda * std::pow(x, -gamma * (1.0 - 2.0 * eta)), 1.0);
}

double time_scale(double x, double lambda, const ModelParams& params) {
  return time_scale(x, lambda, params.kernel.gamma(), params.eta);
}

double strategy_value(Strategy s, double a, double lambda, const ModelParams& params) {
  const Kernel& k = params.kernel;
  switch (s) {
    case Strategy::kQuickDirect: return lambda * a * k(a, a);
    case Strategy::kQuickIndirect: return lambda * lambda * a * k(a, 1.0) * k(a, 1.0);
    case Strategy::kDelayedDirect: return lambda * a * solve_T(a, lambda, params) * k(a, a);
    case Strategy::kDelayedIndirect:
      return lambda * lambda * a * solve_T(a, lambda, params) * k(a, 1.0) * k(a, 1.0);
  }
  return 0.0;
}

bool strategy_holds(Strategy s, double a, double lambda, const ModelParams& params, const StrategyConstants& c) {
  if (!(a > 0.0 && a < 0.5)) throw std::domain_error("strategy_holds: a must lie in (0, 1/2)");
  const double v = strategy_value(s, a, lambda, params);
  switch (s) {
    case Strategy::kQuickDirect: return v > c.m_i;
    case Strategy::kQuickIndirect: return v > c.m_ii;
    case Strategy::kDelayedDirect: return solve_T(a, lambda, params) > c.m_iii && v > c.m_iii;
    case Strategy::kDelayedIndirect: return solve_T(a, lambda, params) > c.m_iv && v > c.m_iv;
  }
  return false;
}

std::optional<double> maximal_a(Strategy s, double lambda, const ModelParams& params, const StrategyConstants& c) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw std::domain_error("maximal_a: lambda must lie in (0, 1)");
  const KernelKind kind = params.kernel.kind();
  if (kind == KernelKind::kCustom) return std::nullopt;
  const double g = params.kernel.gamma();
  const double eta = params.eta;
  const double r = c.r;
  const double log2l = std::log(lambda) * std::log(lambda);
  const double delayed_exp = 3.0 * g - 2.0 * g * eta - 1.0;
  switch (s) {
    case Strategy::kQuickDirect:
      if (kind == KernelKind::kPreferentialAttachment || !(g > 0.5)) return std::nullopt;
      return r * std::pow(lambda, 1.0 / (2.0 * g - 1.0));
    case Strategy::kQuickIndirect:
      if (!(g > 0.5)) return std::nullopt;
      return r * std::pow(lambda, 2.0 / (2.0 * g - 1.0));
    case Strategy::kDelayedDirect:
      if (!(eta < 0.5)) return std::nullopt;
      if (kind == KernelKind::kPreferentialAttachment)
        return r * std::pow(lambda * lambda * lambda / log2l, 1.0 / (g * (1.0 - 2.0 * eta)));
      if (!(delayed_exp > 0.0)) return std::nullopt;
      return r * std::pow(lambda * lambda * lambda / log2l, 1.0 / delayed_exp);
    case Strategy::kDelayedIndirect:
      if (!(eta < 0.5) || !(delayed_exp > 0.0)) return std::nullopt;
      return r * std::pow(lambda * lambda * lambda * lambda / log2l, 1.0 / delayed_exp);
  }
  return std::nullopt;
}

std::optional<std::pair<double, Strategy>> a0(double lambda, const ModelParams& params, const StrategyConstants& c) {
  std::optional<std::pair<double, Strategy>> best;
  for (Strategy s : kAllStrategies) {
    const auto a = maximal_a(s, lambda, params, c);
    if (a && (!best || *a > best->first)) best = std::make_pair(*a, s);
  }
  return best;
}

std::optional<double> lower_density_bound(double lambda, const ModelParams& params, const StrategyConstants& c) {
  const auto best = a0(lambda, params, c);
  if (!best) return std::nullopt;
  const double a = std::min(best->first, 1.0);
  return c.c_prime * std::min(lambda * a * params.kernel(a, 1.0), 1.0);
}

ScoringFunction ScoringFunction::custom(std::function<double(double)> fn, double a1, std::vector<double> kinks) {
  if (!fn) throw std::invalid_argument("ScoringFunction: empty function");
  if (!(a1 >= 0.0 && a1 < 1.0)) throw std::invalid_argument("ScoringFunction: a1 must lie in [0, 1)");
  ScoringFunction s;
  s.regime = ScoringRegime::kCustom;
  s.a1 = a1;
  s.fn = std::move(fn);
  s.kinks = std::move(kinks);
  return s;
}

namespace {

// Exponents of the power terms of p(x, y) S(y) integrated over y; the
// inherent y^-1 terms of the PA kernel are excluded since they only
// contribute the |log a| term.
void reject_minus_one(std::initializer_list<double> exponents) {
  for (double e : exponents)
    if (e == -1.0) throw RegimeError("scoring_function: an integrand exponent equals -1");
}

}  // namespace

ScoringFunction scoring_function(KernelKind kind, double gamma, double eta, double lambda, double D, double r) {
  if (!(gamma > 0.0 && gamma < 1.0) || !(eta >= 0.0)) throw std::domain_error("scoring_function: bad gamma/eta");
  if (!(lambda > 0.0)) throw std::domain_error("scoring_function: lambda must be > 0");
  ScoringFunction s;
  s.gamma = gamma;
  s.eta = eta;
  s.lambda = lambda;
  const double alpha = gamma * (1.0 - 2.0 * eta);
  if (alpha > 0.0 && lambda < 1.0) s.kinks.push_back(std::pow(lambda, 2.0 / alpha));
  auto T = [=](double x) { return time_scale(x, lambda, gamma, eta); };

  if (gamma == 0.5) throw RegimeError("scoring_function: gamma = 1/2 is excluded");
  if (kind == KernelKind::kFactor) {
    const bool low_eta = eta < 0.5;
    if (low_eta && gamma == 1.0 / (3.0 - 2.0 * eta)) throw RegimeError("scoring_function: gamma = 1/(3 - 2 eta)");
    reject_minus_one({-2.0 * gamma, -2.0 * gamma - alpha});
    s.regime = ScoringRegime::kFactor;
    const bool fast = low_eta ? gamma < 1.0 / (3.0 - 2.0 * eta) : gamma < 0.5;
    if (fast) s.a1 = 0.0;
    else if (low_eta && gamma < 2.0 / (3.0 + 2.0 * eta))
      s.a1 = r * std::pow(lambda, 3.0 / (3.0 * gamma - 2.0 * gamma * eta - 1.0));
    else
      s.a1 = r * std::pow(lambda, 1.0 / (2.0 * gamma - 1.0));
    s.fn = [=](double x) { return T(x) * std::pow(x, -gamma); };
  } else if (kind == KernelKind::kPreferentialAttachment) {
    if (gamma > 0.5) {
      if (!(D > 0.0)) throw std::domain_error("scoring_function: D must be > 0");
      reject_minus_one({-2.0 * gamma, -1.0 - alpha, -2.0 * gamma - alpha, 2.0 * gamma - 2.0, 2.0 * gamma - 2.0 - alpha});
      s.regime = ScoringRegime::kPaHighGamma;
      s.rho = 2.0 / D;
      if (eta < 0.5 && gamma < 3.0 / (5.0 + 2.0 * eta))
        s.a1 = r * std::pow(lambda, 3.0 / alpha);
      else if (eta < 0.5 && gamma < 1.0 / (1.0 + 2.0 * eta))
        s.a1 = r * std::pow(lambda, 4.0 / (2.0 * gamma + alpha - 1.0));
      else
        s.a1 = r * std::pow(lambda, 2.0 / (2.0 * gamma - 1.0));
      const double rho = s.rho;
      s.fn = [=](double x) { return T(x) * (std::pow(x, gamma - 1.0) + rho * lambda * std::pow(x, -gamma)); };
    } else if (eta < 0.5) {
      reject_minus_one({-2.0 * gamma, -1.0 - alpha, -2.0 * gamma - alpha, 2.0 * gamma - 2.0, 2.0 * gamma - 2.0 - alpha});
      s.regime = ScoringRegime::kPaLowGammaSlow;
      s.a1 = r * std::pow(lambda, 3.0 / alpha);
      s.fn = [=](double x) { return (std::pow(x, -gamma) + lambda * std::pow(x, gamma - 1.0)) * T(x); };
    } else if (eta > 0.5) {
      s.regime = ScoringRegime::kPaLowGammaFast;
      s.a1 = 0.0;
      // Any value in (gamma, 1 - gamma) works; take the midpoint.
      s.gamma_prime = 0.5 * (gamma + (1.0 - gamma));
      const double gp = s.gamma_prime;
      s.fn = [=](double x) { return std::pow(x, -gp); };
    } else {
      throw RegimeError("scoring_function: eta = 1/2 with gamma < 1/2 is excluded");
    }
  } else {
    throw std::domain_error("scoring_function: no built-in choice for custom kernels");
  }
  if (s.a1 >= 1.0) s.a1 = std::nextafter(1.0, 0.0);
  return s;
}

double d_max(const ModelParams& params) {
  const double k0 = params.kappa0;
  const double g = params.kernel.gamma();
  double middle;
  if (params.kernel.kind() == KernelKind::kCustom) {
    const double c2 = kernel_bounds(params.kernel).c2;
    middle = k0 * k0 / (64.0 * c2);
  } else {
    middle = k0 * k0 * (1.0 - g) / (64.0 * params.kernel.beta());
  }
  return std::min({k0 / 4.0, middle, 1.0 / 16.0});
}

double score_constant(const ModelParams& params) {
  const double k0 = params.kappa0;
  const double c2 = kernel_bounds(params.kernel).c2;
  return std::min({k0, k0 * k0 / (16.0 * c2), 0.25});
}

double default_drift_constant(const ModelParams& params) {
  return std::min(d_max(params), score_constant(params) / 4.0) * (1.0 - 1e-6);
}

namespace {

struct CondSSetup {
  std::int64_t n;
  std::int64_t cap_index;  // ceil(a1 N), 0 in global mode
  std::int64_t first_x;    // first checked x (1-based)
  std::vector<double> sbar;  // sbar[y] = S((y v cap)/N), index 1..n
};

CondSSetup condS_setup(const ScoringFunction& S, const ModelParams& params, CondSMode mode) {
  if (params.n < 2) throw std::domain_error("verify_condS: N must be >= 2");
  if (S.regime != ScoringRegime::kCustom && S.lambda != params.lambda)
    throw std::invalid_argument("verify_condS: scoring function built for a different lambda");
  CondSSetup c;
  c.n = params.n;
  const double nn = static_cast<double>(c.n);
  if (mode == CondSMode::kCutoff) {
    if (!(S.a1 * nn >= 1.0)) throw std::domain_error("verify_condS: cutoff mode needs a1 N >= 1");
    c.cap_index = static_cast<std::int64_t>(std::ceil(S.a1 * nn));
    c.first_x = static_cast<std::int64_t>(std::floor(S.a1 * nn)) + 1;
  } else {
    c.cap_index = 0;
    c.first_x = 1;
  }
  c.sbar.assign(static_cast<std::size_t>(c.n) + 1, 0.0);
  for (std::int64_t y = 1; y <= c.n; ++y)
    c.sbar[static_cast<std::size_t>(y)] = S(static_cast<double>(std::max(y, c.cap_index)) / nn);
  return c;
}

void record(CondSReport& rep, double lhs, double rhs, std::int64_t x) {
  const double ratio = lhs / rhs;
  if (rep.checked == 0 || ratio > rep.worst_ratio) {
    rep.worst_ratio = ratio;
    rep.worst_x = x;
  }
  ++rep.checked;
}

}  // namespace

CondSReport verify_condS_bruteforce(const ScoringFunction& S, const ModelParams& params, double D, CondSMode mode) {
  const CondSSetup c = condS_setup(S, params, mode);
  const double nn = static_cast<double>(c.n);
  const double lambda = params.lambda;
  CondSReport rep;
  for (std::int64_t x = c.first_x; x <= c.n; ++x) {
    long double sum = 0.0L;
    for (std::int64_t y = 1; y <= c.n; ++y) {
      // The diagonal term p(x/N, x/N)/N is kept, as in the stated sum.
      const double p = std::min(1.0, params.kernel(x / nn, y / nn) / nn);
      sum += static_cast<long double>(p) * c.sbar[static_cast<std::size_t>(y)];
    }
    const double lhs = lambda * time_scale(x / nn, lambda, params) * static_cast<double>(sum);
    record(rep, lhs, D * S(x / nn), x);
  }
  rep.pass = rep.checked > 0 && rep.worst_ratio <= 1.0;
  return rep;
}

CondSReport verify_condS(const ScoringFunction& S, const ModelParams& params, double D, CondSMode mode) {
  const KernelKind kind = params.kernel.kind();
  if (kind == KernelKind::kCustom) return verify_condS_bruteforce(S, params, D, mode);
  const CondSSetup c = condS_setup(S, params, mode);
  const std::int64_t n = c.n;
  const double nn = static_cast<double>(n);
  const double g = params.kernel.gamma();
  const double beta = params.kernel.beta();
  const double lambda = params.lambda;
  const auto sz = static_cast<std::size_t>(n) + 1;

  // Prefix sums over y of sbar, y^-g sbar and y^(g-1) sbar.
  std::vector<long double> p0(sz, 0.0L), p1(sz, 0.0L), p2(sz, 0.0L);
  for (std::int64_t y = 1; y <= n; ++y) {
    const auto i = static_cast<std::size_t>(y);
    const double yd = static_cast<double>(y);
    p0[i] = p0[i - 1] + c.sbar[i];
    p1[i] = p1[i - 1] + static_cast<long double>(std::pow(yd, -g)) * c.sbar[i];
    p2[i] = p2[i - 1] + static_cast<long double>(std::pow(yd, g - 1.0)) * c.sbar[i];
  }
  auto range = [](const std::vector<long double>& p, std::int64_t lo, std::int64_t hi) {
    // Sum over y in (lo, hi].
    if (hi <= lo) return 0.0L;
    return p[static_cast<std::size_t>(hi)] - p[static_cast<std::size_t>(lo)];
  };

  CondSReport rep;
  for (std::int64_t x = c.first_x; x <= n; ++x) {
    const double xd = static_cast<double>(x);
    // Uncapped kernel probability p(x/N, y/N)/N, non-increasing in y.
    auto raw = [&](std::int64_t y) { return params.kernel(xd / nn, static_cast<double>(y) / nn) / nn; };
    std::int64_t lo = 0, hi = n;  // largest y with raw(y) >= 1, or 0
    while (lo < hi) {
      const std::int64_t mid = (lo + hi + 1) / 2;
      if (raw(mid) >= 1.0) lo = mid;
      else hi = mid - 1;
    }
    const std::int64_t ystar = lo;
    long double sum = range(p0, 0, ystar);
    if (kind == KernelKind::kFactor) {
      // beta (xy/N^2)^-g / N = beta N^(2g-1) x^-g y^-g
      const long double coef = beta * std::pow(nn, 2.0 * g - 1.0) * std::pow(xd, -g);
      sum += coef * range(p1, ystar, n);
    } else {
      // y <= x: beta y^-g x^(g-1); y >= x: beta x^-g y^(g-1)
      sum += beta * static_cast<long double>(std::pow(xd, g - 1.0)) * range(p1, ystar, x);
      sum += beta * static_cast<long double>(std::pow(xd, -g)) * range(p2, std::max(ystar, x), n);
    }
    const double lhs = lambda * time_scale(xd / nn, lambda, params) * static_cast<double>(sum);
    record(rep, lhs, D * S(xd / nn), x);
  }
  rep.pass = rep.checked > 0 && rep.worst_ratio <= 1.0;
  return rep;
}

double density_upper_bound(const ScoringFunction& S) {
  const double a1 = S.a1;
  if (!(a1 > 0.0 && a1 < 1.0)) throw std::domain_error("density_upper_bound: needs 0 < a1 < 1");
  std::vector<double> cuts{a1, 1.0};
  for (double k : S.kinks)
    if (k > a1 && k < 1.0) cuts.push_back(k);
  // Log-spaced breakpoints keep power-law integrands well resolved.
  for (double x = a1 * 4.0; x < 1.0; x *= 4.0) cuts.push_back(x);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  using boost::math::quadrature::gauss_kronrod;
  long double total = 0.0L;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double err = 0.0;
    const double piece = gauss_kronrod<double, 31>::integrate(S.fn, cuts[i], cuts[i + 1], 15, 1e-14, &err);
    if (!std::isfinite(piece)) throw std::runtime_error("density_upper_bound: integrand not integrable");
    total += piece;
  }
  const double s_a1 = S(a1);
  if (!(s_a1 > 0.0) || !std::isfinite(s_a1)) throw std::runtime_error("density_upper_bound: S(a1) not positive");
  return a1 + static_cast<double>(total) / s_a1;
}

double chernoff_exponent(double q, double s) {
  if (!(q > 0.0 && q < 1.0) || !(s > 0.0 && s < 1.0)) throw std::domain_error("chernoff: need q, s in (0, 1)");
  const double sq = s * q;
  return sq * std::log(s) + (1.0 - sq) * std::log((1.0 - sq) / (1.0 - q));
}

double chernoff_bound(std::int64_t n, double q, double s) {
  if (n < 1) throw std::domain_error("chernoff: n must be >= 1");
  return std::exp(-chernoff_exponent(q, s) * static_cast<double>(n));
}

}  // namespace epinet
