#ifndef EPINET_THEORY_HPP
#define EPINET_THEORY_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "epinet/model.hpp"

namespace epinet {

enum class Strategy { kQuickDirect, kQuickIndirect, kDelayedDirect, kDelayedIndirect };
inline constexpr Strategy kAllStrategies[] = {Strategy::kQuickDirect, Strategy::kQuickIndirect,
                                              Strategy::kDelayedDirect, Strategy::kDelayedIndirect};
std::string to_string(Strategy s);

// The thresholds and prefactors only exist as universal constants; 1 is the
// canonical default.
struct StrategyConstants {
  double m_i = 1.0;
  double m_ii = 1.0;
  double m_iii = 1.0;
  double m_iv = 1.0;
  double r = 1.0;
  double c_prime = 1.0;
};

// Raised for parameters on a degenerate exponent or an excluded boundary.
class RegimeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

double theta(const ModelParams& params);

// Unique u = log T >= 0 with e^u u^2 = rhs (rhs >= 0); rhs = 0 gives 0.
double solve_log_T_rhs(double rhs);
// T >= 1 with T log^2 T = rhs.
double solve_T_rhs(double rhs);
// Right-hand side c1 theta / (20 kappa0^2) lambda^2 a^(-gamma (1 - 2 eta)).
double T_rhs(double a, double lambda, const ModelParams& params);
double solve_T(double a, double lambda, const ModelParams& params);

// max{lambda^2 x^(-gamma (1 - 2 eta)), 1}
double time_scale(double x, double lambda, double gamma, double eta);
double time_scale(double x, double lambda, const ModelParams& params);

// Requires a in (0, 1/2).
bool strategy_holds(Strategy s, double a, double lambda, const ModelParams& params,
                    const StrategyConstants& consts = {});
// Left-hand side of the strategy condition (without the extra T > M test
// of the delayed variants).
double strategy_value(Strategy s, double a, double lambda, const ModelParams& params);

std::optional<double> maximal_a(Strategy s, double lambda, const ModelParams& params,
                                const StrategyConstants& consts = {});
std::optional<std::pair<double, Strategy>> a0(double lambda, const ModelParams& params,
                                              const StrategyConstants& consts = {});
// c' (lambda a0 p(a0, 1) ^ 1); a0 is clamped to 1 before evaluating p.
std::optional<double> lower_density_bound(double lambda, const ModelParams& params,
                                          const StrategyConstants& consts = {});

enum class Phase { kFastExtinction, kSlowExtinction, kBoundary };
std::string to_string(Phase p);

template <class Real>
struct BasicPhaseResult {
  Phase phase = Phase::kBoundary;
  std::optional<Real> xi;
  std::optional<Strategy> dominant_strategy;
};
using PhaseResult = BasicPhaseResult<double>;

// Works for double and for exact rational types (e.g. boost::rational).
// Phase-internal boundaries, where two exponent formulas meet, report Slow
// with the common value and no dominant strategy.
template <class Real>
BasicPhaseResult<Real> classify_phase(KernelKind kind, const Real& gamma, const Real& eta) {
  const Real zero(0), one(1), two(2), three(3), five(5);
  const Real half = one / two;
  if (!(gamma > zero && gamma < one) || eta < zero)
    throw std::domain_error("classify_phase: need gamma in (0,1), eta >= 0");
  BasicPhaseResult<Real> res;
  const Real ge = gamma * eta;
  auto slow = [&](Real xi, std::optional<Strategy> s) {
    res.phase = Phase::kSlowExtinction;
    res.xi = xi;
    res.dominant_strategy = s;
    return res;
  };
  if (kind == KernelKind::kFactor) {
    const Real fast_edge = eta < half ? one / (three - two * eta) : half;
    if (gamma < fast_edge) {
      res.phase = Phase::kFastExtinction;
      return res;
    }
    if (gamma == fast_edge) return res;
    const Real split = two / (three + two * eta);
    auto low = [&] { return (two - two * ge) / (three * gamma - two * ge - one); };
    auto high = [&] { return gamma / (two * gamma - one); };
    if (gamma < split) return slow(low(), Strategy::kDelayedDirect);
    if (gamma == split) return slow(high(), std::nullopt);
    return slow(high(), Strategy::kQuickDirect);
  }
  if (kind == KernelKind::kPreferentialAttachment) {
    if (!(eta < half)) {
      if (gamma < half) {
        res.phase = Phase::kFastExtinction;
        return res;
      }
      if (gamma == half) return res;
    }
    const Real s1 = three / (five + two * eta);
    const Real s2 = one / (one + two * eta);
    if (gamma > s2) return slow(one / (two * gamma - one), Strategy::kQuickIndirect);
    auto mid = [&] { return (three - gamma - two * ge) / (three * gamma - two * ge - one); };
    auto low = [&] { return (three - two * gamma - two * ge) / (gamma - two * ge); };
    if (gamma == s2) return slow(mid(), std::nullopt);
    if (gamma > s1) return slow(mid(), Strategy::kDelayedIndirect);
    if (gamma == s1) return slow(low(), std::nullopt);
    return slow(low(), Strategy::kDelayedDirect);
  }
  throw std::domain_error("classify_phase: custom kernels have no phase diagram");
}

enum class ScoringRegime {
  kFactor,            // S = T_lambda(x) x^-gamma
  kPaHighGamma,       // S = T_lambda(x) (x^(gamma-1) + rho lambda x^-gamma)
  kPaLowGammaSlow,    // S = (x^-gamma + lambda x^(gamma-1)) T_lambda(x)
  kPaLowGammaFast,    // S = x^-gamma'
  kCustom,
};
std::string to_string(ScoringRegime r);

struct ScoringFunction {
  ScoringRegime regime = ScoringRegime::kCustom;
  double a1 = 0.0;
  double rho = 0.0;          // PA, gamma > 1/2
  double gamma_prime = 0.0;  // PA, gamma < 1/2 < eta
  double gamma = 0.0;
  double eta = 0.0;
  double lambda = 0.0;
  std::function<double(double)> fn;
  // Points in (a1, 1) where S is not smooth; used to split quadrature.
  std::vector<double> kinks;

  double operator()(double x) const { return fn(x); }

  static ScoringFunction custom(std::function<double(double)> fn, double a1, std::vector<double> kinks = {});
};

// Default r = 1 for the cutoff a1 = r lambda^(...).
ScoringFunction scoring_function(KernelKind kind, double gamma, double eta, double lambda, double D,
                                 double r = 1.0);

double d_max(const ModelParams& params);
// min{kappa0, kappa0^2 / (16 c2), 1/4}
double score_constant(const ModelParams& params);
// A drift constant D <= d_max with c > 4D strictly.
double default_drift_constant(const ModelParams& params);

enum class CondSMode { kGlobal, kCutoff };

struct CondSReport {
  bool pass = false;
  // max over checked x of lambda T_lambda(x/N) sum_y p_xy S(...) / (D S(x/N))
  double worst_ratio = 0.0;
  std::int64_t worst_x = 0;  // 1-based
  std::int64_t checked = 0;
};

// Uses params.n, params.kernel and params.lambda. Global mode ignores a1.
CondSReport verify_condS(const ScoringFunction& S, const ModelParams& params, double D, CondSMode mode);
// Reference O(N^2) summation, also used for custom kernels.
CondSReport verify_condS_bruteforce(const ScoringFunction& S, const ModelParams& params, double D,
                                    CondSMode mode);

double density_upper_bound(const ScoringFunction& S);

// exp(-D n) with D = sq log s + (1 - sq) log((1 - sq)/(1 - q)).
double chernoff_exponent(double q, double s);
double chernoff_bound(std::int64_t n, double q, double s);

}  // namespace epinet

#endif  // EPINET_THEORY_HPP
