#include "epinet/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "epinet/format.hpp"

namespace epinet {

namespace {

void check_shape(double beta, double gamma) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("kernel: beta must be > 0");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("kernel: gamma must be in (0, 1)");
}

// Grid used for spot checks of custom kernels.
std::vector<double> check_grid() {
  std::vector<double> g;
  for (double x = 1e-3; x < 1.0; x *= 1.6) g.push_back(x);
  for (int k = 1; k <= 16; ++k) g.push_back(k / 16.0);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

double integral_over_second(const Kernel& k, double a) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate([&](double s) { return k(a, s); }, 0.0, 1.0);
}

}  // namespace

Kernel Kernel::factor(double beta, double gamma) {
  check_shape(beta, gamma);
  Kernel k;
  k.kind_ = KernelKind::kFactor;
  k.beta_ = beta;
  k.gamma_ = gamma;
  return k;
}

Kernel Kernel::preferential_attachment(double beta, double gamma) {
  check_shape(beta, gamma);
  Kernel k;
  k.kind_ = KernelKind::kPreferentialAttachment;
  k.beta_ = beta;
  k.gamma_ = gamma;
  return k;
}

Kernel Kernel::custom(Function fn, double gamma, std::optional<KernelBounds> bounds) {
  if (!fn) throw std::invalid_argument("kernel: empty custom function");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("kernel: gamma must be in (0, 1)");
  if (bounds && !(bounds->c1 > 0.0 && bounds->c2 > bounds->c1))
    throw std::invalid_argument("kernel: bounds need 0 < c1 < c2");
  Kernel k;
  k.kind_ = KernelKind::kCustom;
  k.beta_ = std::numeric_limits<double>::quiet_NaN();
  k.gamma_ = gamma;
  k.fn_ = std::move(fn);
  k.bounds_ = bounds;

  const auto grid = check_grid();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double v = k.fn_(grid[i], grid[j]);
      if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("kernel: custom value not finite and >= 0");
      const double w = k.fn_(grid[j], grid[i]);
      if (std::abs(v - w) > 1e-12 * std::max({1.0, std::abs(v), std::abs(w)}))
        throw std::invalid_argument("kernel: custom function is not symmetric");
      if (i + 1 < grid.size()) {
        const double next = k.fn_(grid[i + 1], grid[j]);
        if (next > v * (1.0 + 1e-12) + 1e-300)
          throw std::invalid_argument("kernel: custom function is not non-increasing");
      }
    }
  }
  return k;
}

double Kernel::operator()(double x, double y) const {
  if (!(x > 0.0 && x <= 1.0) || !(y > 0.0 && y <= 1.0))
    throw std::domain_error("kernel: arguments must lie in (0, 1]");
  switch (kind_) {
    case KernelKind::kFactor:
      return beta_ * std::pow(x * y, -gamma_);
    case KernelKind::kPreferentialAttachment: {
      const double lo = std::min(x, y);
      const double hi = std::max(x, y);
      return beta_ * std::pow(lo, -gamma_) * std::pow(hi, gamma_ - 1.0);
    }
    case KernelKind::kCustom:
      return fn_(x, y);
  }
  return 0.0;
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::kFactor: return "factor";
    case KernelKind::kPreferentialAttachment: return "pa";
    case KernelKind::kCustom: return "custom";
  }
  return "?";
}

double kernel_value(const Kernel& kernel, double x, double y) { return kernel(x, y); }

KernelBounds kernel_bounds(const Kernel& kernel) {
  const double b = kernel.beta();
  const double g = kernel.gamma();
  switch (kernel.kind()) {
    case KernelKind::kFactor:
      return {b, b / (1.0 - g) * (1.0 + kKernelBoundPadding)};
    case KernelKind::kPreferentialAttachment:
      return {b, b * (1.0 / (1.0 - g) + 1.0 / g) * (1.0 + kKernelBoundPadding)};
    case KernelKind::kCustom:
      break;
  }
  if (!kernel.supplied_bounds())
    throw std::invalid_argument("kernel_bounds: custom kernel without supplied bounds");
  const KernelBounds kb = *kernel.supplied_bounds();
  for (int k = 1; k <= 100; ++k) {
    const double a = k / 101.0;
    const double scale = std::pow(a, -g);
    if (kb.c1 * scale > kernel(a, 1.0) * (1.0 + 1e-12))
      throw std::runtime_error("kernel_bounds: c1 a^-gamma <= p(a,1) fails at a=" + format_double(a));
    if (!(integral_over_second(kernel, a) < kb.c2 * scale))
      throw std::runtime_error("kernel_bounds: integral bound c2 fails at a=" + format_double(a));
  }
  return kb;
}

void ModelParams::validate() const {
  if (n < 1) throw std::invalid_argument("model: n must be >= 1");
  if (n > static_cast<std::int64_t>(std::numeric_limits<Vertex>::max()))
    throw std::invalid_argument("model: n too large");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::invalid_argument("model: eta must be >= 0");
  if (!(kappa0 > 0.0) || !std::isfinite(kappa0)) throw std::invalid_argument("model: kappa0 must be > 0");
  // lambda = 0 is admitted for calibration runs (pure recovery).
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("model: lambda must be >= 0");
}

std::vector<std::string> ModelParams::warnings() const {
  std::vector<std::string> w;
  if (lambda >= 1.0) w.push_back("lambda >= 1 lies outside the range (0,1) covered by the bounds");
  if (lambda == 0.0) w.push_back("lambda = 0: no infections");
  return w;
}

namespace {

void check_index(const ModelParams& p, std::int64_t i) {
  if (i < 1 || i > p.n) throw std::out_of_range("vertex index out of range: " + std::to_string(i));
}

}  // namespace

double connection_probability(const ModelParams& params, std::int64_t i, std::int64_t j) {
  check_index(params, i);
  check_index(params, j);
  if (i == j) throw std::out_of_range("connection_probability: i == j");
  const double n = static_cast<double>(params.n);
  const double v = params.kernel(static_cast<double>(i) / n, static_cast<double>(j) / n) / n;
  return std::min(1.0, v);
}

double update_rate(const ModelParams& params, std::int64_t i) {
  check_index(params, i);
  const double e = params.kernel.gamma() * params.eta;
  return params.kappa0 * std::pow(static_cast<double>(params.n) / static_cast<double>(i), e);
}

double expected_degree(const ModelParams& params, std::int64_t i) {
  check_index(params, i);
  double sum = 0.0;
  for (std::int64_t j = 1; j <= params.n; ++j)
    if (j != i) sum += connection_probability(params, i, j);
  return sum;
}

ModelParams model_params_from_kv(const std::map<std::string, std::string>& kv) {
  ModelParams p;
  std::string kind = "factor";
  double beta = 1.0;
  double gamma = 0.5;
  for (const auto& [key, value] : kv) {
    if (key == "n") p.n = parse_int<std::int64_t>(value);
    else if (key == "kernel") kind = value;
    else if (key == "beta") beta = parse_double(value);
    else if (key == "gamma") gamma = parse_double(value);
    else if (key == "eta") p.eta = parse_double(value);
    else if (key == "kappa0") p.kappa0 = parse_double(value);
    else if (key == "lambda") p.lambda = parse_double(value);
    else throw std::invalid_argument("unknown model key: " + key);
  }
  if (kind == "factor") p.kernel = Kernel::factor(beta, gamma);
  else if (kind == "pa") p.kernel = Kernel::preferential_attachment(beta, gamma);
  else throw std::invalid_argument("unknown kernel: " + kind + " (expected factor or pa)");
  p.validate();
  return p;
}

std::map<std::string, std::string> model_params_to_kv(const ModelParams& params) {
  if (params.kernel.kind() == KernelKind::kCustom)
    throw std::invalid_argument("custom kernels cannot be serialised");
  return {
      {"n", std::to_string(params.n)},
      {"kernel", to_string(params.kernel.kind())},
      {"beta", format_double(params.kernel.beta())},
      {"gamma", format_double(params.kernel.gamma())},
      {"eta", format_double(params.eta)},
      {"kappa0", format_double(params.kappa0)},
      {"lambda", format_double(params.lambda)},
  };
}

Model::Model(ModelParams params) : params_(std::move(params)) {
  params_.validate();
  n_ = static_cast<std::size_t>(params_.n);

  kappa_.resize(n_);
  kappa_cumulative_.resize(n_);
  double acc = 0.0;
  for (std::size_t u = 0; u < n_; ++u) {
    kappa_[u] = update_rate(params_, static_cast<std::int64_t>(u + 1));
    acc += kappa_[u];
    kappa_cumulative_[u] = acc;
  }
  total_kappa_ = acc;

  block_offset_.assign(n_ + 1, 0);
  row_bound_mass_.assign(n_, 0.0);
  for (std::size_t u = 0; u < n_; ++u) {
    block_offset_[u] = blocks_.size();
    double mass = 0.0;
    for (std::size_t lo = 1; lo <= n_; lo *= 2) {
      const std::size_t hi = std::min(2 * lo, n_ + 1);  // labels [lo, hi)
      std::size_t first = lo;
      if (first == u + 1) ++first;
      if (first >= hi) continue;
      const double q = pair_probability(static_cast<Vertex>(u), static_cast<Vertex>(first - 1));
      if (!(q > 0.0)) continue;
      const std::size_t count = (hi - lo) - ((u + 1 >= lo && u + 1 < hi) ? 1 : 0);
      blocks_.push_back({static_cast<Vertex>(lo - 1), static_cast<Vertex>(hi - 1), q});
      mass += q * static_cast<double>(count);
    }
    row_bound_mass_[u] = mass;
  }
  block_offset_[n_] = blocks_.size();
}

double Model::pair_probability(Vertex u, Vertex v) const {
  if (u == v) return 0.0;
  const double n = static_cast<double>(n_);
  const double x = static_cast<double>(u + 1) / n;
  const double y = static_cast<double>(v + 1) / n;
  return std::min(1.0, params_.kernel(x, y) / n);
}

Vertex Model::vertex_by_rate(double u01) const {
  const double target = u01 * total_kappa_;
  auto it = std::upper_bound(kappa_cumulative_.begin(), kappa_cumulative_.end(), target);
  if (it == kappa_cumulative_.end()) --it;
  return static_cast<Vertex>(it - kappa_cumulative_.begin());
}

std::span<const Model::Block> Model::row_blocks(Vertex u) const {
  return {blocks_.data() + block_offset_[u], block_offset_[u + 1] - block_offset_[u]};
}

}  // namespace epinet
