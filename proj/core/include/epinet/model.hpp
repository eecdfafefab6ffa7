#ifndef EPINET_MODEL_HPP
#define EPINET_MODEL_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace epinet {

enum class KernelKind { kFactor, kPreferentialAttachment, kCustom };

// Constants with c1 * a^-gamma <= p(a,1) <= int_0^1 p(a,s) ds < c2 * a^-gamma.
struct KernelBounds {
  double c1 = 0.0;
  double c2 = 0.0;
};

// Symmetric connection kernel p: (0,1]^2 -> [0,inf), non-increasing in each
// argument. Built-in kernels are the factor kernel beta x^-g y^-g and the
// preferential attachment kernel beta (x^y)^-g (x v y)^(g-1).
class Kernel {
 public:
  using Function = std::function<double(double, double)>;

  static Kernel factor(double beta, double gamma);
  static Kernel preferential_attachment(double beta, double gamma);
  // Symmetry and monotonicity are spot-checked on a grid; throws
  // std::invalid_argument when the check fails. Bounds are optional, but
  // kernel_bounds() refuses a custom kernel without them.
  static Kernel custom(Function fn, double gamma,
                       std::optional<KernelBounds> bounds = std::nullopt);

  KernelKind kind() const { return kind_; }
  double beta() const { return beta_; }
  double gamma() const { return gamma_; }
  const std::optional<KernelBounds>& supplied_bounds() const { return bounds_; }

  // Throws std::domain_error unless x, y are in (0, 1].
  double operator()(double x, double y) const;

 private:
  Kernel() = default;

  KernelKind kind_ = KernelKind::kFactor;
  double beta_ = 1.0;
  double gamma_ = 0.5;
  Function fn_;
  std::optional<KernelBounds> bounds_;
};

std::string to_string(KernelKind kind);

double kernel_value(const Kernel& kernel, double x, double y);

// For built-in kernels c2 is the closed-form integral constant padded by a
// relative 1e-6 (the defining inequality is strict).
KernelBounds kernel_bounds(const Kernel& kernel);

inline constexpr double kKernelBoundPadding = 1e-6;

struct ModelParams {
  std::int64_t n = 100;
  Kernel kernel = Kernel::factor(1.0, 0.5);
  double eta = 0.0;
  double kappa0 = 1.0;
  double lambda = 0.5;

  // Throws std::invalid_argument on n < 1, eta < 0, kappa0 <= 0, lambda <= 0.
  void validate() const;
  // Human readable notes for parameters outside the regime covered by the
  // theory (lambda >= 1).
  std::vector<std::string> warnings() const;
};

// Public vertex labels are 1-based: i, j in {1, ..., n}.
double connection_probability(const ModelParams& params, std::int64_t i, std::int64_t j);
double update_rate(const ModelParams& params, std::int64_t i);
double expected_degree(const ModelParams& params, std::int64_t i);

// Reads the flat keys n, kernel (factor|pa), beta, gamma, eta, kappa0,
// lambda. Missing keys keep their defaults; unknown keys throw.
ModelParams model_params_from_kv(const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> model_params_to_kv(const ModelParams& params);

using Vertex = std::uint32_t;

// Precomputed, immutable view of a model instance used by the simulators.
// Vertices are 0-based here: vertex u corresponds to label u + 1.
class Model {
 public:
  explicit Model(ModelParams params);

  const ModelParams& params() const { return params_; }
  std::size_t size() const { return n_; }
  double lambda() const { return params_.lambda; }

  double pair_probability(Vertex u, Vertex v) const;
  double kappa(Vertex u) const { return kappa_[u]; }
  std::span<const double> kappas() const { return kappa_; }
  double total_kappa() const { return total_kappa_; }
  // Vertex drawn proportionally to its update rate, from u01 in [0, 1).
  Vertex vertex_by_rate(double u01) const;

  // Rows are non-increasing in v. They are split into dyadic blocks of
  // labels [2^k, 2^(k+1)); within a block the first index other than u
  // bounds the rest. Blocks holding only u are dropped.
  struct Block {
    Vertex begin = 0;  // 0-based, inclusive
    Vertex end = 0;    // exclusive
    double bound = 0.0;
  };
  std::span<const Block> row_blocks(Vertex u) const;
  // Sum over blocks of bound * (number of v != u in the block).
  double row_bound_mass(Vertex u) const { return row_bound_mass_[u]; }

 private:
  ModelParams params_;
  std::size_t n_ = 0;
  std::vector<double> kappa_;
  std::vector<double> kappa_cumulative_;
  double total_kappa_ = 0.0;
  std::vector<Block> blocks_;
  std::vector<std::size_t> block_offset_;
  std::vector<double> row_bound_mass_;
};

}  // namespace epinet

#endif  // EPINET_MODEL_HPP
