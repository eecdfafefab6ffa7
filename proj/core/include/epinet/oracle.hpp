#ifndef EPINET_ORACLE_HPP
#define EPINET_ORACLE_HPP

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <utility>
#include <vector>

#include "epinet/model.hpp"

namespace epinet {

inline constexpr std::size_t kOracleMaxN = 5;

class OracleSizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Joint (infection x graph) chain for N <= 5. State s packs the infection
// bits in the low N bits and the edge bits above them; vertex masks are
// 0-based (bit v is vertex v + 1).
struct JointStateSpace {
  std::size_t n = 0;
  double lambda = 0.0;
  std::vector<std::pair<Vertex, Vertex>> edges;  // i < j, bit order
  std::vector<double> edge_probability;
  std::vector<double> kappa;
  // Off-diagonal rates in CSR form; diagonal holds minus the exit rate.
  std::vector<std::size_t> row_begin;
  std::vector<std::uint32_t> col;
  std::vector<double> rate;
  std::vector<double> diagonal;

  std::size_t state_count() const { return std::size_t{1} << (n + edges.size()); }
  std::uint32_t infection_bits(std::size_t s) const { return static_cast<std::uint32_t>(s & ((1u << n) - 1)); }
  std::uint32_t edge_bits(std::size_t s) const { return static_cast<std::uint32_t>(s >> n); }
  std::size_t encode(std::uint32_t infected, std::uint32_t edge_bits) const {
    return (static_cast<std::size_t>(edge_bits) << n) | infected;
  }
  // Product-Bernoulli weight of an edge configuration.
  double stationary_weight(std::uint32_t edge_bits) const;
  std::size_t nonzeros() const { return rate.size(); }
};

// Throws OracleSizeError for n > 5.
JointStateSpace build_generator(const ModelParams& params);

// E[T_ext] from every state (0 on the absorbing states).
std::vector<double> expected_extinction_times(const JointStateSpace& space);
double expected_extinction_time(const JointStateSpace& space, std::size_t state);
// Initial graph drawn from the stationary law.
double expected_extinction_time_stationary(const JointStateSpace& space, std::uint32_t infected);

// Stationary graph with the given infected set.
std::vector<double> stationary_start(const JointStateSpace& space, std::uint32_t infected);
// Law at time t by uniformization, truncation error <= 1e-12 per chunk.
std::vector<double> transient_distribution(const JointStateSpace& space, std::vector<double> start, double t);

// Expected infected fraction at t from the stationary graph.
double exact_density(const JointStateSpace& space, double t, std::uint32_t infected);
// P(T_ext > t) from the stationary graph.
double exact_survival(const JointStateSpace& space, double t, std::uint32_t infected);
// P(some x in A infected at t | start from B infected, stationary graph).
double duality_probability(const JointStateSpace& space, std::uint32_t a, std::uint32_t b, double t);

// Sparse triplets `from to rate`, one per line, off-diagonal entries only.
void write_generator(const JointStateSpace& space, std::ostream& out);

}  // namespace epinet

#endif  // EPINET_ORACLE_HPP
