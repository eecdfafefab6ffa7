#ifndef EPINET_COUPLING_HPP
#define EPINET_COUPLING_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "epinet/dynamics.hpp"
#include "epinet/model.hpp"

namespace epinet {

struct CoupledTrajectories {
  Trajectory first;
  Trajectory second;
  // Set when X1 <= X2 failed after some event.
  bool violation = false;
  std::uint64_t violation_events = 0;
  std::uint64_t events = 0;
};

// Two contact processes with rates lambda1 <= lambda2 on one shared graph.
// Recoveries act on the union of both infected sets. Infection marks arrive
// at rate lambda2 on every present edge touching the union; the second
// process always uses a mark, the first one keeps it with probability
// lambda1 / lambda2. The order X1 <= X2 is checked after every event.
CoupledTrajectories simulate_coupled_monotone(const Model& model, double lambda1, double lambda2,
                                              std::span<const Vertex> initial1, std::span<const Vertex> initial2,
                                              const SimConfig& config);

struct MonotoneAudit {
  std::size_t replicas = 0;
  std::size_t violating_replicas = 0;
  std::uint64_t violation_events = 0;
  std::uint64_t events = 0;
};

// Replica i uses seed replica_seed(seed, i).
MonotoneAudit audit_monotone_coupling(const Model& model, double lambda1, double lambda2,
                                      std::span<const Vertex> initial1, std::span<const Vertex> initial2,
                                      double t_max, std::size_t replicas, std::uint64_t seed, unsigned threads = 0);

}  // namespace epinet

#endif  // EPINET_COUPLING_HPP
