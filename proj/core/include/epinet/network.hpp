#ifndef EPINET_NETWORK_HPP
#define EPINET_NETWORK_HPP

#include <cstddef>
#include <ostream>
#include <vector>

#include "epinet/model.hpp"
#include "epinet/random.hpp"

namespace epinet {

// Naive draws one Bernoulli per pair; Blocked skips geometrically through
// dyadic index blocks and thins, which has exactly the same law.
enum class ResampleMethod { kNaive, kBlocked };

struct NetworkState {
  // Sorted, symmetric, no self-loops.
  std::vector<std::vector<Vertex>> neighbors;
  std::size_t edge_count = 0;

  std::size_t size() const { return neighbors.size(); }
};

NetworkState empty_network(std::size_t n);
NetworkState sample_stationary(const Model& model, Rng& rng,
                               ResampleMethod method = ResampleMethod::kBlocked);

// Redraws every pair {v, j}, j != v. The previous neighbourhood of v is
// moved into *old_neighbors when given.
void resample_vertex(NetworkState& state, Vertex v, const Model& model, Rng& rng,
                     ResampleMethod method = ResampleMethod::kBlocked,
                     std::vector<Vertex>* old_neighbors = nullptr);

// Appends to out, in increasing order, every v in [lo, hi) \ {u} for which an
// independent Bernoulli(p(u, v)) succeeds.
void sample_row(const Model& model, Vertex u, Vertex lo, Vertex hi, Rng& rng,
                ResampleMethod method, std::vector<Vertex>& out);

inline std::size_t degree(const NetworkState& s, Vertex v) { return s.neighbors[v].size(); }
bool has_edge(const NetworkState& s, Vertex i, Vertex j);
std::size_t edge_count(const NetworkState& s);

// Checks symmetry, ordering, absence of self-loops and the edge count.
bool is_consistent(const NetworkState& s);

// One line "i j" per edge, 1-based labels, i < j.
void write_edge_list(std::ostream& os, const NetworkState& s);

}  // namespace epinet

#endif  // EPINET_NETWORK_HPP
