#include "epinet/network.hpp"

#include <algorithm>
#include <cmath>

namespace epinet {

namespace {

void sample_naive(const Model& model, Vertex u, Vertex lo, Vertex hi, Rng& rng, std::vector<Vertex>& out) {
  for (Vertex v = lo; v < hi; ++v) {
    if (v == u) continue;
    const double p = model.pair_probability(u, v);
    if (p >= 1.0 || (p > 0.0 && uniform01(rng) < p)) out.push_back(v);
  }
}

// Visits the candidates of a Bernoulli(q) thinning of [lo, hi) \ {u} and
// accepts each with p/q. q bounds p on the range because rows are
// non-increasing, so this reproduces independent Bernoulli(p) draws.
void sample_range(const Model& model, Vertex u, Vertex lo, Vertex hi, Rng& rng, std::vector<Vertex>& out) {
  Vertex first = lo;
  if (first == u) ++first;
  if (first >= hi) return;
  const double q = model.pair_probability(u, first);
  if (!(q > 0.0)) return;
  if (q >= 1.0) {
    for (Vertex v = lo; v < hi; ++v) {
      if (v == u) continue;
      const double p = model.pair_probability(u, v);
      if (p >= 1.0 || (p > 0.0 && uniform01(rng) < p)) out.push_back(v);
    }
    return;
  }
  const bool has_u = u >= lo && u < hi;
  const std::uint64_t count = (hi - lo) - (has_u ? 1 : 0);
  const double log_miss = std::log1p(-q);
  std::uint64_t pos = 0;  // position among the count slots
  for (;;) {
    const double skip = std::floor(std::log(uniform_open(rng)) / log_miss);
    if (skip >= static_cast<double>(count - pos)) return;
    pos += static_cast<std::uint64_t>(skip);
    Vertex v = lo + static_cast<Vertex>(pos);
    if (has_u && v >= u) ++v;
    ++pos;
    const double p = v == first ? q : model.pair_probability(u, v);
    if (p >= q || uniform01(rng) * q < p) out.push_back(v);
    if (pos >= count) return;
  }
}

void erase_sorted(std::vector<Vertex>& vec, Vertex x) {
  auto it = std::lower_bound(vec.begin(), vec.end(), x);
  if (it != vec.end() && *it == x) vec.erase(it);
}

void insert_sorted(std::vector<Vertex>& vec, Vertex x) {
  vec.insert(std::lower_bound(vec.begin(), vec.end(), x), x);
}

}  // namespace

void sample_row(const Model& model, Vertex u, Vertex lo, Vertex hi, Rng& rng, ResampleMethod method,
                std::vector<Vertex>& out) {
  if (method == ResampleMethod::kNaive) {
    sample_naive(model, u, lo, hi, rng, out);
    return;
  }
  // Dyadic blocks in 1-based labels: [2^k, 2^(k+1)) -> 0-based [2^k - 1, 2^(k+1) - 1).
  for (std::uint64_t b = 1; b - 1 < hi; b *= 2) {
    const Vertex blo = static_cast<Vertex>(std::max<std::uint64_t>(b - 1, lo));
    const Vertex bhi = static_cast<Vertex>(std::min<std::uint64_t>(2 * b - 1, hi));
    if (blo < bhi) sample_range(model, u, blo, bhi, rng, out);
  }
}

NetworkState empty_network(std::size_t n) {
  NetworkState s;
  s.neighbors.resize(n);
  return s;
}

NetworkState sample_stationary(const Model& model, Rng& rng, ResampleMethod method) {
  const auto n = static_cast<Vertex>(model.size());
  NetworkState s = empty_network(n);
  std::vector<Vertex> row;
  for (Vertex u = 0; u < n; ++u) {
    row.clear();
    sample_row(model, u, u + 1, n, rng, method, row);
    // Rows are visited in increasing u, so every list stays sorted.
    for (Vertex v : row) {
      s.neighbors[u].push_back(v);
      s.neighbors[v].push_back(u);
    }
    s.edge_count += row.size();
  }
  return s;
}

void resample_vertex(NetworkState& state, Vertex v, const Model& model, Rng& rng, ResampleMethod method,
                     std::vector<Vertex>* old_neighbors) {
  std::vector<Vertex> old = std::move(state.neighbors[v]);
  for (Vertex w : old) erase_sorted(state.neighbors[w], v);
  std::vector<Vertex> fresh;
  sample_row(model, v, 0, static_cast<Vertex>(model.size()), rng, method, fresh);
  for (Vertex w : fresh) insert_sorted(state.neighbors[w], v);
  state.edge_count = state.edge_count - old.size() + fresh.size();
  state.neighbors[v] = std::move(fresh);
  if (old_neighbors) *old_neighbors = std::move(old);
}

bool has_edge(const NetworkState& s, Vertex i, Vertex j) {
  const auto& a = s.neighbors[i];
  return std::binary_search(a.begin(), a.end(), j);
}

std::size_t edge_count(const NetworkState& s) { return s.edge_count; }

bool is_consistent(const NetworkState& s) {
  std::size_t half = 0;
  for (Vertex i = 0; i < s.size(); ++i) {
    const auto& a = s.neighbors[i];
    half += a.size();
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (a[k] == i || a[k] >= s.size()) return false;
      if (k > 0 && a[k - 1] >= a[k]) return false;
      if (!has_edge(s, a[k], i)) return false;
    }
  }
  return half % 2 == 0 && half / 2 == s.edge_count;
}

void write_edge_list(std::ostream& os, const NetworkState& s) {
  for (Vertex i = 0; i < s.size(); ++i)
    for (Vertex j : s.neighbors[i])
      if (i < j) os << (i + 1) << ' ' << (j + 1) << '\n';
}

}  // namespace epinet
