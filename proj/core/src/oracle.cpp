#include "epinet/oracle.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace epinet {

double JointStateSpace::stationary_weight(std::uint32_t bits) const {
  double w = 1.0;
  for (std::size_t e = 0; e < edges.size(); ++e)
    w *= (bits >> e) & 1u ? edge_probability[e] : 1.0 - edge_probability[e];
  return w;
}

JointStateSpace build_generator(const ModelParams& params) {
  if (params.n > static_cast<std::int64_t>(kOracleMaxN))
    throw OracleSizeError("oracle: n = " + std::to_string(params.n) + " exceeds the limit of 5");
  const Model model(params);
  JointStateSpace sp;
  sp.n = params.n;
  sp.lambda = params.lambda;
  sp.kappa.assign(model.kappas().begin(), model.kappas().end());
  const std::size_t n = sp.n;
  std::vector<std::vector<std::size_t>> incident(n);
  for (Vertex i = 0; i < n; ++i) {
    for (Vertex j = i + 1; j < n; ++j) {
      incident[i].push_back(sp.edges.size());
      incident[j].push_back(sp.edges.size());
      sp.edges.emplace_back(i, j);
      sp.edge_probability.push_back(model.pair_probability(i, j));
    }
  }
  // Neighbourhood outcomes of each vertex: new edge bits on its incident
  // edges and their product-Bernoulli weights.
  struct Outcome {
    std::uint32_t bits;
    double weight;
  };
  std::vector<std::vector<Outcome>> outcomes(n);
  std::vector<std::uint32_t> incident_mask(n, 0);
  for (Vertex v = 0; v < n; ++v) {
    for (std::size_t e : incident[v]) incident_mask[v] |= 1u << e;
    const std::size_t k = incident[v].size();
    for (std::uint32_t b = 0; b < (1u << k); ++b) {
      Outcome o{0, 1.0};
      for (std::size_t r = 0; r < k; ++r) {
        const std::size_t e = incident[v][r];
        const bool on = (b >> r) & 1u;
        if (on) o.bits |= 1u << e;
        o.weight *= on ? sp.edge_probability[e] : 1.0 - sp.edge_probability[e];
      }
      if (o.weight > 0.0) outcomes[v].push_back(o);
    }
  }

  const std::size_t count = sp.state_count();
  sp.row_begin.assign(count + 1, 0);
  sp.diagonal.assign(count, 0.0);
  std::vector<std::pair<std::uint32_t, double>> row;
  for (std::size_t s = 0; s < count; ++s) {
    row.clear();
    const std::uint32_t inf = sp.infection_bits(s);
    const std::uint32_t eb = sp.edge_bits(s);
    for (Vertex v = 0; v < n; ++v)
      if ((inf >> v) & 1u) row.emplace_back(static_cast<std::uint32_t>(sp.encode(inf & ~(1u << v), eb)), 1.0);
    if (sp.lambda > 0.0) {
      for (std::size_t e = 0; e < sp.edges.size(); ++e) {
        if (!((eb >> e) & 1u)) continue;
        const auto [i, j] = sp.edges[e];
        const bool ii = (inf >> i) & 1u, ij = (inf >> j) & 1u;
        if (ii == ij) continue;
        const Vertex target = ii ? j : i;
        row.emplace_back(static_cast<std::uint32_t>(sp.encode(inf | (1u << target), eb)), sp.lambda);
      }
    }
    for (Vertex v = 0; v < n; ++v) {
      for (const Outcome& o : outcomes[v]) {
        const std::uint32_t nb = (eb & ~incident_mask[v]) | o.bits;
        if (nb == eb) continue;  // self-loop
        row.emplace_back(static_cast<std::uint32_t>(sp.encode(inf, nb)), sp.kappa[v] * o.weight);
      }
    }
    std::sort(row.begin(), row.end());
    double exit = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (!sp.col.empty() && sp.row_begin[s] < sp.col.size() && sp.col.back() == row[k].first) {
        sp.rate.back() += row[k].second;
      } else {
        sp.col.push_back(row[k].first);
        sp.rate.push_back(row[k].second);
      }
      exit += row[k].second;
    }
    sp.diagonal[s] = -exit;
    sp.row_begin[s + 1] = sp.col.size();
  }
  return sp;
}

namespace {
// Largest transient system solved by direct sparse elimination.
constexpr Eigen::Index kDirectSolveLimit = 4096;
}  // namespace

std::vector<double> expected_extinction_times(const JointStateSpace& sp) {
  // Transient states are those with at least one infected vertex; the
  // absorbing ones collapse into a single state with h = 0.
  const std::size_t count = sp.state_count();
  std::vector<std::int64_t> index(count, -1);
  std::vector<std::size_t> states;
  for (std::size_t s = 0; s < count; ++s) {
    if (sp.infection_bits(s) != 0) {
      index[s] = static_cast<std::int64_t>(states.size());
      states.push_back(s);
    }
  }
  const auto m = static_cast<Eigen::Index>(states.size());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(sp.nonzeros() + states.size());
  for (std::size_t r = 0; r < states.size(); ++r) {
    const std::size_t s = states[r];
    trips.emplace_back(r, r, sp.diagonal[s]);
    for (std::size_t k = sp.row_begin[s]; k < sp.row_begin[s + 1]; ++k)
      if (index[sp.col[k]] >= 0) trips.emplace_back(r, index[sp.col[k]], sp.rate[k]);
  }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  const Eigen::VectorXd rhs = Eigen::VectorXd::Constant(m, -1.0);
  Eigen::VectorXd h;
  if (m <= kDirectSolveLimit) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw std::runtime_error("oracle: singular extinction-time system");
    h = lu.solve(rhs);
    // One round of iterative refinement.
    h += lu.solve(Eigen::VectorXd(rhs - A * h));
  } else {
    // The n = 5 system fills in almost densely under elimination; -A is a
    // diagonally dominant M-matrix, so Jacobi-preconditioned BiCGSTAB converges fast.
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>> it;
    it.setTolerance(1e-15);
    it.setMaxIterations(5000);
    it.compute(A);
    h = it.solve(rhs);
    for (int round = 0; round < 3 && (rhs - A * h).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, h.cwiseAbs().maxCoeff());
         ++round)
      h = it.solveWithGuess(rhs, h);
  }
  const Eigen::VectorXd res = rhs - A * h;
  const double tol = 1e-10 * std::max(1.0, h.cwiseAbs().maxCoeff());
  if (!(res.cwiseAbs().maxCoeff() <= tol)) throw std::runtime_error("oracle: linear solve residual above 1e-10");
  std::vector<double> out(count, 0.0);
  for (std::size_t r = 0; r < states.size(); ++r) out[states[r]] = h[static_cast<Eigen::Index>(r)];
  return out;
}

double expected_extinction_time(const JointStateSpace& sp, std::size_t state) {
  if (state >= sp.state_count()) throw std::out_of_range("oracle: state out of range");
  return expected_extinction_times(sp)[state];
}

double expected_extinction_time_stationary(const JointStateSpace& sp, std::uint32_t infected) {
  const auto h = expected_extinction_times(sp);
  const auto start = stationary_start(sp, infected);
  double e = 0.0;
  for (std::size_t s = 0; s < start.size(); ++s) e += start[s] * h[s];
  return e;
}

std::vector<double> stationary_start(const JointStateSpace& sp, std::uint32_t infected) {
  if (infected >= (1u << sp.n)) throw std::out_of_range("oracle: infected mask has bits beyond n");
  std::vector<double> pi(sp.state_count(), 0.0);
  const std::uint32_t configs = 1u << sp.edges.size();
  for (std::uint32_t eb = 0; eb < configs; ++eb) pi[sp.encode(infected, eb)] = sp.stationary_weight(eb);
  return pi;
}

std::vector<double> transient_distribution(const JointStateSpace& sp, std::vector<double> pi, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("oracle: t must be >= 0");
  const std::size_t count = sp.state_count();
  if (pi.size() != count) throw std::invalid_argument("oracle: distribution size mismatch");
  double big = 0.0;
  for (double d : sp.diagonal) big = std::max(big, -d);
  if (t == 0.0 || big == 0.0) return pi;
  const double Lambda = big * 1.0001;
  const int chunks = static_cast<int>(std::ceil(Lambda * t / 50.0));
  const double h = t / chunks;
  const double mu = Lambda * h;
  std::vector<double> term(count), next(count), acc(count);
  for (int c = 0; c < chunks; ++c) {
    term = pi;
    double w = std::exp(-mu);
    double mass = w;
    for (std::size_t s = 0; s < count; ++s) acc[s] = w * term[s];
    for (int k = 1; mass < 1.0 - 1e-14 || k <= mu; ++k) {
      // term <- term P with P = I + Q / Lambda.
      std::fill(next.begin(), next.end(), 0.0);
      for (std::size_t s = 0; s < count; ++s) {
        const double x = term[s];
        if (x == 0.0) continue;
        next[s] += x * (1.0 + sp.diagonal[s] / Lambda);
        for (std::size_t e = sp.row_begin[s]; e < sp.row_begin[s + 1]; ++e) next[sp.col[e]] += x * sp.rate[e] / Lambda;
      }
      term.swap(next);
      w *= mu / k;
      mass += w;
      for (std::size_t s = 0; s < count; ++s) acc[s] += w * term[s];
      if (k > 10 * mu + 200) break;
    }
    pi = acc;
  }
  return pi;
}

double exact_density(const JointStateSpace& sp, double t, std::uint32_t infected) {
  const auto pi = transient_distribution(sp, stationary_start(sp, infected), t);
  double d = 0.0;
  for (std::size_t s = 0; s < pi.size(); ++s) d += pi[s] * std::popcount(sp.infection_bits(s));
  return d / static_cast<double>(sp.n);
}

double exact_survival(const JointStateSpace& sp, double t, std::uint32_t infected) {
  const auto pi = transient_distribution(sp, stationary_start(sp, infected), t);
  double alive = 0.0;
  for (std::size_t s = 0; s < pi.size(); ++s)
    if (sp.infection_bits(s) != 0) alive += pi[s];
  return alive;
}

double duality_probability(const JointStateSpace& sp, std::uint32_t a, std::uint32_t b, double t) {
  const auto pi = transient_distribution(sp, stationary_start(sp, b), t);
  double p = 0.0;
  for (std::size_t s = 0; s < pi.size(); ++s)
    if (sp.infection_bits(s) & a) p += pi[s];
  return p;
}

void write_generator(const JointStateSpace& sp, std::ostream& out) {
  const auto old = out.precision(17);
  for (std::size_t s = 0; s < sp.state_count(); ++s)
    for (std::size_t k = sp.row_begin[s]; k < sp.row_begin[s + 1]; ++k) out << s << ' ' << sp.col[k] << ' ' << sp.rate[k] << '\n';
  out.precision(old);
}

}  // namespace epinet
