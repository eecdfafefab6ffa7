#include "epinet/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "epinet/parallel.hpp"

namespace epinet {

std::vector<double> geometric_grid(double t_first, double t_last, std::size_t points) {
  if (!(t_first > 0.0) || !(t_last > t_first) || points < 2)
    throw std::invalid_argument("geometric_grid: need 0 < t_first < t_last and >= 2 points");
  std::vector<double> g(points);
  const double ratio = std::log(t_last / t_first);
  for (std::size_t k = 0; k < points; ++k)
    g[k] = t_first * std::exp(ratio * static_cast<double>(k) / static_cast<double>(points - 1));
  g.back() = t_last;
  return g;
}

std::vector<double> linear_grid(double t_first, double t_last, std::size_t points) {
  if (!(t_last > t_first) || points < 2) throw std::invalid_argument("linear_grid: need t_first < t_last, >= 2 points");
  std::vector<double> g(points);
  for (std::size_t k = 0; k < points; ++k)
    g[k] = t_first + (t_last - t_first) * static_cast<double>(k) / static_cast<double>(points - 1);
  g.back() = t_last;
  return g;
}

std::vector<Vertex> all_vertices(std::size_t n) {
  std::vector<Vertex> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<Vertex>(i);
  return v;
}

ContactProcess::ContactProcess(const Model& model, std::span<const Vertex> initial, std::uint64_t seed,
                               ResampleMethod resample, std::uint64_t audit_interval)
    : model_(model),
      resample_(resample),
      audit_interval_(audit_interval),
      graph_rng_(replica_seed(seed, 0)),
      rng_(replica_seed(seed, 1)) {
  graph_ = sample_stationary(model_, graph_rng_, resample_);
  init(initial);
}

ContactProcess::ContactProcess(const Model& model, NetworkState graph, std::span<const Vertex> initial,
                               std::uint64_t seed, ResampleMethod resample, std::uint64_t audit_interval)
    : model_(model),
      resample_(resample),
      audit_interval_(audit_interval),
      graph_rng_(replica_seed(seed, 0)),
      rng_(replica_seed(seed, 1)),
      graph_(std::move(graph)) {
  if (graph_.size() != model_.size()) throw std::invalid_argument("ContactProcess: graph size mismatch");
  init(initial);
}

void ContactProcess::init(std::span<const Vertex> initial) {
  const std::size_t n = model_.size();
  infected_.assign(n, 0);
  slot_.assign(n, 0);
  healthy_.assign(n, 0);
  pressure_.reset(n);
  for (Vertex v = 0; v < n; ++v) healthy_[v] = static_cast<std::int64_t>(graph_.neighbors[v].size());
  for (Vertex v : initial) {
    if (v >= n) throw std::out_of_range("ContactProcess: initial vertex out of range");
    if (!infected_[v]) infect(v);
  }
  if (infected_list_.empty()) extinction_time_ = time_;
  next_update_ = time_ + exponential(graph_rng_, model_.total_kappa());
}

void ContactProcess::infect(Vertex v) {
  infected_[v] = 1;
  slot_[v] = static_cast<std::uint32_t>(infected_list_.size());
  infected_list_.push_back(v);
  for (Vertex w : graph_.neighbors[v]) {
    --healthy_[w];
    if (infected_[w]) pressure_.add(w, -1);
  }
  pressure_.set(v, healthy_[v]);
}

void ContactProcess::recover(Vertex v) {
  infected_[v] = 0;
  const Vertex last = infected_list_.back();
  infected_list_[slot_[v]] = last;
  slot_[last] = slot_[v];
  infected_list_.pop_back();
  for (Vertex w : graph_.neighbors[v]) {
    ++healthy_[w];
    if (infected_[w]) pressure_.add(w, 1);
  }
  pressure_.set(v, 0);
}

void ContactProcess::edge_added(Vertex a, Vertex b) {
  if (!infected_[b]) {
    ++healthy_[a];
    if (infected_[a]) pressure_.add(a, 1);
  }
  if (!infected_[a]) {
    ++healthy_[b];
    if (infected_[b]) pressure_.add(b, 1);
  }
}

void ContactProcess::edge_removed(Vertex a, Vertex b) {
  if (!infected_[b]) {
    --healthy_[a];
    if (infected_[a]) pressure_.add(a, -1);
  }
  if (!infected_[a]) {
    --healthy_[b];
    if (infected_[b]) pressure_.add(b, -1);
  }
}

void ContactProcess::update(Vertex v) {
  resample_vertex(graph_, v, model_, graph_rng_, resample_, &scratch_);
  for (Vertex w : scratch_) edge_removed(v, w);
  for (Vertex w : graph_.neighbors[v]) edge_added(v, w);
}

double ContactProcess::total_rate() const {
  return static_cast<double>(infected_list_.size()) + model_.lambda() * static_cast<double>(pressure_.total()) +
         model_.total_kappa();
}

void ContactProcess::fire_epidemic_event() {
  const double recoveries = static_cast<double>(infected_list_.size());
  const double infections = model_.lambda() * static_cast<double>(pressure_.total());
  if (uniform01(rng_) * (recoveries + infections) < recoveries) {
    recover(infected_list_[uniform_index<std::size_t>(rng_, infected_list_.size())]);
    return;
  }
  const std::int64_t r = uniform_index<std::int64_t>(rng_, pressure_.total());
  const Vertex x = static_cast<Vertex>(pressure_.find(r));
  std::int64_t k = uniform_index<std::int64_t>(rng_, healthy_[x]);
  for (Vertex w : graph_.neighbors[x]) {
    if (infected_[w]) continue;
    if (k-- == 0) {
      infect(w);
      return;
    }
  }
  throw std::logic_error("ContactProcess: healthy neighbour count out of sync");
}

void ContactProcess::advance_until(double t, std::uint64_t max_events) {
  while (!extinct() && events_ < max_events) {
    const double epidemic_rate =
        static_cast<double>(infected_list_.size()) + model_.lambda() * static_cast<double>(pressure_.total());
    const double t_epidemic = time_ + exponential(rng_, epidemic_rate);
    if (std::min(t_epidemic, next_update_) > t) {
      time_ = t;
      return;
    }
    if (next_update_ <= t_epidemic) {
      // The pending epidemic clock is discarded; it is memoryless.
      time_ = next_update_;
      update(model_.vertex_by_rate(uniform01(graph_rng_)));
      next_update_ = time_ + exponential(graph_rng_, model_.total_kappa());
    } else {
      time_ = t_epidemic;
      fire_epidemic_event();
      if (extinct()) extinction_time_ = time_;
    }
    ++events_;
    if (audit_interval_ > 0 && events_ % audit_interval_ == 0) audit();
  }
  if (extinct()) time_ = std::max(time_, t);
}

void ContactProcess::audit() const {
  if (!is_consistent(graph_)) throw std::logic_error("audit: network state inconsistent");
  std::int64_t si = 0;
  std::size_t count = 0;
  for (Vertex v = 0; v < model_.size(); ++v) {
    std::int64_t h = 0;
    for (Vertex w : graph_.neighbors[v]) h += infected_[w] ? 0 : 1;
    if (h != healthy_[v]) throw std::logic_error("audit: healthy-neighbour count mismatch at " + std::to_string(v));
    const std::int64_t weight = infected_[v] ? h : 0;
    if (pressure_.get(v) != weight) throw std::logic_error("audit: pressure mismatch");
    si += weight;
    count += infected_[v] ? 1 : 0;
  }
  if (count != infected_list_.size()) throw std::logic_error("audit: infected count mismatch");
  const double recomputed =
      static_cast<double>(count) + model_.lambda() * static_cast<double>(si) + model_.total_kappa();
  if (std::abs(recomputed - total_rate()) > 1e-9 * recomputed) throw std::logic_error("audit: total rate drift");
}

Trajectory simulate(const Model& model, std::span<const Vertex> initial, const SimConfig& config) {
  if (!(config.t_max > 0.0)) throw std::invalid_argument("simulate: t_max must be > 0");
  std::vector<double> times = config.observation_times;
  if (times.empty()) {
    times = geometric_grid(std::min(1e-2, config.t_max / 2), config.t_max, 60);
    times.insert(times.begin(), 0.0);
  }
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < 0.0 || times[k] > config.t_max || (k > 0 && !(times[k] > times[k - 1])))
      throw std::invalid_argument("simulate: observation times must increase within [0, t_max]");
  }
  const auto star_limit = static_cast<Vertex>(std::floor(config.star_cut * static_cast<double>(model.size())));

  ContactProcess process(model, initial, config.seed, config.resample, config.audit_interval);
  Trajectory traj;
  traj.seed = config.seed;
  bool budget_hit = false;
  for (double t : times) {
    process.advance_until(t, config.max_events);
    if (!process.extinct() && process.events() >= config.max_events && process.time() < t) {
      budget_hit = true;
      break;
    }
    std::uint32_t stars = 0;
    for (Vertex v = 0; v < star_limit; ++v) stars += process.is_infected(v) ? 1 : 0;
    traj.times.push_back(t);
    traj.infected.push_back(static_cast<std::uint32_t>(process.infected_count()));
    traj.star_infected.push_back(stars);
  }
  if (!budget_hit) process.advance_until(config.t_max, config.max_events);
  traj.events = process.events();
  traj.censored = !process.extinct();
  traj.t_ext = process.extinct() ? process.extinction_time() : process.time();
  return traj;
}

DensityEstimate estimate_density(const Model& model, std::span<const double> times, std::size_t replicas,
                                 std::uint64_t seed, unsigned threads, ResampleMethod resample) {
  const std::vector<Vertex> everyone = all_vertices(model.size());
  const std::size_t m = times.size();
  auto rows = run_replicas(replicas, threads, [&](std::size_t i) {
    ContactProcess process(model, everyone, replica_seed(seed, i), resample);
    std::vector<double> row(m);
    for (std::size_t k = 0; k < m; ++k) {
      process.advance_until(times[k]);
      row[k] = static_cast<double>(process.infected_count()) / static_cast<double>(model.size());
    }
    return row;
  });

  DensityEstimate est;
  est.times.assign(times.begin(), times.end());
  est.mean.assign(m, 0.0);
  est.std_error.assign(m, 0.0);
  est.samples.times = est.times;
  est.samples.replicas = replicas;
  est.samples.values.reserve(replicas * m);
  for (const auto& row : rows) est.samples.values.insert(est.samples.values.end(), row.begin(), row.end());
  for (std::size_t k = 0; k < m; ++k) {
    double s = 0.0;
    double s2 = 0.0;
    for (const auto& row : rows) {
      s += row[k];
      s2 += row[k] * row[k];
    }
    const double r = static_cast<double>(replicas);
    est.mean[k] = s / r;
    if (replicas > 1) {
      const double var = std::max(0.0, (s2 - s * s / r) / (r - 1.0));
      est.std_error[k] = std::sqrt(var / r);
    }
  }
  return est;
}

ExtinctionSample sample_extinction_times(const Model& model, std::span<const Vertex> initial, double t_max,
                                         std::size_t replicas, std::uint64_t seed, unsigned threads,
                                         ResampleMethod resample) {
  struct One {
    double t = 0.0;
    bool censored = false;
  };
  auto runs = run_replicas(replicas, threads, [&](std::size_t i) {
    ContactProcess process(model, initial, replica_seed(seed, i), resample);
    process.advance_until(t_max);
    return process.extinct() ? One{process.extinction_time(), false} : One{t_max, true};
  });
  ExtinctionSample out;
  double s = 0.0;
  double s2 = 0.0;
  for (const auto& r : runs) {
    const double t = r.t;
    out.t_ext.push_back(t);
    out.censored.push_back(r.censored ? 1 : 0);
    out.censored_count += r.censored ? 1 : 0;
    s += t;
    s2 += t * t;
  }
  const double n = static_cast<double>(replicas);
  if (replicas > 0) out.mean = s / n;
  if (replicas > 1) out.std_error = std::sqrt(std::max(0.0, (s2 - s * s / n) / (n - 1.0)) / n);
  return out;
}

double DualityEstimate::combined_se() const { return std::sqrt(se_ab * se_ab + se_ba * se_ba); }

DualityEstimate estimate_duality_gap(const Model& model, std::span<const Vertex> a, std::span<const Vertex> b,
                                     double t, std::size_t replicas, std::uint64_t seed, unsigned threads) {
  if (!(t > 0.0)) throw std::invalid_argument("estimate_duality_gap: t must be > 0");
  auto hits = [&](std::span<const Vertex> start, std::span<const Vertex> target, std::uint64_t offset) {
    return run_replicas(replicas, threads, [&](std::size_t i) -> int {
      ContactProcess process(model, start, replica_seed(seed, offset + i));
      process.advance_until(t);
      for (Vertex v : target)
        if (process.is_infected(v)) return 1;
      return 0;
    });
  };
  const auto from_b = hits(b, a, 0);
  const auto from_a = hits(a, b, replicas);
  DualityEstimate est;
  const double n = static_cast<double>(replicas);
  double ab = 0.0;
  double ba = 0.0;
  for (std::size_t i = 0; i < replicas; ++i) {
    ab += from_b[i];
    ba += from_a[i];
  }
  est.p_ab = ab / n;
  est.p_ba = ba / n;
  est.se_ab = std::sqrt(est.p_ab * (1.0 - est.p_ab) / n);
  est.se_ba = std::sqrt(est.p_ba * (1.0 - est.p_ba) / n);
  return est;
}

}  // namespace epinet
