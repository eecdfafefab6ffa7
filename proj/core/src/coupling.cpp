#include "epinet/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "epinet/detail/fenwick.hpp"
#include "epinet/parallel.hpp"

namespace epinet {

namespace {

class MonotonePair {
 public:
  MonotonePair(const Model& model, double lambda1, double lambda2, std::span<const Vertex> a1,
               std::span<const Vertex> a2, const SimConfig& config)
      : model_(model),
        lambda1_(lambda1),
        lambda2_(lambda2),
        resample_(config.resample),
        graph_rng_(replica_seed(config.seed, 0)),
        rng_(replica_seed(config.seed, 1)) {
    const std::size_t n = model.size();
    graph_ = sample_stationary(model_, graph_rng_, resample_);
    x1_.assign(n, 0);
    x2_.assign(n, 0);
    slot_.assign(n, 0);
    degree_weight_.reset(n);
    for (Vertex v : a1) set_state(v, 1, x2_.at(v));
    for (Vertex v : a2) set_state(v, x1_.at(v), 1);
    count1_ = static_cast<std::size_t>(std::count(x1_.begin(), x1_.end(), 1));
    count2_ = static_cast<std::size_t>(std::count(x2_.begin(), x2_.end(), 1));
    if (count1_ == 0) ext1_ = 0.0;
    if (count2_ == 0) ext2_ = 0.0;
    next_update_ = exponential(graph_rng_, model_.total_kappa());
  }

  bool done() const { return union_.empty(); }
  double time() const { return time_; }
  std::uint64_t events() const { return events_; }
  std::size_t count1() const { return count1_; }
  std::size_t count2() const { return count2_; }
  double ext1() const { return ext1_; }
  double ext2() const { return ext2_; }
  std::uint64_t violations() const { return violations_; }

  void advance_until(double t, std::uint64_t max_events) {
    while (!done() && events_ < max_events) {
      const double marks = lambda2_ * static_cast<double>(degree_weight_.total());
      const double rate = static_cast<double>(union_.size()) + marks;
      const double t_event = time_ + exponential(rng_, rate);
      if (std::min(t_event, next_update_) > t) {
        time_ = t;
        return;
      }
      if (next_update_ <= t_event) {
        time_ = next_update_;
        update(model_.vertex_by_rate(uniform01(graph_rng_)));
        next_update_ = time_ + exponential(graph_rng_, model_.total_kappa());
      } else {
        time_ = t_event;
        if (uniform01(rng_) * rate < static_cast<double>(union_.size())) {
          const Vertex v = union_[uniform_index<std::size_t>(rng_, union_.size())];
          set_state(v, 0, 0);
        } else {
          mark();
        }
      }
      ++events_;
      check_order();
    }
    if (done()) time_ = std::max(time_, t);
  }

 private:
  void mark() {
    const auto x = static_cast<Vertex>(degree_weight_.find(uniform_index<std::int64_t>(rng_, degree_weight_.total())));
    const auto& nb = graph_.neighbors[x];
    const Vertex y = nb[uniform_index<std::size_t>(rng_, nb.size())];
    const double keep = uniform01(rng_);
    // Edges inside the union are reachable from both ends.
    const bool y_in_union = x1_[y] || x2_[y];
    const double thin = uniform01(rng_);
    if (y_in_union && thin >= 0.5) return;
    std::uint8_t a1 = x1_[x], b1 = x1_[y], a2 = x2_[x], b2 = x2_[y];
    if (a2 != b2) a2 = b2 = 1;
    if (keep * lambda2_ < lambda1_ && a1 != b1) a1 = b1 = 1;
    set_state(x, a1, a2);
    set_state(y, b1, b2);
  }

  void update(Vertex v) {
    resample_vertex(graph_, v, model_, graph_rng_, resample_, &old_);
    refresh_weight(v);
    for (Vertex w : old_) refresh_weight(w);
    for (Vertex w : graph_.neighbors[v]) refresh_weight(w);
  }

  void refresh_weight(Vertex v) {
    const bool in_union = x1_[v] || x2_[v];
    degree_weight_.set(v, in_union ? static_cast<std::int64_t>(graph_.neighbors[v].size()) : 0);
  }

  void set_state(Vertex v, std::uint8_t s1, std::uint8_t s2) {
    const bool was = x1_[v] || x2_[v];
    if (x1_[v] != s1) {
      count1_ = s1 ? count1_ + 1 : count1_ - 1;
      if (count1_ == 0) ext1_ = time_;
    }
    if (x2_[v] != s2) {
      count2_ = s2 ? count2_ + 1 : count2_ - 1;
      if (count2_ == 0) ext2_ = time_;
    }
    x1_[v] = s1;
    x2_[v] = s2;
    const bool now = s1 || s2;
    if (now && !was) {
      slot_[v] = static_cast<std::uint32_t>(union_.size());
      union_.push_back(v);
    } else if (!now && was) {
      const Vertex last = union_.back();
      union_[slot_[v]] = last;
      slot_[last] = slot_[v];
      union_.pop_back();
    }
    refresh_weight(v);
  }

  void check_order() {
    for (std::size_t v = 0; v < x1_.size(); ++v) {
      if (x1_[v] > x2_[v]) {
        ++violations_;
        return;
      }
    }
  }

  const Model& model_;
  double lambda1_;
  double lambda2_;
  ResampleMethod resample_;
  Rng graph_rng_;
  Rng rng_;
  NetworkState graph_;
  std::vector<std::uint8_t> x1_;
  std::vector<std::uint8_t> x2_;
  std::vector<Vertex> union_;
  std::vector<std::uint32_t> slot_;
  detail::Fenwick<std::int64_t> degree_weight_;
  std::vector<Vertex> old_;
  std::size_t count1_ = 0;
  std::size_t count2_ = 0;
  double ext1_ = std::numeric_limits<double>::quiet_NaN();
  double ext2_ = std::numeric_limits<double>::quiet_NaN();
  double time_ = 0.0;
  double next_update_ = 0.0;
  std::uint64_t events_ = 0;
  std::uint64_t violations_ = 0;
};

}  // namespace

CoupledTrajectories simulate_coupled_monotone(const Model& model, double lambda1, double lambda2,
                                              std::span<const Vertex> initial1, std::span<const Vertex> initial2,
                                              const SimConfig& config) {
  if (!(lambda1 >= 0.0 && lambda1 <= lambda2)) throw std::invalid_argument("coupling: need 0 <= lambda1 <= lambda2");
  std::vector<std::uint8_t> in2(model.size(), 0);
  for (Vertex v : initial2) in2.at(v) = 1;
  for (Vertex v : initial1)
    if (!in2.at(v)) throw std::invalid_argument("coupling: initial sets must satisfy A1 subset of A2");

  std::vector<double> times = config.observation_times;
  if (times.empty()) {
    times = geometric_grid(std::min(1e-2, config.t_max / 2), config.t_max, 60);
    times.insert(times.begin(), 0.0);
  }

  MonotonePair pair(model, lambda1, lambda2, initial1, initial2, config);
  CoupledTrajectories out;
  out.first.seed = out.second.seed = config.seed;
  bool budget_hit = false;
  for (double t : times) {
    pair.advance_until(t, config.max_events);
    if (!pair.done() && pair.time() < t) {
      budget_hit = true;
      break;
    }
    out.first.times.push_back(t);
    out.second.times.push_back(t);
    out.first.infected.push_back(static_cast<std::uint32_t>(pair.count1()));
    out.second.infected.push_back(static_cast<std::uint32_t>(pair.count2()));
    out.first.star_infected.push_back(0);
    out.second.star_infected.push_back(0);
  }
  if (!budget_hit) pair.advance_until(config.t_max, config.max_events);
  out.events = pair.events();
  out.first.events = out.second.events = pair.events();
  out.first.censored = pair.count1() > 0;
  out.second.censored = pair.count2() > 0;
  out.first.t_ext = out.first.censored ? pair.time() : pair.ext1();
  out.second.t_ext = out.second.censored ? pair.time() : pair.ext2();
  out.violation_events = pair.violations();
  out.violation = out.violation_events > 0;
  return out;
}

MonotoneAudit audit_monotone_coupling(const Model& model, double lambda1, double lambda2,
                                      std::span<const Vertex> initial1, std::span<const Vertex> initial2,
                                      double t_max, std::size_t replicas, std::uint64_t seed, unsigned threads) {
  auto runs = run_replicas(replicas, threads, [&](std::size_t i) {
    SimConfig cfg;
    cfg.t_max = t_max;
    cfg.seed = replica_seed(seed, i);
    cfg.observation_times = {t_max};
    const auto r = simulate_coupled_monotone(model, lambda1, lambda2, initial1, initial2, cfg);
    return std::pair<std::uint64_t, std::uint64_t>(r.violation_events, r.events);
  });
  MonotoneAudit audit;
  audit.replicas = replicas;
  for (const auto& [viol, events] : runs) {
    audit.violating_replicas += viol > 0 ? 1 : 0;
    audit.violation_events += viol;
    audit.events += events;
  }
  return audit;
}

}  // namespace epinet
