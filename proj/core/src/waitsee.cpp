#include "epinet/waitsee.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "epinet/parallel.hpp"

namespace epinet {

namespace {

void insert_sorted(std::vector<Vertex>& v, Vertex x) { v.insert(std::lower_bound(v.begin(), v.end(), x), x); }

void erase_sorted(std::vector<Vertex>& v, Vertex x) {
  auto it = std::lower_bound(v.begin(), v.end(), x);
  if (it != v.end() && *it == x) v.erase(it);
}

std::vector<double> default_times(const SimConfig& config) {
  std::vector<double> times = config.observation_times;
  if (times.empty()) {
    times = geometric_grid(std::min(1e-2, config.t_max / 2), config.t_max, 60);
    times.insert(times.begin(), 0.0);
  }
  return times;
}

}  // namespace

bool WaitSeeState::is_revealed(Vertex x, Vertex y) const {
  const auto& r = revealed[x];
  return std::binary_search(r.begin(), r.end(), y);
}

WaitSeeState make_waitsee_state(std::size_t n, std::span<const Vertex> infected) {
  WaitSeeState s;
  s.infected.assign(n, 0);
  s.revealed.resize(n);
  for (Vertex v : infected) {
    if (!s.infected.at(v)) ++s.infected_count;
    s.infected[v] = 1;
  }
  return s;
}

ScoreConfig make_score_config(const ModelParams& params, ScoringFunction S, double D, double delta) {
  ScoreConfig cfg;
  cfg.S = std::move(S);
  cfg.c = score_constant(params);
  cfg.D = D > 0.0 ? D : default_drift_constant(params);
  cfg.delta = delta;
  if (!(cfg.c > 4.0 * cfg.D)) throw std::invalid_argument("score config: need c > 4D");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("score config: delta must lie in (0, 1)");
  return cfg;
}

ScoreTables make_score_tables(const Model& model, const ScoreConfig& cfg) {
  ScoreTables t;
  const std::size_t n = model.size();
  const double nn = static_cast<double>(n);
  const auto cap = static_cast<std::size_t>(std::ceil(cfg.S.a1 * nn));
  t.n = n;
  t.lambda = model.lambda();
  t.delta = cfg.delta;
  t.s.resize(n);
  t.t.resize(n);
  t.kappa.assign(model.kappas().begin(), model.kappas().end());
  for (std::size_t x = 0; x < n; ++x) {
    const double u = static_cast<double>(std::max(x + 1, cap)) / nn;
    t.s[x] = cfg.S(u);
    t.t[x] = cfg.c * t.s[x] / (time_scale(u, t.lambda, model.params()) * t.kappa[x]);
  }
  if (n <= 4096) {
    t.pair.resize(n * n);
    for (Vertex x = 0; x < n; ++x)
      for (Vertex y = 0; y < n; ++y) t.pair[static_cast<std::size_t>(x) * n + y] = model.pair_probability(x, y);
  }
  return t;
}

double score_m(Vertex x, bool infected, std::size_t n_revealed, const ScoreTables& tb) {
  const double ratio = 2.0 * tb.lambda * static_cast<double>(n_revealed) / tb.kappa[x];
  if (infected) return tb.s[x] + std::min(ratio, 0.5) * 2.0 * tb.t[x];
  return std::min(ratio, 1.0) * (tb.s[x] + tb.t[x]);
}

double score_m(Vertex x, const WaitSeeState& state, const ScoreTables& tb) {
  return score_m(x, state.infected[x] != 0, state.n_revealed(x), tb);
}

double score_total(const WaitSeeState& state, const ScoreTables& tb) {
  double m = 0.0;
  for (Vertex x = 0; x < state.size(); ++x) m += score_m(x, state, tb);
  return m;
}

double exact_drift(const WaitSeeState& st, const ScoreTables& tb, const Model& model) {
  const std::size_t n = st.size();
  const double lambda = tb.lambda;
  auto m = [&](Vertex x, bool inf, std::size_t k) { return score_m(x, inf, k, tb); };
  double drift = 0.0;
  std::vector<std::uint8_t> partner(n, 0);
  for (Vertex x = 0; x < n; ++x) {
    const bool ix = st.infected[x] != 0;
    const std::size_t nx = st.n_revealed(x);
    const double mx = m(x, ix, nx);
    // Recovery.
    if (ix) drift += m(x, false, nx) - mx;
    // Update of x: all its pairs turn unrevealed.
    if (nx > 0) {
      double d = m(x, ix, 0) - mx;
      for (Vertex y : st.revealed[x]) {
        const bool iy = st.infected[y] != 0;
        const std::size_t ny = st.n_revealed(y);
        d += m(y, iy, ny - 1) - m(y, iy, ny);
      }
      drift += tb.kappa[x] * d;
    }
    if (!ix || lambda == 0.0) continue;
    // Infection across revealed pairs.
    for (Vertex y : st.revealed[x]) {
      partner[y] = 1;
      if (!st.infected[y]) {
        const std::size_t ny = st.n_revealed(y);
        drift += lambda * (m(y, true, ny) - m(y, false, ny));
      }
    }
    // Unrevealed pairs: infection plus reveal, or reveal between two
    // infected vertices (each such pair counted once).
    const double gain_x = m(x, true, nx + 1) - mx;
    for (Vertex y = 0; y < n; ++y) {
      if (y == x || partner[y]) continue;
      const bool iy = st.infected[y] != 0;
      if (iy && y < x) continue;
      const double p = tb.p(model, x, y);
      if (p == 0.0) continue;
      const std::size_t ny = st.n_revealed(y);
      drift += lambda * p * (gain_x + m(y, true, ny + 1) - m(y, iy, ny));
    }
    for (Vertex y : st.revealed[x]) partner[y] = 0;
  }
  return drift;
}

double drift_bound(const WaitSeeState& st, const ScoreTables& tb) {
  double b = 0.0;
  for (Vertex x = 0; x < st.size(); ++x) {
    if (st.infected[x]) b -= 0.5 * tb.kappa[x] * tb.t[x];
    else b -= 0.5 * tb.kappa[x] * score_m(x, st, tb);
  }
  return b;
}

WaitSeeProcess::WaitSeeProcess(const Model& model, std::span<const Vertex> initial, std::uint64_t seed)
    : model_(model), graph_rng_(replica_seed(seed, 0)), rng_(replica_seed(seed, 1)) {
  const std::size_t n = model.size();
  state_ = make_waitsee_state(n, {});
  slot_.assign(n, 0);
  revealed_healthy_.assign(n, 0);
  revealed_weight_.reset(n);
  proposal_weight_.reset(n);
  for (Vertex v : initial)
    if (!state_.infected.at(v)) infect(v);
  if (infected_list_.empty()) extinction_time_ = 0.0;
  next_update_ = exponential(graph_rng_, model_.total_kappa());
}

void WaitSeeProcess::infect(Vertex v) {
  state_.infected[v] = 1;
  ++state_.infected_count;
  slot_[v] = static_cast<std::uint32_t>(infected_list_.size());
  infected_list_.push_back(v);
  for (Vertex w : state_.revealed[v]) {
    --revealed_healthy_[w];
    if (state_.infected[w]) revealed_weight_.add(w, -1);
  }
  revealed_weight_.set(v, revealed_healthy_[v]);
  proposal_weight_.set(v, model_.row_bound_mass(v));
  ++proposal_updates_;
}

void WaitSeeProcess::recover(Vertex v) {
  state_.infected[v] = 0;
  --state_.infected_count;
  const Vertex last = infected_list_.back();
  infected_list_[slot_[v]] = last;
  slot_[last] = slot_[v];
  infected_list_.pop_back();
  for (Vertex w : state_.revealed[v]) {
    ++revealed_healthy_[w];
    if (state_.infected[w]) revealed_weight_.add(w, 1);
  }
  revealed_weight_.set(v, 0);
  proposal_weight_.set(v, 0.0);
  if (++proposal_updates_ % 65536 == 0) proposal_weight_.rebuild();
}

void WaitSeeProcess::reveal(Vertex x, Vertex y) {
  insert_sorted(state_.revealed[x], y);
  insert_sorted(state_.revealed[y], x);
  ++state_.revealed_pairs;
  if (!state_.infected[y]) {
    ++revealed_healthy_[x];
    if (state_.infected[x]) revealed_weight_.add(x, 1);
  }
  if (!state_.infected[x]) {
    ++revealed_healthy_[y];
    if (state_.infected[y]) revealed_weight_.add(y, 1);
  }
}

void WaitSeeProcess::update(Vertex v) {
  for (Vertex w : state_.revealed[v]) {
    erase_sorted(state_.revealed[w], v);
    if (!state_.infected[v]) {
      --revealed_healthy_[w];
      if (state_.infected[w]) revealed_weight_.add(w, -1);
    }
  }
  state_.revealed_pairs -= state_.revealed[v].size();
  state_.revealed[v].clear();
  revealed_healthy_[v] = 0;
  revealed_weight_.set(v, 0);
}

Vertex WaitSeeProcess::propose_partner(Vertex x, double& acceptance) {
  const auto blocks = model_.row_blocks(x);
  double target = uniform01(rng_) * model_.row_bound_mass(x);
  std::size_t k = 0;
  auto count_of = [x](const Model::Block& b) { return (b.end - b.begin) - ((x >= b.begin && x < b.end) ? 1u : 0u); };
  for (; k + 1 < blocks.size(); ++k) {
    const double w = blocks[k].bound * static_cast<double>(count_of(blocks[k]));
    if (target < w) break;
    target -= w;
  }
  const auto& b = blocks[k];
  Vertex v = b.begin + uniform_index<Vertex>(rng_, count_of(b));
  if (x >= b.begin && x < b.end && v >= x) ++v;
  acceptance = model_.pair_probability(x, v) / b.bound;
  return v;
}

void WaitSeeProcess::unrevealed_proposal() {
  const double total = proposal_weight_.total();
  const auto x = static_cast<Vertex>(proposal_weight_.find(uniform01(rng_) * total));
  double acceptance = 0.0;
  const Vertex y = propose_partner(x, acceptance);
  if (!(uniform01(rng_) < acceptance) || state_.is_revealed(x, y)) {
    ++null_events_;
    return;
  }
  if (state_.infected[y]) {
    // Both ends propose this pair, so each keeps half of its rate.
    if (uniform01(rng_) < 0.5) reveal(x, y);
    else ++null_events_;
    return;
  }
  infect(y);
  reveal(x, y);
}

bool WaitSeeProcess::step(double t_limit) {
  if (extinct()) {
    time_ = std::max(time_, t_limit);
    return false;
  }
  const double lambda = model_.lambda();
  const double recoveries = static_cast<double>(infected_list_.size());
  const double revealed = lambda * static_cast<double>(revealed_weight_.total());
  const double proposals = lambda * std::max(proposal_weight_.total(), 0.0);
  const double rate = recoveries + revealed + proposals;
  const double t_event = time_ + exponential(rng_, rate);
  if (std::min(t_event, next_update_) > t_limit) {
    time_ = t_limit;
    return false;
  }
  ++events_;
  if (next_update_ <= t_event) {
    time_ = next_update_;
    update(model_.vertex_by_rate(uniform01(graph_rng_)));
    next_update_ = time_ + exponential(graph_rng_, model_.total_kappa());
    return true;
  }
  time_ = t_event;
  const double u = uniform01(rng_) * rate;
  if (u < recoveries) {
    recover(infected_list_[uniform_index<std::size_t>(rng_, infected_list_.size())]);
    if (extinct()) extinction_time_ = time_;
  } else if (u < recoveries + revealed && revealed_weight_.total() > 0) {
    const auto x = static_cast<Vertex>(revealed_weight_.find(uniform_index<std::int64_t>(rng_, revealed_weight_.total())));
    std::int64_t k = uniform_index<std::int64_t>(rng_, revealed_healthy_[x]);
    for (Vertex w : state_.revealed[x]) {
      if (state_.infected[w]) continue;
      if (k-- == 0) {
        infect(w);
        break;
      }
    }
  } else if (proposals > 0.0) {
    unrevealed_proposal();
  } else {
    ++null_events_;
  }
  return true;
}

void WaitSeeProcess::advance_until(double t, std::uint64_t max_events) {
  while (events_ < max_events && step(t)) {
  }
  if (extinct()) time_ = std::max(time_, t);
}

void WaitSeeProcess::audit() const {
  std::size_t pairs = 0;
  for (Vertex v = 0; v < state_.size(); ++v) {
    std::int64_t h = 0;
    for (Vertex w : state_.revealed[v]) {
      if (!state_.is_revealed(w, v)) throw std::logic_error("waitsee audit: asymmetric reveal");
      h += state_.infected[w] ? 0 : 1;
    }
    pairs += state_.revealed[v].size();
    if (h != revealed_healthy_[v]) throw std::logic_error("waitsee audit: revealed-healthy count mismatch");
    if (revealed_weight_.get(v) != (state_.infected[v] ? h : 0)) throw std::logic_error("waitsee audit: weight");
  }
  if (pairs != 2 * state_.revealed_pairs) throw std::logic_error("waitsee audit: revealed pair count");
}

WaitSeeTrajectory ws_simulate(const Model& model, std::span<const Vertex> initial, const SimConfig& config,
                              const ScoreTables* tables) {
  const std::vector<double> times = default_times(config);
  WaitSeeProcess process(model, initial, config.seed);
  WaitSeeTrajectory traj;
  traj.seed = config.seed;
  bool budget_hit = false;
  for (double t : times) {
    process.advance_until(t, config.max_events);
    if (!process.extinct() && process.time() < t) {
      budget_hit = true;
      break;
    }
    traj.times.push_back(t);
    traj.infected.push_back(static_cast<std::uint32_t>(process.state().infected_count));
    traj.revealed.push_back(process.state().revealed_pairs);
    if (tables) traj.score.push_back(score_total(process.state(), *tables));
  }
  if (!budget_hit) process.advance_until(config.t_max, config.max_events);
  traj.events = process.events();
  traj.censored = !process.extinct();
  traj.t_ext = process.extinct() ? process.extinction_time() : process.time();
  return traj;
}

namespace {

enum PairState : std::uint8_t { kUnknown = 0, kPresent = 1, kAbsent = 2 };

class WaitSeePair {
 public:
  WaitSeePair(const Model& model, std::span<const Vertex> ix, std::span<const Vertex> iy, std::uint64_t seed)
      : model_(model), n_(model.size()), graph_rng_(replica_seed(seed, 0)), rng_(replica_seed(seed, 1)) {
    if (n_ > 8192) throw std::invalid_argument("ws_simulate_coupled: n too large for the pair-state matrix");
    x_.assign(n_, 0);
    y_ = make_waitsee_state(n_, {});
    slot_.assign(n_, 0);
    pair_.assign(n_ * n_, kUnknown);
    for (Vertex v : iy) set(v, x_.at(v), 1);
    for (Vertex v : ix) {
      if (!y_.infected.at(v)) throw std::invalid_argument("ws_simulate_coupled: need X0 <= Y0");
      set(v, 1, 1);
    }
    next_update_ = exponential(graph_rng_, model_.total_kappa());
  }

  bool done() const { return union_.empty(); }
  double time() const { return time_; }
  std::uint64_t events() const { return events_; }
  std::size_t x_count() const { return x_count_; }
  std::size_t y_count() const { return y_.infected_count; }
  double x_ext() const { return x_ext_; }
  double y_ext() const { return y_ext_; }
  std::uint64_t order_violations() const { return order_violations_; }
  std::uint64_t containment_violations() const { return containment_violations_; }
  std::uint64_t phantom_reveals() const { return phantom_reveals_; }

  void advance_until(double t, std::uint64_t max_events) {
    const double lambda = model_.lambda();
    while (!done() && events_ < max_events) {
      const double recoveries = static_cast<double>(union_.size());
      const double marks = lambda * recoveries * static_cast<double>(n_ - 1);
      const double t_event = time_ + exponential(rng_, recoveries + marks);
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
        if (uniform01(rng_) * (recoveries + marks) < recoveries) {
          set(union_[uniform_index<std::size_t>(rng_, union_.size())], 0, 0);
        } else {
          mark();
        }
      }
      ++events_;
      check();
    }
    if (done()) time_ = std::max(time_, t);
  }

 private:
  std::uint8_t& state(Vertex a, Vertex b) { return pair_[static_cast<std::size_t>(a) * n_ + b]; }

  void set_pair(Vertex a, Vertex b, std::uint8_t s) {
    state(a, b) = s;
    state(b, a) = s;
  }

  // One infection mark on the pair {a, b}; every pair touching the union
  // receives marks at rate lambda.
  void mark() {
    const Vertex a = union_[uniform_index<std::size_t>(rng_, union_.size())];
    Vertex b = uniform_index<Vertex>(rng_, static_cast<Vertex>(n_ - 1));
    if (b >= a) ++b;
    const double thin = uniform01(rng_);
    if ((x_[b] || y_.infected[b]) && thin >= 0.5) return;

    const double p = model_.pair_probability(a, b);
    const double u = uniform01(rng_);
    const bool revealed = y_.is_revealed(a, b);
    std::uint8_t& s = state(a, b);
    if (revealed) {
      if (s == kUnknown) set_pair(a, b, u < p ? kPresent : kAbsent);
      y_spread(a, b, false);
      if (state(a, b) == kPresent) x_spread(a, b);
      return;
    }
    if (s == kUnknown) {
      const bool present = u < p;
      set_pair(a, b, present ? kPresent : kAbsent);
      if (present) {
        y_spread(a, b, true);
        x_spread(a, b);
      }
      return;
    }
    // The pair's state is already fixed; Y still needs an independent
    // rate lambda p event here.
    if (s == kPresent) {
      ++unexpected_present_;
      x_spread(a, b);
    }
    if (u < p) {
      if (s == kAbsent && y_spread(a, b, true)) ++phantom_reveals_;
    }
  }

  // Returns true when the pair was newly revealed.
  bool y_spread(Vertex a, Vertex b, bool reveal_pair) {
    const bool ia = y_.infected[a], ib = y_.infected[b];
    if (!ia && !ib) return false;
    if (ia != ib) {
      const Vertex target = ia ? b : a;
      set(target, x_[target], 1);
    }
    if (reveal_pair) {
      insert_sorted(y_.revealed[a], b);
      insert_sorted(y_.revealed[b], a);
      ++y_.revealed_pairs;
      return true;
    }
    return false;
  }

  void x_spread(Vertex a, Vertex b) {
    if (x_[a] == x_[b]) return;
    const Vertex target = x_[a] ? b : a;
    set(target, 1, y_.infected[target]);
  }

  void update(Vertex v) {
    for (Vertex w = 0; w < n_; ++w) set_pair(v, w, kUnknown);
    for (Vertex w : y_.revealed[v]) erase_sorted(y_.revealed[w], v);
    y_.revealed_pairs -= y_.revealed[v].size();
    y_.revealed[v].clear();
  }

  void set(Vertex v, std::uint8_t sx, std::uint8_t sy) {
    const bool was = x_[v] || y_.infected[v];
    if (x_[v] != sx) {
      x_count_ = sx ? x_count_ + 1 : x_count_ - 1;
      if (x_count_ == 0) x_ext_ = time_;
    }
    if (y_.infected[v] != sy) {
      y_.infected_count = sy ? y_.infected_count + 1 : y_.infected_count - 1;
      if (y_.infected_count == 0) y_ext_ = time_;
    }
    x_[v] = sx;
    y_.infected[v] = sy;
    const bool now = sx || sy;
    if (now && !was) {
      slot_[v] = static_cast<std::uint32_t>(union_.size());
      union_.push_back(v);
    } else if (!now && was) {
      const Vertex last = union_.back();
      union_[slot_[v]] = last;
      slot_[last] = slot_[v];
      union_.pop_back();
    }
  }

  void check() {
    for (Vertex v = 0; v < n_; ++v) {
      if (x_[v] > y_.infected[v]) {
        ++order_violations_;
        break;
      }
    }
    for (Vertex v = 0; v < n_; ++v) {
      bool bad = false;
      for (Vertex w : y_.revealed[v]) {
        if (state(v, w) != kPresent) {
          bad = true;
          break;
        }
      }
      if (bad) {
        ++containment_violations_;
        break;
      }
    }
  }

  const Model& model_;
  std::size_t n_;
  Rng graph_rng_;
  Rng rng_;
  std::vector<std::uint8_t> x_;
  WaitSeeState y_;
  std::vector<Vertex> union_;
  std::vector<std::uint32_t> slot_;
  std::vector<std::uint8_t> pair_;
  std::size_t x_count_ = 0;
  double x_ext_ = 0.0;
  double y_ext_ = 0.0;
  double time_ = 0.0;
  double next_update_ = 0.0;
  std::uint64_t events_ = 0;
  std::uint64_t order_violations_ = 0;
  std::uint64_t containment_violations_ = 0;
  std::uint64_t phantom_reveals_ = 0;
  std::uint64_t unexpected_present_ = 0;
};

}  // namespace

WaitSeeCoupling ws_simulate_coupled(const Model& model, std::span<const Vertex> initial_x,
                                    std::span<const Vertex> initial_y, const SimConfig& config) {
  const std::vector<double> times = default_times(config);
  WaitSeePair pair(model, initial_x, initial_y, config.seed);
  WaitSeeCoupling out;
  out.x.seed = out.y.seed = config.seed;
  bool budget_hit = false;
  for (double t : times) {
    pair.advance_until(t, config.max_events);
    if (!pair.done() && pair.time() < t) {
      budget_hit = true;
      break;
    }
    out.x.times.push_back(t);
    out.y.times.push_back(t);
    out.x.infected.push_back(static_cast<std::uint32_t>(pair.x_count()));
    out.y.infected.push_back(static_cast<std::uint32_t>(pair.y_count()));
    out.x.star_infected.push_back(0);
    out.y.star_infected.push_back(0);
  }
  if (!budget_hit) pair.advance_until(config.t_max, config.max_events);
  out.events = out.x.events = out.y.events = pair.events();
  out.x.censored = pair.x_count() > 0;
  out.y.censored = pair.y_count() > 0;
  out.x.t_ext = out.x.censored ? pair.time() : pair.x_ext();
  out.y.t_ext = out.y.censored ? pair.time() : pair.y_ext();
  out.order_violations = pair.order_violations();
  out.containment_violations = pair.containment_violations();
  out.phantom_reveals = pair.phantom_reveals();
  return out;
}

WaitSeeCouplingAudit audit_waitsee_coupling(const Model& model, std::span<const Vertex> initial, double t_max,
                                            std::size_t replicas, std::uint64_t seed, unsigned threads) {
  auto runs = run_replicas(replicas, threads, [&](std::size_t i) {
    SimConfig cfg;
    cfg.t_max = t_max;
    cfg.seed = replica_seed(seed, i);
    cfg.observation_times = {t_max};
    return ws_simulate_coupled(model, initial, initial, cfg);
  });
  WaitSeeCouplingAudit a;
  a.replicas = replicas;
  for (const auto& r : runs) {
    a.order_violating_replicas += r.order_violation() ? 1 : 0;
    a.containment_violating_replicas += r.containment_violation() ? 1 : 0;
    a.order_violations += r.order_violations;
    a.containment_violations += r.containment_violations;
    a.phantom_reveals += r.phantom_reveals;
    a.events += r.events;
  }
  return a;
}

DriftAudit run_drift_audit(const Model& model, const ScoreTables& tables, std::span<const Vertex> initial,
                           const DriftAuditConfig& config) {
  auto per_replica = run_replicas(config.replicas, config.threads, [&](std::size_t i) {
    std::vector<DriftSample> out;
    WaitSeeProcess process(model, initial, replica_seed(config.seed, i));
    std::uint64_t next_geometric = 1;
    auto sample = [&] {
      DriftSample s;
      s.replica = i;
      s.event_index = process.events();
      s.t = process.time();
      s.M = score_total(process.state(), tables);
      s.drift = exact_drift(process.state(), tables, model);
      s.bound = drift_bound(process.state(), tables);
      s.margin = s.M > 0.0 ? -s.drift / std::pow(s.M, 1.0 - tables.delta) : 0.0;
      out.push_back(s);
    };
    sample();
    while (out.size() < config.max_samples_per_replica && process.step(config.t_max)) {
      const std::uint64_t e = process.events();
      bool take = false;
      if (config.sampling == DriftSampling::kEveryK) {
        take = config.every > 0 && e % config.every == 0;
      } else if (e == next_geometric) {
        take = true;
        next_geometric *= 2;
      }
      if (take) sample();
    }
    return out;
  });
  DriftAudit audit;
  for (auto& rows : per_replica) {
    for (const auto& s : rows) {
      audit.positive += s.drift > 0.0 ? 1 : 0;
      audit.above_bound += s.drift > s.bound ? 1 : 0;
      audit.max_drift = std::max(audit.max_drift, s.drift);
      audit.samples.push_back(s);
    }
  }
  return audit;
}

}  // namespace epinet
