#ifndef EPINET_WAITSEE_HPP
#define EPINET_WAITSEE_HPP

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "epinet/detail/fenwick.hpp"
#include "epinet/dynamics.hpp"
#include "epinet/model.hpp"
#include "epinet/random.hpp"
#include "epinet/theory.hpp"

namespace epinet {

struct WaitSeeState {
  std::vector<std::uint8_t> infected;
  // Sorted partner lists of revealed pairs; symmetric.
  std::vector<std::vector<Vertex>> revealed;
  std::size_t revealed_pairs = 0;
  std::size_t infected_count = 0;

  std::size_t size() const { return infected.size(); }
  std::size_t n_revealed(Vertex x) const { return revealed[x].size(); }
  bool is_revealed(Vertex x, Vertex y) const;
};

WaitSeeState make_waitsee_state(std::size_t n, std::span<const Vertex> infected);

struct ScoreConfig {
  ScoringFunction S;
  double delta = 0.5;
  double D = 0.0;
  double c = 0.0;
};

// c from the kernel constants; D defaults to default_drift_constant().
// Throws std::invalid_argument unless c > 4D.
ScoreConfig make_score_config(const ModelParams& params, ScoringFunction S, double D = 0.0, double delta = 0.5);

// Per-vertex constants s(x) = S(x'/N) and t(x) = c s(x) / (T_lambda(x'/N) kappa_x)
// with x' = max(x, ceil(a1 N)).
struct ScoreTables {
  std::vector<double> s;
  std::vector<double> t;
  std::vector<double> kappa;
  double lambda = 0.0;
  double delta = 0.5;
  // Dense pair probabilities for small n, empty otherwise.
  std::vector<double> pair;
  std::size_t n = 0;

  double p(const Model& model, Vertex x, Vertex y) const {
    return pair.empty() ? model.pair_probability(x, y) : pair[static_cast<std::size_t>(x) * n + y];
  }
};

ScoreTables make_score_tables(const Model& model, const ScoreConfig& cfg);

double score_m(Vertex x, bool infected, std::size_t n_revealed, const ScoreTables& tables);
double score_m(Vertex x, const WaitSeeState& state, const ScoreTables& tables);
double score_total(const WaitSeeState& state, const ScoreTables& tables);

// Generator of the wait-and-see process applied to M = sum_x m(x).
double exact_drift(const WaitSeeState& state, const ScoreTables& tables, const Model& model);
// -1/2 sum_{healthy} kappa m - 1/2 sum_{infected} kappa t
double drift_bound(const WaitSeeState& state, const ScoreTables& tables);

// Upper-bound process: recoveries at rate 1, infections at rate lambda over
// revealed pairs and lambda p_xy over unrevealed pairs (revealing them),
// mutual-infected unrevealed pairs reveal at rate lambda p_xy, and an update
// of v un-reveals every pair at v.
class WaitSeeProcess {
 public:
  WaitSeeProcess(const Model& model, std::span<const Vertex> initial, std::uint64_t seed);

  // Fires the next event if it happens by time t_limit; otherwise moves the
  // clock to t_limit and returns false. Returns false when extinct.
  bool step(double t_limit);
  void advance_until(double t, std::uint64_t max_events = std::numeric_limits<std::uint64_t>::max());

  const WaitSeeState& state() const { return state_; }
  double time() const { return time_; }
  bool extinct() const { return infected_list_.empty(); }
  double extinction_time() const { return extinction_time_; }
  std::uint64_t events() const { return events_; }
  // Proposals across unrevealed pairs that were thinned away.
  std::uint64_t null_events() const { return null_events_; }

  // Recomputes the bookkeeping; throws std::logic_error on mismatch.
  void audit() const;

 private:
  void infect(Vertex v);
  void recover(Vertex v);
  void reveal(Vertex x, Vertex y);
  void update(Vertex v);
  void unrevealed_proposal();
  Vertex propose_partner(Vertex x, double& acceptance);

  const Model& model_;
  Rng graph_rng_;
  Rng rng_;
  WaitSeeState state_;
  std::vector<Vertex> infected_list_;
  std::vector<std::uint32_t> slot_;
  // Revealed healthy partners of each vertex.
  std::vector<std::int64_t> revealed_healthy_;
  detail::Fenwick<std::int64_t> revealed_weight_;
  detail::Fenwick<double> proposal_weight_;
  std::uint64_t proposal_updates_ = 0;
  double time_ = 0.0;
  double next_update_ = 0.0;
  double extinction_time_ = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t events_ = 0;
  std::uint64_t null_events_ = 0;
};

struct WaitSeeTrajectory {
  std::vector<double> times;
  std::vector<std::uint32_t> infected;
  std::vector<std::uint64_t> revealed;
  std::vector<double> score;  // empty unless score tables were given
  double t_ext = 0.0;
  bool censored = false;
  std::uint64_t events = 0;
  std::uint64_t seed = 0;
};

WaitSeeTrajectory ws_simulate(const Model& model, std::span<const Vertex> initial, const SimConfig& config,
                              const ScoreTables* tables = nullptr);

struct WaitSeeCoupling {
  Trajectory x;
  Trajectory y;
  // Events after which X <= Y failed somewhere.
  std::uint64_t order_violations = 0;
  // Events after which some revealed pair was absent from the graph.
  std::uint64_t containment_violations = 0;
  // Reveals on pairs whose edge was already known to be absent.
  std::uint64_t phantom_reveals = 0;
  std::uint64_t events = 0;

  bool order_violation() const { return order_violations > 0; }
  bool containment_violation() const { return containment_violations > 0; }
};

// X (true process, graph edges drawn lazily) and Y (wait-and-see) built from
// one graphical representation: shared update and recovery clocks and shared
// infection marks on pairs. Requires X0 <= Y0.
WaitSeeCoupling ws_simulate_coupled(const Model& model, std::span<const Vertex> initial_x,
                                    std::span<const Vertex> initial_y, const SimConfig& config);

struct WaitSeeCouplingAudit {
  std::size_t replicas = 0;
  std::size_t order_violating_replicas = 0;
  std::size_t containment_violating_replicas = 0;
  std::uint64_t order_violations = 0;
  std::uint64_t containment_violations = 0;
  std::uint64_t phantom_reveals = 0;
  std::uint64_t events = 0;
};

WaitSeeCouplingAudit audit_waitsee_coupling(const Model& model, std::span<const Vertex> initial, double t_max,
                                            std::size_t replicas, std::uint64_t seed, unsigned threads = 0);

struct DriftSample {
  std::uint64_t replica = 0;
  std::uint64_t event_index = 0;
  double t = 0.0;
  double M = 0.0;
  double drift = 0.0;
  double bound = 0.0;
  // -drift / M^(1 - delta), 0 when M = 0
  double margin = 0.0;
};

enum class DriftSampling { kEveryK, kGeometric };

struct DriftAuditConfig {
  double t_max = 10.0;
  std::size_t replicas = 1;
  std::uint64_t seed = 1;
  DriftSampling sampling = DriftSampling::kEveryK;
  std::uint64_t every = 1;
  std::size_t max_samples_per_replica = std::numeric_limits<std::size_t>::max();
  unsigned threads = 0;
};

struct DriftAudit {
  std::vector<DriftSample> samples;
  std::size_t positive = 0;     // samples with drift > 0
  std::size_t above_bound = 0;  // samples with drift > bound
  double max_drift = -std::numeric_limits<double>::infinity();
};

DriftAudit run_drift_audit(const Model& model, const ScoreTables& tables, std::span<const Vertex> initial,
                           const DriftAuditConfig& config);

}  // namespace epinet

#endif  // EPINET_WAITSEE_HPP
