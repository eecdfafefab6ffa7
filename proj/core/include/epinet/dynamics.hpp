#ifndef EPINET_DYNAMICS_HPP
#define EPINET_DYNAMICS_HPP

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "epinet/detail/fenwick.hpp"
#include "epinet/model.hpp"
#include "epinet/network.hpp"
#include "epinet/random.hpp"

namespace epinet {

// Observation grids.
std::vector<double> geometric_grid(double t_first, double t_last, std::size_t points);
std::vector<double> linear_grid(double t_first, double t_last, std::size_t points);

std::vector<Vertex> all_vertices(std::size_t n);

struct SimConfig {
  double t_max = 100.0;
  std::uint64_t max_events = 100'000'000;
  std::uint64_t seed = 1;
  // Empty: 0 followed by a geometric grid ending at t_max.
  std::vector<double> observation_times;
  // Vertices with label <= star_cut * n count as stars.
  double star_cut = 0.0;
  ResampleMethod resample = ResampleMethod::kBlocked;
  // Every this many events the incremental rates are recomputed from
  // scratch and compared; 0 disables the audit.
  std::uint64_t audit_interval = 10'000;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::uint32_t> infected;
  std::vector<std::uint32_t> star_infected;
  // Extinction time, or the time reached when censored.
  double t_ext = 0.0;
  bool censored = false;
  std::uint64_t events = 0;
  std::uint64_t seed = 0;
};

// Joint Markov process (graph, infection). Graph updates are driven by their
// own random stream, so the graph path does not depend on the infection.
// Infection events are sampled by picking an infected vertex proportionally
// to its number of healthy neighbours, then one of those neighbours.
class ContactProcess {
 public:
  ContactProcess(const Model& model, std::span<const Vertex> initial, std::uint64_t seed,
                 ResampleMethod resample = ResampleMethod::kBlocked, std::uint64_t audit_interval = 10'000);
  ContactProcess(const Model& model, NetworkState graph, std::span<const Vertex> initial, std::uint64_t seed,
                 ResampleMethod resample = ResampleMethod::kBlocked, std::uint64_t audit_interval = 10'000);

  // Runs events up to time t. Stops early on extinction or once the total
  // event count reaches max_events.
  void advance_until(double t, std::uint64_t max_events = std::numeric_limits<std::uint64_t>::max());

  double time() const { return time_; }
  bool extinct() const { return infected_list_.empty(); }
  double extinction_time() const { return extinction_time_; }
  std::uint64_t events() const { return events_; }
  std::size_t infected_count() const { return infected_list_.size(); }
  bool is_infected(Vertex v) const { return infected_[v] != 0; }
  const std::vector<std::uint8_t>& infected_flags() const { return infected_; }
  const NetworkState& network() const { return graph_; }
  // Number of (infected, healthy) adjacent pairs.
  std::int64_t si_edges() const { return pressure_.total(); }
  double total_rate() const;

  // Recomputes the bookkeeping from scratch; throws std::logic_error on
  // any mismatch.
  void audit() const;

 private:
  void init(std::span<const Vertex> initial);
  void infect(Vertex v);
  void recover(Vertex v);
  void update(Vertex v);
  void edge_added(Vertex a, Vertex b);
  void edge_removed(Vertex a, Vertex b);
  void fire_epidemic_event();

  const Model& model_;
  ResampleMethod resample_;
  std::uint64_t audit_interval_;
  Rng graph_rng_;
  Rng rng_;
  NetworkState graph_;
  std::vector<std::uint8_t> infected_;
  std::vector<Vertex> infected_list_;
  std::vector<std::uint32_t> slot_;
  // healthy_[v] = number of healthy neighbours of v, for every v.
  std::vector<std::int64_t> healthy_;
  detail::Fenwick<std::int64_t> pressure_;
  double time_ = 0.0;
  double next_update_ = 0.0;
  double extinction_time_ = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t events_ = 0;
  std::vector<Vertex> scratch_;
};

Trajectory simulate(const Model& model, std::span<const Vertex> initial, const SimConfig& config);

// fraction infected, one row per replica and one column per time.
struct ReplicaDensities {
  std::vector<double> times;
  std::size_t replicas = 0;
  std::vector<double> values;  // row-major replicas x times

  double at(std::size_t r, std::size_t k) const { return values[r * times.size() + k]; }
};

struct DensityEstimate {
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> std_error;
  ReplicaDensities samples;
};

// All-infected start; replica i uses seed replica_seed(seed, i).
DensityEstimate estimate_density(const Model& model, std::span<const double> times, std::size_t replicas,
                                 std::uint64_t seed, unsigned threads = 0,
                                 ResampleMethod resample = ResampleMethod::kBlocked);

struct ExtinctionSample {
  std::vector<double> t_ext;
  std::vector<std::uint8_t> censored;
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t censored_count = 0;
};

ExtinctionSample sample_extinction_times(const Model& model, std::span<const Vertex> initial, double t_max,
                                         std::size_t replicas, std::uint64_t seed, unsigned threads = 0,
                                         ResampleMethod resample = ResampleMethod::kBlocked);

struct DualityEstimate {
  double p_ab = 0.0;  // P(some x in A infected at t | start from B)
  double p_ba = 0.0;  // P(some x in B infected at t | start from A)
  double se_ab = 0.0;
  double se_ba = 0.0;
  double gap() const { return p_ab - p_ba; }
  double combined_se() const;
};

// Independent runs: replica i starts from B with seed replica_seed(seed, i)
// and from A with seed replica_seed(seed, replicas + i).
DualityEstimate estimate_duality_gap(const Model& model, std::span<const Vertex> a, std::span<const Vertex> b,
                                     double t, std::size_t replicas, std::uint64_t seed, unsigned threads = 0);

}  // namespace epinet

#endif  // EPINET_DYNAMICS_HPP
