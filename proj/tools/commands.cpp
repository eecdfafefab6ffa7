#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "epinet/analysis.hpp"
#include "epinet/coupling.hpp"
#include "epinet/dynamics.hpp"
#include "epinet/format.hpp"
#include "epinet/oracle.hpp"
#include "epinet/parallel.hpp"
#include "epinet/theory.hpp"
#include "epinet/waitsee.hpp"
#include "json.hpp"

namespace epinet::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) { row(header); }
  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) text_ += ',';
      text_ += csv_field(fields[i]);
    }
    text_ += "\r\n";
  }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

std::string num(double v) { return format_double(v); }
std::string num(std::uint64_t v) { return std::to_string(v); }

struct Context {
  const ExperimentConfig& config;
  unsigned threads;
  fs::path out;
  bool csv;
  bool json_files;
};

void write_file(const Context& ctx, const std::string& name, const std::string& content) {
  fs::create_directories(ctx.out);
  std::ofstream f(ctx.out / name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (ctx.out / name).string());
  f << content;
}

void write_csv(const Context& ctx, const std::string& name, const Csv& csv) {
  if (ctx.csv) write_file(ctx, name, csv.text());
}

void write_json(const Context& ctx, const std::string& name, const json& j) {
  if (ctx.json_files) write_file(ctx, name, j.dump(2) + "\n");
}

json params_json(const ModelParams& p) {
  json j;
  for (const auto& [k, v] : model_params_to_kv(p)) j[k] = v;
  return j;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// One entry per sweep value, or a single entry without a sweep.
struct SweepPoint {
  std::optional<double> value;
  ModelParams params;
};

std::vector<SweepPoint> sweep_points(const ExperimentConfig& config) {
  const auto& parameter = config.get("sweep", "parameter");
  if (parameter.empty()) return {{std::nullopt, config.model()}};
  std::vector<SweepPoint> out;
  for (double v : config.get_doubles("sweep", "values")) {
    ExperimentConfig c = config;
    c.set("model." + parameter, num(v));
    out.push_back({v, c.model()});
  }
  return out;
}

std::vector<std::string> with_sweep(const ExperimentConfig& config, std::vector<std::string> cols) {
  const auto& parameter = config.get("sweep", "parameter");
  if (!parameter.empty()) cols.insert(cols.begin(), parameter);
  return cols;
}

std::vector<std::string> prefix(const SweepPoint& p, std::vector<std::string> fields) {
  if (p.value) fields.insert(fields.begin(), num(*p.value));
  return fields;
}

std::uint32_t mask_of(const std::vector<Vertex>& vs) {
  std::uint32_t m = 0;
  for (Vertex v : vs) m |= 1u << v;
  return m;
}

StrategyConstants strategy_constants(const ExperimentConfig& c) {
  StrategyConstants k;
  k.m_i = c.get_double("theory", "m_i");
  k.m_ii = c.get_double("theory", "m_ii");
  k.m_iii = c.get_double("theory", "m_iii");
  k.m_iv = c.get_double("theory", "m_iv");
  k.r = c.get_double("theory", "r");
  k.c_prime = c.get_double("theory", "c_prime");
  return k;
}

std::vector<double> theory_lambdas(const ExperimentConfig& c) {
  auto l = c.get_doubles("theory", "lambdas");
  if (l.empty()) l.push_back(c.model().lambda);
  return l;
}

double drift_constant(const ExperimentConfig& c, const ModelParams& p) {
  const double D = c.get_double("theory", "D");
  return D > 0.0 ? D : default_drift_constant(p);
}

int cmd_simulate(const Context& ctx, std::ostream& summary) {
  const auto& c = ctx.config;
  const ModelParams p = c.model();
  const Model model(p);
  const auto initial = c.vertex_set("run", "initial");
  const SimConfig base = c.sim_config();
  const auto replicas = static_cast<std::size_t>(c.get_int("run", "replicas"));
  const auto runs = run_replicas(replicas, ctx.threads, [&](std::size_t i) {
    SimConfig cfg = base;
    cfg.seed = replica_seed(base.seed, i);
    return simulate(model, initial, cfg);
  });
  double total = 0.0;
  std::size_t censored = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& tr = runs[i];
    Csv csv({"t", "infected", "star_infected"});
    for (std::size_t k = 0; k < tr.times.size(); ++k)
      csv.row({num(tr.times[k]), num(std::uint64_t{tr.infected[k]}), num(std::uint64_t{tr.star_infected[k]})});
    write_csv(ctx, "trajectory_" + std::to_string(i) + ".csv", csv);
    json meta;
    meta["seed"] = tr.seed;
    meta["params"] = params_json(p);
    meta["t_ext"] = tr.t_ext;
    meta["censored"] = tr.censored;
    meta["events"] = tr.events;
    write_json(ctx, "run_" + std::to_string(i) + ".json", meta);
    total += tr.t_ext;
    censored += tr.censored ? 1 : 0;
  }
  json s;
  s["command"] = "simulate";
  s["replicas"] = replicas;
  s["mean_t_ext"] = total / static_cast<double>(replicas);
  s["censored"] = censored;
  summary << s.dump(2) << "\n";
  return kExitOk;
}

int cmd_density(const Context& ctx, std::ostream& summary) {
  const auto& c = ctx.config;
  const auto times = c.observation_times();
  const auto replicas = static_cast<std::size_t>(c.get_int("run", "replicas"));
  const auto seed = c.get_uint("run", "seed");
  const auto resample = c.sim_config().resample;
  Csv csv(with_sweep(c, {"t", "mean", "std_error"}));
  json plateaus = json::array();
  std::vector<double> lambdas, rhos;
  for (const auto& point : sweep_points(c)) {
    const Model model(point.params);
    const auto d = estimate_density(model, times, replicas, seed, ctx.threads, resample);
    for (std::size_t k = 0; k < d.times.size(); ++k)
      csv.row(prefix(point, {num(d.times[k]), num(d.mean[k]), num(d.std_error[k])}));
    const auto pl = plateau(d.samples);
    json j;
    if (point.value) j[c.get("sweep", "parameter")] = *point.value;
    j["rho_hat"] = pl.rho_hat;
    j["std_error"] = pl.std_error;
    j["t_lo"] = pl.t_lo;
    j["t_hi"] = pl.t_hi;
    j["flatness"] = pl.flatness;
    j["relative_change"] = pl.relative_change;
    j["plateau"] = pl.plateau;
    j["all_extinct"] = pl.all_extinct;
    j["survivors"] = pl.survivors;
    plateaus.push_back(j);
    lambdas.push_back(point.params.lambda);
    rhos.push_back(pl.rho_hat);
  }
  write_csv(ctx, "density.csv", csv);
  json s;
  s["command"] = "density";
  s["plateaus"] = plateaus;
  const bool fit_ok = c.get("sweep", "parameter") == "lambda" && lambdas.size() >= 3 &&
                      std::all_of(rhos.begin(), rhos.end(), [](double r) { return r > 0.0; }) &&
                      std::all_of(lambdas.begin(), lambdas.end(), [](double l) { return l > 0.0 && l < 1.0; });
  if (fit_ok) {
    const auto fit = fit_exponent(lambdas, rhos);
    json f;
    f["slope"] = fit.slope;
    f["intercept"] = fit.intercept;
    f["r2"] = fit.r2;
    f["residuals"] = fit.residuals;
    const ModelParams p = c.model();
    if (p.kernel.kind() != KernelKind::kCustom) {
      const auto ph = classify_phase<double>(p.kernel.kind(), p.kernel.gamma(), p.eta);
      f["xi_theory"] = optional_number(ph.xi);
    }
    s["fit"] = f;
  }
  write_json(ctx, "plateau.json", s);
  summary << s.dump(2) << "\n";
  return kExitOk;
}

int cmd_extinct(const Context& ctx, std::ostream& summary) {
  const auto& c = ctx.config;
  const auto times = c.observation_times();
  const auto replicas = static_cast<std::size_t>(c.get_int("run", "replicas"));
  const auto seed = c.get_uint("run", "seed");
  const double t_max = c.get_double("run", "t_max");
  const auto initial = c.vertex_set("run", "initial");
  const auto resample = c.sim_config().resample;
  Csv surv(with_sweep(c, {"t", "survival", "lower", "upper"}));
  Csv ext(with_sweep(c, {"replica", "t_ext", "censored"}));
  json rows = json::array();
  for (const auto& point : sweep_points(c)) {
    const Model model(point.params);
    const auto sample = sample_extinction_times(model, initial, t_max, replicas, seed, ctx.threads, resample);
    const auto curve = survival_from_samples(sample, times);
    for (std::size_t k = 0; k < curve.times.size(); ++k)
      surv.row(prefix(point, {num(curve.times[k]), num(curve.survival[k]), num(curve.lower[k]), num(curve.upper[k])}));
    for (std::size_t r = 0; r < sample.t_ext.size(); ++r)
      ext.row(prefix(point, {num(std::uint64_t{r}), num(sample.t_ext[r]), sample.censored[r] ? "1" : "0"}));
    json j;
    if (point.value) j[c.get("sweep", "parameter")] = *point.value;
    j["mean_t_ext"] = sample.mean;
    j["std_error"] = sample.std_error;
    j["censored"] = sample.censored_count;
    j["replicas"] = replicas;
    rows.push_back(j);
  }
  write_csv(ctx, "survival.csv", surv);
  write_csv(ctx, "extinction.csv", ext);
  json s;
  s["command"] = "extinct";
  s["results"] = rows;
  write_json(ctx, "extinct.json", s);
  summary << s.dump(2) << "\n";
  return kExitOk;
}

int cmd_phase(const Context& ctx, std::ostream& summary) {
  const auto& c = ctx.config;
  Csv csv({"kernel", "gamma", "eta", "phase", "xi", "dominant_strategy"});
  json rows = json::array();
  for (const auto& k : c.get_list("phase", "kernels")) {
    const KernelKind kind = k == "pa" ? KernelKind::kPreferentialAttachment : KernelKind::kFactor;
    for (double g : c.get_doubles("phase", "gammas")) {
      for (double eta : c.get_doubles("phase", "etas")) {
        PhaseResult r;
        try {
          r = classify_phase<double>(kind, g, eta);
        } catch (const std::domain_error& e) {
          throw ConfigError(e.what());
        }
        const std::string xi = r.xi ? num(*r.xi) : "";
        const std::string dom = r.dominant_strategy ? to_string(*r.dominant_strategy) : "";
        csv.row({k, num(g), num(eta), to_string(r.phase), xi, dom});
        json j;
        j["kernel"] = k;
        j["gamma"] = g;
        j["eta"] = eta;
        j["phase"] = to_string(r.phase);
        j["xi"] = optional_number(r.xi);
        j["dominant_strategy"] = r.dominant_strategy ? json(dom) : json(nullptr);
        rows.push_back(j);
      }
    }
  }
  write_csv(ctx, "phase.csv", csv);
  json s;
  s["command"] = "phase";
  s["rows"] = rows;
  write_json(ctx, "phase.json", s);
  summary << s.dump(2) << "\n";
  return kExitOk;
}

int cmd_verify_lower(const Context& ctx, std::ostream& summary) {
  const auto& c = ctx.config;
  const ModelParams p = c.model();
  const auto consts = strategy_constants(c);
  json rows = json::array();
  for (double lambda : theory_lambdas(c)) {
    json j;
    j["lambda"] = lambda;
    j["theta"] = theta(p);
    json strategies = json::array();
    for (Strategy s : kAllStrategies) {
      json e;
      e["strategy"] = to_string(s);
      e["maximal_a"] = optional_number(maximal_a(s, lambda, p, consts));
      strategies.push_back(e);
    }
    j["strategies"] = strategies;
    const auto best = a0(lambda, p, consts);
    if (best) {
      j["a0"] = best->first;
      j["dominant_strategy"] = to_string(best->second);
      if (best->first > 0.0 && best->first < 0.5) {
        j["T_at_a0"] = solve_T(best->first, lambda, p);
        json holds = json::object();
        for (Strategy s : kAllStrategies) holds[to_string(s)] = strategy_holds(s, best->first, lambda, p, consts);
        j["holds_at_a0"] = holds;
      }
    } else {
      j["a0"] = nullptr;
      j["dominant_strategy"] = nullptr;
    }
    j["lower_density_bound"] = optional_number(lower_density_bound(lambda, p, consts));
    rows.push_back(j);
  }
  json s;
  s["command"] = "verify-lower";
  s["params"] = params_json(p);
  s["results"] = rows;
  write_json(ctx, "verify_lower.json", s);
  summary << s.dump(2) << "\n";
  return kExitOk;
}

int cmd_verify_upper(const Context& ctx, std::ostream& summary) {
  const auto& c = ctx.config;
  const ModelParams base = c.model();
  const KernelKind kind = base.kernel.kind();
  const CondSMode mode = c.get("theory", "mode") == "cutoff" ? CondSMode::kCutoff : CondSMode::kGlobal;
  json rows = json::array();
  for (double lambda : theory_lambdas(c)) {
    ModelParams p = base;
    p.lambda = lambda;
    const double D = drift_constant(c, p);
    json j;
    j["lambda"] = lambda;
    j["d_max"] = d_max(p);
    j["c"] = score_constant(p);
    j["D"] = D;
    try {
      const auto S = scoring_function(kind, p.kernel.gamma(), p.eta, lambda, D, c.get_double("theory", "r"));
      j["regime"] = to_string(S.regime);
      j["a1"] = S.a1;
      j["rho"] = S.rho;
      j["gamma_prime"] = S.gamma_prime;
      const auto rep = verify_condS(S, p, D, mode);
      json r;
      r["mode"] = c.get("theory", "mode");
      r["pass"] = rep.pass;
      r["worst_ratio"] = rep.worst_ratio;
      r["worst_x"] = rep.worst_x;
      r["checked"] = rep.checked;
      j["condS"] = r;
      j["density_upper_bound"] = S.a1 > 0.0 ? json(density_upper_bound(S)) : json(nullptr);
    } catch (const RegimeError& e) {
      j["regime_error"] = e.what();
    }
    rows.push_back(j);
  }
  json s;
  s["command"] = "verify-upper";
  s["params"] = params_json(base);
  s["results"] = rows;
  write_json(ctx, "verify_upper.json", s);
  summary << s.dump(2) << "\n";
  return kExitOk;
}

int cmd_oracle(const Context& ctx, std::ostream& summary) {
  const auto& c = ctx.config;
  const ModelParams p = c.model();
  JointStateSpace space;
  try {
    space = build_generator(p);
  } catch (const OracleSizeError& e) {
    throw ConfigError(e.what());
  }
  const std::uint32_t initial = mask_of(c.vertex_set("run", "initial"));
  json s;
  s["e_t_ext"] = expected_extinction_time_stationary(space, initial);
  s["n"] = p.n;
  s["states"] = space.state_count();
  s["transitions"] = space.nonzeros();
  const auto times = c.get_doubles("oracle", "times");
  if (!times.empty()) {
    Csv csv({"t", "density", "survival"});
    json rows = json::array();
    for (double t : times) {
      const double d = exact_density(space, t, initial);
      const double sv = exact_survival(space, t, initial);
      csv.row({num(t), num(d), num(sv)});
      rows.push_back(json{{"t", t}, {"density", d}, {"survival", sv}});
    }
    s["curve"] = rows;
    write_csv(ctx, "oracle_density.csv", csv);
  }
  if (c.get_bool("oracle", "dump_generator")) {
    std::ostringstream os;
    write_generator(space, os);
    write_file(ctx, "generator.txt", os.str());
  }
  write_json(ctx, "oracle.json", s);
  summary << s.dump(2) << "\n";
  return kExitOk;
}

int cmd_couple(const Context& ctx, std::ostream& summary) {
  const auto& c = ctx.config;
  const ModelParams p = c.model();
  const Model model(p);
  const auto replicas = static_cast<std::size_t>(c.get_int("run", "replicas"));
  const auto seed = c.get_uint("run", "seed");
  const double t_max = c.get_double("run", "t_max");
  const auto mode = c.get("couple", "mode");
  const auto a = c.vertex_set("couple", "set_a");
  const auto b = c.vertex_set("couple", "set_b");
  json s;
  s["command"] = "couple";
  s["mode"] = mode;
  int status = kExitOk;
  if (mode == "monotone") {
    if (!std::includes(b.begin(), b.end(), a.begin(), a.end()))
      throw ConfigError("couple: monotone mode needs set_a to be a subset of set_b");
    const auto r = audit_monotone_coupling(model, c.get_double("couple", "lambda1"), c.get_double("couple", "lambda2"),
                                           a, b, t_max, replicas, seed, ctx.threads);
    s["replicas"] = r.replicas;
    s["violating_replicas"] = r.violating_replicas;
    s["violation_events"] = r.violation_events;
    s["events"] = r.events;
    if (r.violation_events > 0) status = kExitAudit;
  } else if (mode == "duality") {
    const double t = c.get_double("couple", "t");
    const auto r = estimate_duality_gap(model, a, b, t, replicas, seed, ctx.threads);
    s["p_ab"] = r.p_ab;
    s["p_ba"] = r.p_ba;
    s["se_ab"] = r.se_ab;
    s["se_ba"] = r.se_ba;
    s["gap"] = r.gap();
    s["combined_se"] = r.combined_se();
    s["within_3se"] = std::abs(r.gap()) < 3.0 * r.combined_se();
    if (p.n <= static_cast<std::int64_t>(kOracleMaxN)) {
      const auto space = build_generator(p);
      s["oracle_p_ab"] = duality_probability(space, mask_of(a), mask_of(b), t);
      s["oracle_p_ba"] = duality_probability(space, mask_of(b), mask_of(a), t);
    }
  } else {
    const auto r = audit_waitsee_coupling(model, c.vertex_set("run", "initial"), t_max, replicas, seed, ctx.threads);
    s["replicas"] = r.replicas;
    s["order_violating_replicas"] = r.order_violating_replicas;
    s["containment_violating_replicas"] = r.containment_violating_replicas;
    s["order_violations"] = r.order_violations;
    s["containment_violations"] = r.containment_violations;
    s["phantom_reveals"] = r.phantom_reveals;
    s["events"] = r.events;
    if (r.order_violations > 0 || r.containment_violations > 0) status = kExitAudit;
  }
  write_json(ctx, "couple.json", s);
  summary << s.dump(2) << "\n";
  return status;
}

int cmd_drift(const Context& ctx, std::ostream& summary) {
  const auto& c = ctx.config;
  const ModelParams p = c.model();
  const Model model(p);
  const double D = drift_constant(c, p);
  const auto S = scoring_function(p.kernel.kind(), p.kernel.gamma(), p.eta, p.lambda, D, c.get_double("theory", "r"));
  const auto cfg = make_score_config(p, S, D, c.get_double("theory", "delta"));
  const auto tables = make_score_tables(model, cfg);
  DriftAuditConfig dc;
  dc.t_max = c.get_double("run", "t_max");
  dc.replicas = static_cast<std::size_t>(c.get_int("run", "replicas"));
  dc.seed = c.get_uint("run", "seed");
  dc.sampling = c.get("drift", "sampling") == "every" ? DriftSampling::kEveryK : DriftSampling::kGeometric;
  dc.every = c.get_uint("drift", "every");
  dc.max_samples_per_replica = static_cast<std::size_t>(c.get_int("drift", "max_samples"));
  dc.threads = ctx.threads;
  const auto audit = run_drift_audit(model, tables, c.vertex_set("run", "initial"), dc);
  Csv csv({"replica", "event_index", "t", "M", "drift", "margin"});
  for (const auto& x : audit.samples)
    csv.row({num(x.replica), num(x.event_index), num(x.t), num(x.M), num(x.drift), num(x.margin)});
  write_csv(ctx, "drift.csv", csv);
  const auto condS = verify_condS(S, p, D, CondSMode::kGlobal);
  json s;
  s["command"] = "drift";
  s["lambda"] = p.lambda;
  s["D"] = D;
  s["c"] = cfg.c;
  s["condS_global_pass"] = condS.pass;
  s["samples"] = audit.samples.size();
  s["positive"] = audit.positive;
  s["above_bound"] = audit.above_bound;
  s["max_drift"] = audit.samples.empty() ? json(nullptr) : json(audit.max_drift);
  write_json(ctx, "drift.json", s);
  summary << s.dump(2) << "\n";
  return audit.positive > 0 ? kExitAudit : kExitOk;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"simulate",     "density",      "extinct", "phase", "verify-lower",
                                                 "verify-upper", "oracle",       "couple",  "drift"};
  return names;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

int run_command(const std::string& command, const ExperimentConfig& config, unsigned threads,
                const std::filesystem::path& out_dir, std::ostream& summary) {
  static const std::map<std::string, std::function<int(const Context&, std::ostream&)>> table = {
      {"simulate", cmd_simulate},         {"density", cmd_density},
      {"extinct", cmd_extinct},           {"phase", cmd_phase},
      {"verify-lower", cmd_verify_lower}, {"verify-upper", cmd_verify_upper},
      {"oracle", cmd_oracle},             {"couple", cmd_couple},
      {"drift", cmd_drift},
  };
  const auto it = table.find(command);
  if (it == table.end()) throw ConfigError("unknown command '" + command + "'");
  const auto formats = config.get_list("output", "formats");
  const Context ctx{config, threads, out_dir,
                    std::find(formats.begin(), formats.end(), "csv") != formats.end(),
                    std::find(formats.begin(), formats.end(), "json") != formats.end()};
  if (ctx.json_files) write_file(ctx, "config.ini", echo_config(config));
  return it->second(ctx, summary);
}

}  // namespace epinet::cli
