#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "isap/isap.hpp"
#include "json.hpp"

using json = nlohmann::json;
using namespace isap;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr int kSchemaVersion = 1;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Every option is registered as a string so that all conversion and range
// problems can be collected and reported together.
class Flags {
 public:
  explicit Flags(CLI::App* app) : app_(app) {}

  void add(const std::string& name, const std::string& def, const std::string& help) {
    values_[name] = def;
    order_.push_back(name);
    app_->add_option("--" + name, values_[name], help)->capture_default_str();
  }

  void add_flag(const std::string& name, const std::string& help) {
    flags_[name] = false;
    app_->add_flag("--" + name, flags_[name], help);
  }

  bool given(const std::string& name) const { return app_->count("--" + name) > 0; }
  const std::string& str(const std::string& name) const { return values_.at(name); }
  bool flag(const std::string& name) const { return flags_.at(name); }

  double real(const std::string& name) {
    const std::string& s = str(name);
    try {
      std::size_t used = 0;
      double v = std::stod(s, &used);
      if (used == s.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    problem("--" + name + ": expected a finite number, got '" + s + "'");
    return 0.0;
  }

  long long integer(const std::string& name, long long lo, long long hi) {
    const std::string& s = str(name);
    try {
      std::size_t used = 0;
      long long v = std::stoll(s, &used);
      if (used == s.size()) {
        if (v < lo || v > hi)
          problem("--" + name + ": " + s + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return v;
      }
    } catch (const std::exception&) {
    }
    problem("--" + name + ": expected an integer, got '" + s + "'");
    return lo;
  }

  // "inf" or a negative value means no cap.
  int cap(const std::string& name) {
    const std::string& s = str(name);
    if (s == "inf" || s == "none") return -1;
    long long v = integer(name, -1, 1 << 20);
    return static_cast<int>(v);
  }

  std::vector<double> grid(const std::string& name) {
    try {
      return io::parse_grid(str(name));
    } catch (const std::exception& e) {
      problem("--" + name + ": " + e.what());
      return {};
    }
  }

  void problem(const std::string& p) { problems_.push_back(p); }

  void check() const {
    if (problems_.empty()) return;
    std::string all;
    for (const auto& p : problems_) all += "  " + p + "\n";
    throw UsageError("invalid flags:\n" + all);
  }

  // Applies `key = value` lines for options not given on the command line.
  void apply_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
      problem("--config: cannot open '" + path + "'");
      return;
    }
    for (const auto& [k, v] : io::parse_config(in)) {
      if (values_.count(k)) {
        if (!given(k)) values_[k] = v;
      } else if (flags_.count(k)) {
        if (!given(k)) flags_[k] = (v == "true" || v == "1" || v == "yes");
      } else {
        problem("config '" + path + "': unknown key '" + k + "'");
      }
    }
  }

  json resolved() const {
    json j = json::object();
    for (const auto& k : order_) j[k] = values_.at(k);
    for (const auto& [k, v] : flags_) j[k] = v;
    return j;
  }

 private:
  CLI::App* app_;
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> flags_;
  std::vector<std::string> order_;
  std::vector<std::string> problems_;
};

unsigned default_threads() {
  if (const char* env = std::getenv("ISAP_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return 1;
}

void add_model_flags(Flags& f) {
  f.add("L", "4", "torus side length");
  f.add("d", "2", "dimension");
  f.add("form", "alpha-lambda", "parametrization: alpha-lambda | rho-nu");
  f.add("alpha", "1", "alpha (alpha-lambda form)");
  f.add("lambda", "0", "lambda (alpha-lambda form)");
  f.add("rho", "1", "rho = alpha + lambda (rho-nu form)");
  f.add("nu", "0", "nu = lambda (rho-nu form)");
  f.add("cap", "4", "per-polygon length cap K (inf = uncapped)");
  f.add("total-cap", "inf", "total length cap T (inf = none)");
}

Params model_params(Flags& f) {
  const std::string form = f.str("form");
  if (form == "alpha-lambda") {
    if (f.given("rho") || f.given("nu")) f.problem("--rho/--nu given with --form alpha-lambda");
    return Params::alpha_lambda(f.real("alpha"), f.real("lambda"));
  }
  if (form == "rho-nu") {
    if (f.given("alpha") || f.given("lambda")) f.problem("--alpha/--lambda given with --form rho-nu");
    return Params::rho_nu(f.real("rho"), f.real("nu"));
  }
  f.problem("--form: expected alpha-lambda or rho-nu, got '" + form + "'");
  return Params::alpha_lambda(1.0, 0.0);
}

// Output stream: a file or standard output for "-".
class Output {
 public:
  explicit Output(const std::string& path) : path_(path) {
    if (path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw UsageError("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return path_ == "-" ? std::cout : file_; }

 private:
  std::string path_;
  std::ofstream file_;
};

std::string timestamp() {
  std::time_t t = std::time(nullptr);
  char buf[64];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_manifest(const std::string& sub, const Flags& f, const json& extra) {
  std::string path = f.str("manifest");
  if (path.empty()) {
    if (f.str("output") == "-") return;
    path = f.str("output") + ".manifest.json";
  }
  json m;
  m["tool"] = "isap";
  m["version"] = kVersion;
  m["schema_version"] = kSchemaVersion;
  m["timestamp"] = timestamp();
  m["subcommand"] = sub;
  json cfg = f.resolved();
  cfg.erase("manifest");
  cfg.erase("config");
  if (cfg.contains("form")) {
    const bool rho_nu = cfg["form"] == "rho-nu";
    for (const char* k : rho_nu ? std::vector<const char*>{"alpha", "lambda", "alpha-grid", "lambda-grid"}
                                : std::vector<const char*>{"rho", "nu", "rho-grid", "nu-grid"})
      cfg.erase(k);
  }
  m["config"] = cfg;
  if (!extra.is_null()) m["summary"] = extra;
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write manifest '" + path + "'");
  out << m.dump(2) << "\n";
}

std::string d2s(double v) { return io::format_double(v); }

// ---- subcommands ----------------------------------------------------------

int run_enumerate(Flags& f) {
  const int d = static_cast<int>(f.integer("d", 1, 6));
  const int n_max = static_cast<int>(f.integer("n-max", 0, 64));
  const auto max_nodes = static_cast<std::uint64_t>(f.integer("max-nodes", 0, (1LL << 62)));
  const unsigned threads = static_cast<unsigned>(f.integer("threads", 1, 1024));
  f.check();
  CountTable t = count_sap(d, n_max, EnumerationBudget{max_nodes}, threads);
  Output out(f.str("output"));
  io::CsvWriter csv(out.stream(), {"d", "n", "count"});
  for (int n = 0; n <= n_max; ++n) csv.write_row({std::to_string(d), std::to_string(n), std::to_string(t.at(n))});
  json extra;
  try {
    MuEstimate mu = estimate_mu(t);
    extra["mu_hat"] = mu.mu_hat;
    extra["mu_n_top"] = mu.n_top;
  } catch (const PreconditionError&) {
  }
  write_manifest("enumerate", f, extra);
  return 0;
}

int run_zm(Flags& f) {
  const int m_max = static_cast<int>(f.integer("m-max", 1, 8));
  std::vector<double> xs = f.grid("x-grid");
  for (double x : xs)
    if (!(x > 0)) f.problem("--x-grid: values must be positive");
  f.check();
  Output out(f.str("output"));
  io::CsvWriter csv(out.stream(), {"m", "x", "Zm"});
  for (int m = 1; m <= m_max; ++m)
    for (double x : xs) csv.write_row({std::to_string(m), d2s(x), d2s(Zm(m, x))});
  write_manifest("zm", f, json());
  return 0;
}

TruncationPolicy truncation(Flags& f) {
  TruncationPolicy t;
  t.per_polygon_cap = f.cap("cap");
  t.total_cap = f.cap("total-cap");
  return t;
}

int run_exact(Flags& f) {
  const int L = static_cast<int>(f.integer("L", 2, 64));
  const int d = static_cast<int>(f.integer("d", 1, 6));
  Params p = model_params(f);
  TruncationPolicy trunc = truncation(f);
  if (trunc.per_polygon_cap < 0) f.problem("--cap: exact computation needs a finite cap");
  const auto max_states = static_cast<std::uint64_t>(f.integer("max-states", 0, (1LL << 62)));
  const unsigned threads = static_cast<unsigned>(f.integer("threads", 1, 1024));
  f.check();
  TorusLattice lat(L, d);
  DensityTable t = exact_density(lat, trunc, 0, ExactBudget{max_states, threads});
  ExactSummary s = summarize(t, p);
  json j;
  j["L"] = L;
  j["d"] = d;
  j["form"] = f.str("form");
  j["alpha"] = p.alpha();
  j["lambda"] = p.lambda();
  j["rho"] = p.rho();
  j["nu"] = p.nu();
  j["cap"] = trunc.per_polygon_cap;
  j["total_cap"] = trunc.total_cap;
  j["log_Z"] = s.log_Z;
  j["pressure_rho_nu"] = pressure(t, p);
  j["mean_C"] = s.mean_C;
  j["mean_I"] = s.mean_I;
  j["mean_N"] = s.mean_N;
  j["origin_length_law"] = s.origin_length_law;
  j["states"] = s.states;
  Output out(f.str("output"));
  out.stream() << j.dump(2) << "\n";
  if (!f.str("law-csv").empty()) {
    std::ofstream law(f.str("law-csv"), std::ios::binary);
    if (!law) throw UsageError("cannot open '" + f.str("law-csv") + "'");
    io::CsvWriter csv(law, {"L", "d", "alpha", "lambda", "cap", "total_cap", "length", "probability"});
    for (std::size_t n = 0; n < s.origin_length_law.size(); ++n)
      csv.write_row({std::to_string(L), std::to_string(d), d2s(p.alpha()), d2s(p.lambda()),
                     std::to_string(trunc.per_polygon_cap), std::to_string(trunc.total_cap), std::to_string(n),
                     d2s(s.origin_length_law[n])});
  }
  write_manifest("exact", f, j);
  return 0;
}

int run_srp(Flags& f) {
  const int L = static_cast<int>(f.integer("L", 3, 8));
  const int d = static_cast<int>(f.integer("d", 1, 3));
  const double alpha = f.real("alpha");
  std::vector<double> lambdas = f.grid("lambdas");
  TruncationPolicy trunc = truncation(f);
  if (trunc.per_polygon_cap < 1) f.problem("--cap: srp comparison needs a finite cap >= 1");
  const auto max_states = static_cast<std::uint64_t>(f.integer("max-states", 0, (1LL << 62)));
  const unsigned threads = static_cast<unsigned>(f.integer("threads", 1, 1024));
  f.check();
  TorusLattice lat(L, d);
  std::vector<double> tv = isap_srp_distance(lat, alpha, lambdas, trunc, 0, ExactBudget{max_states, threads});
  Output out(f.str("output"));
  io::CsvWriter csv(out.stream(), {"L", "d", "alpha", "lambda", "cap", "total_cap", "tv"});
  for (std::size_t i = 0; i < lambdas.size(); ++i)
    csv.write_row({std::to_string(L), std::to_string(d), d2s(alpha), d2s(lambdas[i]),
                   std::to_string(trunc.per_polygon_cap), std::to_string(trunc.total_cap), d2s(tv[i])});
  SrpResult srp = srp_enumerate(lat, alpha);
  json extra;
  extra["srp_Z"] = srp.Z;
  extra["srp_permutations"] = srp.permutations;
  extra["srp_cycle_law"] = srp.cycle_law;
  write_manifest("srp-compare", f, extra);
  return 0;
}

void add_chain_flags(Flags& f) {
  f.add("sweeps", "10000", "number of sweeps (including burn-in)");
  f.add("burn-in", "1000", "sweeps discarded before recording");
  f.add("seed", "1", "random seed");
  f.add("observables", "origin_length,C_per_site", "comma list of observables");
  f.add("delta", "0.1", "delta for exp_moment");
  f.add("k", "4", "k for tail (comma list allowed)");
  f.add("xi", "1", "xi for far_component");
  f.add("moves", "", "move weights, e.g. pool:1 or toggle:0.3,rosenbluth:0.2,plaquette:0.5");
  f.add("p-empty", "0.3", "Rosenbluth probability of proposing the empty polygon");
  f.add("length-ratio", "0.85", "Rosenbluth geometric length ratio");
  f.add("max-length", "0", "Rosenbluth maximum length (0 = cap or |V|)");
  f.add("batches", "64", "batch count for error bars");
}

MoveWeights parse_moves(Flags& f, bool capped) {
  const std::string spec = f.str("moves");
  if (spec.empty()) return capped ? MoveWeights{1.0, 0.0, 0.0, 0.0} : MoveWeights{0.0, 0.3, 0.2, 0.5};
  MoveWeights w;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ',');) {
    auto colon = item.find(':');
    std::string name = item.substr(0, colon);
    double v = 1.0;
    if (colon != std::string::npos) {
      try {
        v = std::stod(item.substr(colon + 1));
      } catch (const std::exception&) {
        f.problem("--moves: bad weight in '" + item + "'");
      }
    }
    if (v < 0) f.problem("--moves: negative weight in '" + item + "'");
    if (name == "pool") w.pool = v;
    else if (name == "toggle") w.toggle = v;
    else if (name == "rosenbluth") w.rosenbluth = v;
    else if (name == "plaquette") w.plaquette = v;
    else f.problem("--moves: unknown move '" + name + "'");
  }
  if (w.total() <= 0) f.problem("--moves: all weights are zero");
  if (w.pool > 0 && !capped) f.problem("--moves: pool proposals need a finite --cap");
  return w;
}

struct ObservableRequest {
  std::vector<Observable> list;
  bool exp_moment = false;
};

ObservableRequest parse_observables(Flags& f) {
  ObservableRequest r;
  std::stringstream ss(f.str("observables"));
  for (std::string name; std::getline(ss, name, ',');) {
    if (name == "origin_length") r.list.push_back(obs::origin_length());
    else if (name == "C_per_site") r.list.push_back(obs::length_density());
    else if (name == "C") r.list.push_back(obs::total_length());
    else if (name == "I") r.list.push_back(obs::overlap());
    else if (name == "N") r.list.push_back(obs::empty_count());
    else if (name == "N_per_site") r.list.push_back(obs::empty_fraction());
    else if (name == "tail") {
      for (double k : f.grid("k")) {
        if (k < 0 || k != std::floor(k)) f.problem("--k: tail thresholds must be non-negative integers");
        r.list.push_back(obs::tail_indicator(static_cast<int>(k)));
      }
    } else if (name == "exp_moment") {
      r.list.push_back(obs::exp_length(f.real("delta")));
      r.exp_moment = true;
    } else if (name == "far_component") {
      r.list.push_back(obs::far_component_size(static_cast<int>(f.integer("xi", 1, 1 << 20))));
    } else {
      f.problem("--observables: unknown observable '" + name + "'");
    }
  }
  if (r.list.empty()) f.problem("--observables: nothing to measure");
  return r;
}

struct SampleJob {
  int L = 4, d = 2;
  ChainConfig config;
  std::uint64_t sweeps = 0, burn_in = 0;
  std::size_t batches = kDefaultBatches;
};

struct SampleResult {
  std::vector<std::string> names;
  std::vector<Estimate> estimates;
};

SampleResult run_job(const SampleJob& job, const ObservableRequest& req, Configuration* final_state = nullptr,
                     const Configuration* initial = nullptr) {
  auto lat = std::make_shared<TorusLattice>(job.L, job.d);
  Chain chain(lat, job.config);
  if (initial)
    for (VertexIndex v = 0; v < initial->volume(); ++v) chain.set_polygon(v, initial->polygon(v));
  Recording r = record(chain, req.list, job.sweeps, job.burn_in);
  SampleResult out;
  for (std::size_t i = 0; i < req.list.size(); ++i) {
    Estimate e = estimate_from(r, i, job.batches);
    if (req.list[i].name == "exp_moment") e.warning = dominance_check(r.series[i], r.weights);
    out.names.push_back(req.list[i].name);
    out.estimates.push_back(e);
  }
  if (final_state) *final_state = chain.configuration();
  return out;
}

const std::vector<std::string> kSampleHeader{"L",      "d",       "alpha",      "lambda", "rho",    "nu",
                                             "cap",    "total_cap", "seed",     "sweeps", "burn_in", "observable",
                                             "mean",   "stderr",  "tau_int",    "batches", "samples", "warning"};

void write_rows(io::CsvWriter& csv, const SampleJob& job, const SampleResult& res) {
  const Params& p = job.config.params;
  for (std::size_t i = 0; i < res.names.size(); ++i) {
    const Estimate& e = res.estimates[i];
    csv.write_row({std::to_string(job.L), std::to_string(job.d), d2s(p.alpha()), d2s(p.lambda()), d2s(p.rho()),
                   d2s(p.nu()), std::to_string(job.config.trunc.per_polygon_cap),
                   std::to_string(job.config.trunc.total_cap), std::to_string(job.config.seed),
                   std::to_string(job.sweeps), std::to_string(job.burn_in), res.names[i], d2s(e.mean),
                   d2s(e.std_error), d2s(e.tau_int), std::to_string(e.batches), std::to_string(e.samples), e.warning});
  }
}

SampleJob base_job(Flags& f) {
  SampleJob job;
  job.L = static_cast<int>(f.integer("L", 2, 4096));
  job.d = static_cast<int>(f.integer("d", 1, 6));
  job.config.params = model_params(f);
  job.config.trunc = truncation(f);
  job.config.moves = parse_moves(f, job.config.trunc.per_polygon_cap >= 0);
  job.config.rosenbluth.p_empty = f.real("p-empty");
  job.config.rosenbluth.length_ratio = f.real("length-ratio");
  job.config.rosenbluth.max_length = static_cast<int>(f.integer("max-length", 0, 1 << 24));
  job.config.seed = static_cast<std::uint64_t>(f.integer("seed", 0, (1LL << 62)));
  job.sweeps = static_cast<std::uint64_t>(f.integer("sweeps", 1, (1LL << 40)));
  job.burn_in = static_cast<std::uint64_t>(f.integer("burn-in", 0, (1LL << 40)));
  job.batches = static_cast<std::size_t>(f.integer("batches", static_cast<long long>(kMinBatches), 1 << 20));
  if (job.burn_in >= job.sweeps) f.problem("--burn-in must be smaller than --sweeps");
  else if (job.sweeps - job.burn_in < job.batches)
    f.problem("--sweeps minus --burn-in must be at least --batches (" + std::to_string(job.batches) + ")");
  return job;
}

int run_sample(Flags& f) {
  SampleJob job = base_job(f);
  ObservableRequest req = parse_observables(f);
  f.check();
  std::optional<Configuration> initial;
  if (!f.str("load-config").empty()) {
    std::ifstream in(f.str("load-config"));
    if (!in) throw UsageError("cannot open '" + f.str("load-config") + "'");
    initial = load_configuration(in);
    if (initial->lattice().side() != job.L || initial->lattice().dimension() != job.d)
      throw UsageError("--load-config: lattice does not match --L/--d");
  }
  std::cerr << "sample: L=" << job.L << " d=" << job.d << " sweeps=" << job.sweeps << "\n";
  auto lat = std::make_shared<TorusLattice>(job.L, job.d);
  Configuration final_state(lat);
  SampleResult res = run_job(job, req, &final_state, initial ? &*initial : nullptr);
  Output out(f.str("output"));
  io::CsvWriter csv(out.stream(), kSampleHeader);
  write_rows(csv, job, res);
  if (!f.str("dump-config").empty()) {
    std::ofstream dump(f.str("dump-config"));
    if (!dump) throw UsageError("cannot open '" + f.str("dump-config") + "'");
    dump_configuration(dump, final_state);
  }
  write_manifest("sample", f, json());
  return 0;
}

int run_sweep(Flags& f) {
  SampleJob base = base_job(f);
  ObservableRequest req = parse_observables(f);
  std::vector<double> Ls = f.grid("L-list");
  std::vector<double> firsts = f.grid(f.str("form") == "rho-nu" ? "rho-grid" : "alpha-grid");
  std::vector<double> seconds = f.grid(f.str("form") == "rho-nu" ? "nu-grid" : "lambda-grid");
  std::vector<double> seeds = f.grid("seeds");
  const unsigned threads = static_cast<unsigned>(f.integer("threads", 1, 1024));
  for (double L : Ls)
    if (L < 2 || L != std::floor(L)) f.problem("--L-list: sides must be integers >= 2");
  for (double s : seeds)
    if (s < 0 || s != std::floor(s)) f.problem("--seeds: seeds must be non-negative integers");
  f.check();
  std::vector<SampleJob> jobs;
  for (double L : Ls)
    for (double a : firsts)
      for (double b : seconds)
        for (double s : seeds) {
          SampleJob j = base;
          j.L = static_cast<int>(L);
          j.config.params = f.str("form") == "rho-nu" ? Params::rho_nu(a, b) : Params::alpha_lambda(a, b);
          j.config.seed = static_cast<std::uint64_t>(s);
          jobs.push_back(j);
        }
  std::vector<std::optional<SampleResult>> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < jobs.size();) {
      try {
        results[i] = run_job(jobs[i], req);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
      std::lock_guard<std::mutex> lock(log_mutex);
      std::cerr << "sweep: finished job " << i + 1 << "/" << jobs.size() << "\n";
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < std::min<std::size_t>(threads, jobs.size()); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (std::size_t i = 0; i < jobs.size(); ++i)
    if (!errors[i].empty()) throw NumericalDiagnostic("sweep job " + std::to_string(i) + ": " + errors[i]);
  Output out(f.str("output"));
  io::CsvWriter csv(out.stream(), kSampleHeader);
  for (std::size_t i = 0; i < jobs.size(); ++i) write_rows(csv, jobs[i], *results[i]);
  write_manifest("sweep", f, json());
  return 0;
}

int run_bounds(Flags& f) {
  std::vector<double> lambdas = f.grid("lambda-grid");
  std::vector<double> alphas = f.grid("alpha-grid");
  double mu = 0.0;
  if (f.flag("compute-mu")) {
    const int n_max = static_cast<int>(f.integer("n-max", 6, 40));
    f.check();
    mu = estimate_mu(count_sap(2, n_max)).mu_hat;
  } else {
    mu = f.real("mu");
    if (!(mu > 1.0)) f.problem("--mu must exceed 1 (or pass --compute-mu)");
  }
  f.check();
  bounds::PhaseCurves pc(mu);
  Output out(f.str("output"));
  io::CsvWriter csv(out.stream(), {"quantity", "mu_hat", "argument", "value"});
  csv.write_row({"alpha_star", d2s(mu), "", d2s(pc.alpha_star)});
  csv.write_row({"g_alpha_star", d2s(mu), "", d2s(pc.g_star)});
  csv.write_row({"q", d2s(mu), "", d2s(pc.q)});
  for (double l : lambdas) csv.write_row({"alpha_c", d2s(mu), d2s(l), d2s(pc.alpha_c(l))});
  for (double a : alphas) csv.write_row({"lambda_sf", d2s(mu), d2s(a), d2s(pc.lambda_sf(a))});
  for (double a : alphas) csv.write_row({"lambda_0", d2s(mu), d2s(a), d2s(pc.lambda_0(a))});
  json extra;
  extra["mu_hat"] = mu;
  extra["alpha_star"] = pc.alpha_star;
  extra["g_alpha_star"] = pc.g_star;
  extra["q"] = pc.q;
  write_manifest("bounds", f, extra);
  return 0;
}

void add_io_flags(Flags& f) {
  f.add("output", "-", "output file (- = standard output)");
  f.add("manifest", "", "manifest path (default: <output>.manifest.json when output is a file)");
  f.add("config", "", "config file of key = value lines; command-line flags take precedence");
}

int run(std::vector<std::string> args);

int from_manifest(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open manifest '" + path + "'");
  json m;
  try {
    in >> m;
  } catch (const std::exception& e) {
    throw UsageError("manifest '" + path + "' is not valid JSON: " + e.what());
  }
  if (!m.contains("subcommand") || !m.contains("config")) throw UsageError("manifest lacks subcommand/config");
  std::vector<std::string> args{"isap", m["subcommand"].get<std::string>()};
  for (auto& [k, v] : m["config"].items()) {
    if (v.is_boolean()) {
      if (v.get<bool>()) args.push_back("--" + k);
    } else {
      args.push_back("--" + k);
      args.push_back(v.get<std::string>());
    }
  }
  args.insert(args.end(), overrides.begin(), overrides.end());
  return run(args);
}

int run(std::vector<std::string> args) {
  if (args.size() >= 3 && args[1] == "--from-manifest")
    return from_manifest(args[2], std::vector<std::string>(args.begin() + 3, args.end()));

  CLI::App app{"Interacting self-avoiding polygons: enumeration, exact computation, sampling and bounds", "isap"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.footer("Replay a run with: isap --from-manifest FILE [overrides...]\n"
             "Exit codes: 0 ok, 1 usage, 2 budget exceeded, 3 numerical diagnostic.");

  std::map<std::string, std::unique_ptr<Flags>> flags;
  auto sub = [&](const std::string& name, const std::string& help) {
    CLI::App* s = app.add_subcommand(name, help);
    flags[name] = std::make_unique<Flags>(s);
    add_io_flags(*flags[name]);
    return flags[name].get();
  };

  Flags* en = sub("enumerate", "count rooted self-avoiding polygons on Z^d");
  en->add("d", "2", "dimension");
  en->add("n-max", "12", "maximum length");
  en->add("max-nodes", "0", "search-node budget (0 = unlimited)");
  en->add("threads", std::to_string(default_threads()), "worker threads");

  Flags* zm = sub("zm", "Z_m(x) over the polygons of the boxes P_m");
  zm->add("m-max", "3", "largest m");
  zm->add("x-grid", "0.45,0.6", "x values (list or start:stop:step)");

  Flags* ex = sub("exact", "exact summary on a truncated state space");
  add_model_flags(*ex);
  ex->add("max-states", "0", "state budget (0 = unlimited)");
  ex->add("threads", std::to_string(default_threads()), "worker threads");
  ex->add("law-csv", "", "also write the law of ||gamma_o|| as CSV");

  Flags* sr = sub("srp-compare", "TV distance between the ISAP covering law and the SRP cycle law");
  sr->add("L", "3", "torus side");
  sr->add("d", "2", "dimension");
  sr->add("alpha", "1", "alpha");
  sr->add("lambdas", "1,2,4,8", "lambda values");
  sr->add("cap", "9", "per-polygon cap");
  sr->add("total-cap", "9", "total length cap");
  sr->add("max-states", "0", "state budget (0 = unlimited)");
  sr->add("threads", std::to_string(default_threads()), "worker threads");

  Flags* sa = sub("sample", "single Markov chain run");
  add_model_flags(*sa);
  add_chain_flags(*sa);
  sa->add("load-config", "", "initial configuration file");
  sa->add("dump-config", "", "write the final configuration here");

  Flags* sw = sub("sweep", "grid of independent chains");
  add_model_flags(*sw);
  add_chain_flags(*sw);
  sw->add("L-list", "4", "torus sides");
  sw->add("alpha-grid", "1", "alpha values (alpha-lambda form)");
  sw->add("lambda-grid", "0", "lambda values (alpha-lambda form)");
  sw->add("rho-grid", "1", "rho values (rho-nu form)");
  sw->add("nu-grid", "0", "nu values (rho-nu form)");
  sw->add("seeds", "1", "seeds");
  sw->add("threads", std::to_string(default_threads()), "worker threads");

  Flags* bo = sub("bounds", "phase-boundary constants and curves");
  bo->add("mu", "0", "connective-constant estimate");
  bo->add_flag("compute-mu", "estimate mu from enumeration on Z^2");
  bo->add("n-max", "16", "enumeration length for --compute-mu");
  bo->add("lambda-grid", "0:4:0.5", "lambda grid for alpha_c");
  bo->add("alpha-grid", "0:3:0.5", "alpha grid for lambda_sf and lambda_0");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  CLI::App* chosen = app.get_subcommands().front();
  Flags& f = *flags[chosen->get_name()];
  if (!f.str("config").empty()) f.apply_config(f.str("config"));
  const std::string name = chosen->get_name();
  if (name == "enumerate") return run_enumerate(f);
  if (name == "zm") return run_zm(f);
  if (name == "exact") return run_exact(f);
  if (name == "srp-compare") return run_srp(f);
  if (name == "sample") return run_sample(f);
  if (name == "sweep") return run_sweep(f);
  return run_bounds(f);
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  try {
    return run(args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return 2;
  } catch (const NumericalDiagnostic& e) {
    std::cerr << "numerical diagnostic: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
