#include "fdmimo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace fdmimo {

using nlohmann::json;

SystemConfig LinkParams::config() const {
  SystemConfig cfg = SystemConfig::uniform(K, antennas, streams, power, sigma2, kappa, beta, zeta);
  cfg.omega = omega;
  cfg.max_iters = max_iters;
  cfg.rel_tol = rel_tol;
  return cfg;
}

namespace {

constexpr std::uint64_t kCsiStream = 0x5ca1ab1e;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw ConfigError("spec: " + where + ": " + what);
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) bad(where, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; }))
      bad(where, "unknown field '" + key + "'");
  }
}

double linear_field(const json& v, const std::string& where) {
  if (v.is_number()) {
    const double x = v.get<double>();
    if (!std::isfinite(x)) bad(where, "must be finite");
    return x;
  }
  if (v.is_string()) {
    try {
      return parse_linear(v.get<std::string>());
    } catch (const ConfigError& e) {
      bad(where, e.what());
    }
  }
  bad(where, "expected a number or a dB string");
}

long long integer_field(const json& v, const std::string& where) {
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9e15) return static_cast<long long>(x);
  }
  bad(where, "expected an integer");
}

int positive_int(const json& v, const std::string& where) {
  const long long x = integer_field(v, where);
  if (x < 1 || x > 1'000'000) bad(where, "must be in [1, 1000000]");
  return static_cast<int>(x);
}

void parse_link(const json& j, LinkParams& p) {
  reject_unknown(j, "link", {"K", "antennas", "streams", "P", "sigma2", "kappa", "beta", "zeta",
                             "omega", "max_iters", "rel_tol"});
  if (j.contains("K")) p.K = positive_int(j["K"], "link.K");
  if (j.contains("antennas")) p.antennas = positive_int(j["antennas"], "link.antennas");
  if (j.contains("streams")) p.streams = positive_int(j["streams"], "link.streams");
  if (j.contains("P")) p.power = linear_field(j["P"], "link.P");
  if (j.contains("sigma2")) p.sigma2 = linear_field(j["sigma2"], "link.sigma2");
  if (j.contains("kappa")) p.kappa = linear_field(j["kappa"], "link.kappa");
  if (j.contains("beta")) p.beta = linear_field(j["beta"], "link.beta");
  if (j.contains("zeta")) p.zeta = linear_field(j["zeta"], "link.zeta");
  if (j.contains("omega")) {
    const json& w = j["omega"];
    if (w.is_array()) {
      if (w.size() != kDirections) bad("link.omega", "expected two weights");
      p.omega = {linear_field(w[0], "link.omega[0]"), linear_field(w[1], "link.omega[1]")};
    } else {
      const double x = linear_field(w, "link.omega");
      p.omega = {x, x};
    }
  }
  if (j.contains("max_iters")) p.max_iters = positive_int(j["max_iters"], "link.max_iters");
  if (j.contains("rel_tol")) p.rel_tol = linear_field(j["rel_tol"], "link.rel_tol");
}

void parse_channel(const json& j, ChannelStats& s) {
  reject_unknown(j, "channel", {"rho", "rho_si", "rician_k"});
  if (j.contains("rho")) s.rho = linear_field(j["rho"], "channel.rho");
  if (j.contains("rho_si")) s.rho_si = linear_field(j["rho_si"], "channel.rho_si");
  if (j.contains("rician_k")) s.rician_k = linear_field(j["rician_k"], "channel.rician_k");
}

bool integral_param(const std::string& p) { return p == "K" || p == "M"; }

const std::vector<std::string>& sweep_params() {
  static const std::vector<std::string> p{"none", "kappa_db", "zeta_db", "sigma2_db", "pmax", "K", "M"};
  return p;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string format_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  if (std::string_view(buf) == "-0.000000") return "0.000000";
  return buf;
}

std::string format_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ExperimentSpec::validate() const {
  link.config().validate();
  channel.validate();
  if (std::find(sweep_params().begin(), sweep_params().end(), sweep_param) == sweep_params().end())
    bad("sweep.param", "unknown parameter '" + sweep_param + "'");
  if (sweep_values.empty()) bad("sweep.values", "must not be empty");
  for (double v : sweep_values) {
    if (!std::isfinite(v)) bad("sweep.values", "values must be finite");
    if (integral_param(sweep_param) && (v < 1 || v != std::floor(v)))
      bad("sweep.values", sweep_param + " values must be positive integers");
    if (sweep_param == "pmax" && v < 0) bad("sweep.values", "pmax values must be >= 0");
  }
  if (algorithms.empty()) bad("algorithms", "must not be empty");
  for (const auto& a : algorithms)
    if (std::find(known_algorithms().begin(), known_algorithms().end(), a) == known_algorithms().end())
      bad("algorithms", "unknown algorithm '" + a + "'");
  if (n_trials < 1) bad("n_trials", "must be >= 1");
  if (output.empty()) bad("output", "must not be empty");
  cutting_set.validate();
  for (double v : sweep_values) apply_sweep(link, sweep_param, v).config().validate();
}

ExperimentSpec parse_spec(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("spec: malformed JSON: ") + e.what());
  }
  reject_unknown(j, "spec", {"link", "channel", "sweep", "algorithms", "design_objective", "csi_error",
                             "n_trials", "seed", "output", "cutting_set"});
  ExperimentSpec s;
  if (j.contains("link")) parse_link(j["link"], s.link);
  if (j.contains("channel")) parse_channel(j["channel"], s.channel);
  if (j.contains("sweep")) {
    const json& sw = j["sweep"];
    reject_unknown(sw, "sweep", {"param", "values"});
    if (!sw.contains("param") || !sw["param"].is_string()) bad("sweep.param", "expected a string");
    s.sweep_param = sw["param"].get<std::string>();
    if (!sw.contains("values") || !sw["values"].is_array()) bad("sweep.values", "expected an array");
    for (std::size_t n = 0; n < sw["values"].size(); ++n) {
      const std::string where = "sweep.values[" + std::to_string(n) + "]";
      const json& v = sw["values"][n];
      // dB-named parameters are written in dB already; pmax may use dB strings.
      if (s.sweep_param == "pmax") s.sweep_values.push_back(linear_field(v, where));
      else if (v.is_number()) s.sweep_values.push_back(v.get<double>());
      else bad(where, "expected a number");
    }
  } else {
    s.sweep_param = "none";
    s.sweep_values = {0.0};
  }
  if (!j.contains("algorithms") || !j["algorithms"].is_array()) bad("algorithms", "expected an array of names");
  for (const auto& a : j["algorithms"]) {
    if (!a.is_string()) bad("algorithms", "expected names");
    s.algorithms.push_back(a.get<std::string>());
  }
  if (j.contains("design_objective")) {
    const std::string o = j["design_objective"].is_string() ? j["design_objective"].get<std::string>() : "";
    if (o == "mse") s.design_objective = DesignObjective::kMse;
    else if (o == "rate") s.design_objective = DesignObjective::kRate;
    else bad("design_objective", "expected \"mse\" or \"rate\"");
  }
  if (j.contains("csi_error")) {
    const std::string m = j["csi_error"].is_string() ? j["csi_error"].get<std::string>() : "";
    if (m == "none") s.csi_error = CsiErrorMode::kNone;
    else if (m == "interior") s.csi_error = CsiErrorMode::kInterior;
    else if (m == "boundary") s.csi_error = CsiErrorMode::kBoundary;
    else bad("csi_error", "expected \"none\", \"interior\" or \"boundary\"");
  }
  if (j.contains("n_trials")) s.n_trials = positive_int(j["n_trials"], "n_trials");
  if (j.contains("seed")) {
    const long long seed = integer_field(j["seed"], "seed");
    if (seed < 0) bad("seed", "must be >= 0");
    s.seed = static_cast<std::uint64_t>(seed);
  }
  if (j.contains("output")) {
    if (!j["output"].is_string()) bad("output", "expected a path");
    s.output = j["output"].get<std::string>();
  }
  if (j.contains("cutting_set")) {
    const json& c = j["cutting_set"];
    reject_unknown(c, "cutting_set", {"max_cuts", "rel_tol"});
    if (c.contains("max_cuts")) s.cutting_set.max_cuts = positive_int(c["max_cuts"], "cutting_set.max_cuts");
    if (c.contains("rel_tol")) s.cutting_set.rel_tol = linear_field(c["rel_tol"], "cutting_set.rel_tol");
  }
  s.hash = fnv1a(j.dump());
  s.validate();
  return s;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("spec: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

LinkParams apply_sweep(const LinkParams& base, const std::string& param, double v) {
  LinkParams p = base;
  if (param == "none") return p;
  if (param == "kappa_db") p.kappa = p.beta = db_to_linear(v);
  else if (param == "zeta_db") p.zeta = db_to_linear(v);
  else if (param == "sigma2_db") p.sigma2 = db_to_linear(v);
  else if (param == "pmax") p.power = v;
  else if (param == "K") p.K = static_cast<int>(v);
  else if (param == "M") p.antennas = static_cast<int>(v);
  else throw ConfigError("unknown sweep parameter '" + param + "'");
  return p;
}

ExperimentResults run_trial(const ExperimentSpec& spec, double sweep_value, int trial) {
  using clock = std::chrono::steady_clock;
  const SystemConfig cfg = apply_sweep(spec.link, spec.sweep_param, sweep_value).config();
  const auto t = static_cast<std::uint64_t>(trial);
  ChannelRealization real = draw_channels(cfg, spec.channel, trial_seed(spec.seed, t));
  if (spec.csi_error != CsiErrorMode::kNone) {
    const auto mode = spec.csi_error == CsiErrorMode::kBoundary ? PerturbMode::kBoundary : PerturbMode::kInterior;
    perturb_csi(real, cfg, trial_seed(spec.seed ^ kCsiStream, t), mode);
  }
  const std::uint64_t hash = channel_hash(real);

  SolverOptions so;
  so.max_iters = cfg.max_iters;
  so.rel_tol = cfg.rel_tol;
  const double p_min = std::min(cfg.P[0], cfg.P[1]);

  ExperimentResults out;
  for (const auto& alg : spec.algorithms) {
    const auto t0 = clock::now();
    auto row = [&](const std::string& metric, double value, int iteration = -1) {
      out.rows.push_back({spec.sweep_param, sweep_value, trial, alg, hash, metric, iteration, value});
    };
    TransceiverDesign design;
    PerformanceReport report;
    double wc = 0.0;
    std::vector<double> trace;
    std::vector<double> gaps;
    if (alg == "altqcp" || alg == "wmmse" || alg == "cutting_set") {
      if (alg == "altqcp") {
        DesignResult r = run_altqcp(real.estimate, cfg, so);
        design = std::move(r.design);
        report = std::move(r.report);
      } else if (alg == "wmmse") {
        WmmseResult r = run_wmmse(real.estimate, cfg, so);
        design = std::move(r.design);
        report = std::move(r.report);
      } else {
        CuttingSetOptions co = spec.cutting_set;
        co.solver = so;
        CuttingSetResult r = run_cutting_set(real, cfg, co);
        design = std::move(r.design);
        report = std::move(r.report);
        gaps = std::move(r.gap_trace);
      }
      trace = std::move(report.objective_trace);
      const int iterations = report.iterations;
      const bool converged = report.converged;
      report = evaluate(design, real.world(), cfg);
      report.iterations = iterations;
      report.converged = converged;
      wc = worst_case_mse(design, real, cfg);
    } else {
      BaselineOptions bo;
      bo.solver = so;
      bo.objective = spec.design_objective;
      BaselineMode mode = BaselineMode::kSiThreshold;
      if (alg == "hd") mode = BaselineMode::kHalfDuplex;
      else if (alg == "kappa0") mode = BaselineMode::kKappa0;
      else if (alg == "sc") mode = BaselineMode::kSingleCarrier;
      else if (alg == "pth_high") bo.si_threshold = p_min;
      else if (alg == "pth_low") bo.si_threshold = p_min / 10.0;
      BaselineResult r = run_baseline(mode, real, cfg, bo);
      report = std::move(r.report);
      trace = std::move(report.objective_trace);
      wc = r.worst_case_mse;
    }
    row("sum_mse", report.sum_mse());
    row("wc_mse", wc);
    row("sum_rate", report.weighted_sum_rate(cfg.omega));
    row("iterations", report.iterations);
    row("converged", report.converged ? 1.0 : 0.0);
    for (std::size_t n = 0; n < trace.size(); ++n) row("objective", trace[n], static_cast<int>(n));
    for (std::size_t n = 0; n < gaps.size(); ++n) row("cut_gap", gaps[n], static_cast<int>(n + 1));
    out.timing.push_back({sweep_value, trial, alg, std::chrono::duration<double>(clock::now() - t0).count()});
  }
  return out;
}

ExperimentResults run_experiment(const ExperimentSpec& spec, int threads) {
  spec.validate();
  const std::size_t per_value = static_cast<std::size_t>(spec.n_trials);
  const std::size_t tasks = spec.sweep_values.size() * per_value;
  std::vector<ExperimentResults> slots(tasks);
  std::vector<std::exception_ptr> errors(tasks);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t n = next++; n < tasks; n = next++) {
      try {
        slots[n] = run_trial(spec, spec.sweep_values[n / per_value], static_cast<int>(n % per_value));
      } catch (...) {
        errors[n] = std::current_exception();
      }
    }
  };
  const int workers = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(tasks, 1)));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  // Report the failure of the lowest task so errors do not depend on scheduling.
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  ExperimentResults all;
  for (auto& s : slots) {
    all.rows.insert(all.rows.end(), std::make_move_iterator(s.rows.begin()), std::make_move_iterator(s.rows.end()));
    all.timing.insert(all.timing.end(), s.timing.begin(), s.timing.end());
  }
  return all;
}

void write_results_csv(std::ostream& out, const ExperimentSpec& spec, const std::vector<ResultRow>& rows) {
  out << "# fdmimo results spec_hash=" << hex16(spec.hash) << " seed=" << spec.seed << '\n';
  out << "sweep_param,sweep_value,trial,algorithm,channel_hash,metric,iteration,value\n";
  for (const auto& r : rows) {
    out << r.sweep_param << ',' << format_fixed(r.sweep_value) << ',' << r.trial << ',' << r.algorithm << ','
        << hex16(r.channel_hash) << ',' << r.metric << ',';
    if (r.iteration >= 0) out << r.iteration;
    out << ',' << format_exact(r.value) << '\n';
  }
}

void write_timing_csv(std::ostream& out, const ExperimentSpec& spec, const std::vector<TimingRow>& rows) {
  out << "# fdmimo timing spec_hash=" << hex16(spec.hash) << " seed=" << spec.seed << '\n';
  out << "sweep_param,sweep_value,trial,algorithm,seconds\n";
  for (const auto& r : rows)
    out << spec.sweep_param << ',' << format_fixed(r.sweep_value) << ',' << r.trial << ',' << r.algorithm << ','
        << format_exact(r.seconds) << '\n';
}

// ---------------------------------------------------------------------------
// CSV tables

int Table::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ConfigError("table has no column '" + name + "'");
  return static_cast<int>(it - columns.begin());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t n = 0; n < line.size(); ++n) {
    const char c = line[n];
    if (quoted) {
      if (c == '"' && n + 1 < line.size() && line[n + 1] == '"') {
        cur += '"';
        ++n;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw ConfigError("csv: unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

double to_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || !std::isfinite(v))
    throw ConfigError(where + ": not a finite number: '" + s + "'");
  return v;
}

struct RunningGroup {
  std::vector<std::string> key;
  std::vector<double> values;
};

}  // namespace

Table read_csv(std::istream& in) {
  Table t;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto fields = split_csv_line(line);
    if (!header) {
      t.columns = std::move(fields);
      header = true;
      continue;
    }
    if (fields.size() != t.columns.size())
      throw ConfigError("csv: row has " + std::to_string(fields.size()) + " fields, header has " +
                        std::to_string(t.columns.size()));
    t.rows.push_back(std::move(fields));
  }
  if (!header) throw ConfigError("csv: missing header line");
  return t;
}

Table read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return read_csv(in);
}

void write_csv(std::ostream& out, const Table& t) {
  auto line = [&](const std::vector<std::string>& f) {
    for (std::size_t n = 0; n < f.size(); ++n) out << (n ? "," : "") << quote_if_needed(f[n]);
    out << '\n';
  };
  line(t.columns);
  for (const auto& r : t.rows) line(r);
}

Table summarize(const Table& in, const std::vector<std::string>& by) {
  std::vector<int> cols;
  for (const auto& b : by) cols.push_back(in.column(b));
  const int value_col = in.column("value");
  if (in.rows.empty()) throw ConfigError("summarize: no rows to aggregate");

  std::vector<RunningGroup> groups;
  std::map<std::vector<std::string>, std::size_t> index;
  for (const auto& r : in.rows) {
    std::vector<std::string> key;
    for (int c : cols) key.push_back(r[static_cast<std::size_t>(c)]);
    auto [it, fresh] = index.try_emplace(key, groups.size());
    if (fresh) groups.push_back({key, {}});
    groups[it->second].values.push_back(to_double(r[static_cast<std::size_t>(value_col)], "summarize"));
  }

  Table out;
  out.columns = by;
  out.columns.insert(out.columns.end(), {"mean", "std", "count"});
  for (const auto& g : groups) {
    const double n = static_cast<double>(g.values.size());
    double mean = 0.0;
    for (double v : g.values) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : g.values) ss += (v - mean) * (v - mean);
    const double sd = g.values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    std::vector<std::string> row = g.key;
    row.push_back(format_exact(mean));
    row.push_back(format_exact(sd));
    row.push_back(std::to_string(g.values.size()));
    out.rows.push_back(std::move(row));
  }
  return out;
}

namespace {

struct FigureDef {
  const char* name;
  const char* sweep;
  const char* metric;
};

constexpr FigureDef kFigures[] = {
    {"wcmse_vs_kappa", "kappa_db", "wc_mse"},   {"wcmse_vs_zeta", "zeta_db", "wc_mse"},
    {"wcmse_vs_noise", "sigma2_db", "wc_mse"},  {"sr_vs_kappa", "kappa_db", "sum_rate"},
    {"sr_vs_noise", "sigma2_db", "sum_rate"},   {"sr_vs_power", "pmax", "sum_rate"},
};

template <class T>
std::size_t ordinal(std::vector<T>& seen, const T& v) {
  const auto it = std::find(seen.begin(), seen.end(), v);
  if (it != seen.end()) return static_cast<std::size_t>(it - seen.begin());
  seen.push_back(v);
  return seen.size() - 1;
}

void require_sweep(const Table& t, const std::string& figure, const std::string& sweep) {
  const int c = t.column("sweep_param");
  for (const auto& r : t.rows)
    if (r[static_cast<std::size_t>(c)] != sweep)
      throw ConfigError("figure " + figure + " needs a " + sweep + " sweep, found " + r[static_cast<std::size_t>(c)]);
}

Table convergence_data(const Table& t) {
  require_sweep(t, "convergence", "kappa_db");
  const auto c_x = static_cast<std::size_t>(t.column("sweep_value"));
  const auto c_trial = static_cast<std::size_t>(t.column("trial"));
  const auto c_alg = static_cast<std::size_t>(t.column("algorithm"));
  const auto c_metric = static_cast<std::size_t>(t.column("metric"));
  const auto c_it = static_cast<std::size_t>(t.column("iteration"));
  const auto c_val = static_cast<std::size_t>(t.column("value"));

  // (algorithm, kappa) -> trial -> trace
  std::vector<std::string> algs;
  std::vector<double> kappas;
  std::map<std::pair<std::size_t, std::size_t>, std::map<std::string, std::vector<double>>> traces;
  for (const auto& r : t.rows) {
    if (r[c_metric] != "objective") continue;
    const std::size_t a = ordinal(algs, r[c_alg]);
    const std::size_t x = ordinal(kappas, to_double(r[c_x], "sweep_value"));
    auto& tr = traces[{a, x}][r[c_trial]];
    const auto it = static_cast<std::size_t>(to_double(r[c_it], "iteration"));
    if (tr.size() <= it) tr.resize(it + 1, std::nan(""));
    tr[it] = to_double(r[c_val], "value");
  }
  if (traces.empty()) throw ConfigError("figure convergence: no objective traces in input");

  std::vector<std::size_t> order(kappas.size());
  for (std::size_t n = 0; n < order.size(); ++n) order[n] = n;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return kappas[a] < kappas[b]; });

  Table out;
  out.columns = {"iteration", "algorithm", "kappa_db", "objective_mean", "objective_min"};
  for (std::size_t a = 0; a < algs.size(); ++a)
    for (std::size_t x : order) {
      const auto found = traces.find({a, x});
      if (found == traces.end()) throw ConfigError("figure convergence: missing series " + algs[a]);
      std::size_t len = 0;
      for (const auto& [_, tr] : found->second) len = std::max(len, tr.size());
      for (std::size_t it = 0; it < len; ++it) {
        double sum = 0.0, lo = std::numeric_limits<double>::infinity();
        for (const auto& [_, tr] : found->second) {
          // Converged runs hold their final value for the remaining iterations.
          const double v = it < tr.size() ? tr[it] : tr.back();
          if (std::isnan(v)) throw ConfigError("figure convergence: gap in an objective trace");
          sum += v;
          lo = std::min(lo, v);
        }
        out.rows.push_back({std::to_string(it), algs[a], format_fixed(kappas[x]),
                            format_exact(sum / static_cast<double>(found->second.size())), format_exact(lo)});
      }
    }
  return out;
}

}  // namespace

Table plot_data(const Table& t, const std::string& figure) {
  if (figure == "convergence") return convergence_data(t);
  const FigureDef* def = nullptr;
  for (const auto& f : kFigures)
    if (figure == f.name) def = &f;
  if (!def) throw ConfigError("unknown figure '" + figure + "'");
  require_sweep(t, figure, def->sweep);

  const auto c_x = static_cast<std::size_t>(t.column("sweep_value"));
  const auto c_alg = static_cast<std::size_t>(t.column("algorithm"));
  const auto c_metric = static_cast<std::size_t>(t.column("metric"));
  const auto c_val = static_cast<std::size_t>(t.column("value"));

  std::vector<double> xs;
  std::vector<std::string> series;
  std::map<std::pair<std::size_t, std::size_t>, std::pair<double, long>> acc;
  for (const auto& r : t.rows) {
    if (r[c_metric] != def->metric) continue;
    const std::size_t x = ordinal(xs, to_double(r[c_x], "sweep_value"));
    const std::size_t s = ordinal(series, r[c_alg]);
    auto& a = acc[{x, s}];
    a.first += to_double(r[c_val], "value");
    a.second += 1;
  }
  if (acc.empty()) throw ConfigError("figure " + figure + ": no " + def->metric + " rows in input");

  std::vector<std::size_t> order(xs.size());
  for (std::size_t n = 0; n < order.size(); ++n) order[n] = n;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });

  Table out;
  out.columns = {"x", "series", "y"};
  for (std::size_t x : order)
    for (std::size_t s = 0; s < series.size(); ++s) {
      const auto it = acc.find({x, s});
      if (it == acc.end())
        throw ConfigError("figure " + figure + ": missing series " + series[s] + " at x=" + format_fixed(xs[x]));
      out.rows.push_back({format_fixed(xs[x]), series[s],
                          format_exact(it->second.first / static_cast<double>(it->second.second))});
    }
  return out;
}

std::string resolve_output_dir(const std::optional<std::string>& flag, const std::string& fallback) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("FDMIMO_OUT_DIR"); env && *env) return env;
  return fallback;
}

}  // namespace fdmimo
