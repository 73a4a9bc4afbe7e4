#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <set>
#include <sstream>

#include "fdmimo/harness.hpp"
#include "support.hpp"

using namespace fdmimo;

namespace {

const char* kSmall = R"({
  "link": {"K": 2, "sigma2": "-30dB", "kappa": "-40dB", "beta": "-40dB"},
  "sweep": {"param": "kappa_db", "values": [-20, -40]},
  "algorithms": ["altqcp", "kappa0", "hd"],
  "n_trials": 3,
  "seed": 5
})";

std::string results_text(const ExperimentSpec& spec, int threads) {
  std::ostringstream out;
  write_results_csv(out, spec, run_experiment(spec, threads).rows);
  return out.str();
}

Table table_of(const std::string& text) {
  std::istringstream in(text);
  return read_csv(in);
}

std::string spec_with(const std::string& field) {
  return R"({"algorithms": ["altqcp"], )" + field + "}";
}

}  // namespace

TEST_CASE("spec parsing accepts dB strings and fills defaults") {
  const ExperimentSpec s = parse_spec(kSmall);
  CHECK(s.link.K == 2);
  CHECK(s.link.sigma2 == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(s.link.kappa == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(s.sweep_values == std::vector<double>{-20.0, -40.0});
  CHECK(s.n_trials == 3);
  CHECK(s.seed == 5);
  CHECK(s.csi_error == CsiErrorMode::kInterior);
  const ExperimentSpec d = parse_spec(R"({"algorithms": ["wmmse"]})");
  CHECK(d.sweep_param == "none");
  CHECK(d.sweep_values == std::vector<double>{0.0});
  CHECK(d.n_trials == 100);
  CHECK(d.design_objective == DesignObjective::kMse);
  // The hash tracks content, not formatting.
  CHECK(parse_spec(R"({ "algorithms" : [ "wmmse" ] })").hash == d.hash);
  CHECK(parse_spec(R"({"algorithms": ["wmmse"], "seed": 2})").hash != d.hash);
}

TEST_CASE("invalid specs are rejected with ConfigError") {
  const std::vector<std::string> bad{
      "{not json",
      R"({"algorithms": []})",
      R"({"algorithms": ["nope"]})",
      spec_with(R"("extra": 1)"),
      spec_with(R"("link": {"K": 0})"),
      spec_with(R"("link": {"P": "abc"})"),
      spec_with(R"("link": {"sigma2": -1})"),
      spec_with(R"("link": {"kappa": "-30 dBm"})"),
      spec_with(R"("sweep": {"param": "temperature", "values": [1]})"),
      spec_with(R"("sweep": {"param": "K", "values": [1.5]})"),
      spec_with(R"("sweep": {"param": "kappa_db", "values": []})"),
      spec_with(R"("n_trials": 0)"),
      spec_with(R"("seed": -1)"),
      spec_with(R"("design_objective": "power")"),
      spec_with(R"("csi_error": "sometimes")"),
      spec_with(R"("cutting_set": {"max_cuts": 0})"),
      spec_with(R"("channel": {"rho": -1})"),
  };
  for (const auto& text : bad) {
    CAPTURE(text);
    CHECK_THROWS_AS(parse_spec(text), ConfigError);
  }
  CHECK_THROWS_AS(load_spec("/nonexistent/spec.json"), ConfigError);
}

TEST_CASE("sweep application") {
  const LinkParams base;
  CHECK(apply_sweep(base, "kappa_db", -20).kappa == doctest::Approx(0.01));
  CHECK(apply_sweep(base, "kappa_db", -20).beta == doctest::Approx(0.01));
  CHECK(apply_sweep(base, "zeta_db", -10).zeta == doctest::Approx(0.1));
  CHECK(apply_sweep(base, "sigma2_db", 0).sigma2 == doctest::Approx(1.0));
  CHECK(apply_sweep(base, "pmax", 3).power == 3.0);
  CHECK(apply_sweep(base, "K", 8).K == 8);
  CHECK(apply_sweep(base, "M", 3).antennas == 3);
  CHECK_THROWS_AS(apply_sweep(base, "x", 1), ConfigError);
}

TEST_CASE("results are deterministic and independent of the thread count") {
  const ExperimentSpec s = parse_spec(kSmall);
  const std::string one = results_text(s, 1);
  CHECK(one == results_text(s, 4));
  CHECK(one == results_text(s, 1));
  CHECK(one.rfind("# fdmimo results spec_hash=", 0) == 0);

  const Table t = table_of(one);
  CHECK(t.columns == std::vector<std::string>{"sweep_param", "sweep_value", "trial", "algorithm", "channel_hash",
                                              "metric", "iteration", "value"});
  // Every algorithm in a trial sees the same channels; different trials differ.
  std::map<std::string, std::set<std::string>> hashes;
  const auto c_hash = static_cast<std::size_t>(t.column("channel_hash"));
  for (const auto& r : t.rows) {
    CHECK(r[c_hash].size() == 16);
    hashes[r[1] + "/" + r[2]].insert(r[c_hash]);
  }
  CHECK(hashes.size() == 6);
  std::set<std::string> distinct;
  for (const auto& [_, h] : hashes) {
    CHECK(h.size() == 1);
    distinct.insert(*h.begin());
  }
  CHECK(distinct.size() == 3);  // the kappa sweep does not change channels
  // Scalar metrics leave the iteration empty; traces number from 0.
  const auto c_metric = static_cast<std::size_t>(t.column("metric"));
  const auto c_it = static_cast<std::size_t>(t.column("iteration"));
  for (const auto& r : t.rows) CHECK((r[c_metric] == "objective") == !r[c_it].empty());
  const ExperimentSpec other = parse_spec(R"({
    "link": {"K": 2}, "sweep": {"param": "kappa_db", "values": [-20, -40]},
    "algorithms": ["altqcp", "kappa0", "hd"], "n_trials": 3, "seed": 6})");
  CHECK(results_text(other, 2) != one);
}

TEST_CASE("sweep values print in fixed notation") {
  const ExperimentSpec s = parse_spec(R"({
    "link": {"K": 1}, "sweep": {"param": "pmax", "values": ["0dB", 2.5]},
    "algorithms": ["altqcp"], "n_trials": 1})");
  const Table t = table_of(results_text(s, 1));
  std::set<std::string> xs;
  for (const auto& r : t.rows) xs.insert(r[1]);
  CHECK(xs == std::set<std::string>{"1.000000", "2.500000"});
  CHECK(format_fixed(-20.0) == "-20.000000");
  CHECK(format_fixed(-0.0) == "0.000000");
  CHECK(std::stod(format_exact(0.1)) == 0.1);
}

TEST_CASE("CSV reader handles comments and quoted fields") {
  const Table t = table_of("# comment\na,b\n1,\"x,y\"\n\"q\"\"t\",2\n");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "x,y");
  CHECK(t.rows[1][0] == "q\"t");
  CHECK(t.column("b") == 1);
  CHECK_THROWS_AS(t.column("c"), ConfigError);
  CHECK_THROWS_AS(table_of("a,b\n1\n"), ConfigError);
  std::ostringstream out;
  write_csv(out, t);
  const Table back = table_of(out.str());
  CHECK(back.rows == t.rows);
}

TEST_CASE("summarize matches a streaming mean and variance") {
  std::mt19937_64 rng(3);
  Table t;
  t.columns = {"algorithm", "metric", "value"};
  std::map<std::string, std::vector<double>> groups;
  for (int n = 0; n < 300; ++n) {
    const std::string a = n % 3 == 0 ? "a" : (n % 3 == 1 ? "b" : "c");
    const double v = std::normal_distribution<double>(n % 3, 1.0 + n % 3)(rng);
    groups[a].push_back(v);
    t.rows.push_back({a, "m", format_exact(v)});
  }
  const Table s = summarize(t, {"algorithm", "metric"});
  CHECK(s.columns == std::vector<std::string>{"algorithm", "metric", "mean", "std", "count"});
  REQUIRE(s.rows.size() == 3);
  CHECK(s.rows[0][0] == "a");
  CHECK(s.rows[2][0] == "c");
  for (const auto& row : s.rows) {
    // Welford's recurrence as the reference.
    double mean = 0.0, m2 = 0.0;
    int n = 0;
    for (double v : groups[row[0]]) {
      ++n;
      const double d = v - mean;
      mean += d / n;
      m2 += d * (v - mean);
    }
    CHECK(std::abs(std::stod(row[2]) - mean) <= 1e-12 * std::max(1.0, std::abs(mean)));
    CHECK(std::abs(std::stod(row[3]) - std::sqrt(m2 / (n - 1))) <= 1e-12 * std::sqrt(m2 / (n - 1)));
    CHECK(row[4] == std::to_string(n));
  }

  Table single;
  single.columns = {"g", "value"};
  single.rows = {{"x", "4.5"}};
  const Table one = summarize(single, {"g"});
  CHECK(one.rows[0][1] == "4.5");
  CHECK(one.rows[0][2] == "0");
  single.rows = {{"x", "2"}, {"x", "2"}, {"x", "2"}};
  CHECK(summarize(single, {"g"}).rows[0][2] == "0");
  single.rows.clear();
  CHECK_THROWS_AS(summarize(single, {"g"}), ConfigError);
  single.rows = {{"x", "2"}};
  CHECK_THROWS_AS(summarize(single, {"nope"}), ConfigError);
}

TEST_CASE("figure data has one row per point and series") {
  const ExperimentSpec s = parse_spec(kSmall);
  const Table t = table_of(results_text(s, 2));
  const Table f = plot_data(t, "wcmse_vs_kappa");
  CHECK(f.columns == std::vector<std::string>{"x", "series", "y"});
  REQUIRE(f.rows.size() == 2 * 3);
  CHECK(f.rows.front()[0] == "-40.000000");
  CHECK(f.rows.back()[0] == "-20.000000");
  CHECK(plot_data(t, "sr_vs_kappa").rows.size() == 6);
  CHECK_THROWS_AS(plot_data(t, "sr_vs_power"), ConfigError);
  CHECK_THROWS_AS(plot_data(t, "pie_chart"), ConfigError);

  const Table c = plot_data(t, "convergence");
  CHECK(c.columns == std::vector<std::string>{"iteration", "algorithm", "kappa_db", "objective_mean", "objective_min"});
  for (const auto& r : c.rows) CHECK(std::stod(r[4]) <= std::stod(r[3]) * (1.0 + 1e-15));

  // Drop one series at one point.
  Table holes = t;
  const auto c_alg = static_cast<std::size_t>(t.column("algorithm"));
  std::erase_if(holes.rows, [&](const auto& r) { return r[c_alg] == "hd" && r[1] == "-20.000000"; });
  CHECK_THROWS_WITH_AS(plot_data(holes, "wcmse_vs_kappa"), doctest::Contains("missing series hd"), ConfigError);
}

TEST_CASE("output directory precedence: flag, environment, spec") {
  ::unsetenv("FDMIMO_OUT_DIR");
  CHECK(resolve_output_dir(std::nullopt, "spec_dir") == "spec_dir");
  ::setenv("FDMIMO_OUT_DIR", "env_dir", 1);
  CHECK(resolve_output_dir(std::nullopt, "spec_dir") == "env_dir");
  CHECK(resolve_output_dir(std::string("flag_dir"), "spec_dir") == "flag_dir");
  ::unsetenv("FDMIMO_OUT_DIR");
}

TEST_CASE("cutting-set rows carry the gap trace") {
  const ExperimentSpec s = parse_spec(R"({
    "link": {"K": 2}, "algorithms": ["cutting_set"], "n_trials": 1, "cutting_set": {"max_cuts": 3}})");
  const Table t = table_of(results_text(s, 1));
  const auto c_metric = static_cast<std::size_t>(t.column("metric"));
  int gaps = 0;
  std::set<std::string> metrics;
  for (const auto& r : t.rows) {
    metrics.insert(r[c_metric]);
    gaps += r[c_metric] == "cut_gap";
  }
  CHECK(gaps >= 1);
  CHECK(gaps <= 3);
  for (const char* m : {"sum_mse", "wc_mse", "sum_rate", "iterations", "converged"}) CHECK(metrics.count(m) == 1);
}
