// Command-line front end: experiment runs, aggregation, figure data and a
// simulation check of the distortion covariance model.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "fdmimo/distortion.hpp"
#include "fdmimo/harness.hpp"

namespace fs = std::filesystem;
using namespace fdmimo;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitSpec = 2;
constexpr int kExitNumeric = 3;

void write_file(const fs::path& path, const auto& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  writer(out);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

int cmd_run(const std::string& spec_path, std::optional<std::uint64_t> seed,
            const std::optional<std::string>& out_flag, int threads) {
  ExperimentSpec spec = load_spec(spec_path);
  if (seed) spec.seed = *seed;
  const fs::path dir = resolve_output_dir(out_flag, spec.output);
  fs::create_directories(dir);
  if (threads < 1) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  const ExperimentResults res = run_experiment(spec, threads);
  write_file(dir / "results.csv", [&](std::ostream& o) { write_results_csv(o, spec, res.rows); });
  write_file(dir / "timing.csv", [&](std::ostream& o) { write_timing_csv(o, spec, res.timing); });
  std::printf("%zu rows, %zu sweep points x %d trials -> %s\n", res.rows.size(), spec.sweep_values.size(),
              spec.n_trials, (dir / "results.csv").string().c_str());
  return kExitOk;
}

int cmd_summarize(const std::string& in, const std::vector<std::string>& by,
                  const std::optional<std::string>& out) {
  const Table agg = summarize(read_csv_file(in), by);
  if (out) write_file(*out, [&](std::ostream& o) { write_csv(o, agg); });
  else write_csv(std::cout, agg);
  return kExitOk;
}

int cmd_plotdata(const std::string& in, const std::string& figure, const std::optional<std::string>& out_flag) {
  const Table data = plot_data(read_csv_file(in), figure);
  const fs::path parent = fs::path(in).parent_path();
  const fs::path dir = resolve_output_dir(out_flag, parent.empty() ? "." : parent.string());
  fs::create_directories(dir);
  const fs::path path = dir / (figure + ".csv");
  write_file(path, [&](std::ostream& o) { write_csv(o, data); });
  std::printf("%zu rows -> %s\n", data.rows.size(), path.string().c_str());
  return kExitOk;
}

double rel_frobenius(const Mat& est, const Mat& ref) { return (est - ref).norm() / ref.norm(); }

int cmd_validate_model(long blocks, std::uint64_t seed) {
  // Perfect CSI: the analytic covariance assumes exact cancellation.
  SystemConfig cfg = SystemConfig::defaults();
  cfg.set_zeta(0.0);
  const ChannelRealization real = draw_channels(cfg, ChannelStats{}, seed);
  const TransceiverDesign design = run_altqcp(real.truth, cfg).design;
  const Scenario world = Scenario::perfect(real.truth);

  bool ok = true;
  const DistortionStats st = simulate_blocks(design, world, cfg, blocks, mix_seed(seed));
  std::printf("distortion model, %ld blocks (tolerance 5%%)\n", blocks);
  for (int i = 0; i < kDirections; ++i)
    for (int k = 0; k < cfg.K; ++k) {
      const double err = rel_frobenius(st.nu_covariance[i][static_cast<std::size_t>(k)],
                                       aggregate_covariance(design.V, world, cfg, i, k));
      ok &= err < 0.05;
      std::printf("  receiver %d subcarrier %d  rel. error %.4f\n", i + 1, k + 1, err);
    }

  SystemConfig clean = cfg;
  clean.set_distortion(0.0, 0.0);
  const DistortionStats st0 = simulate_blocks(design, world, clean, blocks, mix_seed(seed + 1));
  std::printf("distortion-free, noise only (tolerance 3%%)\n");
  for (int i = 0; i < kDirections; ++i)
    for (int k = 0; k < cfg.K; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      const Mat ref = Mat::Identity(cfg.M[i], cfg.M[i]) * clean.sigma2[i][kk];
      const double err = rel_frobenius(st0.nu_covariance[i][kk], ref);
      ok &= err < 0.03;
      std::printf("  receiver %d subcarrier %d  rel. error %.4f\n", i + 1, k + 1, err);
    }
  std::printf("%s\n", ok ? "model consistent" : "model mismatch");
  return ok ? kExitOk : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full-duplex MIMO-OFDM transceiver design experiments"};
  app.require_subcommand(1);

  std::string spec_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  int threads = 0;
  auto* run = app.add_subcommand("run", "run an experiment file");
  run->add_option("--spec", spec_path, "experiment JSON")->required();
  run->add_option("--seed", seed, "override the master seed");
  run->add_option("--out", out, "output directory (else $FDMIMO_OUT_DIR, else the experiment file's output)");
  run->add_option("--threads", threads, "worker threads (default: all cores)");

  std::string in;
  std::vector<std::string> by;
  std::optional<std::string> sum_out;
  auto* sum = app.add_subcommand("summarize", "mean/std/count of value per group");
  sum->add_option("--in", in, "results CSV")->required();
  sum->add_option("--by", by, "group columns, comma separated")->delimiter(',')->required();
  sum->add_option("--out", sum_out, "write to a file instead of stdout");

  std::string figure;
  auto* plot = app.add_subcommand("plotdata", "emit per-figure CSV");
  plot->add_option("--in", in, "results CSV")->required();
  plot->add_option("--figure", figure, "figure name")->required()->check(CLI::IsMember(known_figures()));
  plot->add_option("--out", out, "output directory (else $FDMIMO_OUT_DIR, else next to --in)");

  long blocks = 100000;
  std::uint64_t vseed = 1;
  auto* val = app.add_subcommand("validate-model", "simulate OFDM blocks against the covariance model");
  val->add_option("--blocks", blocks, "number of simulated blocks")->check(CLI::PositiveNumber);
  val->add_option("--seed", vseed, "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; malformed invocations count as invalid input.
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(spec_path, seed, out, threads);
    if (*sum) return cmd_summarize(in, by, sum_out);
    if (*plot) return cmd_plotdata(in, figure, out);
    if (*val) return cmd_validate_model(blocks, vseed);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSpec;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  }
  return kExitOk;
}
