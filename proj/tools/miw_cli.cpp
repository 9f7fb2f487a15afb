// Command-line laboratory for interacting-worlds sequences: construction,
// convergence metrics, Stein diagnostics, gradient checks, and dynamics.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "miw/constructor.hpp"
#include "miw/dynamics.hpp"
#include "miw/metrics.hpp"
#include "miw/stability.hpp"
#include "miw/stein.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failure on " + path);
  return ss.str();
}

void write_output(const std::string& path, const std::string& body) {
  if (path == "-") {
    std::cout << body;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << body;
  if (!out) throw IoError("write failure on " + path);
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[64];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// CSV artifacts carry the configuration and version; the generated line is
// the only part excluded from byte-for-byte reproducibility.
std::string csv_header(const std::string& config) {
  return "# version: " + std::string(kVersion) + "\n# config: " + config +
         "\n# generated: " + timestamp() + "\n";
}

std::string with_meta(const std::string& seq_json, const std::string& config) {
  nlohmann::json j = nlohmann::json::parse(seq_json);
  j["version"] = kVersion;
  j["config"] = config;
  return j.dump(2) + "\n";
}

std::string join_counts(const std::vector<int>& counts, char sep) {
  std::string s;
  for (size_t i = 0; i < counts.size(); ++i) {
    if (i) s += sep;
    s += std::to_string(counts[i]);
  }
  return s;
}

std::vector<int> parse_grid(const std::string& spec) {
  // geometric grid start:stop:factor
  int start = 0, stop = 0, factor = 0;
  if (std::sscanf(spec.c_str(), "%d:%d:%d", &start, &stop, &factor) != 3 ||
      start < 2 || stop < start || factor < 2)
    throw std::invalid_argument("bad grid spec '" + spec +
                                "', expected start:stop:factor");
  std::vector<int> grid;
  for (long n = start; n <= stop; n *= factor)
    grid.push_back(static_cast<int>(n));
  return grid;
}

void print_residuals(const miw::Residuals& r) {
  std::printf("residuals: interior %.3e, left_bc %.3e, right_bc %.3e\n",
              r.interior, r.left_bc, r.right_bc);
}

int run_construct(int ell, const std::vector<int>& counts, int total,
                  const std::string& out) {
  const miw::EnergyState state(ell);
  miw::MIWSequence seq;
  std::string config;
  if (!counts.empty()) {
    seq = miw::construct(state, counts);
    config = "construct --ell " + std::to_string(ell) + " --counts " +
             join_counts(counts, ',');
  } else {
    seq = miw::construct_auto(state, total);
    config = "construct --ell " + std::to_string(ell) + " --n " +
             std::to_string(total);
  }
  write_output(out, with_meta(seq.to_json(), config));
  std::printf("constructed %d points, counts %s\n", seq.size(),
              join_counts(seq.counts, ',').c_str());
  print_residuals(seq.residuals);
  return 0;
}

int run_verify(const std::string& in) {
  const miw::MIWSequence seq = miw::MIWSequence::from_json(read_file(in));
  const miw::EnergyState state(seq.ell);
  const miw::VerifyReport rep = miw::verify(seq, state);
  std::printf("increasing: %s\ncounts_ok: %s\n",
              rep.increasing ? "yes" : "no", rep.counts_ok ? "yes" : "no");
  print_residuals(rep.residuals);
  std::printf("symmetry: %.3e\n", rep.symmetry);
  const bool ok = rep.increasing && rep.counts_ok &&
                  rep.residuals.interior <= 1e-9 &&
                  rep.residuals.left_bc <= 1e-8 &&
                  rep.residuals.right_bc <= 1e-8;
  if (!ok) {
    std::fprintf(stderr, "verification failed\n");
    return 2;
  }
  return 0;
}

int run_wasserstein(const std::string& in) {
  const miw::MIWSequence seq = miw::MIWSequence::from_json(read_file(in));
  const miw::EnergyState state(seq.ell);
  const miw::WassersteinReport rep = miw::wasserstein(seq, state);
  std::printf("distance: %.12g\ncoupling_bound: %.12g\nscaled: %.12g\n",
              rep.distance, rep.coupling_bound, rep.scaled);
  for (const auto& r : rep.per_region)
    std::printf("region %d: distance %.12g, share %.6g\n", r.k, r.distance,
                r.count_share);
  return 0;
}

int run_gaps(const std::string& in) {
  const miw::MIWSequence seq = miw::MIWSequence::from_json(read_file(in));
  const miw::EnergyState state(seq.ell);
  const miw::GapReport rep = miw::gap_report(seq, state);
  std::printf("max_gap: %.12g at %d\nfirst_gap: %.12g\nlast_gap: %.12g\n",
              rep.max_gap, rep.argmax, rep.first_gap, rep.last_gap);
  for (size_t i = 0; i < rep.root_gaps.size(); ++i)
    std::printf("root_gap %zu: %.12g\n", i, rep.root_gaps[i]);
  std::printf("span: [%.12g, %.12g]\nspan_ratio_right: %.6g\n"
              "span_ratio_left: %.6g\n",
              rep.x1, rep.xN, rep.span_ratio_right, rep.span_ratio_left);
  return 0;
}

int run_rates(int ell, const std::string& grid_spec, const std::string& out,
              int jobs) {
  const std::vector<int> grid = parse_grid(grid_spec);
  const miw::EnergyState state(ell);
  std::vector<miw::RateRow> rows(grid.size());
  std::atomic<size_t> cursor{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = cursor.fetch_add(1);
      if (i >= grid.size()) return;
      const auto t0 = std::chrono::steady_clock::now();
      const miw::MIWSequence seq = miw::construct_auto(state, grid[i]);
      const miw::WassersteinReport w = miw::wasserstein(seq, state);
      const miw::GapReport g = miw::gap_report(seq, state);
      const auto t1 = std::chrono::steady_clock::now();
      miw::RateRow row;
      row.N = grid[i];
      row.ell = ell;
      row.counts = join_counts(seq.counts, ';');
      row.wasserstein = w.distance;
      row.coupling_bound = w.coupling_bound;
      row.max_gap = g.max_gap;
      row.x1 = g.x1;
      row.xN = g.xN;
      row.H = miw::energy(seq.points).H;
      row.runtime_ms =
          std::chrono::duration<double, std::milli>(t1 - t0).count();
      rows[i] = row;
    }
  };
  const int nthreads = std::max(
      1, std::min<int>(jobs, static_cast<int>(grid.size())));
  std::vector<std::thread> pool;
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  const std::string config = "rates --ell " + std::to_string(ell) +
                             " --n-grid " + grid_spec;
  write_output(out, csv_header(config) + miw::rate_table_csv(rows));
  const miw::RateFit fit = miw::rate_fit(rows);
  std::printf("slope: %.6g\nintercept: %.6g\nscaled range: [%.6g, %.6g]\n",
              fit.slope, fit.intercept, fit.scaled_min, fit.scaled_max);
  return 0;
}

int run_gradient(const std::string& in, const std::string& out) {
  const miw::MIWSequence seq = miw::MIWSequence::from_json(read_file(in));
  const std::vector<double> grad = miw::grad_H(seq.points);
  // Central-difference cross-check of the analytic gradient.
  double fd_error = 0.0;
  std::vector<double> x = seq.points;
  for (size_t n = 0; n < x.size(); ++n) {
    const double h = 1e-6 * (1.0 + std::fabs(x[n]));
    const double keep = x[n];
    x[n] = keep + h;
    const double hp = miw::energy(x).H;
    x[n] = keep - h;
    const double hm = miw::energy(x).H;
    x[n] = keep;
    fd_error = std::max(fd_error, std::fabs((hp - hm) / (2 * h) - grad[n]));
  }
  std::string body = "n,x,grad\n";
  char buf[96];
  for (size_t n = 0; n < x.size(); ++n) {
    std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g\n", n + 1, x[n], grad[n]);
    body += buf;
  }
  write_output(out, csv_header("gradient --in " + in) + body);
  std::printf("fd_error: %.3e\n", fd_error);
  return 0;
}

int run_center(const std::string& grid_spec, const std::string& out,
               int jobs) {
  const std::vector<int> grid = parse_grid(grid_spec);
  const miw::EnergyState state(1);
  const miw::CenterScaling scaling = miw::center_scaling(state, grid, jobs);
  const std::string config = "center --n-grid " + grid_spec;
  write_output(out, csv_header(config) + miw::center_csv(scaling));
  std::printf("slope: %.6g\n", scaling.slope);
  return 0;
}

miw::TestFunction parse_h(const std::string& name) {
  if (name == "identity") return miw::TestFunction::identity;
  if (name == "tanh") return miw::TestFunction::tanh_scaled;
  if (name == "softplus") return miw::TestFunction::softplus;
  if (name == "sin") return miw::TestFunction::sine;
  throw std::invalid_argument("unknown test function '" + name + "'");
}

int run_stein(int ell, int region, const std::string& h_name, int grid,
              const std::string& out) {
  const miw::EnergyState state(ell);
  const miw::SteinProbe probe(state, region, parse_h(h_name));
  const auto samples = probe.sample_grid(grid);
  const std::string config = "stein --ell " + std::to_string(ell) +
                             " --region " + std::to_string(region) + " --h " +
                             h_name + " --grid " + std::to_string(grid);
  write_output(out, csv_header(config) + miw::probe_csv(samples));
  double worst = 0.0;
  for (const auto& s : samples) worst = std::max(worst, s.residual);
  std::printf("E_P[h]: %.12g\nmax residual: %.3e\n", probe.expectation(),
              worst);
  return 0;
}

int run_simulate(const std::string& init_path, const std::string& momentum,
                 double dt, double t_max, int stride,
                 const std::string& out) {
  const miw::MIWSequence seq =
      miw::MIWSequence::from_json(read_file(init_path));
  miw::PhaseState init;
  init.x = seq.points;
  init.p.assign(init.x.size(), 0.0);
  if (!momentum.empty()) {
    std::stringstream ss(momentum);
    std::string tok;
    size_t i = 0;
    while (std::getline(ss, tok, ',')) {
      if (i >= init.p.size())
        throw std::invalid_argument("momentum vector longer than positions");
      init.p[i++] = std::stod(tok);
    }
    if (i != init.p.size())
      throw std::invalid_argument("momentum vector shorter than positions");
  }
  const miw::Trajectory traj = miw::simulate(init, dt, t_max, stride);
  const std::string config = "simulate --init " + init_path + " --dt " +
                             std::to_string(dt) + " --t-max " +
                             std::to_string(t_max) + " --stride " +
                             std::to_string(stride);
  write_output(out, csv_header(config) + traj.to_csv());
  std::printf("energy drift: %.3e\n", traj.relative_drift());
  if (traj.collided) {
    std::fprintf(stderr, "collision at index %d, t = %g\n",
                 traj.collision_index, traj.collision_time);
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for interacting-worlds sequences"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  int ell = 0, total = 0, region = 0, stride = 10, grid_n = 256;
  int jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  std::vector<int> counts;
  std::string out = "-", in, grid_spec = "64:4096:2", h_name = "identity";
  std::string init_path, momentum;
  double dt = 1e-3, t_max = 10.0;

  auto* c_construct = app.add_subcommand("construct", "build a sequence");
  c_construct->add_option("--ell", ell, "state order")->required();
  auto* opt_counts = c_construct->add_option("--counts", counts,
                                             "per-region counts")
                         ->delimiter(',');
  c_construct->add_option("--n", total, "total count with auto allocation")
      ->excludes(opt_counts);
  c_construct->add_option("--out", out, "output .miw.json ('-' = stdout)");

  auto* c_verify = app.add_subcommand("verify", "recheck sequence invariants");
  c_verify->add_option("--in", in, "sequence file")->required();

  auto* c_wass = app.add_subcommand("wasserstein", "exact distance report");
  c_wass->add_option("--in", in, "sequence file")->required();

  auto* c_gaps = app.add_subcommand("gaps", "gap and span report");
  c_gaps->add_option("--in", in, "sequence file")->required();

  auto* c_rates = app.add_subcommand("rates", "convergence-rate sweep");
  c_rates->add_option("--ell", ell, "state order")->required();
  c_rates->add_option("--n-grid", grid_spec, "geometric grid start:stop:factor");
  c_rates->add_option("--out", out, "output CSV");
  c_rates->add_option("--jobs", jobs, "worker threads");

  auto* c_grad = app.add_subcommand("gradient", "energy gradient of a sequence");
  c_grad->add_option("--in", in, "sequence file")->required();
  c_grad->add_option("--out", out, "output CSV");

  auto* c_center = app.add_subcommand("center",
                                      "center-point scaling sweep (order 1)");
  c_center->add_option("--n-grid", grid_spec, "geometric grid of even totals");
  c_center->add_option("--out", out, "output CSV");
  c_center->add_option("--jobs", jobs, "worker threads");

  auto* c_stein = app.add_subcommand("stein", "Stein-equation probe samples");
  c_stein->set_help_flag("--help", "print help");  // frees -h for the option
  c_stein->add_option("--ell", ell, "state order")->required();
  c_stein->add_option("--region", region, "region index");
  c_stein->add_option("--h", h_name, "identity|tanh|softplus|sin");
  c_stein->add_option("--grid", grid_n, "sample count");
  c_stein->add_option("--out", out, "output CSV");

  auto* c_sim = app.add_subcommand("simulate", "Hamiltonian time evolution");
  c_sim->add_option("--init", init_path, "initial sequence file")->required();
  c_sim->add_option("--momentum", momentum, "comma list, default zeros");
  c_sim->add_option("--dt", dt, "time step");
  c_sim->add_option("--t-max", t_max, "final time");
  c_sim->add_option("--stride", stride, "sampling stride");
  c_sim->add_option("--out", out, "output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 4;
  }

  try {
    if (c_construct->parsed()) {
      if (counts.empty() && total <= 0)
        throw std::invalid_argument("need --counts or --n");
      return run_construct(ell, counts, total, out);
    }
    if (c_verify->parsed()) return run_verify(in);
    if (c_wass->parsed()) return run_wasserstein(in);
    if (c_gaps->parsed()) return run_gaps(in);
    if (c_rates->parsed()) return run_rates(ell, grid_spec, out, jobs);
    if (c_grad->parsed()) return run_gradient(in, out);
    if (c_center->parsed()) return run_center(grid_spec, out, jobs);
    if (c_stein->parsed()) return run_stein(ell, region, h_name, grid_n, out);
    if (c_sim->parsed())
      return run_simulate(init_path, momentum, dt, t_max, stride, out);
  } catch (const miw::ConstructionError& e) {
    std::fprintf(stderr, "construction failure: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "i/o failure: %s\n", e.what());
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "i/o failure: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid config: %s\n", e.what());
    return 4;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "invalid config: %s\n", e.what());
    return 4;
  } catch (const std::out_of_range& e) {
    std::fprintf(stderr, "invalid config: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return 2;
  }
  return 0;
}
