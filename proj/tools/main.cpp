// lossmoe: batch front end for the lossy monogamy-game SDP bounds.
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>

#include "config.hpp"
#include "lossmoe/bloch_bases.hpp"
#include "lossmoe/bounds.hpp"
#include "lossmoe/error.hpp"
#include "lossmoe/region.hpp"
#include "lossmoe/sdp.hpp"
#include "lossmoe/strategies.hpp"

namespace {

using namespace lossmoe;
using cli::CliConfig;

enum Exit { kOk = 0, kConfigError = 1, kSolverQuota = 2, kMonotonicity = 3 };

/// Writes to the configured output file, or stdout when none is set.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_) throw ParameterError("cannot open output file " + path);
  }
  std::ostream& get() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

struct Options {
  std::string config_path;
  nlohmann::json overrides = nlohmann::json::object();
  bool no_cache = false;
  bool trace = false;
};

template <class T>
void flag(CLI::App* app, Options& o, const std::string& name, const std::string& key,
          const std::string& help) {
  app->add_option_function<T>(name, [&o, key](const T& v) { o.overrides[key] = v; }, help);
}

void game_flags(CLI::App* app, Options& o) {
  flag<std::string>(app, o, "--variant", "variant", "strict, relaxed or qkd");
  flag<int>(app, o, "--m-theta", "m_theta", "polar discretization");
  flag<int>(app, o, "--m-phi", "m_phi", "azimuthal discretization");
  flag<double>(app, o, "--xi", "xi", "relaxation slack");
  flag<std::string>(app, o, "--level", "level", "1, 1+AB or 2");
  flag<bool>(app, o, "--use-prop2", "use_prop2", "add the second error inequality");
  flag<double>(app, o, "--tol", "tol", "solver tolerance");
  flag<int>(app, o, "--max-iter", "max_iter", "solver iteration cap");
  flag<double>(app, o, "--pad", "pad", "certified-bound padding");
  flag<int>(app, o, "--workers", "workers", "parallel solves");
  flag<std::string>(app, o, "-o,--output", "output", "output file (default stdout)");
  flag<std::string>(app, o, "--cache-dir", "cache_dir", "point cache directory");
  app->add_flag("--no-cache", o.no_cache, "do not read or write the point cache");
  app->add_flag("--trace", o.trace, "solver log on stderr");
}

void grid_flags(CLI::App* app, Options& o) {
  flag<double>(app, o, "--p-err", "p_err", "single p_err value");
  flag<double>(app, o, "--start", "p_err_start", "grid start");
  flag<double>(app, o, "--stop", "p_err_stop", "grid stop (inclusive)");
  flag<double>(app, o, "--step", "p_err_step", "grid step");
  flag<std::vector<double>>(app, o, "--list", "p_err_list", "explicit p_err values");
}

CliConfig resolve(const Options& o) {
  CliConfig c;
  if (!o.config_path.empty()) cli::load_config_file(c, o.config_path);
  cli::apply_json(c, o.overrides);
  c.sweep.solver.trace = o.trace;
  if (o.no_cache) c.cache = false;
  if (c.cache && c.sweep.cache_dir.empty()) c.sweep.cache_dir = cli::default_cache_dir(c.output);
  if (!c.cache) c.sweep.cache_dir.clear();
  return c;
}

void finish_game(CliConfig& c, Variant default_variant, double default_xi) {
  c.sweep.variant = c.variant.value_or(default_variant);
  c.sweep.xi = c.xi.value_or(c.sweep.variant == Variant::QpvRelaxed ? default_xi : 0.0);
  c.sweep.validate();
}

int cmd_sweep(CliConfig c) {
  finish_game(c, Variant::QpvStrict, 0.005);
  const SweepResult result = run_sweep(c.sweep);
  Sink sink(c.output);
  write_sweep_csv(sink.get(), c.sweep, result);
  std::fprintf(stderr, "%zu points, %zu failed\n", result.rows.size(), result.failures);
  if (result.failure_quota_exceeded()) {
    std::fprintf(stderr, "error: more than 10%% of the points failed to converge\n");
    return kSolverQuota;
  }
  if (result.monotonicity_violation) {
    std::fprintf(stderr, "error: p_ans decreases at p_err = %.6g\n",
                 *result.monotonicity_violation);
    return kMonotonicity;
  }
  return kOk;
}

int cmd_pwin(CliConfig c) {
  finish_game(c, Variant::QpvStrict, 0.005);
  const PwinResult r = find_pwin(c.sweep);
  Sink sink(c.output);
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "p_err_star=%.6g\np_win_upper=%.6g\nbracket_low=%.6g\nbracket_high=%.6g\n"
                "analytic_bound=%.6g\nsolves=%d\n",
                r.p_err_star, r.p_win, r.bracket_low, r.bracket_high, r.tomamichel, r.solves);
  sink.get() << buf;
  return kOk;
}

int cmd_bounds(CliConfig c) {
  finish_game(c, Variant::QpvRelaxed, 0.005);
  if (c.sweep.variant != Variant::QpvRelaxed) {
    throw ParameterError("bounds are computed from the relaxed variant");
  }
  BoundInputs in;
  in.n = c.n;
  in.q = c.q;
  in.eta = c.eta;
  in.xi = c.sweep.xi;
  in.m = c.sweep.m();
  in.m_theta = c.sweep.m_theta;
  in.m_phi = c.sweep.m_phi;
  in.flavor = c.flavor.value_or(in.m == 2 ? Flavor::Bb84 : Flavor::MBasis);
  in.delta = c.delta;
  in.beta = c.beta;
  in.integer_k = c.integer_k;
  const double delta = c.delta.value_or(default_delta(in.flavor));
  const SweepResult result =
      sweep_until(c.sweep, c.eta, delta + c.sweep.xi + 2.0 * c.sweep.p_err_step);
  if (result.failure_quota_exceeded()) {
    std::fprintf(stderr, "error: more than 10%% of the relaxed points failed to converge\n");
    return kSolverQuota;
  }
  const BoundReport report = make_report(in, result.curve(c.sweep));
  Sink sink(c.output);
  sink.get() << report.to_text();
  return kOk;
}

int cmd_strategies(CliConfig c) {
  finish_game(c, Variant::QpvStrict, 0.005);
  if (!(c.p_step > 0.0 && c.p_step <= 1.0)) throw ParameterError("p_step must lie in (0, 1]");
  std::vector<double> grid;
  const auto count = static_cast<long>(std::floor(1.0 / c.p_step + 1e-9));
  for (long i = 0; i <= count; ++i) grid.push_back(std::min(1.0, double(i) * c.p_step));
  if (grid.back() < 1.0) grid.push_back(1.0);
  const auto rows = strategy_gap(c.sweep, grid);
  Sink sink(c.output);
  write_strategy_csv(sink.get(), rows);
  double worst = 0.0;
  for (const auto& r : rows)
    if (std::isfinite(r.gap())) worst = std::max(worst, r.gap());
  std::fprintf(stderr, "max gap %.6g\n", worst);
  return kOk;
}

int cmd_export(CliConfig c) {
  finish_game(c, Variant::QpvStrict, 0.005);
  const auto grid = c.sweep.grid();
  const MomentProblem problem = assemble(c.sweep.game(grid.front()), c.sweep.effective_level());
  Sink sink(c.output);
  write_sdpa(to_sdpa(problem), sink.get());
  return kOk;
}

int cmd_dump_bases(CliConfig c) {
  const MeasurementFamily family = c.sweep.family();
  Sink sink(c.output);
  auto& out = sink.get();
  out << "x,theta,phi,bloch_x,bloch_y,bloch_z\n";
  char buf[200];
  for (std::size_t x = 0; x < family.size(); ++x) {
    const Eigen::Vector3d r = bloch_vector(family.basis(x).ket0);
    const double theta = std::acos(std::clamp(r.z(), -1.0, 1.0));
    double phi = std::atan2(r.y(), r.x());
    if (phi < 0.0) phi += 2.0 * M_PI;
    std::snprintf(buf, sizeof buf, "%zu,%.6g,%.6g,%.6g,%.6g,%.6g\n", x, theta, phi, r.x(), r.y(),
                  r.z());
    out << buf;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Loss-tolerant monogamy-of-entanglement game bounds"};
  app.require_subcommand(1);
  Options o;
  app.add_option("-c,--config", o.config_path, "flat JSON config file")->check(CLI::ExistingFile);

  auto* sweep = app.add_subcommand("sweep", "p_ans upper bounds over a p_err grid (CSV)");
  game_flags(sweep, o);
  grid_flags(sweep, o);

  auto* pwin = app.add_subcommand("pwin", "bisect for the p_err where p_ans reaches 1");
  game_flags(pwin, o);

  auto* bounds = app.add_subcommand("bounds", "entanglement bound report at one eta");
  game_flags(bounds, o);
  grid_flags(bounds, o);
  flag<int>(bounds, o, "-n", "n", "classical string length");
  flag<int>(bounds, o, "-q", "q", "attacker qubits per side");
  flag<double>(bounds, o, "--eta", "eta", "response rate");
  flag<double>(bounds, o, "--delta", "delta", "performance margin");
  flag<double>(bounds, o, "--beta", "beta", "override the flavor's beta");
  flag<std::string>(bounds, o, "--flavor", "flavor", "bb84 or m_basis");
  flag<bool>(bounds, o, "--integer-k", "integer_k", "round k up in the counting margin");

  auto* strategies = app.add_subcommand("strategies", "mixed-strategy curve against the SDP");
  game_flags(strategies, o);
  flag<double>(strategies, o, "--p-step", "p_step", "mixing-weight step");

  auto* exporter = app.add_subcommand("export-sdpa", "write one instance in SDPA sparse format");
  game_flags(exporter, o);
  grid_flags(exporter, o);

  auto* dump = app.add_subcommand("dump-bases", "list the referee's bases");
  flag<int>(dump, o, "--m-theta", "m_theta", "polar discretization");
  flag<int>(dump, o, "--m-phi", "m_phi", "azimuthal discretization");
  flag<std::string>(dump, o, "-o,--output", "output", "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    CliConfig c = resolve(o);
    if (*sweep) return cmd_sweep(c);
    if (*pwin) return cmd_pwin(c);
    if (*bounds) return cmd_bounds(c);
    if (*strategies) return cmd_strategies(c);
    if (*exporter) return cmd_export(c);
    if (*dump) return cmd_dump_bases(c);
  } catch (const ParameterError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const InfeasibleParameters& e) {
    std::fprintf(stderr, "infeasible parameters: %s\n", e.what());
    return kConfigError;
  } catch (const OutOfRange& e) {
    std::fprintf(stderr, "out of range: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kSolverQuota;
  }
  return kOk;
}
