#include "lossmoe/region.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "lossmoe/error.hpp"
#include "lossmoe/strategies.hpp"

namespace lossmoe {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

SolveStatus parse_status(const std::string& text) {
  for (auto s : {SolveStatus::Optimal, SolveStatus::NearOptimal, SolveStatus::Infeasible,
                 SolveStatus::Unbounded, SolveStatus::NumericalLimit}) {
    if (to_string(s) == text) return s;
  }
  throw ValidationError("unknown solver status '" + text + "'");
}

std::string format(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

/// Snap grid values so 0.1 + 3 * 0.002 prints and hashes as 0.106.
double snap(double v) { return std::round(v * 1e12) / 1e12; }

bool same_point(double a, double b) { return std::abs(a - b) <= 1e-12; }

}  // namespace

MeasurementFamily SweepConfig::family() const { return discretize_bases(m_theta, m_phi); }

int SweepConfig::m() const { return m_phi * (m_theta - 1) + 1; }

Level SweepConfig::effective_level() const {
  return level.value_or(m() <= 3 ? Level::L2 : Level::L1AB);
}

std::vector<double> SweepConfig::grid() const {
  if (!p_err_list.empty()) return p_err_list;
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((p_err_stop - p_err_start) / p_err_step + 1e-9));
  for (long i = 0; i <= count; ++i) out.push_back(snap(p_err_start + double(i) * p_err_step));
  return out;
}

GameSpec SweepConfig::game(double p_err) const {
  return GameSpec{family(), variant, p_err, xi, use_prop2};
}

int SweepConfig::effective_workers() const {
  if (workers > 0) return workers;
  if (const char* env = std::getenv("LOSSMOE_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void SweepConfig::validate() const {
  if (m_theta < 2 || m_phi < 1) throw ParameterError("need m_theta >= 2 and m_phi >= 1");
  if (!(xi >= 0.0 && xi <= 1.0)) throw ParameterError("xi must lie in [0, 1]");
  if (variant == Variant::Qkd && m() != 2) {
    throw ParameterError("the QKD game is defined for two bases only");
  }
  if (p_err_list.empty()) {
    if (!(p_err_step > 0.0)) throw ParameterError("p_err_step must be positive");
    if (!(p_err_start >= 0.0 && p_err_stop <= 1.0 && p_err_start <= p_err_stop)) {
      throw ParameterError("p_err grid must satisfy 0 <= start <= stop <= 1");
    }
  } else {
    for (std::size_t i = 0; i < p_err_list.size(); ++i) {
      if (!(p_err_list[i] >= 0.0 && p_err_list[i] <= 1.0)) {
        throw ParameterError("p_err values must lie in [0, 1]");
      }
      if (i > 0 && !(p_err_list[i] > p_err_list[i - 1])) {
        throw ParameterError("p_err_list must be strictly increasing");
      }
    }
  }
  if (!(solver.tol > 0.0) || !(solver.near_tol >= solver.tol) || solver.max_iter < 1) {
    throw ParameterError("solver settings need tol > 0, near_tol >= tol, max_iter >= 1");
  }
  if (!(solver.pad >= 0.0)) throw ParameterError("pad must be nonnegative");
}

std::uint64_t SweepConfig::hash() const {
  std::ostringstream key;
  key.precision(17);
  key << to_string(variant) << '|' << m_theta << '|' << m_phi << '|' << xi << '|'
      << to_string(effective_level()) << '|' << game(0.0).prop2_enabled() << '|' << solver.tol
      << '|' << solver.near_tol << '|' << solver.max_iter << '|' << solver.pad;
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : key.str()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

SecurityCurve SweepResult::curve(const SweepConfig& config) const {
  SecurityCurve c;
  c.level = config.effective_level();
  c.variant = config.variant;
  c.m = config.m();
  c.m_theta = config.m_theta;
  c.m_phi = config.m_phi;
  c.xi = config.xi;
  for (const auto& r : rows) {
    if (converged(r.status) && std::isfinite(r.p_ans_upper)) c.samples.push_back({r.p_err, r.p_ans_upper});
  }
  return c;
}

SweepRow solve_point(const SweepConfig& config, double p_err) {
  SweepRow row;
  row.p_err = p_err;
  const auto start = std::chrono::steady_clock::now();
  const MomentProblem problem = assemble(config.game(p_err), config.effective_level());
  const SolveReport report = solve(problem, config.solver);
  row.status = report.status;
  row.p_ans_upper = kNaN;
  if (converged(report.status)) {
    try {
      row.p_ans_upper = certified_upper(report, config.solver.pad);
    } catch (const ValidationError&) {
      row.status = SolveStatus::NumericalLimit;
    }
  }
  row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t n_threads = std::min<std::size_t>(std::max(1, workers), count);
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

SweepResult run_sweep(const SweepConfig& config, const std::vector<double>& grid) {
  config.validate();
  SweepResult result;
  result.rows.resize(grid.size());
  std::vector<SweepRow> cached;
  if (!config.cache_dir.empty()) cached = load_cache(config.cache_dir, config);
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto hit = std::find_if(cached.begin(), cached.end(),
                            [&](const SweepRow& r) { return same_point(r.p_err, grid[i]); });
    if (hit != cached.end()) {
      result.rows[i] = *hit;
      result.rows[i].p_err = grid[i];
    } else {
      todo.push_back(i);
    }
  }
  parallel_for(todo.size(), config.effective_workers(), [&](std::size_t j) {
    const std::size_t i = todo[j];
    result.rows[i] = solve_point(config, grid[i]);
  });
  if (!config.cache_dir.empty() && !todo.empty()) {
    std::vector<SweepRow> fresh;
    for (auto i : todo) fresh.push_back(result.rows[i]);
    store_cache(config.cache_dir, config, fresh);
  }

  double best = -std::numeric_limits<double>::infinity();
  for (const auto& r : result.rows) {
    if (!converged(r.status) || !std::isfinite(r.p_ans_upper)) {
      ++result.failures;
      continue;
    }
    if (r.p_ans_upper < best - kCurveTolerance && !result.monotonicity_violation) {
      result.monotonicity_violation = r.p_err;
    }
    best = std::max(best, r.p_ans_upper);
  }
  return result;
}

SweepResult run_sweep(const SweepConfig& config) { return run_sweep(config, config.grid()); }

SweepResult sweep_until(const SweepConfig& config, double eta, double min_p_err) {
  config.validate();
  const std::vector<double> grid = config.grid();
  const std::size_t batch = static_cast<std::size_t>(config.effective_workers());
  std::size_t end = 0;
  SweepResult result;
  while (end < grid.size()) {
    end = std::min(grid.size(), end + batch);
    result = run_sweep(config, std::vector<double>(grid.begin(), grid.begin() + end));
    const auto& last = result.rows.back();
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& r : result.rows)
      if (std::isfinite(r.p_ans_upper)) top = std::max(top, r.p_ans_upper);
    if (top >= eta - kCurveTolerance && last.p_err >= min_p_err) break;
  }
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepConfig& config, const SweepResult& result,
                     int digits) {
  out << "p_err,p_ans_upper,level,variant,m,m_theta,m_phi,xi,solver_status\n";
  const std::string meta = to_string(config.effective_level()) + "," +
                           to_string(config.variant) + "," + std::to_string(config.m()) + "," +
                           std::to_string(config.m_theta) + "," + std::to_string(config.m_phi) +
                           "," + format(config.xi, digits);
  for (const auto& r : result.rows) {
    out << format(r.p_err, digits) << ',' << format(r.p_ans_upper, digits) << ',' << meta << ','
        << to_string(r.status) << '\n';
  }
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
  std::vector<SweepRow> rows;
  std::string line;
  if (!std::getline(in, line)) return rows;
  if (line.rfind("p_err,", 0) != 0) throw ValidationError("sweep CSV header missing");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    if (cols.size() != 9) throw ValidationError("sweep CSV row has " + std::to_string(cols.size()) + " columns");
    SweepRow r;
    r.p_err = std::strtod(cols[0].c_str(), nullptr);
    r.p_ans_upper = std::strtod(cols[1].c_str(), nullptr);
    r.status = parse_status(cols[8]);
    rows.push_back(r);
  }
  return rows;
}

std::string cache_path(const std::string& dir, const SweepConfig& config) {
  char name[64];
  std::snprintf(name, sizeof name, "lossmoe-%016llx.csv",
                static_cast<unsigned long long>(config.hash()));
  return (std::filesystem::path(dir) / name).string();
}

std::vector<SweepRow> load_cache(const std::string& dir, const SweepConfig& config) {
  std::ifstream in(cache_path(dir, config));
  if (!in) return {};
  try {
    return read_sweep_csv(in);
  } catch (const ValidationError&) {
    return {};  // unreadable cache entries are recomputed
  }
}

void store_cache(const std::string& dir, const SweepConfig& config,
                 const std::vector<SweepRow>& rows) {
  std::map<double, SweepRow> merged;
  for (const auto& r : load_cache(dir, config)) merged[r.p_err] = r;
  for (const auto& r : rows) {
    if (converged(r.status) && std::isfinite(r.p_ans_upper)) merged[r.p_err] = r;
  }
  SweepResult all;
  for (const auto& [p, r] : merged) all.rows.push_back(r);
  std::filesystem::create_directories(dir);
  const std::string path = cache_path(dir, config);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error("cannot write cache file " + tmp);
    write_sweep_csv(out, config, all, 17);
  }
  std::filesystem::rename(tmp, path);
}

PwinResult find_pwin(const SweepConfig& config, double tol) {
  config.validate();
  PwinResult out;
  out.tomamichel = tomamichel_bound(config.family());
  auto answers = [&](double p_err) {
    ++out.solves;
    const SweepRow r = solve_point(config, p_err);
    if (!converged(r.status) || !std::isfinite(r.p_ans_upper)) {
      char buf[200];
      std::snprintf(buf, sizeof buf,
                    "bisection stalled: solver %s at p_err = %.6g (bracket [%.6g, %.6g])",
                    to_string(r.status).c_str(), p_err, out.bracket_low, out.bracket_high);
      throw Error(buf);
    }
    return r.p_ans_upper >= kPwinAnswerTarget;
  };
  double lo = 0.0;
  double hi = 0.5;
  out.bracket_low = lo;
  out.bracket_high = hi;
  if (answers(lo)) {
    hi = lo;
  } else {
    if (!answers(hi)) {
      hi = 1.0;
      out.bracket_high = hi;
      if (!answers(hi)) throw Error("p_ans stays below 1 - 1e-4 on all of [0, 1]");
    }
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      (answers(mid) ? hi : lo) = mid;
      out.bracket_low = lo;
      out.bracket_high = hi;
    }
  }
  out.bracket_low = lo;
  out.bracket_high = hi;
  out.p_err_star = hi;
  out.p_win = 1.0 - hi;
  return out;
}

std::vector<StrategyRow> strategy_gap(const SweepConfig& config, const std::vector<double>& p_grid) {
  config.validate();
  const auto family = config.family();
  const auto mixed = mixed_curve(family, p_grid);
  std::vector<StrategyRow> rows(mixed.size());
  parallel_for(rows.size(), config.effective_workers(), [&](std::size_t i) {
    StrategyRow& r = rows[i];
    r.p = mixed[i].p;
    r.p_err = mixed[i].p_err;
    r.p_ans_mixed = mixed[i].p_ans;
    const SweepRow s = solve_point(config, std::min(1.0, mixed[i].p_err));
    r.p_ans_sdp = s.p_ans_upper;
    r.status = s.status;
  });
  return rows;
}

void write_strategy_csv(std::ostream& out, const std::vector<StrategyRow>& rows) {
  out << "p,p_err,p_ans_mixed,p_ans_upper,gap,solver_status\n";
  for (const auto& r : rows) {
    out << format(r.p, 6) << ',' << format(r.p_err, 6) << ',' << format(r.p_ans_mixed, 6) << ','
        << format(r.p_ans_sdp, 6) << ',' << format(r.gap(), 6) << ',' << to_string(r.status)
        << '\n';
  }
}

}  // namespace lossmoe
