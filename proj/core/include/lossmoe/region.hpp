#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lossmoe/bounds.hpp"
#include "lossmoe/games.hpp"
#include "lossmoe/sdp.hpp"

namespace lossmoe {

/// One batch experiment: a game family, a hierarchy level and a p_err grid.
struct SweepConfig {
  Variant variant = Variant::QpvStrict;
  int m_theta = 2;
  int m_phi = 1;
  double xi = 0.0;
  std::optional<Level> level;  ///< default: L2 for m <= 3, L1+AB above
  std::optional<bool> use_prop2;
  double p_err_start = 0.0;
  double p_err_stop = 0.16;
  double p_err_step = 0.002;
  std::vector<double> p_err_list;  ///< overrides start/stop/step when set
  int workers = 0;                 ///< 0: LOSSMOE_WORKERS or hardware threads
  SolverSettings solver;
  std::string cache_dir;           ///< empty disables the point cache

  MeasurementFamily family() const;
  int m() const;
  Level effective_level() const;
  std::vector<double> grid() const;
  GameSpec game(double p_err) const;
  int effective_workers() const;
  /// Throws ParameterError on grids outside [0, 1], step <= 0, or bad sizes.
  void validate() const;
  /// FNV-1a over every field that affects a single point's value (the
  /// grid is excluded, so sweeps over different grids share cache entries).
  std::uint64_t hash() const;
};

struct SweepRow {
  double p_err = 0.0;
  double p_ans_upper = 0.0;  ///< certified (value + pad); NaN on failure
  SolveStatus status = SolveStatus::NumericalLimit;
  double wall_time = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  ///< grid order
  std::size_t failures = 0;
  /// First p_err where p_ans drops by more than 1e-6, if any.
  std::optional<double> monotonicity_violation;

  bool failure_quota_exceeded() const { return failures * 10 > rows.size(); }
  /// Converged rows only.
  SecurityCurve curve(const SweepConfig& config) const;
};

/// Certified p_ans upper bound at one p_err.
SweepRow solve_point(const SweepConfig& config, double p_err);

/// Runs fn(i) for i in [0, count) on a bounded pool of threads.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

SweepResult run_sweep(const SweepConfig& config, const std::vector<double>& grid);
SweepResult run_sweep(const SweepConfig& config);

/// Walks the grid from start in step-sized batches until p_ans reaches
/// eta and p_err passes min_p_err (or the grid ends).
SweepResult sweep_until(const SweepConfig& config, double eta, double min_p_err);

/// Columns p_err, p_ans_upper, level, variant, m, m_theta, m_phi, xi,
/// solver_status; numbers with the given significant digits.
void write_sweep_csv(std::ostream& out, const SweepConfig& config, const SweepResult& result,
                     int digits = 6);
/// Reads rows written by write_sweep_csv; metadata columns are ignored.
std::vector<SweepRow> read_sweep_csv(std::istream& in);

/// "<dir>/lossmoe-<hash>.csv".
std::string cache_path(const std::string& dir, const SweepConfig& config);
/// Converged rows stored for this configuration (any grid).
std::vector<SweepRow> load_cache(const std::string& dir, const SweepConfig& config);
/// Merges converged rows into the cache file, keeping it sorted by p_err.
void store_cache(const std::string& dir, const SweepConfig& config,
                 const std::vector<SweepRow>& rows);

struct PwinResult {
  double p_err_star = 0.0;  ///< upper end of the final bracket
  double p_win = 0.0;       ///< 1 - p_err_star
  double bracket_low = 0.0;
  double bracket_high = 0.0;
  double tomamichel = 0.0;
  int solves = 0;
};

inline constexpr double kPwinAnswerTarget = 1.0 - 1e-4;

/// Bisects p_err until the bracket is narrower than tol. The bracket's
/// upper end answers with p_ans >= 1 - 1e-4, the lower end does not.
PwinResult find_pwin(const SweepConfig& config, double tol = 1e-4);

struct StrategyRow {
  double p = 0.0;
  double p_err = 0.0;
  double p_ans_mixed = 0.0;
  double p_ans_sdp = 0.0;
  SolveStatus status = SolveStatus::NumericalLimit;
  double gap() const { return p_ans_sdp - p_ans_mixed; }
};

/// Mixed-strategy curve on the mixing grid with the SDP bound at each
/// matched p_err.
std::vector<StrategyRow> strategy_gap(const SweepConfig& config, const std::vector<double>& p_grid);
void write_strategy_csv(std::ostream& out, const std::vector<StrategyRow>& rows);

}  // namespace lossmoe
