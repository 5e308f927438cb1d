#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sdjls/model.hpp"
#include "sdjls/rng.hpp"

namespace sdjls {

enum class EventKind { ModeJump, RegionCross };

const char* to_string(EventKind kind);

/// A mode jump (from/to are modes) or a first exit from the current region
/// (from/to are regions). Indices are 0-based.
struct Event {
  double time = 0.0;
  EventKind kind = EventKind::ModeJump;
  int from = 0;
  int to = 0;
  Vector x;
};

struct Sample {
  double t = 0.0;
  Vector x;
};

/// Maximal interval on which both the mode and the region are constant.
struct Segment {
  double t_start = 0.0;
  double t_end = 0.0;
  int mode = 0;
  int region = 0;
  Vector x_start;
  std::vector<Sample> samples;
};

struct Trajectory {
  std::vector<Segment> segments;
  std::vector<Event> events;
  Vector x_final;
  double t_final = 0.0;  // time actually reached (earlier than requested on divergence)
  int mode_final = 0;
  int region_final = 0;
  bool diverged = false;
};

struct ExitOptions {
  double h_scan = 1e-3;
  double tol_bisect = 1e-10;
  double overflow_norm = 1e150;
};

enum class ExitStatus { Exit, NoExit, Overflow };

struct ExitResult {
  ExitStatus status = ExitStatus::NoExit;
  double time = 0.0;    // crossing time (Exit) or blow-up time (Overflow)
  int new_region = -1;  // region entered at `time` (Exit only)
};

/// First time in (0, t_max] at which e^{At}x0 leaves `region` of the
/// partition. Scans x'Qx on the grid k*h_scan and bisects the first grid
/// interval that ends outside; the returned time lies within tol_bisect
/// after the true crossing and the state there is already in new_region.
/// Crossings shorter than h_scan and grazing contacts are not detected.
ExitResult first_exit_time(const Matrix& A, const Vector& x0, const RegionPartition& partition,
                           int region, double t_max, const ExitOptions& opts = {});

/// Exponential holding time with rate -lambda_ii; +inf if the rate is zero.
double sample_sojourn(const Matrix& generator, int mode, RngStream& rng);

/// Embedded-chain draw: j != mode with probability lambda_ij / -lambda_ii.
int next_mode(const Matrix& generator, int mode, RngStream& rng);

struct SimOptions {
  ExitOptions exit;
  /// Output grid spacing. Negative: t_final / 1000. Zero: no grid samples.
  double sample_dt = -1.0;
  /// Explicit output times; overrides sample_dt when non-empty.
  std::vector<double> sample_times;
  /// Stop after this many mode jumps (negative: no limit).
  int max_jumps = -1;
};

/// Effective per-mode dynamics and cached scan propagators e^{A h_scan}.
/// Build once and reuse across many paths of the same model.
class FlowSet {
 public:
  /// gains empty: open loop. Otherwise one m x n gain per mode (A + B K).
  FlowSet(const SdjlsModel& model, std::span<const Matrix> gains, double h_scan);

  const SdjlsModel& model() const { return model_; }
  const Matrix& A(int mode) const { return A_[mode]; }
  const Matrix& step(int mode) const { return step_[mode]; }
  double h_scan() const { return h_scan_; }
  /// max over regions and modes of -lambda_ii (the thinning bound).
  double max_exit_rate() const { return max_rate_; }

 private:
  SdjlsModel model_;
  std::vector<Matrix> A_;
  std::vector<Matrix> step_;
  double h_scan_;
  double max_rate_ = 0.0;
};

/// Exact sample path: region exits found by first_exit_time, mode jumps by
/// exponential clocks that are resampled under the new rates at every exit.
Trajectory simulate_path(const SdjlsModel& model, std::span<const Matrix> gains, double t_final,
                         std::uint64_t seed, const SimOptions& opts = {});
Trajectory simulate_path(const FlowSet& flows, double t_final, std::uint64_t seed,
                         const SimOptions& opts = {});

/// Same law via thinning: proposals at the dominating rate max_exit_rate(),
/// accepted with probability -lambda_ii(current region) / max_exit_rate().
Trajectory simulate_path_thinning(const SdjlsModel& model, std::span<const Matrix> gains,
                                  double t_final, std::uint64_t seed, const SimOptions& opts = {});
Trajectory simulate_path_thinning(const FlowSet& flows, double t_final, std::uint64_t seed,
                                  const SimOptions& opts = {});

/// Time of the first ModeJump, or +inf if the path has none.
double first_jump_time(const Trajectory& trajectory);

}  // namespace sdjls
