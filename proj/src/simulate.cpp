#include "sdjls/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sdjls/numlin.hpp"
#include "sdjls/synthesis.hpp"

namespace sdjls {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool outside(const RegionPartition& part, int region, const Vector& x) {
  const double q = part.quadratic(x);
  return q >= part.upper(region) || q < part.lower(region);
}

bool blown_up(const Vector& x, double limit) { return !x.allFinite() || x.norm() > limit; }

// Exact flow; overflow inside the exponential is reported as a non-finite state.
Vector flow(const Matrix& A, double t, const Vector& x) {
  try {
    return expm_apply(A, t, x);
  } catch (const NonFiniteError&) {
    return Vector::Constant(x.size(), kInf);
  }
}

ExitResult scan_exit(const Matrix& A, const Matrix& step, double h, const Vector& x0,
                     const RegionPartition& part, int region, double t_max, const ExitOptions& opts) {
  ExitResult res;
  if (!(t_max > 0.0)) return res;
  if (A.isZero(0.0)) return res;

  if (part.num_regions() == 1) {
    // No boundary to cross; only divergence matters.
    if (blown_up(flow(A, t_max, x0), opts.overflow_norm)) {
      res.status = ExitStatus::Overflow;
      res.time = t_max;
    }
    return res;
  }

  double t_prev = 0.0;
  Vector x = x0;
  for (long k = 1;; ++k) {
    const double grid_t = static_cast<double>(k) * h;
    const bool last = grid_t >= t_max;
    const double t = last ? t_max : grid_t;
    x = last ? flow(A, t, x0) : Vector(step * x);
    if (blown_up(x, opts.overflow_norm)) {
      res.status = ExitStatus::Overflow;
      res.time = t;
      return res;
    }
    if (outside(part, region, x)) {
      // Re-anchor on the exact flow before bisecting; the stepped state may
      // differ from it by rounding right at the boundary.
      Vector hi_x = last ? x : flow(A, t, x0);
      if (outside(part, region, hi_x)) {
        double lo = t_prev;
        double hi = t;
        while (hi - lo > opts.tol_bisect) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          Vector xm = flow(A, mid, x0);
          if (outside(part, region, xm)) {
            hi = mid;
            hi_x = std::move(xm);
          } else {
            lo = mid;
          }
        }
        res.status = ExitStatus::Exit;
        res.time = hi;
        res.new_region = part.region_of(hi_x);
        return res;
      }
      x = hi_x;
    }
    if (last) return res;
    t_prev = t;
  }
}

std::vector<double> output_grid(double t_final, const SimOptions& opts) {
  if (!opts.sample_times.empty()) {
    std::vector<double> g = opts.sample_times;
    std::sort(g.begin(), g.end());
    return g;
  }
  const double dt = opts.sample_dt < 0.0 ? t_final / 1000.0 : opts.sample_dt;
  std::vector<double> g;
  if (dt <= 0.0) return g;
  const auto n = static_cast<long>(std::floor(t_final / dt * (1.0 + 1e-12)));
  for (long k = 0; k <= n; ++k) g.push_back(std::min(t_final, static_cast<double>(k) * dt));
  return g;
}

double exp_draw(double rate, RngStream& rng) { return -std::log(rng.uniform()) / rate; }

class PathBuilder {
 public:
  PathBuilder(const FlowSet& flows, double t_final, const SimOptions& opts)
      : flows_(flows), grid_(output_grid(t_final, opts)) {
    const auto& model = flows.model();
    x_ = model.x0();
    mode_ = model.initial_mode();
    region_ = model.region_of(x_);
    seg_x_ = x_;
  }

  double t() const { return t_; }
  const Vector& x() const { return x_; }
  int mode() const { return mode_; }
  int region() const { return region_; }
  const Matrix& A() const { return flows_.A(mode_); }

  void advance(double dt) {
    x_ = flow(A(), dt, x_);
    t_ += dt;
  }

  void region_cross(int new_region) {
    close_segment(false);
    traj_.events.push_back({t_, EventKind::RegionCross, region_, new_region, x_});
    region_ = new_region;
  }

  void mode_jump(int new_mode) {
    close_segment(false);
    traj_.events.push_back({t_, EventKind::ModeJump, mode_, new_mode, x_});
    mode_ = new_mode;
  }

  Trajectory finish(bool diverged) {
    close_segment(true);
    traj_.x_final = x_;
    traj_.t_final = t_;
    traj_.mode_final = mode_;
    traj_.region_final = region_;
    traj_.diverged = diverged;
    return std::move(traj_);
  }

 private:
  void close_segment(bool final) {
    Segment seg;
    seg.t_start = seg_t_;
    seg.t_end = t_;
    seg.mode = mode_;
    seg.region = region_;
    seg.x_start = seg_x_;
    while (next_ < grid_.size() && (grid_[next_] < t_ || (final && grid_[next_] <= t_))) {
      const double g = grid_[next_++];
      if (g < seg_t_) continue;
      seg.samples.push_back({g, flow(A(), g - seg_t_, seg_x_)});
    }
    traj_.segments.push_back(std::move(seg));
    seg_t_ = t_;
    seg_x_ = x_;
  }

  const FlowSet& flows_;
  std::vector<double> grid_;
  std::size_t next_ = 0;
  Trajectory traj_;
  double t_ = 0.0;
  Vector x_;
  int mode_ = 0;
  int region_ = 0;
  double seg_t_ = 0.0;
  Vector seg_x_;
};

enum class Sampler { Resample, Thinning };

Trajectory run_path(const FlowSet& flows, double t_final, std::uint64_t seed, const SimOptions& opts,
                    Sampler sampler) {
  if (!(t_final > 0.0) || !std::isfinite(t_final)) throw Error("t_final must be positive and finite");
  const auto& model = flows.model();
  const auto& part = model.partition();
  RngStream rng(seed);
  PathBuilder path(flows, t_final, opts);
  const double bound = flows.max_exit_rate();

  auto draw_clock = [&]() {
    if (sampler == Sampler::Thinning) return bound > 0.0 ? path.t() + exp_draw(bound, rng) : kInf;
    return path.t() + sample_sojourn(model.generator(path.region()), path.mode(), rng);
  };

  double clock = draw_clock();
  int jumps = 0;
  while (true) {
    const double horizon = std::min(clock, t_final) - path.t();
    const ExitResult ex = scan_exit(path.A(), flows.step(path.mode()), flows.h_scan(), path.x(), part,
                                    path.region(), horizon, opts.exit);
    if (ex.status == ExitStatus::Overflow) {
      path.advance(ex.time);
      return path.finish(true);
    }
    if (ex.status == ExitStatus::Exit) {
      path.advance(ex.time);
      path.region_cross(ex.new_region);
      // Under thinning the dominating clock is region-independent.
      if (sampler == Sampler::Resample) clock = draw_clock();
      continue;
    }
    if (clock > t_final) {
      path.advance(t_final - path.t());
      return path.finish(false);
    }
    path.advance(clock - path.t());
    const Matrix& gen = model.generator(path.region());
    bool jump = true;
    if (sampler == Sampler::Thinning) jump = rng.uniform() * bound < -gen(path.mode(), path.mode());
    if (jump) {
      path.mode_jump(next_mode(gen, path.mode(), rng));
      if (opts.max_jumps >= 0 && ++jumps >= opts.max_jumps) return path.finish(false);
    }
    clock = draw_clock();
  }
}

}  // namespace

const char* to_string(EventKind kind) {
  return kind == EventKind::ModeJump ? "jump" : "cross";
}

ExitResult first_exit_time(const Matrix& A, const Vector& x0, const RegionPartition& partition,
                           int region, double t_max, const ExitOptions& opts) {
  if (A.rows() != x0.size() || A.cols() != x0.size()) throw DimensionMismatchError("first_exit_time: shape");
  if (!(opts.h_scan > 0.0) || !(opts.tol_bisect > 0.0)) throw Error("first_exit_time: h_scan and tol_bisect must be positive");
  if (region < 0 || region >= partition.num_regions() || partition.region_of(x0) != region) {
    throw Error("first_exit_time: x0 is not in the given region");
  }
  return scan_exit(A, expm(A * opts.h_scan), opts.h_scan, x0, partition, region, t_max, opts);
}

double sample_sojourn(const Matrix& generator, int mode, RngStream& rng) {
  const double rate = -generator(mode, mode);
  if (!(rate > 0.0)) return kInf;
  return exp_draw(rate, rng);
}

int next_mode(const Matrix& generator, int mode, RngStream& rng) {
  const double rate = -generator(mode, mode);
  if (!(rate > 0.0)) throw AbsorbingModeError("next_mode: mode " + std::to_string(mode + 1) + " has no exit rate");
  const double u = rng.uniform() * rate;
  double acc = 0.0;
  int last = -1;
  for (int j = 0; j < generator.cols(); ++j) {
    if (j == mode || generator(mode, j) <= 0.0) continue;
    acc += generator(mode, j);
    last = j;
    if (u < acc) return j;
  }
  return last;  // rounding in the cumulative sum
}

FlowSet::FlowSet(const SdjlsModel& model, std::span<const Matrix> gains, double h_scan)
    : model_(model), h_scan_(h_scan) {
  if (!(h_scan > 0.0)) throw Error("h_scan must be positive");
  if (gains.empty()) {
    for (int i = 0; i < model.num_modes(); ++i) A_.push_back(model.A(i));
  } else {
    if (model.input_dim() == 0) throw NoInputError("gains given for a model without inputs");
    A_ = closed_loop_dynamics(model, std::vector<Matrix>(gains.begin(), gains.end()));
  }
  for (const auto& a : A_) step_.push_back(expm(a * h_scan));
  for (int k = 0; k < model.num_regions(); ++k)
    for (int i = 0; i < model.num_modes(); ++i) max_rate_ = std::max(max_rate_, -model.generator(k)(i, i));
}

Trajectory simulate_path(const FlowSet& flows, double t_final, std::uint64_t seed, const SimOptions& opts) {
  return run_path(flows, t_final, seed, opts, Sampler::Resample);
}

Trajectory simulate_path(const SdjlsModel& model, std::span<const Matrix> gains, double t_final,
                         std::uint64_t seed, const SimOptions& opts) {
  return simulate_path(FlowSet(model, gains, opts.exit.h_scan), t_final, seed, opts);
}

Trajectory simulate_path_thinning(const FlowSet& flows, double t_final, std::uint64_t seed,
                                  const SimOptions& opts) {
  return run_path(flows, t_final, seed, opts, Sampler::Thinning);
}

Trajectory simulate_path_thinning(const SdjlsModel& model, std::span<const Matrix> gains,
                                  double t_final, std::uint64_t seed, const SimOptions& opts) {
  return simulate_path_thinning(FlowSet(model, gains, opts.exit.h_scan), t_final, seed, opts);
}

double first_jump_time(const Trajectory& trajectory) {
  for (const auto& e : trajectory.events)
    if (e.kind == EventKind::ModeJump) return e.time;
  return kInf;
}

}  // namespace sdjls
