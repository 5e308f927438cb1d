#include "sdjls/estimators.hpp"

#include <cmath>
#include <limits>

#include "sdjls/numlin.hpp"

namespace sdjls {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxDepth = 40;
constexpr int kMinDepth = 3;

template <typename F>
double simpson_step(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) * (fa + 4.0 * flm + fm) / 6.0;
  const double right = (b - m) * (fm + 4.0 * frm + fb) / 6.0;
  const double delta = left + right - whole;
  if (depth >= kMaxDepth || (depth >= kMinDepth && std::abs(delta) <= 15.0 * tol)) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

struct Moments {
  double mean = 0.0;
  double std_error = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  CompensatedSum s;
  for (double x : v) s.add(x);
  m.mean = s.value() / static_cast<double>(v.size());
  if (v.size() < 2) return m;
  CompensatedSum ss;
  for (double x : v) ss.add((x - m.mean) * (x - m.mean));
  const double var = ss.value() / static_cast<double>(v.size() - 1);
  m.std_error = std::sqrt(var / static_cast<double>(v.size()));
  return m;
}

}  // namespace

void CompensatedSum::add(double v) {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v)) {
    comp_ += (sum_ - t) + v;
  } else {
    comp_ += (v - t) + sum_;
  }
  sum_ = t;
}

double flow_energy(const Matrix& A, const Vector& x, double T, double rel_tol) {
  if (!(T > 0.0)) return 0.0;
  const auto f = [&](double s) { return expm_apply(A, s, x).squaredNorm(); };
  const double fa = f(0.0);
  const double fm = f(0.5 * T);
  const double fb = f(T);
  const double whole = T * (fa + 4.0 * fm + fb) / 6.0;
  const double tol = rel_tol * std::max(std::abs(whole), std::numeric_limits<double>::min());
  return simpson_step(f, 0.0, T, fa, fm, fb, whole, tol, 0);
}

double path_energy(const FlowSet& flows, const Trajectory& trajectory, double rel_tol) {
  if (trajectory.diverged) return kInf;
  CompensatedSum sum;
  for (const auto& seg : trajectory.segments) {
    sum.add(flow_energy(flows.A(seg.mode), seg.x_start, seg.t_end - seg.t_start, rel_tol));
  }
  return sum.value();
}

EnergyEstimate estimate_energy(const SdjlsModel& model, std::span<const Matrix> gains, double t_final,
                               int n_paths, std::uint64_t seed, const MonteCarloOptions& opts) {
  if (n_paths < 1) throw Error("n_paths must be >= 1");
  const FlowSet flows(model, gains, opts.sim.exit.h_scan);
  SimOptions sim = opts.sim;
  sim.sample_dt = 0.0;
  sim.sample_times.clear();
  const auto energies = run_indexed(n_paths, opts.threads, [&](int p) {
    const Trajectory traj = simulate_path(flows, t_final, derive_seed(seed, p), sim);
    double e = path_energy(flows, traj, opts.rel_tol);
    if (!std::isfinite(e)) e = kInf;
    return e;
  });

  EnergyEstimate est;
  est.n_paths = n_paths;
  std::vector<double> finite;
  for (double e : energies) {
    if (std::isfinite(e)) {
      finite.push_back(e);
    } else {
      ++est.divergent_paths;
    }
  }
  const Moments m = moments(finite);
  est.mean_convergent = finite.empty() ? std::numeric_limits<double>::quiet_NaN() : m.mean;
  est.mean = est.divergent_paths > 0 ? kInf : m.mean;
  est.std_error = est.divergent_paths > 0 ? kInf : m.std_error;
  return est;
}

LyapunovDecay estimate_lyapunov_decay(const SdjlsModel& model, std::span<const Matrix> gains,
                                      const std::vector<Matrix>& P, const std::vector<double>& t_grid,
                                      int n_paths, std::uint64_t seed, const MonteCarloOptions& opts) {
  if (n_paths < 1) throw Error("n_paths must be >= 1");
  if (static_cast<int>(P.size()) != model.num_modes()) {
    throw DimensionMismatchError("estimate_lyapunov_decay: one P per mode required");
  }
  if (t_grid.empty()) throw Error("estimate_lyapunov_decay: empty time grid");
  std::vector<double> grid = t_grid;
  std::sort(grid.begin(), grid.end());
  const double t_final = grid.back();

  const FlowSet flows(model, gains, opts.sim.exit.h_scan);
  SimOptions sim = opts.sim;
  sim.sample_times = grid;
  sim.max_jumps = -1;

  const auto values = run_indexed(n_paths, opts.threads, [&](int p) {
    const Trajectory traj = simulate_path(flows, t_final, derive_seed(seed, p), sim);
    std::vector<double> v(grid.size(), kInf);
    std::size_t k = 0;
    for (const auto& seg : traj.segments) {
      for (const auto& s : seg.samples) {
        while (k < grid.size() && grid[k] < s.t) ++k;
        if (k < grid.size()) v[k] = s.x.dot(P[seg.mode] * s.x);
      }
    }
    return v;
  });

  LyapunovDecay out;
  const Vector& x0 = model.x0();
  out.v0 = x0.dot(P[model.initial_mode()] * x0);
  for (const auto& v : values) {
    if (std::any_of(v.begin(), v.end(), [](double x) { return !std::isfinite(x); })) ++out.divergent_paths;
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    std::vector<double> column;
    bool infinite = false;
    for (const auto& v : values) {
      if (!std::isfinite(v[k])) infinite = true;
      column.push_back(v[k]);
    }
    const Moments m = infinite ? Moments{kInf, kInf} : moments(column);
    out.points.push_back({grid[k], m.mean, m.std_error});
  }
  return out;
}

}  // namespace sdjls
