#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "sdjls/model.hpp"
#include "sdjls/simulate.hpp"

namespace sdjls {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Evaluates f(i) for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). Results are returned in index order, so any reduction over
/// them is independent of scheduling.
template <typename F>
auto run_indexed(int n, int threads, F&& f) -> std::vector<decltype(f(0))> {
  using R = decltype(f(0));
  std::vector<R> out(static_cast<std::size_t>(std::max(n, 0)));
  if (n <= 0) return out;
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, n);
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&]() {
    for (int i = next++; i < n; i = next++) {
      try {
        out[i] = f(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
  return out;
}

struct MonteCarloOptions {
  int threads = 0;
  SimOptions sim;
  double rel_tol = 1e-8;  // adaptive Simpson tolerance for path energies
};

struct EnergyEstimate {
  double mean = 0.0;       // +inf when any path diverged
  double std_error = 0.0;  // +inf when any path diverged
  double mean_convergent = 0.0;  // NaN when every path diverged
  int n_paths = 0;
  int divergent_paths = 0;
};

/// integral over [0, T] of |e^{A s} x|^2 by adaptive Simpson.
double flow_energy(const Matrix& A, const Vector& x, double T, double rel_tol = 1e-8);

/// integral over the trajectory's time span of |x(t)|^2, segment by segment.
double path_energy(const FlowSet& flows, const Trajectory& trajectory, double rel_tol = 1e-8);

/// Monte Carlo estimate of E[ integral_0^t_final |x(t)|^2 dt ]. Path p uses
/// seed derive_seed(seed, p), so the estimate does not depend on threading.
EnergyEstimate estimate_energy(const SdjlsModel& model, std::span<const Matrix> gains, double t_final,
                               int n_paths, std::uint64_t seed, const MonteCarloOptions& opts = {});

struct DecayPoint {
  double t = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
};

struct LyapunovDecay {
  double v0 = 0.0;  // V(x0, mode0)
  std::vector<DecayPoint> points;
  int divergent_paths = 0;
};

/// Monte Carlo mean of V = x(t)'P_{r(t)}x(t) at each grid time.
LyapunovDecay estimate_lyapunov_decay(const SdjlsModel& model, std::span<const Matrix> gains,
                                      const std::vector<Matrix>& P, const std::vector<double>& t_grid,
                                      int n_paths, std::uint64_t seed,
                                      const MonteCarloOptions& opts = {});

}  // namespace sdjls
