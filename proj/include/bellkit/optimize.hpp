#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "bellkit/errors.hpp"
#include "bellkit/parallel.hpp"
#include "bellkit/qstate.hpp"

namespace bellkit {

struct OptimizerConfig {
  int restarts = 64;
  int max_iters = 500;
  double step_tol = 1e-8;
  double value_tol = 1e-6;
  std::uint64_t seed = 20070101;

  void validate() const
  {
    if (restarts < 1 || max_iters < 1 || !(step_tol > 0) || !(value_tol > 0))
      throw ValidationError("optimizer settings must be positive");
  }
};

struct OptimizerResult {
  double value = -1e300;
  std::vector<double> x;
  int best_restart = -1;
  int iterations = 0;  // sweeps used by the winning restart
  bool converged = false;
};

/// Maximizes f over angle vectors by coordinate-wise golden-section sweeps
/// (each coordinate searched over one full period) from seeded random
/// starts. Extra starting points, if given, run before the random ones.
/// Restarts are independent; the winner is the first strictly best one in
/// restart order, so results do not depend on the worker count.
inline OptimizerResult maximize_angles(std::size_t dim, const std::function<double(const std::vector<double> &)> &f,
                                       const OptimizerConfig &cfg, const std::vector<std::vector<double>> &starts = {})
{
  cfg.validate();
  const std::size_t total = starts.size() + static_cast<std::size_t>(cfg.restarts);
  std::vector<OptimizerResult> runs(total);
  CounterRng rng{cfg.seed};
  constexpr double invphi = 0.6180339887498949;

  parallel_for(total, [&](std::size_t r) {
    std::vector<double> x(dim);
    if (r < starts.size()) {
      x = starts[r];
      if (x.size() != dim) throw ValidationError("start point has wrong dimension");
    } else {
      for (std::size_t i = 0; i < dim; ++i) x[i] = 2.0 * pi * rng.uniform((r - starts.size()) * dim + i);
    }
    double fx = f(x);
    int it = 0;
    bool conv = dim == 0;
    for (; it < cfg.max_iters && !conv; ++it) {
      double before = fx;
      double max_move = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double x0 = x[i];
        double a = x0 - pi, b = x0 + pi;
        auto g = [&](double t) {
          x[i] = t;
          return f(x);
        };
        double c = b - invphi * (b - a), d = a + invphi * (b - a);
        double fc = g(c), fd = g(d);
        while (b - a > cfg.step_tol) {
          if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = g(c);
          } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = g(d);
          }
        }
        double t = fc >= fd ? c : d, ft = std::max(fc, fd);
        if (ft > fx) {
          x[i] = t;
          fx = ft;
          max_move = std::max(max_move, std::abs(std::remainder(t - x0, 2 * pi)));
        } else {
          x[i] = x0;
        }
      }
      if (fx - before <= 1e-14 * std::max(1.0, std::abs(fx)) || max_move <= cfg.step_tol) conv = true;
    }
    runs[r] = OptimizerResult{fx, x, static_cast<int>(r), it, conv};
  });

  OptimizerResult best;
  for (const auto &run : runs)
    if (run.value > best.value) best = run;
  return best;
}

/// Rotation Rz(a) Ry(b) Rz(c); its columns are the frame axes e1, e2, e3.
inline Mat3 euler_rotation(double a, double b, double c)
{
  auto rz = [](double t) {
    Mat3 r;
    r << std::cos(t), -std::sin(t), 0, std::sin(t), std::cos(t), 0, 0, 0, 1;
    return r;
  };
  Mat3 ry;
  ry << std::cos(b), 0, std::sin(b), 0, 1, 0, -std::sin(b), 0, std::cos(b);
  return rz(a) * ry * rz(c);
}

}  // namespace bellkit
