#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace lidreg {

struct NelderMeadConfig {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  double tolerance = 1e-5;  ///< stop when max f - min f over the simplex drops below this
  int max_evaluations = 200;

  bool valid() const {
    return reflection > 0 && expansion > 1 && contraction > 0 && contraction < 1 && shrink > 0 && shrink < 1 &&
           tolerance >= 0 && max_evaluations >= 1;
  }
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  double initial_value = 0.0;  ///< f(x0)
  int evaluations = 0;
  bool converged = false;
};

/// Minimizes f from x0 with an axis-aligned initial simplex x0 + steps[i] e_i.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<double>& x0, const std::vector<double>& steps,
                                    const NelderMeadConfig& cfg) {
  const std::size_t n = x0.size();
  NelderMeadResult result;
  int evals = 0;
  const auto eval = [&](const std::vector<double>& x) {
    ++evals;
    return f(x);
  };

  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> fv(n + 1);
  fv[0] = eval(x0);
  result.initial_value = fv[0];
  for (std::size_t i = 0; i < n && evals < cfg.max_evaluations; ++i) {
    simplex[i + 1][i] += steps[i];
    fv[i + 1] = eval(simplex[i + 1]);
  }
  std::size_t filled = std::min<std::size_t>(n + 1, static_cast<std::size_t>(evals));

  std::vector<std::size_t> order(n + 1);
  const auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    std::vector<std::vector<double>> s(n + 1);
    std::vector<double> v(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      s[i] = std::move(simplex[order[i]]);
      v[i] = fv[order[i]];
    }
    simplex = std::move(s);
    fv = std::move(v);
  };
  const auto along = [&](const std::vector<double>& c, const std::vector<double>& x, double t) {
    std::vector<double> out(n);
    for (std::size_t d = 0; d < n; ++d) out[d] = c[d] + t * (x[d] - c[d]);
    return out;
  };

  if (filled == n + 1) {
    while (true) {
      sort_simplex();
      if (fv[n] - fv[0] < cfg.tolerance) {
        result.converged = true;
        break;
      }
      if (evals >= cfg.max_evaluations) break;

      std::vector<double> c(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < n; ++d) c[d] += simplex[i][d] / static_cast<double>(n);
      }
      const auto xr = along(c, simplex[n], -cfg.reflection);
      const double fr = eval(xr);
      if (fr < fv[0]) {
        if (evals < cfg.max_evaluations) {
          const auto xe = along(c, simplex[n], -cfg.reflection * cfg.expansion);
          const double fe = eval(xe);
          if (fe < fr) {
            simplex[n] = xe;
            fv[n] = fe;
            continue;
          }
        }
        simplex[n] = xr;
        fv[n] = fr;
        continue;
      }
      if (fr < fv[n - 1]) {
        simplex[n] = xr;
        fv[n] = fr;
        continue;
      }
      if (evals >= cfg.max_evaluations) {
        if (fr < fv[n]) {
          simplex[n] = xr;
          fv[n] = fr;
        }
        break;
      }
      bool contracted = false;
      if (fr < fv[n]) {
        const auto xc = along(c, xr, cfg.contraction);
        const double fc = eval(xc);
        if (fc <= fr) {
          simplex[n] = xc;
          fv[n] = fc;
          contracted = true;
        }
      } else {
        const auto xc = along(c, simplex[n], cfg.contraction);
        const double fc = eval(xc);
        if (fc < fv[n]) {
          simplex[n] = xc;
          fv[n] = fc;
          contracted = true;
        }
      }
      if (contracted) continue;
      for (std::size_t i = 1; i <= n && evals < cfg.max_evaluations; ++i) {
        simplex[i] = along(simplex[0], simplex[i], cfg.shrink);
        fv[i] = eval(simplex[i]);
      }
    }
  }

  const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.begin() + filled) - fv.begin());
  result.x = simplex[best];
  result.value = fv[best];
  result.evaluations = evals;
  return result;
}

}  // namespace lidreg
