#include "qsceom/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace qsceom {

OptimizerMethod parse_optimizer_method(const std::string& name) {
  if (name == "gradient" || name == "lbfgs" || name == "l-bfgs") return OptimizerMethod::gradient;
  if (name == "derivative-free" || name == "derivative_free" || name == "powell")
    return OptimizerMethod::derivative_free;
  throw std::invalid_argument("unknown optimizer method '" + name + "'");
}

std::string to_string(OptimizerMethod m) {
  return m == OptimizerMethod::gradient ? "gradient" : "derivative-free";
}

namespace {

struct BudgetExhausted {};

// Wraps the objective with evaluation counting and best-point tracking.
class Tracker {
 public:
  Tracker(const Objective& f, const ObjectiveWithGradient& g, const OptimizeOptions& opt, std::size_t n)
      : f_(f), g_(g), opt_(opt), best_x_(n) {}

  double value(std::span<const double> x) {
    if (evals_ >= opt_.max_evaluations) throw BudgetExhausted{};
    ++evals_;
    const double v = f_(x);
    record(x, v);
    return v;
  }

  double value_and_gradient(std::span<const double> x, std::span<double> grad) {
    if (g_) {
      if (evals_ >= opt_.max_evaluations) throw BudgetExhausted{};
      ++evals_;
      const double v = g_(x, grad);
      record(x, v);
      return v;
    }
    const double v = value(x);
    std::vector<double> xp(x.begin(), x.end());
    for (std::size_t i = 0; i < xp.size(); ++i) {
      const double xi = xp[i];
      xp[i] = xi + opt_.fd_step;
      const double fp = value(xp);
      xp[i] = xi - opt_.fd_step;
      const double fm = value(xp);
      xp[i] = xi;
      grad[i] = (fp - fm) / (2.0 * opt_.fd_step);
    }
    return v;
  }

  int evaluations() const { return evals_; }
  const std::vector<double>& best_x() const { return best_x_; }
  double best_value() const { return best_; }

 private:
  void record(std::span<const double> x, double v) {
    if (v < best_ || !has_best_) {
      best_ = v;
      has_best_ = true;
      std::copy(x.begin(), x.end(), best_x_.begin());
    }
  }

  const Objective& f_;
  const ObjectiveWithGradient& g_;
  const OptimizeOptions& opt_;
  int evals_ = 0;
  bool has_best_ = false;
  double best_ = std::numeric_limits<double>::infinity();
  std::vector<double> best_x_;
};

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs(const Vec& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// Strong-Wolfe line search (bracketing + zoom with cubic interpolation).
struct LinePoint {
  double step;
  double f;
  double dphi;
  Vec x;
  Vec g;
};

LinePoint eval_along(Tracker& t, const Vec& x0, const Vec& dir, double step) {
  LinePoint p{step, 0.0, 0.0, x0, Vec(x0.size())};
  for (std::size_t i = 0; i < x0.size(); ++i) p.x[i] += step * dir[i];
  p.f = t.value_and_gradient(p.x, p.g);
  p.dphi = dot(p.g, dir);
  return p;
}

double cubic_min(const LinePoint& a, const LinePoint& b) {
  const double d1 = a.dphi + b.dphi - 3.0 * (a.f - b.f) / (a.step - b.step);
  const double disc = d1 * d1 - a.dphi * b.dphi;
  if (disc < 0.0) return 0.5 * (a.step + b.step);
  const double d2 = std::copysign(std::sqrt(disc), b.step - a.step);
  const double s = b.step - (b.step - a.step) * (b.dphi + d2 - d1) / (b.dphi - a.dphi + 2.0 * d2);
  const double lo = std::min(a.step, b.step), hi = std::max(a.step, b.step);
  if (!std::isfinite(s) || s <= lo + 0.1 * (hi - lo) || s >= hi - 0.1 * (hi - lo)) return 0.5 * (a.step + b.step);
  return s;
}

LinePoint wolfe_search(Tracker& t, const Vec& x0, double f0, const Vec& g0, const Vec& dir, double step0) {
  constexpr double c1 = 1e-4, c2 = 0.9;
  const double dphi0 = dot(g0, dir);
  LinePoint prev{0.0, f0, dphi0, x0, g0};
  double step = step0;
  for (int it = 0; it < 30; ++it) {
    LinePoint cur = eval_along(t, x0, dir, step);
    if (cur.f > f0 + c1 * step * dphi0 || (it > 0 && cur.f >= prev.f)) {
      LinePoint lo = prev, hi = cur;
      for (int z = 0; z < 30; ++z) {
        const double s = cubic_min(lo, hi);
        LinePoint mid = eval_along(t, x0, dir, s);
        if (mid.f > f0 + c1 * s * dphi0 || mid.f >= lo.f) {
          hi = mid;
        } else {
          if (std::abs(mid.dphi) <= -c2 * dphi0) return mid;
          if (mid.dphi * (hi.step - lo.step) >= 0.0) hi = lo;
          lo = mid;
        }
        if (std::abs(hi.step - lo.step) < 1e-16 * std::max(1.0, std::abs(lo.step))) break;
      }
      return lo;
    }
    if (std::abs(cur.dphi) <= -c2 * dphi0) return cur;
    if (cur.dphi >= 0.0) {
      LinePoint lo = cur, hi = prev;
      for (int z = 0; z < 30; ++z) {
        const double s = cubic_min(lo, hi);
        LinePoint mid = eval_along(t, x0, dir, s);
        if (mid.f > f0 + c1 * s * dphi0 || mid.f >= lo.f) {
          hi = mid;
        } else {
          if (std::abs(mid.dphi) <= -c2 * dphi0) return mid;
          if (mid.dphi * (hi.step - lo.step) >= 0.0) hi = lo;
          lo = mid;
        }
        if (std::abs(hi.step - lo.step) < 1e-16 * std::max(1.0, std::abs(lo.step))) break;
      }
      return lo;
    }
    prev = std::move(cur);
    step *= 2.0;
  }
  return prev;
}

OptimizeStatus run_lbfgs(Tracker& t, Vec x, const OptimizeOptions& opt) {
  const std::size_t n = x.size();
  constexpr std::size_t memory = 10;
  Vec g(n);
  double f = t.value_and_gradient(x, g);
  std::deque<std::pair<Vec, Vec>> hist;
  for (int iter = 0; iter < 10000; ++iter) {
    if (max_abs(g) < opt.gradient_tolerance) return OptimizeStatus::converged;
    // two-loop recursion
    Vec q = g;
    std::vector<double> alphas(hist.size());
    for (std::size_t k = hist.size(); k-- > 0;) {
      const auto& [s, y] = hist[k];
      alphas[k] = dot(s, q) / dot(y, s);
      for (std::size_t i = 0; i < n; ++i) q[i] -= alphas[k] * y[i];
    }
    if (!hist.empty()) {
      const auto& [s, y] = hist.back();
      const double gamma = dot(s, y) / dot(y, y);
      for (double& v : q) v *= gamma;
    }
    for (std::size_t k = 0; k < hist.size(); ++k) {
      const auto& [s, y] = hist[k];
      const double beta = dot(y, q) / dot(y, s);
      for (std::size_t i = 0; i < n; ++i) q[i] += s[i] * (alphas[k] - beta);
    }
    Vec dir(n);
    for (std::size_t i = 0; i < n; ++i) dir[i] = -q[i];
    if (dot(dir, g) >= 0.0) {
      hist.clear();
      for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
    }
    double step = 1.0;
    if (hist.empty()) step = std::min(1.0, 0.1 / std::max(max_abs(g), 1e-300));
    LinePoint next = wolfe_search(t, x, f, g, dir, step);
    if (!(next.f < f)) {
      if (hist.empty()) return max_abs(g) < 1e3 * opt.gradient_tolerance ? OptimizeStatus::converged
                                                                       : OptimizeStatus::failed;
      hist.clear();
      continue;
    }
    Vec s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = next.x[i] - x[i];
      y[i] = next.g[i] - g[i];
    }
    const double rel = (f - next.f) / std::max({std::abs(f), std::abs(next.f), 1e-300});
    x = std::move(next.x);
    g = std::move(next.g);
    const double fprev = f;
    f = next.f;
    if (dot(s, y) > 1e-16 * dot(y, y)) {
      hist.emplace_back(std::move(s), std::move(y));
      if (hist.size() > memory) hist.pop_front();
    }
    if (rel < opt.value_tolerance && max_abs(g) < 1e3 * opt.gradient_tolerance) return OptimizeStatus::converged;
    (void)fprev;
  }
  return OptimizeStatus::failed;
}

// Brent minimization of phi(s) = f(x + s d) after golden-section bracketing.
double line_minimize(Tracker& t, Vec& x, const Vec& dir, double fx, double step) {
  auto phi = [&](double s) {
    Vec p = x;
    for (std::size_t i = 0; i < x.size(); ++i) p[i] += s * dir[i];
    return t.value(p);
  };
  constexpr double gold = 1.618033988749895;
  double a = 0.0, b = step, fa = fx, fb = phi(b);
  if (fb > fa) {
    std::swap(a, b);
    std::swap(fa, fb);
  }
  double c = b + gold * (b - a), fc = phi(c);
  for (int it = 0; it < 60 && fc < fb; ++it) {
    a = b;
    fa = fb;
    b = c;
    fb = fc;
    c = b + gold * (b - a);
    fc = phi(c);
  }
  // Brent on [min(a,c), max(a,c)] with best point b
  double lo = std::min(a, c), hi = std::max(a, c);
  double xb = b, w = b, v = b, fxb = fb, fw = fb, fv = fb;
  double d = 0.0, e = 0.0;
  constexpr double cgold = 0.3819660112501051;
  for (int it = 0; it < 100; ++it) {
    const double xm = 0.5 * (lo + hi);
    const double tol1 = 1e-9 * std::abs(xb) + 1e-12;
    const double tol2 = 2.0 * tol1;
    if (std::abs(xb - xm) <= tol2 - 0.5 * (hi - lo)) break;
    bool golden = true;
    if (std::abs(e) > tol1) {
      double r = (xb - w) * (fxb - fv);
      double q = (xb - v) * (fxb - fw);
      double p = (xb - v) * q - (xb - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double etemp = e;
      e = d;
      if (!(std::abs(p) >= std::abs(0.5 * q * etemp) || p <= q * (lo - xb) || p >= q * (hi - xb))) {
        d = p / q;
        const double u = xb + d;
        if (u - lo < tol2 || hi - u < tol2) d = std::copysign(tol1, xm - xb);
        golden = false;
      }
    }
    if (golden) {
      e = (xb >= xm) ? lo - xb : hi - xb;
      d = cgold * e;
    }
    const double u = std::abs(d) >= tol1 ? xb + d : xb + std::copysign(tol1, d);
    const double fu = phi(u);
    if (fu <= fxb) {
      if (u >= xb) lo = xb; else hi = xb;
      v = w; fv = fw;
      w = xb; fw = fxb;
      xb = u; fxb = fu;
    } else {
      if (u < xb) lo = u; else hi = u;
      if (fu <= fw || w == xb) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == xb || v == w) {
        v = u; fv = fu;
      }
    }
  }
  if (fxb < fx) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += xb * dir[i];
    return fxb;
  }
  return fx;
}

OptimizeStatus run_powell(Tracker& t, Vec x, const OptimizeOptions& opt) {
  const std::size_t n = x.size();
  std::vector<Vec> dirs(n, Vec(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) dirs[i][i] = 1.0;
  double f = t.value(x);
  for (int iter = 0; iter < 10000; ++iter) {
    const Vec x_start = x;
    const double f_start = f;
    std::size_t big_idx = 0;
    double big_drop = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double before = f;
      f = line_minimize(t, x, dirs[i], f, opt.initial_step);
      if (before - f > big_drop) {
        big_drop = before - f;
        big_idx = i;
      }
    }
    if (2.0 * (f_start - f) <= opt.value_tolerance * (std::abs(f_start) + std::abs(f)) + 1e-300)
      return OptimizeStatus::converged;
    Vec new_dir(n), extrap(n);
    for (std::size_t i = 0; i < n; ++i) {
      new_dir[i] = x[i] - x_start[i];
      extrap[i] = 2.0 * x[i] - x_start[i];
    }
    const double fe = t.value(extrap);
    if (fe < f_start) {
      const double tt = 2.0 * (f_start - 2.0 * f + fe) * std::pow(f_start - f - big_drop, 2) -
                        big_drop * std::pow(f_start - fe, 2);
      if (tt < 0.0) {
        f = line_minimize(t, x, new_dir, f, 1.0);
        dirs[big_idx] = dirs.back();
        dirs.back() = new_dir;
      }
    }
  }
  return OptimizeStatus::failed;
}

}  // namespace

OptimizeResult optimize(const Objective& f, std::vector<double> initial, const OptimizeOptions& options,
                        const ObjectiveWithGradient& grad) {
  OptimizeResult res;
  if (initial.empty()) {
    res.x = {};
    res.value = f(res.x);
    res.status = OptimizeStatus::converged;
    res.evaluations = 1;
    return res;
  }
  Tracker tracker(f, grad, options, initial.size());
  try {
    res.status = options.method == OptimizerMethod::gradient ? run_lbfgs(tracker, initial, options)
                                                             : run_powell(tracker, initial, options);
  } catch (const BudgetExhausted&) {
    res.status = OptimizeStatus::budget_exhausted;
  }
  res.x = tracker.best_x();
  res.value = tracker.best_value();
  res.evaluations = tracker.evaluations();
  return res;
}

}  // namespace qsceom
