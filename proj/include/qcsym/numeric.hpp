#pragma once

// Grids, finite-difference residuals of u_yz - f, a fixed-step RK4
// integrator with Hermite dense output, and characteristic curves.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <future>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "evaluate.hpp"
#include "ratfunc.hpp"

namespace qcsym {

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Closed rectangle [y0, y1] x [z0, z1].
struct Box {
  double y0 = 1, y1 = 2, z0 = 1, z1 = 2;

  static Box parse(const std::string& text) {
    Box b;
    char c1 = 0, c2 = 0, c3 = 0;
    std::istringstream in(text);
    if (!(in >> b.y0 >> c1 >> b.y1 >> c2 >> b.z0 >> c3 >> b.z1) || c1 != ',' || c2 != ',' ||
        c3 != ',' || !(in >> std::ws).eof())
      throw std::invalid_argument("box must be y0,y1,z0,z1: " + text);
    if (!(b.y0 < b.y1 && b.z0 < b.z1)) throw std::invalid_argument("empty box: " + text);
    return b;
  }
};

namespace detail {

// Runs body(i) for i in [0, n) on up to `threads` workers.
template <class F>
void parallel_for(std::size_t n, F&& body, unsigned threads = std::thread::hardware_concurrency()) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::future<void>> jobs;
  for (unsigned t = 0; t < threads; ++t) {
    jobs.push_back(std::async(std::launch::async, [&, t] {
      for (std::size_t i = t; i < n; i += threads) body(i);
    }));
  }
  for (auto& j : jobs) j.get();
}

inline int node_count(double a, double b, double h) {
  return static_cast<int>(std::llround((b - a) / h)) + 1;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Grid2D

struct Grid2D {
  int ny = 0, nz = 0;
  double y0 = 0, z0 = 0, h = 0;
  std::vector<double> values;  // row-major, index i * nz + j

  double y(int i) const { return y0 + i * h; }
  double z(int j) const { return z0 + j * h; }
  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * nz + j]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * nz + j]; }

  void validate() const {
    if (ny < 5 || nz < 5) throw std::invalid_argument("grid needs at least 5 nodes per direction");
    if (!(h > 0)) throw std::invalid_argument("grid step must be positive");
    if (values.size() != static_cast<std::size_t>(ny) * nz)
      throw std::invalid_argument("grid value count does not match its header");
    for (double v : values) {
      if (!std::isfinite(v)) throw std::invalid_argument("grid holds a non-finite value");
    }
  }

  template <class U>
  static Grid2D sample(U&& u, const Box& box, double h) {
    Grid2D g;
    g.ny = detail::node_count(box.y0, box.y1, h);
    g.nz = detail::node_count(box.z0, box.z1, h);
    g.y0 = box.y0;
    g.z0 = box.z0;
    g.h = h;
    g.values.resize(static_cast<std::size_t>(g.ny) * g.nz);
    detail::parallel_for(g.ny, [&](std::size_t i) {
      const int r = static_cast<int>(i);
      for (int j = 0; j < g.nz; ++j) g.at(r, j) = u(g.y(r), g.z(j));
    });
    return g;
  }

  void write(std::ostream& out) const {
    out.precision(17);
    out << ny << ' ' << nz << ' ' << y0 << ' ' << z0 << ' ' << h << '\n';
    for (int i = 0; i < ny; ++i) {
      for (int j = 0; j < nz; ++j) out << (j ? " " : "") << at(i, j);
      out << '\n';
    }
  }

  static Grid2D read(std::istream& in) {
    Grid2D g;
    if (!(in >> g.ny >> g.nz >> g.y0 >> g.z0 >> g.h)) throw std::invalid_argument("bad grid header");
    if (g.ny < 0 || g.nz < 0) throw std::invalid_argument("bad grid header");
    g.values.resize(static_cast<std::size_t>(g.ny) * g.nz);
    for (auto& v : g.values) {
      if (!(in >> v)) throw std::invalid_argument("grid has fewer values than its header states");
    }
    g.validate();
    return g;
  }
};

// ---------------------------------------------------------------------------
// Finite-difference residuals

struct ResidualStats {
  double max_abs = 0;
  double mean = 0;
  std::size_t nodes = 0;
  std::optional<double> slope;  // log2(coarse / fine) when two resolutions are compared
};

/// log2 of the residual ratio between step h and h/2.
inline double convergence_slope(double coarse, double fine) { return std::log2(coarse / fine); }

/// Cross stencil [u(y+h,z+h) - u(y+h,z-h) - u(y-h,z+h) + u(y-h,z-h)] / (4h^2).
template <class U>
double mixed_stencil(U&& u, double y, double z, double h) {
  return (u(y + h, z + h) - u(y + h, z - h) - u(y - h, z + h) + u(y - h, z - h)) / (4 * h * h);
}

/// f must depend on y, z, u only (function symbols substituted).
class RhsFunction {
 public:
  explicit RhsFunction(const Expr& f) : c_(f, {"y", "z", "u"}) {}
  double operator()(double y, double z, double u) const { return c_({y, z, u}); }

 private:
  CompiledExpr c_;
};

/// Residual of a callable u on every node of the box; u is evaluated on the
/// ghost margin h around it.
template <class U>
ResidualStats fd_mixed_residual(U&& u, const Expr& f, const Box& box, double h) {
  const RhsFunction rhs(f);
  const int ny = detail::node_count(box.y0, box.y1, h), nz = detail::node_count(box.z0, box.z1, h);
  std::vector<double> row_max(ny), row_sum(ny);
  detail::parallel_for(ny, [&](std::size_t i) {
    const double y = box.y0 + i * h;
    double m = 0, s = 0;
    for (int j = 0; j < nz; ++j) {
      const double z = box.z0 + j * h;
      const double r = std::abs(mixed_stencil(u, y, z, h) - rhs(y, z, u(y, z)));
      if (!std::isfinite(r)) throw NumericError("non-finite residual");
      m = std::max(m, r);
      s += r;
    }
    row_max[i] = m;
    row_sum[i] = s;
  });
  ResidualStats st;
  st.nodes = static_cast<std::size_t>(ny) * nz;
  for (int i = 0; i < ny; ++i) {
    st.max_abs = std::max(st.max_abs, row_max[i]);
    st.mean += row_sum[i];
  }
  st.mean /= static_cast<double>(st.nodes);
  return st;
}

/// Residual on the interior nodes of a stored grid.
inline ResidualStats fd_mixed_residual(const Grid2D& g, const Expr& f) {
  g.validate();
  const RhsFunction rhs(f);
  ResidualStats st;
  double sum = 0;
  for (int i = 1; i + 1 < g.ny; ++i) {
    for (int j = 1; j + 1 < g.nz; ++j) {
      const double s = (g.at(i + 1, j + 1) - g.at(i + 1, j - 1) - g.at(i - 1, j + 1) +
                        g.at(i - 1, j - 1)) /
                       (4 * g.h * g.h);
      const double r = std::abs(s - rhs(g.y(i), g.z(j), g.at(i, j)));
      if (!std::isfinite(r)) throw NumericError("non-finite residual");
      st.max_abs = std::max(st.max_abs, r);
      sum += r;
      ++st.nodes;
    }
  }
  st.mean = sum / static_cast<double>(st.nodes);
  return st;
}

// ---------------------------------------------------------------------------
// Singularities

/// Denominators of e (after normalization), as a denylist of pole loci.
inline std::vector<Expr> pole_loci(const Expr& e) {
  std::vector<Expr> out;
  const Expr d = denominator(e);
  if (!is_number(d)) out.push_back(d);
  return out;
}

/// First point of [a, b] at which a denominator vanishes or changes sign,
/// scanning `samples` subintervals. `var` is the only free variable.
inline std::optional<double> find_pole(const Expr& den, const std::string& var, double a, double b,
                                       int samples = 4096) {
  const CompiledExpr c(den, {var});
  auto val = [&](double x) -> std::optional<double> {
    try {
      return c({x});
    } catch (const PoleError&) {
      return std::nullopt;
    }
  };
  std::optional<double> prev;
  for (int k = 0; k <= samples; ++k) {
    const double x = a + (b - a) * k / samples;
    auto v = val(x);
    if (!v || std::abs(*v) < 1e-12) return x;
    if (prev && (*prev > 0) != (*v > 0)) return x;
    prev = v;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Reduced ODE integration

class SingularSpan : public NumericError {
 public:
  using NumericError::NumericError;
};

/// phi'' = g(w, phi, phi')
using SecondOrderRhs = std::function<double(double, double, double)>;

/// Piecewise cubic Hermite interpolant of (phi, phi') on uniform nodes.
class DenseSolution {
 public:
  DenseSolution() = default;
  DenseSolution(std::vector<double> w, std::vector<double> phi, std::vector<double> dphi,
                std::vector<double> ddphi)
      : w_(std::move(w)), p_(std::move(phi)), dp_(std::move(dphi)), ddp_(std::move(ddphi)) {}

  double lo() const { return w_.front(); }
  double hi() const { return w_.back(); }
  const std::vector<double>& nodes() const { return w_; }
  const std::vector<double>& values() const { return p_; }

  bool contains(double w) const { return w >= lo() && w <= hi(); }

  /// phi (order 0), phi' (1) or phi'' (2) at w.
  double operator()(double w, int order = 0) const {
    if (!contains(w)) throw std::out_of_range("point outside the interpolant's span");
    auto it = std::upper_bound(w_.begin(), w_.end(), w);
    std::size_t k = it == w_.begin() ? 0 : static_cast<std::size_t>(it - w_.begin()) - 1;
    if (k + 1 >= w_.size()) k = w_.size() - 2;
    const double h = w_[k + 1] - w_[k], t = (w - w_[k]) / h;
    const double p0 = p_[k], p1 = p_[k + 1], m0 = dp_[k] * h, m1 = dp_[k + 1] * h;
    switch (order) {
      case 0:
        return (2 * t * t * t - 3 * t * t + 1) * p0 + (t * t * t - 2 * t * t + t) * m0 +
               (-2 * t * t * t + 3 * t * t) * p1 + (t * t * t - t * t) * m1;
      case 1:
        return ((6 * t * t - 6 * t) * p0 + (3 * t * t - 4 * t + 1) * m0 + (-6 * t * t + 6 * t) * p1 +
                (3 * t * t - 2 * t) * m1) /
               h;
      default:
        return ((12 * t - 6) * p0 + (6 * t - 4) * m0 + (-12 * t + 6) * p1 + (6 * t - 2) * m1) /
               (h * h);
    }
  }

 private:
  std::vector<double> w_, p_, dp_, ddp_;
};

/// Classical RK4 with fixed step from w0 towards both ends of [a, b].
/// Integration across a declared singularity is refused.
inline DenseSolution integrate_reduced_ode(const SecondOrderRhs& g, double a, double b, double w0,
                                           double phi0, double dphi0, double step,
                                           const std::vector<double>& singularities = {}) {
  if (!(a < b) || w0 < a || w0 > b) throw std::invalid_argument("initial point outside the span");
  if (!(step > 0)) throw std::invalid_argument("step must be positive");
  for (double s : singularities) {
    if (s >= a && s <= b)
      throw SingularSpan("span [" + std::to_string(a) + ", " + std::to_string(b) +
                         "] meets a singularity at " + std::to_string(s));
  }
  auto march = [&](double to) {
    std::vector<double> w{w0}, p{phi0}, dp{dphi0};
    const int n = static_cast<int>(std::ceil(std::abs(to - w0) / step - 1e-9));
    const double hs = n ? (to - w0) / n : 0;
    double x = w0, y0 = phi0, y1 = dphi0;
    for (int k = 0; k < n; ++k) {
      const double k1a = y1, k1b = g(x, y0, y1);
      const double k2a = y1 + hs / 2 * k1b, k2b = g(x + hs / 2, y0 + hs / 2 * k1a, y1 + hs / 2 * k1b);
      const double k3a = y1 + hs / 2 * k2b, k3b = g(x + hs / 2, y0 + hs / 2 * k2a, y1 + hs / 2 * k2b);
      const double k4a = y1 + hs * k3b, k4b = g(x + hs, y0 + hs * k3a, y1 + hs * k3b);
      y0 += hs / 6 * (k1a + 2 * k2a + 2 * k3a + k4a);
      y1 += hs / 6 * (k1b + 2 * k2b + 2 * k3b + k4b);
      x = w0 + (k + 1) * hs;
      if (!std::isfinite(y0) || !std::isfinite(y1)) throw NumericError("ODE solution blew up");
      w.push_back(x);
      p.push_back(y0);
      dp.push_back(y1);
    }
    return std::array<std::vector<double>, 3>{w, p, dp};
  };
  auto left = march(a), right = march(b);
  std::vector<double> w, p, dp, ddp;
  for (std::size_t k = left[0].size(); k-- > 1;) {
    w.push_back(left[0][k]);
    p.push_back(left[1][k]);
    dp.push_back(left[2][k]);
  }
  for (std::size_t k = 0; k < right[0].size(); ++k) {
    w.push_back(right[0][k]);
    p.push_back(right[1][k]);
    dp.push_back(right[2][k]);
  }
  if (w.size() < 2) throw std::invalid_argument("span too short for the step");
  for (std::size_t k = 0; k < w.size(); ++k) ddp.push_back(g(w[k], p[k], dp[k]));
  return {std::move(w), std::move(p), std::move(dp), std::move(ddp)};
}

// ---------------------------------------------------------------------------
// Characteristics dz/dy = K(y, z)

struct Curve {
  double seed_y = 0, seed_z = 0;
  std::vector<double> y, z;  // increasing y
  bool truncated = false;
};

/// Integrates dz/dy = K through each seed across [ya, yb] (RK4, fixed step).
/// A curve is cut off where |z| exceeds `bound` or K cannot be evaluated.
inline std::vector<Curve> integrate_characteristics(const Expr& K,
                                                    const std::vector<std::pair<double, double>>& seeds,
                                                    double ya, double yb, double step = 1e-3,
                                                    double bound = 1e6) {
  const CompiledExpr k(K, {"y", "z"});
  std::vector<Curve> out(seeds.size());
  detail::parallel_for(seeds.size(), [&](std::size_t s) {
    Curve& c = out[s];
    c.seed_y = seeds[s].first;
    c.seed_z = seeds[s].second;
    auto march = [&](double to, std::vector<double>& ys, std::vector<double>& zs) {
      const int n = static_cast<int>(std::ceil(std::abs(to - c.seed_y) / step - 1e-9));
      const double hs = n ? (to - c.seed_y) / n : 0;
      double y = c.seed_y, z = c.seed_z;
      try {
        for (int i = 0; i < n; ++i) {
          const double k1 = k({y, z});
          const double k2 = k({y + hs / 2, z + hs / 2 * k1});
          const double k3 = k({y + hs / 2, z + hs / 2 * k2});
          const double k4 = k({y + hs, z + hs * k3});
          z += hs / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
          y = c.seed_y + (i + 1) * hs;
          if (!std::isfinite(z) || std::abs(z) > bound) {
            c.truncated = true;
            return;
          }
          ys.push_back(y);
          zs.push_back(z);
        }
      } catch (const PoleError&) {
        c.truncated = true;
      }
    };
    std::vector<double> ly, lz, ry, rz;
    if (ya < c.seed_y) march(ya, ly, lz);
    if (yb > c.seed_y) march(yb, ry, rz);
    c.y.assign(ly.rbegin(), ly.rend());
    c.z.assign(lz.rbegin(), lz.rend());
    c.y.push_back(c.seed_y);
    c.z.push_back(c.seed_z);
    c.y.insert(c.y.end(), ry.begin(), ry.end());
    c.z.insert(c.z.end(), rz.begin(), rz.end());
  });
  return out;
}

/// max |omega - omega(seed)| / max(1, |omega(seed)|) along a curve.
inline double omega_variation(const Curve& c, const Expr& omega) {
  const CompiledExpr w(omega, {"y", "z"});
  const double ref = w({c.seed_y, c.seed_z});
  double m = 0;
  for (std::size_t i = 0; i < c.y.size(); ++i) m = std::max(m, std::abs(w({c.y[i], c.z[i]}) - ref));
  return m / std::max(1.0, std::abs(ref));
}

}  // namespace qcsym
