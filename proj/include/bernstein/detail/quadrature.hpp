#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace bernstein::detail {

// 7-point Gauss-Legendre nodes/weights on [-1, 1]; exact through degree 13.
inline constexpr std::array<double, 7> kGL7Nodes = {
    -0.9491079123427585245262, -0.7415311855993944398639,
    -0.4058451513773971669066, 0.0,
    0.4058451513773971669066,  0.7415311855993944398639,
    0.9491079123427585245262};
inline constexpr std::array<double, 7> kGL7Weights = {
    0.1294849661688696932706, 0.2797053914892766679015,
    0.3818300505051189449504, 0.4179591836734693877551,
    0.3818300505051189449504, 0.2797053914892766679015,
    0.1294849661688696932706};

// 16-point Gauss-Legendre on [-1, 1].
inline constexpr std::array<double, 16> kGL16Nodes = {
    -0.9894009349916499325962, -0.9445750230732325760780,
    -0.8656312023878317438805, -0.7554044083550030338951,
    -0.6178762444026437484467, -0.4580167776572273863424,
    -0.2816035507792589132304, -0.0950125098376374401853,
    0.0950125098376374401853,  0.2816035507792589132304,
    0.4580167776572273863424,  0.6178762444026437484467,
    0.7554044083550030338951,  0.8656312023878317438805,
    0.9445750230732325760780,  0.9894009349916499325962};
inline constexpr std::array<double, 16> kGL16Weights = {
    0.0271524594117540948518, 0.0622535239386478928628,
    0.0951585116824927848099, 0.1246289712555338720525,
    0.1495959888165767320815, 0.1691565193950025381893,
    0.1826034150449235888667, 0.1894506104550684962854,
    0.1894506104550684962854, 0.1826034150449235888667,
    0.1691565193950025381893, 0.1495959888165767320815,
    0.1246289712555338720525, 0.0951585116824927848099,
    0.0622535239386478928628, 0.0271524594117540948518};

template <class F>
double gauss7(const F& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < 7; ++i) {
    sum += kGL7Weights[i] * f(mid + half * kGL7Nodes[i]);
  }
  return half * sum;
}

template <class F>
double gauss16(const F& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < 16; ++i) {
    sum += kGL16Weights[i] * f(mid + half * kGL16Nodes[i]);
  }
  return half * sum;
}

namespace impl {
template <class F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa,
                            double fm, double fb, double whole, double tol,
                            int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace impl

// Adaptive Simpson; tol is an absolute tolerance on the result.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol,
                        int max_depth = 40) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return impl::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Cumulative integral of f over a fixed node partition. cum[i] holds the
// integral from nodes.front() to nodes[i], each panel by 7-point Gauss.
// eval(x) completes the partial panel, so the result is smooth in x.
class CumulativeIntegral {
 public:
  CumulativeIntegral() = default;
  CumulativeIntegral(std::vector<double> nodes, std::function<double(double)> f)
      : nodes_(std::move(nodes)), f_(std::move(f)) {
    cum_.resize(nodes_.size(), 0.0);
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
      cum_[i] = cum_[i - 1] + gauss7(f_, nodes_[i - 1], nodes_[i]);
    }
  }

  double eval(double x) const {
    if (x <= nodes_.front()) return 0.0;
    if (x >= nodes_.back()) return cum_.back();
    const std::size_t k = panel_of(x);
    return cum_[k] + gauss7(f_, nodes_[k], x);
  }

  double total() const { return cum_.back(); }
  double domain_end() const { return nodes_.back(); }

 private:
  std::size_t panel_of(double x) const {
    std::size_t lo = 0, hi = nodes_.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (nodes_[mid] <= x ? lo : hi) = mid;
    }
    return lo;
  }
  std::vector<double> nodes_;
  std::function<double(double)> f_;
  std::vector<double> cum_;
};

// Brent root bracketing on [a, b] with f(a), f(b) of opposite sign.
template <class F>
double brent(const F& f, double a, double b, double rel_tol, int max_iter = 200) {
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  double c = a, fc = fa, d = b - a, e = d;
  for (int it = 0; it < max_iter; ++it) {
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * rel_tol * std::abs(b) + 1e-300;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
    fb = f(b);
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
  }
  return b;
}

}  // namespace bernstein::detail
