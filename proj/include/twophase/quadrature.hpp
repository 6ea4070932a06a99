#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace twophase::quad {

struct Tolerance {
  double relative = 1e-9;
  double absolute_floor = 1e-14;
  int max_depth = 48;
};

namespace detail {

template <class F>
double simpson_step(F& f, double a, double fa, double m, double fm, double b, double fb,
                    double whole, double eps, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, fa, lm, flm, m, fm, left, 0.5 * eps, depth - 1) +
         simpson_step(f, m, fm, rm, frm, b, fb, right, 0.5 * eps, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b].
///
/// The target is max(absolute_floor, relative * |coarse estimate|); the
/// coarse estimate comes from a 9-point composite pass so that an integrand
/// vanishing at the first nodes does not fool the error test.
template <class F>
double adaptive_simpson(F&& f, double a, double b, Tolerance tol = {}) {
  if (a == b) return 0.0;
  if (b < a) return -adaptive_simpson(f, b, a, tol);
  constexpr int kPanels = 4;
  const double h = (b - a) / kPanels;
  std::array<double, 2 * kPanels + 1> fx{};
  for (int i = 0; i <= 2 * kPanels; ++i) fx[i] = f(a + 0.5 * h * i);
  double coarse = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    coarse += h / 6.0 * (fx[2 * p] + 4.0 * fx[2 * p + 1] + fx[2 * p + 2]);
  }
  const double eps =
      std::max(tol.absolute_floor, tol.relative * std::abs(coarse)) / kPanels;
  double total = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    const double pa = a + h * p;
    const double pb = pa + h;
    const double whole = h / 6.0 * (fx[2 * p] + 4.0 * fx[2 * p + 1] + fx[2 * p + 2]);
    total += detail::simpson_step(f, pa, fx[2 * p], 0.5 * (pa + pb), fx[2 * p + 1], pb,
                                  fx[2 * p + 2], whole, eps, tol.max_depth);
  }
  return total;
}

/// Eight-point Gauss-Legendre rule on [0, 1] with its spectral integration
/// matrix: running[i][j] = int_0^{node_i} l_j(t) dt for the Lagrange basis l_j.
struct GaussLegendre8 {
  static constexpr std::size_t kSize = 8;
  std::array<double, kSize> node{};
  std::array<double, kSize> weight{};
  std::array<std::array<double, kSize>, kSize> running{};
};

const GaussLegendre8& gauss_legendre8();

/// Result of integrating over one panel [p, q] with rate function r:
/// potential = int_p^q r, integral = int_p^q exp(-int_p^y r) dy.
struct PanelIntegral {
  double potential = 0.0;
  double integral = 0.0;
};

/// One panel of the nested exponential integral. The inner integral is the
/// running antiderivative of the degree-7 interpolant of r at the nodes.
template <class Rate>
PanelIntegral exp_panel(Rate&& rate, double p, double q) {
  const auto& gl = gauss_legendre8();
  const double h = q - p;
  std::array<double, GaussLegendre8::kSize> r{};
  double potential = 0.0;
  for (std::size_t i = 0; i < GaussLegendre8::kSize; ++i) {
    r[i] = rate(p + h * gl.node[i]);
    potential += gl.weight[i] * r[i];
  }
  double integral = 0.0;
  for (std::size_t i = 0; i < GaussLegendre8::kSize; ++i) {
    double inner = 0.0;
    for (std::size_t j = 0; j < GaussLegendre8::kSize; ++j) inner += gl.running[i][j] * r[j];
    integral += gl.weight[i] * std::exp(-h * inner);
  }
  return {h * potential, h * integral};
}

/// Plain 8-point Gauss-Legendre integral of f over [p, q].
template <class F>
double gauss_panel(F&& f, double p, double q) {
  const auto& gl = gauss_legendre8();
  const double h = q - p;
  double s = 0.0;
  for (std::size_t i = 0; i < GaussLegendre8::kSize; ++i) s += gl.weight[i] * f(p + h * gl.node[i]);
  return h * s;
}

}  // namespace twophase::quad
