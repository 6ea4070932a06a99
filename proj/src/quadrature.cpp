#include "twophase/quadrature.hpp"

#include <numbers>

namespace twophase::quad {

namespace {

GaussLegendre8 make_rule() {
  using ld = long double;
  constexpr std::size_t n = GaussLegendre8::kSize;
  std::array<ld, n> x{};
  std::array<ld, n> w{};
  // Newton iteration on P_n starting from the Chebyshev-like guess.
  for (std::size_t i = 0; i < n; ++i) {
    ld z = std::cos(std::numbers::pi_v<ld> * (static_cast<ld>(i) + 0.75L) /
                    (static_cast<ld>(n) + 0.5L));
    ld dp = 0;
    for (int it = 0; it < 100; ++it) {
      ld p0 = 1, p1 = z;
      for (std::size_t k = 2; k <= n; ++k) {
        const ld pk = ((2.0L * k - 1.0L) * z * p1 - (k - 1.0L) * p0) / static_cast<ld>(k);
        p0 = p1;
        p1 = pk;
      }
      dp = static_cast<ld>(n) * (z * p1 - p0) / (z * z - 1.0L);
      const ld dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-19L) break;
    }
    x[i] = z;
    w[i] = 2.0L / ((1.0L - z * z) * dp * dp);
  }

  GaussLegendre8 rule;
  std::array<ld, n> t{};
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = 0.5L * (1.0L - x[i]);  // ascending on [0, 1]
    rule.node[i] = static_cast<double>(t[i]);
    rule.weight[i] = static_cast<double>(0.5L * w[i]);
  }

  // Lagrange basis coefficients: l_j(t) = sum_k c[j][k] t^k.
  for (std::size_t j = 0; j < n; ++j) {
    std::array<ld, n> coef{};
    coef[0] = 1;
    std::size_t deg = 0;
    ld denom = 1;
    for (std::size_t m = 0; m < n; ++m) {
      if (m == j) continue;
      for (std::size_t k = deg + 2; k-- > 0;) {
        const ld shifted = k > 0 ? coef[k - 1] : 0.0L;
        coef[k] = shifted - t[m] * coef[k];
      }
      ++deg;
      denom *= t[j] - t[m];
    }
    for (std::size_t i = 0; i < n; ++i) {
      ld acc = 0;
      ld power = t[i];
      for (std::size_t k = 0; k < n; ++k) {
        acc += coef[k] / static_cast<ld>(k + 1) * power;
        power *= t[i];
      }
      rule.running[i][j] = static_cast<double>(acc / denom);
    }
  }
  return rule;
}

}  // namespace

const GaussLegendre8& gauss_legendre8() {
  static const GaussLegendre8 rule = make_rule();
  return rule;
}

}  // namespace twophase::quad
