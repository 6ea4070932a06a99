#pragma once

namespace twophase::detail {

/// log int_0^h exp(-k s) ds for h >= 0, stable for either sign of k.
double log_exp_integral(double k, double h);

/// log(exp(a) + exp(b)) with -inf as the identity.
double log_add_exp(double a, double b);

}  // namespace twophase::detail
