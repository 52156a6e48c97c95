#pragma once

#include <vector>

namespace stochacc {

/// Integer-order Bessel functions of the first kind for 0 <= n <= 200 and
/// 0 <= x <= 1000 (std::domain_error outside).
double bessel_j(int n, double x);

/// J'_n(x) = (J_{n-1}(x) - J_{n+1}(x)) / 2, with J'_0 = -J_1.
double bessel_j_prime(int n, double x);

/// J_0(x) .. J_{n_max}(x) from one backward recurrence.
std::vector<double> bessel_j_sequence(int n_max, double x);

}  // namespace stochacc
