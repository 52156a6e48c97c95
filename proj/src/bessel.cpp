#include "stochacc/bessel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace stochacc {

namespace {

constexpr int kMaxOrder = 200;
constexpr double kMaxArgument = 1000.0;

void check_range(int n, double x) {
  if (n < 0 || n > kMaxOrder || !(x >= 0.0) || x > kMaxArgument) {
    std::ostringstream os;
    os << "bessel_j: argument out of range (order " << n << ", x " << x
       << "; need 0 <= order <= " << kMaxOrder << ", 0 <= x <= " << kMaxArgument << ")";
    throw std::domain_error(os.str());
  }
}

// Miller's backward recurrence J_{k-1} = (2k/x) J_k - J_{k+1}, normalized with
// J_0 + 2 sum_k J_{2k} = 1.
std::vector<double> miller(int n_max, double x) {
  std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  const double top = std::max(static_cast<double>(n_max), x);
  int start = static_cast<int>(top + 20.0 + std::sqrt(160.0 * (top + 1.0)));
  start += start % 2;
  const double two_over_x = 2.0 / x;
  double next = 0.0;    // J_{k+1}
  double cur = 1e-300;  // J_k
  double norm = 0.0;
  for (int k = start; k >= 1; --k) {
    const double prev = k * two_over_x * cur - next;
    next = cur;
    cur = prev;  // now J_{k-1}
    if (std::abs(cur) > 1e250) {
      cur *= 1e-250;
      next *= 1e-250;
      norm *= 1e-250;
      for (double& v : out) v *= 1e-250;
    }
    if (k - 1 <= n_max) out[static_cast<std::size_t>(k - 1)] = cur;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * cur;
  }
  norm += cur;  // J_0
  for (double& v : out) v /= norm;
  return out;
}

}  // namespace

std::vector<double> bessel_j_sequence(int n_max, double x) {
  check_range(n_max, x);
  return miller(n_max, x);
}

double bessel_j(int n, double x) {
  check_range(n, x);
  return miller(n, x)[static_cast<std::size_t>(n)];
}

double bessel_j_prime(int n, double x) {
  check_range(n, x);
  const std::vector<double> j = miller(n + 1, x);
  if (n == 0) return -j[1];
  return 0.5 * (j[static_cast<std::size_t>(n) - 1] - j[static_cast<std::size_t>(n) + 1]);
}

}  // namespace stochacc
