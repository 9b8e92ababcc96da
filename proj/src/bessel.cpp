#include "sqg/bessel.hpp"

#include <cmath>
#include <string>

#include "sqg/error.hpp"

namespace sqg {

double bessel_j(int n, double x) { return std::cyl_bessel_j(static_cast<double>(n), x); }

double bessel_j_derivative(int n, double x) {
  if (n == 0) return -bessel_j(1, x);
  return 0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x));
}

double bessel_j_over_x(int n, double x) {
  if (n == 0) {
    if (x == 0.0) throw Error(ErrorKind::numeric, "J_0(x)/x is singular at x = 0");
    return bessel_j(0, x) / x;
  }
  // J_n(x)/x = (J_{n-1}(x) + J_{n+1}(x)) / (2n)
  return (bessel_j(n - 1, x) + bessel_j(n + 1, x)) / (2.0 * n);
}

namespace {

double bisect(int n, double lo, double hi) {
  double flo = bessel_j(n, lo);
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return mid;
    const double fmid = bessel_j(n, mid);
    if (fmid == 0.0) return mid;
    if ((fmid < 0) == (flo < 0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  throw Error(ErrorKind::numeric, "Bessel root bisection did not converge for order " +
                                      std::to_string(n) + " in [" + std::to_string(lo) + ", " +
                                      std::to_string(hi) + "]");
}

}  // namespace

std::vector<double> bessel_j_zeros_below(int n, double upper) {
  if (n < 0) throw Error(ErrorKind::config, "bessel_j_zeros_below: negative order");
  std::vector<double> zeros;
  // j_{n,1} > n, and consecutive zeros are more than pi/2 apart.
  constexpr double step = 0.05;
  double a = std::max(0.5 * n, step);
  double fa = bessel_j(n, a);
  while (a < upper) {
    const double b = a + step;
    const double fb = bessel_j(n, b);
    if (fb == 0.0 || (fa < 0) != (fb < 0)) {
      const double z = fb == 0.0 ? b : bisect(n, a, b);
      if (z <= upper) zeros.push_back(z);
    }
    a = b;
    fa = fb;
  }
  return zeros;
}

std::vector<double> bessel_j_zeros(int n, int count) {
  double upper = n + 3.5 * count + 4.0;
  for (;;) {
    auto z = bessel_j_zeros_below(n, upper);
    if (static_cast<int>(z.size()) >= count) {
      z.resize(count);
      return z;
    }
    upper *= 1.5;
  }
}

}  // namespace sqg
