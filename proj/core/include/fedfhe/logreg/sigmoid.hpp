#pragma once

#include <vector>

namespace fedfhe::logreg {

double sigmoid(double x);

// g(x) = 1/2 + c_1 x + c_3 x^3 + ... ; coeffs[k] multiplies x^(2k+1).
struct SigmoidPoly {
  int degree = 3;
  double lo = -8.0;
  double hi = 8.0;
  std::vector<double> coeffs;

  double operator()(double x) const;
  // g(-x) = 1 - g(x), so the reflected polynomial only flips the odd part.
  SigmoidPoly reflected() const;
  // Max |g - sigmoid| on a uniform grid over [lo, hi].
  double max_error(std::size_t points = 10000) const;
};

// Least squares over a uniform grid with the constant term pinned at 1/2.
// Degree must be 3, 5 or 7 and the range symmetric and nonempty.
SigmoidPoly fit_sigmoid_poly(int degree = 3, double lo = -8.0, double hi = 8.0, std::size_t grid = 2001);

}  // namespace fedfhe::logreg
