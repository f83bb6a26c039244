#include "fedfhe/logreg/sigmoid.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "fedfhe/common/error.hpp"

namespace fedfhe::logreg {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double SigmoidPoly::operator()(double x) const {
  const double x2 = x * x;
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x2 + *it;
  return 0.5 + acc * x;
}

SigmoidPoly SigmoidPoly::reflected() const {
  SigmoidPoly r = *this;
  for (auto& c : r.coeffs) c = -c;
  return r;
}

double SigmoidPoly::max_error(std::size_t points) const {
  double worst = 0.0;
  for (std::size_t i = 0; i <= points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points);
    worst = std::max(worst, std::abs((*this)(x) - sigmoid(x)));
  }
  return worst;
}

SigmoidPoly fit_sigmoid_poly(int degree, double lo, double hi, std::size_t grid) {
  require(degree == 3 || degree == 5 || degree == 7, ErrorCode::invalid_argument, "sigmoid degree must be 3, 5 or 7");
  require(lo < hi && std::abs(lo + hi) < 1e-12, ErrorCode::invalid_argument, "sigmoid range must be symmetric");
  require(grid >= 16, ErrorCode::invalid_argument, "fit grid too small");
  const int terms = (degree + 1) / 2;
  Eigen::MatrixXd A(grid, terms);
  Eigen::VectorXd b(grid);
  for (std::size_t i = 0; i < grid; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid - 1);
    double p = x;
    for (int k = 0; k < terms; ++k, p *= x * x) A(static_cast<Eigen::Index>(i), k) = p;
    b(static_cast<Eigen::Index>(i)) = sigmoid(x) - 0.5;
  }
  Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  SigmoidPoly g{degree, lo, hi, {}};
  for (int k = 0; k < terms; ++k) g.coeffs.push_back(c(k));
  return g;
}

}  // namespace fedfhe::logreg
