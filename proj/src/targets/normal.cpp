#include "stiefel/normal.hpp"

#include <cmath>
#include <numbers>

namespace stiefel {
namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2 pi))
constexpr double kTailStart = -10.0;
constexpr int kTailTerms = 16;

// log of 1 - 1/x^2 + 3/x^4 - 15/x^6 + ... (Mills ratio series), x <= -10.
double tail_series_log(double x) {
  const double inv2 = 1.0 / (x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n <= kTailTerms; ++n) {
    term *= -(2.0 * n - 1.0) * inv2;
    sum += term;
  }
  return std::log(sum);
}

}  // namespace

double log_normal_cdf(double x) {
  if (x < kTailStart) return -0.5 * x * x - std::log(-x) - kLogSqrt2Pi + tail_series_log(x);
  if (x <= 0.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
}

double log_normal_cdf_grad(double x) {
  const double log_pdf = -0.5 * x * x - kLogSqrt2Pi;
  return std::exp(log_pdf - log_normal_cdf(x));
}

double log_normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - kLogSqrt2Pi;
}

}  // namespace stiefel
