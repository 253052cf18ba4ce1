#pragma once

namespace stiefel {

/// log Phi(x) for the standard normal CDF, stable far into the lower tail.
double log_normal_cdf(double x);

/// d/dx log Phi(x) = phi(x) / Phi(x) (the inverse Mills ratio at -x).
double log_normal_cdf_grad(double x);

/// log of the N(mean, sd^2) density at x.
double log_normal_pdf(double x, double mean, double sd);

}  // namespace stiefel
