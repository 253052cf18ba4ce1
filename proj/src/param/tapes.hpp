#pragma once

#include <memory>
#include <span>

#include "stiefel/param.hpp"

namespace stiefel::detail {

std::unique_ptr<MapTape> record_polar(const ParamSpec& spec, std::span<const double> phi);
std::unique_ptr<MapTape> record_householder(const ParamSpec& spec, std::span<const double> phi);
std::unique_ptr<MapTape> record_cayley(const ParamSpec& spec, std::span<const double> phi, const ParamOptions& options);
std::unique_ptr<MapTape> record_givens(const ParamSpec& spec, std::span<const double> phi, const ParamOptions& options);

void require_phi_length(const ParamSpec& spec, std::span<const double> phi);

inline double sgn(double x) { return x < 0.0 ? -1.0 : 1.0; }

}  // namespace stiefel::detail
