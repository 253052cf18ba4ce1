#include <algorithm>
#include <cctype>
#include <string>

#include "stiefel/errors.hpp"
#include "stiefel/param.hpp"
#include "tapes.hpp"

namespace stiefel {

std::string_view kind_name(Kind kind) {
  switch (kind) {
    case Kind::Polar: return "polar";
    case Kind::Householder: return "householder";
    case Kind::Cayley: return "cayley";
    case Kind::Givens: return "givens";
  }
  return "unknown";
}

std::string_view kind_label(Kind kind) {
  switch (kind) {
    case Kind::Polar: return "Polar";
    case Kind::Householder: return "Householder";
    case Kind::Cayley: return "Cayley";
    case Kind::Givens: return "Givens";
  }
  return "Unknown";
}

Kind parse_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (Kind k : kAllKinds)
    if (kind_name(k) == lower) return k;
  throw PreconditionError("unknown parameterization '" + std::string(name) +
                          "' (expected polar, householder, cayley or givens)");
}

void ParamSpec::validate() const {
  if (K < 1 || K > J) {
    throw PreconditionError("ParamSpec: need 1 <= K <= J, got J=" + std::to_string(J) + " K=" + std::to_string(K));
  }
  if (kind == Kind::Cayley && K == J) {
    throw PreconditionError("ParamSpec: the Cayley parameterization is not available for square frames (J=K=" +
                            std::to_string(J) + ")");
  }
}

std::size_t stiefel_dimension(std::size_t J, std::size_t K) { return J * K - K * (K + 1) / 2; }

ParamCounts param_count(const ParamSpec& spec) {
  spec.validate();
  const std::size_t J = spec.J;
  const std::size_t K = spec.K;
  switch (spec.kind) {
    case Kind::Polar: return {J * K, J * K};
    case Kind::Householder: return {J * K - K * (K - 1) / 2, J * K - K * (K - 1) / 2};
    case Kind::Cayley: return {K * (K - 1) / 2 + K * (J - K), K * (K - 1) / 2 + K * (J - K)};
    case Kind::Givens: {
      const std::size_t angles = stiefel_dimension(J, K);
      return {angles, 2 * angles};
    }
  }
  return {};
}

std::size_t phi_length(const ParamSpec& spec) { return param_count(spec).phi_length; }

namespace detail {

void require_phi_length(const ParamSpec& spec, std::span<const double> phi) {
  const std::size_t expected = phi_length(spec);
  if (phi.size() != expected) {
    throw PreconditionError(std::string(kind_name(spec.kind)) + ": phi has length " + std::to_string(phi.size()) +
                            ", expected " + std::to_string(expected) + " for J=" + std::to_string(spec.J) +
                            " K=" + std::to_string(spec.K));
  }
}

}  // namespace detail

std::unique_ptr<MapTape> record(const ParamSpec& spec, std::span<const double> phi, const ParamOptions& options) {
  spec.validate();
  detail::require_phi_length(spec, phi);
  switch (spec.kind) {
    case Kind::Polar: return detail::record_polar(spec, phi);
    case Kind::Householder: return detail::record_householder(spec, phi);
    case Kind::Cayley: return detail::record_cayley(spec, phi, options);
    case Kind::Givens: return detail::record_givens(spec, phi, options);
  }
  throw PreconditionError("record: unknown parameterization");
}

MapResult evaluate(const ParamSpec& spec, std::span<const double> phi, const ParamOptions& options) {
  return record(spec, phi, options)->result();
}

std::vector<double> pullback(const ParamSpec& spec, std::span<const double> phi, const Matrix& upsilon_bar,
                             double adjust_weight, const ParamOptions& options) {
  auto tape = record(spec, phi, options);
  if (upsilon_bar.rows() != spec.J || upsilon_bar.cols() != spec.K) {
    throw PreconditionError("pullback: upsilon_bar must be J x K");
  }
  std::vector<double> grad(phi.size(), 0.0);
  tape->pullback(upsilon_bar, adjust_weight, grad);
  return grad;
}

MapResult polar_eval(std::span<const double> phi, const ParamSpec& spec) {
  ParamSpec s = spec;
  s.kind = Kind::Polar;
  return evaluate(s, phi);
}

MapResult householder_eval(std::span<const double> phi, const ParamSpec& spec) {
  ParamSpec s = spec;
  s.kind = Kind::Householder;
  return evaluate(s, phi);
}

MapResult cayley_eval(std::span<const double> phi, const ParamSpec& spec, const ParamOptions& options) {
  ParamSpec s = spec;
  s.kind = Kind::Cayley;
  return evaluate(s, phi, options);
}

MapResult givens_eval(std::span<const double> phi, const ParamSpec& spec, const ParamOptions& options) {
  ParamSpec s = spec;
  s.kind = Kind::Givens;
  return evaluate(s, phi, options);
}

}  // namespace stiefel
