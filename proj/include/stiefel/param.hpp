#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stiefel/matrix.hpp"

namespace stiefel {

enum class Kind { Polar, Householder, Cayley, Givens };

inline constexpr Kind kAllKinds[] = {Kind::Polar, Kind::Householder, Kind::Cayley, Kind::Givens};

std::string_view kind_name(Kind kind);  // "polar", "householder", ...
std::string_view kind_label(Kind kind);  // "Polar", "Householder", ...
/// Case-insensitive parse; throws PreconditionError on unknown names.
Kind parse_kind(std::string_view name);

/// How the Cayley log-Jacobian is evaluated during sampling. Both give the
/// same value; Gram follows the Kronecker-structured Gram determinant and
/// costs O((JK)^3), ClosedForm uses c(J,K) - (J-1) log det(I - B + A^T A).
enum class CayleyJacobian { ClosedForm, Gram };

struct ParamOptions {
  CayleyJacobian cayley_jacobian = CayleyJacobian::ClosedForm;
  /// Subtract log r per Givens angle pair (polar area element). Off by default:
  /// the r-density alone is what the construction specifies.
  bool givens_area_correction = false;
};

struct ParamSpec {
  Kind kind = Kind::Polar;
  std::size_t J = 0;
  std::size_t K = 0;

  /// Throws PreconditionError unless 1 <= K <= J (and K < J for Cayley).
  void validate() const;
  friend bool operator==(const ParamSpec&, const ParamSpec&) = default;
};

struct ParamCounts {
  std::size_t essential = 0;   // coordinates the map is written in
  std::size_t phi_length = 0;  // length of the unconstrained vector
};

/// Polar: JK. Householder: JK - K(K-1)/2. Cayley: K(K-1)/2 + K(J-K).
/// Givens: one angle per (k, j), k < j, j < J, k < K, i.e. JK - K(K+1)/2
/// angles, each carried by a coordinate pair, so phi_length = 2 * essential.
ParamCounts param_count(const ParamSpec& spec);
std::size_t phi_length(const ParamSpec& spec);
/// Dimension of the Stiefel manifold, JK - K(K+1)/2.
std::size_t stiefel_dimension(std::size_t J, std::size_t K);

struct MapResult {
  Matrix upsilon;     // J x K, orthonormal columns
  double log_adjust;  // natural log; -inf marks a rejected region
};

/// Forward evaluation that keeps what the reverse pass needs.
class MapTape {
 public:
  virtual ~MapTape() = default;
  const MapResult& result() const noexcept { return result_; }
  /// grad += d/dphi [ <upsilon_bar, Upsilon(phi)> + adjust_weight * log_adjust(phi) ]
  virtual void pullback(const Matrix& upsilon_bar, double adjust_weight, std::span<double> grad) const = 0;

 protected:
  MapResult result_;
};

/// Evaluate the map at phi and record the intermediates for pullback.
/// Domain failures raise DomainError / SingularityError.
std::unique_ptr<MapTape> record(const ParamSpec& spec, std::span<const double> phi,
                                const ParamOptions& options = {});

MapResult evaluate(const ParamSpec& spec, std::span<const double> phi, const ParamOptions& options = {});

/// grad_phi [ <upsilon_bar, Upsilon(phi)> + adjust_weight * log_adjust(phi) ]
std::vector<double> pullback(const ParamSpec& spec, std::span<const double> phi, const Matrix& upsilon_bar,
                             double adjust_weight, const ParamOptions& options = {});

MapResult polar_eval(std::span<const double> phi, const ParamSpec& spec);
MapResult householder_eval(std::span<const double> phi, const ParamSpec& spec);
MapResult cayley_eval(std::span<const double> phi, const ParamSpec& spec, const ParamOptions& options = {});
MapResult givens_eval(std::span<const double> phi, const ParamSpec& spec, const ParamOptions& options = {});

// --- Cayley building blocks --------------------------------------------------

/// Skew-symmetric X = [[B, -A^T], [A, 0]] from phi = (b, vec(A^T)); b holds
/// the strictly lower triangle of B in column-major order.
Matrix cayley_skew(std::span<const double> phi, std::size_t J, std::size_t K);

/// Additive constant of the Cayley log-Jacobian: (3/4) K(K-1) log 2 + K(J-K) log 2.
double cayley_log_jacobian_constant(std::size_t J, std::size_t K);

/// Reference evaluation of 1/2 logdet(4 Gamma^T (G1 kron G2) Gamma) with every
/// factor materialized (D_K, K_{J,J}, Theta_1, Theta_2, the J^2 x J^2
/// Kronecker product). Intended for small J in tests.
double cayley_log_jacobian_kronecker(std::span<const double> phi, std::size_t J, std::size_t K);

/// Upsilon = (I + X)(I - X)^{-1} I_{J x K} with a dense J x J solve.
Matrix cayley_upsilon_dense(std::span<const double> phi, std::size_t J, std::size_t K);

/// K^2 x K(K-1)/2 matrix with D_K b = vec(B).
Matrix skew_duplication_matrix(std::size_t K);

/// Permutation p with (K_{m,n} vec(A))[i] = vec(A)[p[i]] for A m x n, i.e.
/// K_{m,n} vec(A) = vec(A^T).
std::vector<std::size_t> commutation_permutation(std::size_t m, std::size_t n);

// --- Givens building blocks --------------------------------------------------

struct GivensIndex {
  std::size_t k;
  std::size_t j;
};

/// Angle index set in product order: (0,1), (0,2), ..., (0,J-1), (1,2), ...
std::vector<GivensIndex> givens_indices(std::size_t J, std::size_t K);

/// Power of cos(theta_{k,j}) in the volume element: j - k - 1.
int givens_cos_exponent(std::size_t k, std::size_t j);

/// Upsilon from the angles directly (no r coordinates).
Matrix givens_upsilon_from_angles(std::span<const double> theta, std::size_t J, std::size_t K);

/// sum (j - k - 1) log |cos theta_{k,j}|; -inf if a positive power meets cos = 0.
double givens_log_jacobian(std::span<const double> theta, std::size_t J, std::size_t K);

struct GivensAngles {
  std::vector<double> theta;
  std::vector<double> r;
};

/// Recover (theta, r) from interleaved pairs (phi_flat, phi_sharp).
GivensAngles givens_angles(std::span<const double> phi, std::size_t J, std::size_t K);

inline constexpr double kGivensRadiusMean = 1.0;
inline constexpr double kGivensRadiusSd = 0.1;

}  // namespace stiefel
