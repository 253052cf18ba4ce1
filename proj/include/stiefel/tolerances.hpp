#pragma once

namespace stiefel {

// Numerical thresholds shared by the factorizations and the maps built on
// them. Tests read these instead of repeating literals.
struct Tolerances {
  int jacobi_max_sweeps = 60;
  double jacobi_rotation = 1e-14;    // relative off-diagonal size that stops a sweep
  double symmetry = 1e-12;           // |p_ij - p_ji| relative to max |p|
  double solve_pivot = 1e-14;        // pivot relative to ||A||_inf
  double inv_sqrt_ratio = 1e-12;     // smallest / largest eigenvalue
  double polar_rank = 1e-10;         // smallest / largest singular value of the polar input
  double householder_min_norm = 1e-300;
  double orthogonality = 1e-9;       // ||U^T U - I||_F accepted for a mapped frame
};

inline constexpr Tolerances kTolerances{};

}  // namespace stiefel
