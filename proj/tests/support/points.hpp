#pragma once

#include <random>
#include <vector>

#include "stiefel/bench/synth.hpp"
#include "stiefel/model.hpp"

namespace stiefel::testing {

inline std::vector<double> flatten(const ModelPoint& p) {
  std::vector<double> out;
  for (const Matrix& m : p.stiefel) out.insert(out.end(), m.data().begin(), m.data().end());
  for (const auto& a : p.aux) out.insert(out.end(), a.begin(), a.end());
  return out;
}

inline ModelPoint unflatten(const ModelPoint& shape, std::span<const double> v) {
  ModelPoint p = shape;
  std::size_t pos = 0;
  for (Matrix& m : p.stiefel)
    for (double& x : m.data()) x = v[pos++];
  for (auto& a : p.aux)
    for (double& x : a) x = v[pos++];
  return p;
}

/// Random interior point: Haar frames, positive blocks in [0.5, 2] (decreasing
/// when ordered), unconstrained blocks standard normal.
inline ModelPoint random_point(const TargetModel& model, std::mt19937_64& rng) {
  ModelPoint p = model.zero_point();
  const auto sb = model.stiefel_blocks();
  for (std::size_t i = 0; i < sb.size(); ++i) p.stiefel[i] = bench::haar_frame(sb[i].J, sb[i].K, rng);
  const auto ab = model.aux_blocks();
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> pos(0.5, 2.0);
  for (std::size_t i = 0; i < ab.size(); ++i) {
    for (double& x : p.aux[i]) x = ab[i].constraint == Constraint::Unconstrained ? z(rng) : pos(rng);
    if (ab[i].constraint == Constraint::PositiveOrdered) std::sort(p.aux[i].begin(), p.aux[i].end(), std::greater<>());
  }
  return p;
}

}  // namespace stiefel::testing
