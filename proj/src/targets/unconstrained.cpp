#include "stiefel/unconstrained.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "stiefel/errors.hpp"

namespace stiefel {

Foi parse_foi(std::string_view name) {
  if (name == "all") return Foi::All;
  if (name == "stiefel") return Foi::StiefelOnly;
  throw PreconditionError("unknown function-of-interest set '" + std::string(name) + "' (expected all or stiefel)");
}

std::string_view foi_name(Foi foi) { return foi == Foi::All ? "all" : "stiefel"; }

double aux_forward(Constraint c, std::span<const double> z, std::span<double> x) {
  switch (c) {
    case Constraint::Unconstrained:
      std::copy(z.begin(), z.end(), x.begin());
      return 0.0;
    case Constraint::Positive: {
      double logj = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) {
        x[i] = std::exp(z[i]);
        logj += z[i];
      }
      return logj;
    }
    case Constraint::PositiveOrdered: {
      // x_i = sum_{k >= i} exp(z_k), so x is strictly decreasing
      double logj = 0.0;
      double acc = 0.0;
      for (std::size_t i = z.size(); i-- > 0;) {
        acc += std::exp(z[i]);
        x[i] = acc;
        logj += z[i];
      }
      return logj;
    }
  }
  return 0.0;
}

void aux_backward(Constraint c, std::span<const double> z, std::span<const double> xbar, std::span<double> zbar) {
  switch (c) {
    case Constraint::Unconstrained:
      for (std::size_t i = 0; i < z.size(); ++i) zbar[i] += xbar[i];
      return;
    case Constraint::Positive:
      for (std::size_t i = 0; i < z.size(); ++i) zbar[i] += xbar[i] * std::exp(z[i]) + 1.0;
      return;
    case Constraint::PositiveOrdered: {
      double prefix = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) {
        prefix += xbar[i];
        zbar[i] += std::exp(z[i]) * prefix + 1.0;
      }
      return;
    }
  }
}

std::vector<double> aux_inverse(Constraint c, std::span<const double> x) {
  std::vector<double> z(x.begin(), x.end());
  if (c == Constraint::Unconstrained) return z;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double next = (c == Constraint::PositiveOrdered && i + 1 < x.size()) ? x[i + 1] : 0.0;
    const double step = x[i] - next;
    if (!(step > 0.0)) throw DomainError("aux_inverse: value outside the constrained support");
    z[i] = std::log(step);
  }
  return z;
}

UnconstrainedTarget::UnconstrainedTarget(std::shared_ptr<const TargetModel> model, std::vector<ParamSpec> specs,
                                         ParamOptions options)
    : model_(std::move(model)), specs_(std::move(specs)), options_(options) {
  if (!model_) throw PreconditionError("UnconstrainedTarget: null model");
  const auto blocks = model_->stiefel_blocks();
  if (blocks.size() != specs_.size()) {
    throw PreconditionError("UnconstrainedTarget: " + model_->name() + " has " + std::to_string(blocks.size()) +
                            " frame blocks but " + std::to_string(specs_.size()) + " parameterizations were given");
  }
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (specs_[i].J != blocks[i].J || specs_[i].K != blocks[i].K) {
      throw PreconditionError("UnconstrainedTarget: parameterization shape does not match block '" + blocks[i].name +
                              "'");
    }
    specs_[i].validate();
    stiefel_offsets_.push_back(dim_);
    dim_ += phi_length(specs_[i]);
  }
  aux_ = model_->aux_blocks();
  for (const auto& b : aux_) {
    aux_offsets_.push_back(dim_);
    dim_ += b.size;
  }
  if (dim_ == 0) throw PreconditionError("UnconstrainedTarget: model has no parameters");
}

double UnconstrainedTarget::log_density(std::span<const double> q, std::span<double> grad) const {
  if (q.size() != dim_) throw PreconditionError("UnconstrainedTarget: q has the wrong length");
  const bool want_grad = !grad.empty();
  if (want_grad && grad.size() != dim_) throw PreconditionError("UnconstrainedTarget: grad has the wrong length");
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  try {
    ModelPoint x;
    std::vector<std::unique_ptr<MapTape>> tapes;
    double total = 0.0;
    for (std::size_t i = 0; i < specs_.size(); ++i) {
      auto phi = q.subspan(stiefel_offsets_[i], phi_length(specs_[i]));
      tapes.push_back(record(specs_[i], phi, options_));
      const MapResult& res = tapes.back()->result();
      if (!std::isfinite(res.log_adjust)) return kNegInf;
      total += res.log_adjust;
      x.stiefel.push_back(res.upsilon);
    }
    for (std::size_t i = 0; i < aux_.size(); ++i) {
      std::vector<double> v(aux_[i].size);
      total += aux_forward(aux_[i].constraint, q.subspan(aux_offsets_[i], aux_[i].size), v);
      x.aux.push_back(std::move(v));
    }
    ModelPoint g;
    total += model_->log_density(x, want_grad ? &g : nullptr);
    if (!want_grad) return total;

    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < specs_.size(); ++i) {
      tapes[i]->pullback(g.stiefel[i], 1.0, grad.subspan(stiefel_offsets_[i], phi_length(specs_[i])));
    }
    for (std::size_t i = 0; i < aux_.size(); ++i) {
      aux_backward(aux_[i].constraint, q.subspan(aux_offsets_[i], aux_[i].size), g.aux[i],
                   grad.subspan(aux_offsets_[i], aux_[i].size));
    }
    return total;
  } catch (const DomainError&) {
    return kNegInf;
  } catch (const SingularityError&) {
    return kNegInf;
  }
}

ModelPoint UnconstrainedTarget::constrained(std::span<const double> q) const {
  if (q.size() != dim_) throw PreconditionError("UnconstrainedTarget: q has the wrong length");
  ModelPoint x;
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    x.stiefel.push_back(evaluate(specs_[i], q.subspan(stiefel_offsets_[i], phi_length(specs_[i])), options_).upsilon);
  }
  for (std::size_t i = 0; i < aux_.size(); ++i) {
    std::vector<double> v(aux_[i].size);
    aux_forward(aux_[i].constraint, q.subspan(aux_offsets_[i], aux_[i].size), v);
    x.aux.push_back(std::move(v));
  }
  return x;
}

std::size_t UnconstrainedTarget::monitored_dim(Foi foi) const {
  std::size_t n = 0;
  for (const auto& s : specs_) n += s.J * s.K;
  if (foi == Foi::All)
    for (const auto& b : aux_) n += b.size;
  return n;
}

std::vector<double> UnconstrainedTarget::monitored(std::span<const double> q, Foi foi) const {
  if (q.size() != dim_) throw PreconditionError("UnconstrainedTarget: q has the wrong length");
  std::vector<double> out;
  out.reserve(monitored_dim(foi));
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    const auto v =
        evaluate(specs_[i], q.subspan(stiefel_offsets_[i], phi_length(specs_[i])), options_).upsilon.vec();
    out.insert(out.end(), v.begin(), v.end());
  }
  if (foi == Foi::All) {
    const auto tail = q.subspan(aux_offsets_.empty() ? dim_ : aux_offsets_.front());
    out.insert(out.end(), tail.begin(), tail.end());
  }
  return out;
}

std::unique_ptr<UnconstrainedTarget> build_unconstrained(std::shared_ptr<const TargetModel> model, Kind kind,
                                                         ParamOptions options) {
  if (!model) throw PreconditionError("build_unconstrained: null model");
  std::vector<ParamSpec> specs;
  for (const auto& b : model->stiefel_blocks()) specs.push_back({kind, b.J, b.K});
  return std::make_unique<UnconstrainedTarget>(std::move(model), std::move(specs), options);
}

}  // namespace stiefel
