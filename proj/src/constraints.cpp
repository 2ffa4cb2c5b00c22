#include "rmm/constraints.hpp"

#include <cmath>
#include <string>

namespace rmm {

void ConstraintSet::fix(index_t dof, double value) {
  auto it = map_.find(dof);
  if (it != map_.end()) {
    const AffineConstraint& c = it->second;
    if (c.terms.empty() && std::abs(c.value - value) <= 1e-10 * (1.0 + std::abs(value))) return;
    throw ConstraintError("contradictory constraints on dof " + std::to_string(dof) + ": " +
                          std::to_string(c.value) + " vs " + std::to_string(value));
  }
  map_.emplace(dof, AffineConstraint{dof, {}, value});
}

void ConstraintSet::tie(index_t dof, std::vector<std::pair<index_t, double>> terms, double value) {
  if (map_.count(dof))
    throw ConstraintError("dof " + std::to_string(dof) + " is constrained twice");
  for (const auto& [d, c] : terms)
    if (d == dof) throw ConstraintError("dof " + std::to_string(dof) + " is tied to itself");
  map_.emplace(dof, AffineConstraint{dof, std::move(terms), value});
}

void ConstraintSet::merge(const ConstraintSet& other) {
  for (const auto& [d, c] : other.map_) {
    if (c.terms.empty()) fix(d, c.value);
    else tie(d, c.terms, c.value);
  }
}

Eigen::VectorXd ReducedSystem::recover(const Eigen::VectorXd& y) const { return T * y + g; }

namespace {

struct Resolved {
  std::vector<std::pair<index_t, double>> terms;  // in free (reduced) numbering
  double value = 0.0;
};

class Resolver {
 public:
  Resolver(const ConstraintSet& cs, const std::vector<index_t>& reduced_id, index_t n)
      : cs_(cs), reduced_id_(reduced_id), state_(n, 0), cache_(n) {}

  const Resolved& resolve(index_t dof) {
    if (state_[dof] == 2) return cache_[dof];
    if (state_[dof] == 1)
      throw ConstraintError("cyclic constraint chain through dof " + std::to_string(dof));
    state_[dof] = 1;
    Resolved r;
    const AffineConstraint& c = cs_.entries().at(dof);
    r.value = c.value;
    std::map<index_t, double> acc;
    for (const auto& [d, coeff] : c.terms) {
      if (d < 0 || d >= static_cast<index_t>(state_.size()))
        throw ConstraintError("constraint on dof " + std::to_string(dof) +
                              " references missing dof " + std::to_string(d));
      if (reduced_id_[d] >= 0) {
        acc[reduced_id_[d]] += coeff;
      } else {
        const Resolved& sub = resolve(d);
        r.value += coeff * sub.value;
        for (const auto& [f, s] : sub.terms) acc[f] += coeff * s;
      }
    }
    r.terms.assign(acc.begin(), acc.end());
    cache_[dof] = std::move(r);
    state_[dof] = 2;
    return cache_[dof];
  }

 private:
  const ConstraintSet& cs_;
  const std::vector<index_t>& reduced_id_;
  std::vector<char> state_;
  std::vector<Resolved> cache_;
};

}  // namespace

ReducedSystem eliminate_constraints(const SparseMatrix& K, const Eigen::VectorXd& f,
                                    const ConstraintSet& constraints) {
  const index_t n = static_cast<index_t>(K.rows());
  std::vector<index_t> reduced_id(n, -1);
  ReducedSystem out;
  for (const auto& [d, c] : constraints.entries())
    if (d < 0 || d >= n) throw ConstraintError("constraint on missing dof " + std::to_string(d));
  for (index_t i = 0; i < n; ++i) {
    if (constraints.constrained(i)) continue;
    reduced_id[i] = static_cast<index_t>(out.free_dofs.size());
    out.free_dofs.push_back(i);
  }
  const index_t nf = static_cast<index_t>(out.free_dofs.size());

  Resolver resolver(constraints, reduced_id, n);
  out.g = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(n);
  for (index_t i = 0; i < n; ++i) {
    if (reduced_id[i] >= 0) {
      trip.emplace_back(i, reduced_id[i], 1.0);
      continue;
    }
    const Resolved& r = resolver.resolve(i);
    out.g[i] = r.value;
    for (const auto& [fcol, coeff] : r.terms)
      if (coeff != 0.0) trip.emplace_back(i, fcol, coeff);
  }
  out.T.resize(n, nf);
  out.T.setFromTriplets(trip.begin(), trip.end());

  const Eigen::VectorXd rhs = f - K * out.g;
  out.f = out.T.transpose() * rhs;
  const SparseMatrix KT = K * out.T;
  out.K = (SparseMatrix(out.T.transpose()) * KT).pruned();
  return out;
}

}  // namespace rmm
