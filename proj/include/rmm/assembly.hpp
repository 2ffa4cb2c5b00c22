#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rmm/constraints.hpp"
#include "rmm/dofmap.hpp"
#include "rmm/materials.hpp"

namespace rmm {

/// Rows of the pointwise kinematic vector z = B d (cell-local dofs d):
/// grad u (H11, H12, H21, H22), P (P11, P12, P21, P22), row curls (c1, c2), u (u1, u2).
namespace zrow {
inline constexpr int H11 = 0, H12 = 1, H21 = 2, H22 = 3;
inline constexpr int P11 = 4, P12 = 5, P21 = 6, P22 = 7;
inline constexpr int C1 = 8, C2 = 9, U1 = 10, U2 = 11;
}  // namespace zrow
inline constexpr int kZ = 12;
inline constexpr int kZEnergy = 10;

using OperatorMatrix = Eigen::Matrix<double, kZ, Eigen::Dynamic>;
using EnergyMatrix = Eigen::Matrix<double, kZEnergy, kZEnergy>;
using ZVector = Eigen::Matrix<double, kZ, 1>;

struct PointOperator {
  OperatorMatrix B;
  Vec2 x;
  double detJ = 0.0;
};

/// Fills B for cell c at reference point xi (mapped gradients, Piola-mapped edge functions).
void point_operator(const DofMap& dofs, index_t c, const Vec2& xi, PointOperator& out);

/// W = 1/2 z^T D z for the relaxed micromorphic energy density.
EnergyMatrix energy_matrix(const IsotropicParams& p);
/// W = 1/2 sym grad u : C : sym grad u (displacement-only elasticity).
EnergyMatrix elastic_energy_matrix(const ElasticityTensor2D& c);
inline double energy_density(const EnergyMatrix& D, const ZVector& z) {
  const auto e = z.head<kZEnergy>();
  return 0.5 * e.dot(D * e);
}

using VectorField = std::function<Vec2(const Vec2&)>;
using TensorField = std::function<Mat2(const Vec2&)>;

struct Traction {
  std::string tag;
  VectorField value;
};

/// Body force, body moment and boundary tractions. Empty members contribute nothing.
struct Loads {
  VectorField body_force;
  TensorField body_moment;
  std::vector<Traction> tractions;
};

struct AssemblyOptions {
  int quadrature_degree = 0;  // 0: formulation default (2k + 2)
  int threads = 1;

  bool operator==(const AssemblyOptions&) const = default;
};

struct ElementMatrices {
  Eigen::MatrixXd K;
  Eigen::VectorXd f;
};

/// K_e = int B^T D B dV and the body-load vector of cell c.
ElementMatrices element_stiffness(const DofMap& dofs, index_t c, const EnergyMatrix& D,
                                  int quadrature_degree, const Loads& loads = {});

struct LinearSystem {
  SparseMatrix K;
  Eigen::VectorXd f;
  ConstraintSet constraints;
};

/// Energy operators per material region.
using RegionOperators = std::map<int, EnergyMatrix>;
RegionOperators region_operators(const MaterialSet& materials);
RegionOperators region_operators(const std::map<int, ElasticityTensor2D>& tensors);

/// Global assembly. Throws ParameterError if a region has no material.
LinearSystem assemble(const DofMap& dofs, const RegionOperators& ops, const Loads& loads = {},
                      const AssemblyOptions& opts = {});
/// Displacement-only pairings use (lambda_e, mu_e) as the elasticity tensor.
LinearSystem assemble(const DofMap& dofs, const MaterialSet& materials, const Loads& loads = {},
                      const AssemblyOptions& opts = {});

/// Prescribes u = ubar at every u-node on edges tagged `tag`.
void dirichlet_u(const DofMap& dofs, const std::string& tag, const VectorField& ubar,
                 ConstraintSet& out);

/// Analytic displacement gradient on a tagged boundary part.
struct CouplingData {
  std::string tag;
  TensorField grad_ubar;
};

/// P . tau = grad ubar . tau on the tagged edges. Edge elements fix each edge
/// dof to its physical dof functional of grad ubar; nodal P gets one affine tie
/// per row at nodes with a single tangent and is fully prescribed at nodes with
/// two. Throws ConstraintError for more than two tangents at a node or for
/// conflicting data on parallel tangents.
void consistent_coupling(const DofMap& dofs, std::span<const CouplingData> data, ConstraintSet& out);

/// Value of the physical functional of edge function `slot` applied to row `row`
/// of a tensor field: (1/beta) int_E (G_row . tau) r_slot ds.
double edge_functional(const DofMap& dofs, index_t edge, int slot, int row, const TensorField& G);

}  // namespace rmm
