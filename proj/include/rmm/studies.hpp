#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rmm/assembly.hpp"
#include "rmm/formulation.hpp"
#include "rmm/postprocess.hpp"
#include "rmm/solver.hpp"

namespace rmm {

enum class Bvp { rect_bimaterial, annulus_shear };
std::string to_string(Bvp b);
Bvp parse_bvp(const std::string& s);

struct MeshOverride {
  std::optional<int> nx, ny;          // rectangle
  std::optional<int> n_r, n_theta;    // annulus
  bool operator==(const MeshOverride&) const = default;
};

struct StudySpec {
  Bvp bvp = Bvp::rect_bimaterial;
  char load_case = 'A';  // annulus: A single material, B with the inner ring
  Pairing pairing = Pairing::T2NT2;
  int level = 0;
  MeshOverride mesh;
  double Lc = 1.0;
  std::vector<double> lc_values{1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
  std::vector<int> levels{0, 1, 2};
  std::vector<Pairing> pairings;  // convergence; empty: all pairings valid for the cell kind
  std::optional<MaterialSet> materials;  // replaces the benchmark parameter sets
  SolverSettings solver;
  AssemblyOptions assembly;
  int samples = 400;
  std::uint64_t seed = 20240501;

  bool operator==(const StudySpec&) const = default;
};

/// Mesh of the spec's geometry at `level` (rectangle nx = 10*2^L, ny = 5*2^L;
/// annulus (n_r, n_theta) = (8, 24), (24, 64), (72, 208) for L = 0, 1, 2).
Mesh2D study_mesh(const StudySpec& spec, CellKind kind, int level);

/// Benchmark (or overridden) materials with Lc applied to every region.
MaterialSet study_materials(const StudySpec& spec, double Lc);

struct DirichletData {
  std::string tag;
  VectorField ubar;
};

struct Problem {
  Mesh2D mesh;
  MaterialSet materials;
  std::vector<DirichletData> dirichlet;
  std::vector<CouplingData> coupling;
};

Problem make_problem(const StudySpec& spec, CellKind kind, int level, double Lc);

/// A solved problem. Owns mesh and dof map so the solution view stays valid.
struct RunResult {
  std::unique_ptr<Mesh2D> mesh;
  std::unique_ptr<DofMap> dofs;
  std::unique_ptr<SolutionFields> solution;
  MaterialSet materials;
  PotentialReport potential;
  double algebraic_potential = 0.0;  // 1/2 x^T K x - f^T x
  SolveReport solve;
  index_t num_dofs = 0;
  index_t num_free_dofs = 0;
  Table samples;
};

RunResult solve_problem(const Problem& problem, Pairing pairing, const SolverSettings& solver = {},
                        const AssemblyOptions& assembly = {});

/// Rectangle with two materials; samples along y = 0.5.
RunResult run_bvp1(const StudySpec& spec);
/// Annulus under outer rotation; polar samples along the ray theta = 0.
RunResult run_bvp2(const StudySpec& spec);
/// Dispatches on spec.bvp.
RunResult run_study(const StudySpec& spec);

/// Displacement-only quadratic Lagrange solve with one isotropic tensor per region.
RunResult linear_elasticity_solve(const Mesh2D& mesh, const std::map<int, ElasticityTensor2D>& tensors,
                                  const std::vector<DirichletData>& dirichlet,
                                  const SolverSettings& solver = {}, const AssemblyOptions& assembly = {});

/// Lame pair of an isotropic plane-strain tensor, as displacement-only material.
IsotropicParams elastic_params(const ElasticityTensor2D& c);

struct SweepRow {
  double Lc = 0.0;
  double potential = 0.0;
  EnergySplit energy;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double potential_macro = 0.0;
  double potential_micro = 0.0;
  bool monotone = false;
  bool sandwich = false;
  Table table;
};

/// Solves for every Lc in spec.lc_values and the two elasticity oracles
/// (Reuss macro tensor and micro tensor) on the same mesh.
SweepResult lc_sweep(const StudySpec& spec);

struct ConvergenceSeries {
  Pairing pairing;
  std::vector<int> levels;
  std::vector<double> differences;  // relative L2 difference between consecutive levels
  std::vector<double> jumps;        // one-sided jump of the inspected component per level
  std::vector<double> transition_widths;  // nodal pairings
  bool decreasing = false;
};

struct ConvergenceResult {
  std::string quantity;
  std::vector<ConvergenceSeries> series;
  Table table;
};

/// Inspection-line convergence across spec.levels for each pairing.
/// Rectangle: P21 along y = 0.5, jump at x = 1. Annulus: P_tr along theta = 0,
/// jump at the ring interface (case B).
ConvergenceResult mesh_convergence(const StudySpec& spec);

/// Width of the zone around the interface where |value - reference| exceeds
/// `fraction` * |reference jump|. Both samples share the abscissae `s`.
double transition_width(const std::vector<double>& s, const std::vector<double>& value,
                        const std::vector<double>& reference, double interface_s, double jump,
                        double fraction = 0.1);

}  // namespace rmm
