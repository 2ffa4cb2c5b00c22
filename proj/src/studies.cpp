#include "rmm/studies.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <limits>
#include <numbers>

namespace rmm {

namespace {

constexpr double kRectLength = 2.0;
constexpr double kRectHeight = 1.0;
constexpr double kInterfaceX = 1.0;
constexpr double kInspectionY = 0.5;

constexpr double kOuterRadius = 25.0;
constexpr double kInnerRadius = 2.0;
constexpr double kRingRadius = 10.0;
constexpr double kRotation = 0.01;

constexpr std::array<std::pair<int, int>, 3> kAnnulusLevels{{{8, 24}, {24, 64}, {72, 208}}};

std::pair<int, int> annulus_resolution(const StudySpec& spec, int level) {
  std::pair<int, int> nm;
  if (level < static_cast<int>(kAnnulusLevels.size())) {
    nm = kAnnulusLevels[level];
  } else {
    // Beyond the table: triple both counts per level.
    nm = kAnnulusLevels.back();
    for (int l = static_cast<int>(kAnnulusLevels.size()) - 1; l < level; ++l) {
      nm.first *= 3;
      nm.second *= 3;
    }
  }
  if (spec.mesh.n_r) nm.first = *spec.mesh.n_r;
  if (spec.mesh.n_theta) nm.second = *spec.mesh.n_theta;
  return nm;
}

int annulus_n_theta(const StudySpec& spec, int level) { return annulus_resolution(spec, level).second; }

CellKind kind_of(Pairing p) { return formulation(p).kind; }

Pairing elastic_pairing(CellKind k) { return k == CellKind::tri ? Pairing::T2Elastic : Pairing::Q2Elastic; }

Pairing reference_pairing(CellKind k) { return k == CellKind::tri ? Pairing::T2NT2 : Pairing::Q2NQ2; }

bool is_nedelec(Pairing p) { return formulation(p).p_space == PSpace::nedelec; }

const std::vector<std::string>& rect_quantities() {
  static const std::vector<std::string> q{"u1", "u2", "P11", "P12", "P21", "P22", "sigma11",
                                          "sigma12", "sigma21", "sigma22", "m13", "m23", "W"};
  return q;
}

const std::vector<std::string>& ray_quantities() {
  static const std::vector<std::string> q{"u_r", "u_t", "P_rt", "P_tr", "sigma_rt", "sigma_tr",
                                          "sigma_micro_rt", "m_rz", "m_tz", "W"};
  return q;
}

// Ray parameters clustered toward r_i: spacings grow geometrically, last/first = 20.
std::vector<double> ray_params(int n) {
  n = std::max(n, 2);
  const double q = std::pow(20.0, 1.0 / (n - 1));
  std::vector<double> t(n + 1);
  for (int i = 0; i <= n; ++i) t[i] = (std::pow(q, i) - 1.0) / (std::pow(q, n) - 1.0);
  t.back() = 1.0;
  return t;
}

double ray_end(int n_theta) { return kOuterRadius * std::cos(std::numbers::pi / n_theta) * (1.0 - 1e-12); }

Table sample_rect(const RunResult& run, int samples) {
  const auto pts = line_points(*run.mesh, Vec2(0.0, kInspectionY), Vec2(kRectLength, kInspectionY), samples);
  Table t = sample_line(*run.solution, pts, rect_quantities(), Frame::cartesian, run.materials);
  t.meta.push_back("inspection line y = 0.5");
  return t;
}

Table sample_ray(const RunResult& run, int n_theta, int samples) {
  const double r_end = ray_end(n_theta);
  const auto pts = line_points(*run.mesh, Vec2(kInnerRadius, 0.0), Vec2(r_end, 0.0), ray_params(samples));
  Table t = sample_line(*run.solution, pts, ray_quantities(), Frame::polar, run.materials);
  t.meta.push_back("ray theta = 0");
  return t;
}

// One value per point: rows with side 0 or -1 (the side before a crossing).
std::vector<double> column_one_per_point(const Table& t, const std::string& q) {
  const int c = t.column(q);
  const int side = t.column("side");
  std::vector<double> out;
  for (const auto& row : t.rows)
    if (row[side] <= 0.0) out.push_back(row[c]);
  return out;
}

double relative_l2(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

}  // namespace

std::string to_string(Bvp b) { return b == Bvp::rect_bimaterial ? "rect-bimaterial" : "annulus-shear"; }

Bvp parse_bvp(const std::string& s) {
  if (s == "rect-bimaterial") return Bvp::rect_bimaterial;
  if (s == "annulus-shear") return Bvp::annulus_shear;
  throw ParameterError("unknown bvp '" + s + "' (valid: rect-bimaterial, annulus-shear)");
}

Mesh2D study_mesh(const StudySpec& spec, CellKind kind, int level) {
  if (level < 0) throw ParameterError("mesh level must be non-negative");
  if (spec.bvp == Bvp::rect_bimaterial) {
    const int nx = spec.mesh.nx.value_or(10 << level);
    const int ny = spec.mesh.ny.value_or(5 << level);
    return gen_rectangle(kRectLength, kRectHeight, nx, ny, kind, kInterfaceX);
  }
  const auto [n_r, n_theta] = annulus_resolution(spec, level);
  std::optional<double> r_m;
  if (spec.load_case == 'B') r_m = kRingRadius;
  return gen_annulus(kOuterRadius, kInnerRadius, r_m, n_r, n_theta, kind);
}

MaterialSet study_materials(const StudySpec& spec, double Lc) {
  MaterialSet m;
  if (spec.materials) {
    m = *spec.materials;
  } else if (spec.bvp == Bvp::rect_bimaterial) {
    m[1] = material_preset("bvp1-material1");
    m[2] = material_preset("bvp1-material2");
  } else {
    m[1] = material_preset("bvp2-material1");
    if (spec.load_case == 'B') m[2] = material_preset("bvp2-material2");
  }
  for (auto& [region, p] : m) {
    p.Lc = Lc;
    p.validate();
  }
  return m;
}

Problem make_problem(const StudySpec& spec, CellKind kind, int level, double Lc) {
  Problem pr{study_mesh(spec, kind, level), study_materials(spec, Lc), {}, {}};
  if (spec.bvp == Bvp::rect_bimaterial) {
    // One field covers all four sides: zero at the bottom, (0.01, 0.01) at the top.
    const VectorField ubar = [](const Vec2& x) { return Vec2(0.01 * x.y() * x.y(), 0.01 * x.y() * x.y()); };
    const TensorField grad = [](const Vec2& x) {
      Mat2 g;
      g << 0.0, 0.02 * x.y(), 0.0, 0.02 * x.y();
      return g;
    };
    for (const char* tag : {"bottom", "top", "left", "right"}) {
      pr.dirichlet.push_back({tag, ubar});
      pr.coupling.push_back({tag, grad});
    }
  } else {
    if (spec.load_case != 'A' && spec.load_case != 'B')
      throw ParameterError(std::string("unknown annulus case '") + spec.load_case + "' (valid: A, B)");
    const double w = kRotation / kOuterRadius;
    pr.dirichlet.push_back({"inner", [](const Vec2&) { return Vec2(0.0, 0.0); }});
    pr.dirichlet.push_back({"outer", [w](const Vec2& x) { return Vec2(-w * x.y(), w * x.x()); }});
    pr.coupling.push_back({"inner", [](const Vec2&) { return Mat2(Mat2::Zero()); }});
    pr.coupling.push_back({"outer", [w](const Vec2&) {
                             Mat2 g;
                             g << 0.0, -w, w, 0.0;
                             return g;
                           }});
  }
  return pr;
}

RunResult solve_problem(const Problem& problem, Pairing pairing, const SolverSettings& solver,
                        const AssemblyOptions& assembly) {
  RunResult r;
  r.mesh = std::make_unique<Mesh2D>(problem.mesh);
  r.dofs = std::make_unique<DofMap>(*r.mesh, formulation(pairing));
  r.materials = problem.materials;
  r.num_dofs = r.dofs->num_dofs();

  Eigen::VectorXd x;
  {
    LinearSystem sys = assemble(*r.dofs, r.materials, {}, assembly);
    ConstraintSet cs;
    for (const auto& d : problem.dirichlet) dirichlet_u(*r.dofs, d.tag, d.ubar, cs);
    if (r.dofs->formulation().has_p()) consistent_coupling(*r.dofs, problem.coupling, cs);
    ReducedSystem red = eliminate_constraints(sys.K, sys.f, cs);
    r.num_free_dofs = static_cast<index_t>(red.free_dofs.size());
    SolveResult sol = solve_spd(red.K, red.f, solver);
    r.solve = sol.report;
    x = red.recover(sol.x);
    r.algebraic_potential = 0.5 * x.dot(sys.K * x) - sys.f.dot(x);
  }
  r.solution = std::make_unique<SolutionFields>(*r.dofs, std::move(x));
  r.potential = total_potential(*r.solution, r.materials, {}, assembly.quadrature_degree);
  return r;
}

namespace {

void add_run_meta(RunResult& r, const StudySpec& spec) {
  std::string problem = to_string(spec.bvp);
  if (spec.bvp == Bvp::annulus_shear) problem += std::string(" case ") + spec.load_case;
  r.samples.meta.push_back("problem " + problem + ", level " + std::to_string(spec.level));
  r.samples.meta.push_back("element " + to_string(spec.pairing) + ", cells " + std::to_string(r.mesh->num_cells()) +
                           ", h_max " + fmt(r.mesh->max_edge_length()) + ", dofs " + std::to_string(r.num_dofs));
  r.samples.meta.push_back("Lc " + fmt(spec.Lc));
}

}  // namespace

RunResult run_bvp1(const StudySpec& spec) {
  if (spec.bvp != Bvp::rect_bimaterial) throw ParameterError("run_bvp1 needs the rect-bimaterial problem");
  const CellKind kind = kind_of(spec.pairing);
  RunResult r = solve_problem(make_problem(spec, kind, spec.level, spec.Lc), spec.pairing, spec.solver,
                              spec.assembly);
  r.samples = sample_rect(r, spec.samples);
  add_run_meta(r, spec);
  return r;
}

RunResult run_bvp2(const StudySpec& spec) {
  if (spec.bvp != Bvp::annulus_shear) throw ParameterError("run_bvp2 needs the annulus-shear problem");
  const CellKind kind = kind_of(spec.pairing);
  RunResult r = solve_problem(make_problem(spec, kind, spec.level, spec.Lc), spec.pairing, spec.solver,
                              spec.assembly);
  r.samples = sample_ray(r, annulus_n_theta(spec, spec.level), spec.samples);
  add_run_meta(r, spec);
  return r;
}

RunResult run_study(const StudySpec& spec) {
  return spec.bvp == Bvp::rect_bimaterial ? run_bvp1(spec) : run_bvp2(spec);
}

IsotropicParams elastic_params(const ElasticityTensor2D& c) {
  const double lambda = c.lambda(), mu = c.mu();
  const double scale = c.m.cwiseAbs().maxCoeff();
  if (std::abs(c.m(0, 0) - (lambda + 2 * mu)) > 1e-9 * scale || std::abs(c.m(1, 1) - c.m(0, 0)) > 1e-9 * scale ||
      std::abs(c.m(0, 2)) > 1e-9 * scale || std::abs(c.m(1, 2)) > 1e-9 * scale)
    throw ParameterError("elasticity tensor is not isotropic");
  IsotropicParams p;
  p.lambda_e = lambda;
  p.mu_e = mu;
  return p;
}

RunResult linear_elasticity_solve(const Mesh2D& mesh, const std::map<int, ElasticityTensor2D>& tensors,
                                  const std::vector<DirichletData>& dirichlet, const SolverSettings& solver,
                                  const AssemblyOptions& assembly) {
  if (mesh.num_cells() == 0) throw ParameterError("empty mesh");
  Problem pr{mesh, {}, dirichlet, {}};
  for (const auto& [region, c] : tensors) pr.materials[region] = elastic_params(c);
  return solve_problem(pr, elastic_pairing(mesh.cells().front().kind), solver, assembly);
}

namespace {

struct Oracles {
  RunResult macro, micro;
};

Oracles solve_oracles(const Problem& pr, const SolverSettings& solver, const AssemblyOptions& assembly) {
  std::map<int, ElasticityTensor2D> macro, micro;
  for (const auto& [region, p] : pr.materials) {
    const ElasticityTensor2D ce = build_tensor(p.lambda_e, p.mu_e);
    const ElasticityTensor2D cm = build_tensor(p.lambda_micro, p.mu_micro);
    macro[region] = reuss_macro(ce, cm);
    micro[region] = cm;
  }
  return {linear_elasticity_solve(pr.mesh, macro, pr.dirichlet, solver, assembly),
          linear_elasticity_solve(pr.mesh, micro, pr.dirichlet, solver, assembly)};
}

}  // namespace

SweepResult lc_sweep(const StudySpec& spec) {
  if (spec.lc_values.empty()) throw ParameterError("Lc sweep list is empty");
  for (double lc : spec.lc_values)
    if (!(lc > 0.0) || !std::isfinite(lc)) throw ParameterError("Lc values must be positive and finite");
  const CellKind kind = kind_of(spec.pairing);
  SweepResult out;
  for (double lc : spec.lc_values) {
    const Problem pr = make_problem(spec, kind, spec.level, lc);
    const RunResult r = solve_problem(pr, spec.pairing, spec.solver, spec.assembly);
    out.rows.push_back({lc, r.potential.potential, r.potential.energy});
  }
  const Problem pr = make_problem(spec, kind, spec.level, spec.Lc);
  const Oracles o = solve_oracles(pr, spec.solver, spec.assembly);
  out.potential_macro = o.macro.potential.potential;
  out.potential_micro = o.micro.potential.potential;

  std::vector<SweepRow> sorted = out.rows;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.Lc < b.Lc; });
  // Slack for round-off of the energy evaluation.
  const double slack = 1e-9 * std::max(std::abs(out.potential_micro), std::abs(out.potential_macro));
  out.monotone = true;
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i].potential < sorted[i - 1].potential - slack) out.monotone = false;
  out.sandwich = true;
  for (const auto& row : out.rows)
    if (row.potential < out.potential_macro - slack || row.potential > out.potential_micro + slack)
      out.sandwich = false;

  out.table.columns = {"kind", "Lc", "Pi", "elastic", "micro", "cosserat", "curvature"};
  out.table.meta = {"kind 0: relaxed micromorphic, 1: macro elasticity oracle, 2: micro elasticity oracle",
                    "bvp " + to_string(spec.bvp) + ", pairing " + to_string(spec.pairing) + ", level " +
                        std::to_string(spec.level)};
  for (const auto& row : out.rows)
    out.table.rows.push_back({0.0, row.Lc, row.potential, row.energy.elastic, row.energy.micro,
                              row.energy.cosserat, row.energy.curvature});
  const double inf = std::numeric_limits<double>::infinity();
  out.table.rows.push_back({1.0, 0.0, out.potential_macro, o.macro.potential.energy.elastic, 0.0, 0.0, 0.0});
  out.table.rows.push_back({2.0, inf, out.potential_micro, o.micro.potential.energy.elastic, 0.0, 0.0, 0.0});
  return out;
}

double transition_width(const std::vector<double>& s, const std::vector<double>& value,
                        const std::vector<double>& reference, double interface_s, double jump, double fraction) {
  const double thr = fraction * std::abs(jump);
  auto bad = [&](std::size_t i) { return std::abs(value[i] - reference[i]) > thr; };
  const auto it = std::lower_bound(s.begin(), s.end(), interface_s);
  const std::size_t right0 = static_cast<std::size_t>(it - s.begin());
  double left = interface_s, right = interface_s;
  for (std::size_t i = right0; i-- > 0 && bad(i);) left = s[i];
  for (std::size_t i = right0; i < s.size() && bad(i); ++i) right = s[i];
  return right - left;
}

ConvergenceResult mesh_convergence(const StudySpec& spec) {
  if (spec.levels.size() < 2) throw ParameterError("mesh convergence needs at least two levels");
  const CellKind kind = kind_of(spec.pairing);
  std::vector<Pairing> pairings = spec.pairings;
  if (pairings.empty()) {
    pairings = kind == CellKind::tri
                   ? std::vector<Pairing>{Pairing::T2T1, Pairing::T2T2, Pairing::T2NT1, Pairing::T2NT2}
                   : std::vector<Pairing>{Pairing::Q2NQ1, Pairing::Q2NQ2};
  }
  std::vector<int> levels = spec.levels;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  if (levels.size() < 2) throw ParameterError("mesh convergence needs at least two distinct levels");

  const bool rect = spec.bvp == Bvp::rect_bimaterial;
  ConvergenceResult out;
  out.quantity = rect ? "P21" : "P_tr";
  const Frame frame = rect ? Frame::cartesian : Frame::polar;

  // Fixed comparison points shared by all levels, off every grid line.
  const int n = std::max(spec.samples, 10);
  std::vector<Vec2> pts;
  std::vector<double> s;
  double a0 = 0.0, a1 = kRectLength, interface_s = kInterfaceX;
  if (!rect) {
    a0 = kInnerRadius;
    a1 = ray_end(annulus_n_theta(spec, levels.front()));
  }
  for (int i = 0; i < n; ++i) {
    const double t = a0 + (i + 0.5) / n * (a1 - a0);
    s.push_back(t);
    pts.push_back(rect ? Vec2(t, kInspectionY) : Vec2(t, 0.0));
  }

  auto fixed_values = [&](const RunResult& r) {
    const Table t = sample_line(*r.solution, pts, {out.quantity}, frame, r.materials);
    return column_one_per_point(t, out.quantity);
  };
  auto jump_at_interface = [&](const RunResult& r, int level) {
    Vec2 p(kInterfaceX, kInspectionY), d(1.0, 0.0);
    if (!rect) {
      if (spec.load_case != 'B') return 0.0;
      p = Vec2(kRingRadius * std::cos(std::numbers::pi / annulus_n_theta(spec, level)), 0.0);
    }
    const double h = 1e-3 * r.mesh->max_edge_length();
    const Table t = sample_line(*r.solution, {p - h * d, p, p + h * d}, {out.quantity}, frame, r.materials);
    const int side = t.column("side"), q = t.column(out.quantity);
    double minus = 0.0, plus = 0.0;
    for (const auto& row : t.rows) {
      if (row[side] < 0) minus = row[q];
      if (row[side] > 0) plus = row[q];
    }
    return plus - minus;
  };

  // Reference: second-order edge elements on the finest level.
  const bool interface_present = rect || spec.load_case == 'B';
  std::vector<double> ref_values;
  double ref_jump = 0.0;
  if (interface_present) {
    const RunResult ref = solve_problem(make_problem(spec, kind, levels.back(), spec.Lc), reference_pairing(kind),
                                        spec.solver, spec.assembly);
    ref_values = fixed_values(ref);
    ref_jump = jump_at_interface(ref, levels.back());
  }

  out.table.columns = {"pairing", "level", "dofs", "difference", "jump", "transition_width"};
  std::string legend = "pairing ids:";
  for (std::size_t k = 0; k < pairings.size(); ++k) legend += " " + std::to_string(k) + "=" + to_string(pairings[k]);
  out.table.meta = {legend, "quantity " + out.quantity, "bvp " + to_string(spec.bvp)};

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < pairings.size(); ++k) {
    const Pairing pg = pairings[k];
    if (kind_of(pg) != kind) throw ParameterError("pairing " + to_string(pg) + " does not match the mesh cell kind");
    ConvergenceSeries ser{pg, {}, {}, {}, {}, false};
    std::vector<double> prev;
    for (int level : levels) {
      const RunResult r =
          solve_problem(make_problem(spec, kind, level, spec.Lc), pg, spec.solver, spec.assembly);
      const std::vector<double> v = fixed_values(r);
      const double diff = prev.empty() ? nan : relative_l2(v, prev);
      if (!prev.empty()) ser.differences.push_back(diff);
      const double jump = interface_present ? jump_at_interface(r, level) : 0.0;
      double width = nan;
      if (interface_present && !is_nedelec(pg)) {
        double s0 = interface_s;
        if (!rect) s0 = kRingRadius * std::cos(std::numbers::pi / annulus_n_theta(spec, level));
        width = transition_width(s, v, ref_values, s0, ref_jump);
      }
      ser.levels.push_back(level);
      ser.jumps.push_back(jump);
      ser.transition_widths.push_back(width);
      out.table.rows.push_back({static_cast<double>(k), static_cast<double>(level),
                                static_cast<double>(r.num_dofs), diff, jump, width});
      prev = v;
    }
    ser.decreasing = true;
    for (std::size_t i = 1; i < ser.differences.size(); ++i)
      if (!(ser.differences[i] < ser.differences[i - 1])) ser.decreasing = false;
    out.series.push_back(std::move(ser));
  }
  return out;
}

}  // namespace rmm
