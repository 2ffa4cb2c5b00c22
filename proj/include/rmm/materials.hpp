#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rmm/common.hpp"

namespace rmm {

struct IsotropicParams {
  double lambda_micro = 0.0;
  double mu_micro = 0.0;
  double lambda_e = 0.0;
  double mu_e = 0.0;
  double mu_c = 0.0;
  double mu = 0.0;
  double Lc = 0.0;
  double L_scale = 1.0;  // curvature tensor = L_scale * identity

  /// Throws ParameterError when a pair is not positive definite or a modulus is negative.
  void validate() const;
  bool operator==(const IsotropicParams&) const = default;
};

/// Plane-strain isotropic tensor in tensorial components (e11, e22, e12).
/// stress_vec = m * (e11, e22, e12) gives (s11, s22, s12).
struct ElasticityTensor2D {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();

  Mat2 apply(const Mat2& sym_strain) const;
  /// 1/2 e : C : e for a symmetric strain.
  double energy(const Mat2& sym_strain) const;
  /// Matrix E with e : C : e = v^T E v, v = (e11, e22, e12).
  Eigen::Matrix3d energy_matrix() const;
  /// Lame pair recovered from an isotropic tensor.
  double lambda() const { return m(0, 1); }
  double mu() const { return 0.5 * m(2, 2); }
};

ElasticityTensor2D build_tensor(double lambda, double mu);
/// (Ce^-1 + Cmicro^-1)^-1 by 3x3 inversion.
ElasticityTensor2D reuss_macro(const ElasticityTensor2D& ce, const ElasticityTensor2D& cmicro);
/// mu Lc^2 times the curvature scale.
double moment_modulus(const IsotropicParams& p);

/// Per-region material parameters.
using MaterialSet = std::map<int, IsotropicParams>;

/// Named parameter sets of the two benchmark problems: "bvp1-material1",
/// "bvp1-material2", "bvp2-material1", "bvp2-material2". Lc is set to 1.
IsotropicParams material_preset(const std::string& name);
std::vector<std::string> material_preset_names();

inline Mat2 sym(const Mat2& a) { return 0.5 * (a + a.transpose()); }
inline Mat2 skew(const Mat2& a) { return 0.5 * (a - a.transpose()); }

}  // namespace rmm
