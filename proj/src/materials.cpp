#include "rmm/materials.hpp"

#include <Eigen/LU>
#include <cmath>
#include <vector>

namespace rmm {

namespace {

void check_pair(double lambda, double mu, const char* name) {
  if (!std::isfinite(lambda) || !std::isfinite(mu) || !(mu > 0.0) || !(3.0 * lambda + 2.0 * mu > 0.0))
    throw ParameterError(std::string("inadmissible Lame pair for ") + name);
}

}  // namespace

void IsotropicParams::validate() const {
  check_pair(lambda_micro, mu_micro, "C_micro");
  check_pair(lambda_e, mu_e, "C_e");
  if (!(mu_c >= 0.0)) throw ParameterError("mu_c must be non-negative");
  if (!(mu >= 0.0)) throw ParameterError("mu must be non-negative");
  if (!(Lc >= 0.0)) throw ParameterError("Lc must be non-negative");
  if (!(L_scale >= 0.0)) throw ParameterError("L_scale must be non-negative");
}

Mat2 ElasticityTensor2D::apply(const Mat2& e) const {
  const Eigen::Vector3d s = m * Eigen::Vector3d(e(0, 0), e(1, 1), e(0, 1));
  Mat2 out;
  out << s(0), s(2), s(2), s(1);
  return out;
}

double ElasticityTensor2D::energy(const Mat2& e) const {
  const Eigen::Vector3d v(e(0, 0), e(1, 1), e(0, 1));
  return 0.5 * v.dot(energy_matrix() * v);
}

Eigen::Matrix3d ElasticityTensor2D::energy_matrix() const {
  // e:s = e11 s11 + e22 s22 + 2 e12 s12
  Eigen::Matrix3d E = m;
  E.row(2) *= 2.0;
  return E;
}

ElasticityTensor2D build_tensor(double lambda, double mu) {
  if (!std::isfinite(lambda) || !std::isfinite(mu))
    throw ParameterError("build_tensor: non-finite modulus");
  ElasticityTensor2D c;
  c.m << lambda + 2 * mu, lambda, 0, lambda, lambda + 2 * mu, 0, 0, 0, 2 * mu;
  return c;
}

ElasticityTensor2D reuss_macro(const ElasticityTensor2D& ce, const ElasticityTensor2D& cmicro) {
  Eigen::FullPivLU<Eigen::Matrix3d> a(ce.m), b(cmicro.m);
  if (!a.isInvertible() || !b.isInvertible()) throw ParameterError("reuss_macro: singular tensor");
  const Eigen::Matrix3d compliance = a.inverse() + b.inverse();
  ElasticityTensor2D out;
  out.m = compliance.inverse();
  out.m = 0.5 * (out.m + out.m.transpose()).eval();
  return out;
}

double moment_modulus(const IsotropicParams& p) { return p.mu * p.Lc * p.Lc * p.L_scale; }

IsotropicParams material_preset(const std::string& name) {
  IsotropicParams p;
  p.Lc = 1.0;
  if (name == "bvp1-material1" || name == "bvp2-material1") {
    p.lambda_micro = 555.55;
    p.mu_micro = 833.33;
    p.lambda_e = 486.11;
    p.mu_e = 729.17;
    p.mu = 833.33;
  } else if (name == "bvp1-material2") {
    p.lambda_micro = 1111.11;
    p.mu_micro = 1667.67;
    p.lambda_e = 972.22;
    p.mu_e = 1458.33;
    p.mu = 1666.67;
  } else if (name == "bvp2-material2") {
    p.lambda_micro = 2777.78;
    p.mu_micro = 4166.67;
    p.lambda_e = 2430.555;
    p.mu_e = 3645.85;
    p.mu = 4166.67;
  } else {
    throw ParameterError("unknown material preset '" + name + "'");
  }
  return p;
}

std::vector<std::string> material_preset_names() {
  return {"bvp1-material1", "bvp1-material2", "bvp2-material1", "bvp2-material2"};
}

}  // namespace rmm
