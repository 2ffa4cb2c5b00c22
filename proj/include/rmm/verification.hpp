#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rmm/common.hpp"

namespace rmm {

struct VerificationOptions {
  double duality_tol = 1e-12;
  double trace_tol = 1e-10;
  double curl_fd_tol = 1e-6;
  int random_cells = 50;
  std::uint64_t seed = 20240501;
  /// Test hook: flips the sign of the third NT1 basis function.
  bool negate_nt1_v3 = false;
};

struct CheckResult {
  std::string element;  // NT1, NT2, NQ1, NQ2
  std::string check;    // duality, curl, trace-degree, unisolvence, continuity
  double deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;  // failing functional, if any
};

/// Runs the element verification suite over the four edge-element families.
std::vector<CheckResult> verify_elements(const VerificationOptions& opts = {});

/// Maximum deviation of the (dof functional x basis) matrix from identity.
double duality_deviation(CellKind kind, int order, bool negate_nt1_v3 = false, std::string* worst = nullptr);

/// Maximum deviation of physical tangential trace sums from 1 (own edge) or 0
/// (other edges) over randomly distorted single cells.
double unisolvence_deviation(CellKind kind, int order, int cells, std::uint64_t seed);

/// Maximum mismatch of tau . P (both rows) and of u between the two sides of
/// every interior edge for a random dof vector on a randomly perturbed mesh.
double continuity_deviation(CellKind kind, int order, std::uint64_t seed);

/// Prints the pass/fail matrix (families x checks).
void print_verification(std::ostream& os, const std::vector<CheckResult>& results);

}  // namespace rmm
