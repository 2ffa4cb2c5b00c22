#pragma once

#include <string>
#include <vector>

#include "rmm/common.hpp"

namespace rmm {

/// Element pairings: displacement space first, micro-distortion space second.
/// The elastic pairings carry no micro-distortion and serve as the
/// displacement-only oracle.
enum class Pairing { T2T1, T2T2, T2NT1, T2NT2, Q2NQ1, Q2NQ2, T2Elastic, Q2Elastic };

enum class PSpace { none, nodal, nedelec };

struct Formulation {
  Pairing pairing = Pairing::T2NT2;
  CellKind kind = CellKind::tri;
  int u_order = 2;
  PSpace p_space = PSpace::nedelec;
  int p_order = 2;

  bool has_p() const { return p_space != PSpace::none; }
  int max_order() const { return has_p() && p_order > u_order ? p_order : u_order; }
  /// Default stiffness quadrature degree, 2k + 2.
  int default_quadrature_degree() const { return 2 * max_order() + 2; }
};

Formulation formulation(Pairing p);
std::string to_string(Pairing p);
/// Accepts "T2NT2", "T2-elastic", ...; throws ParameterError listing valid names.
Pairing parse_pairing(const std::string& name);
std::vector<std::string> pairing_names();

}  // namespace rmm
