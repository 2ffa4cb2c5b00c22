#include "rmm/formulation.hpp"

#include <array>
#include <utility>

namespace rmm {

namespace {

constexpr std::array<std::pair<Pairing, const char*>, 8> kNames{{
    {Pairing::T2T1, "T2T1"},
    {Pairing::T2T2, "T2T2"},
    {Pairing::T2NT1, "T2NT1"},
    {Pairing::T2NT2, "T2NT2"},
    {Pairing::Q2NQ1, "Q2NQ1"},
    {Pairing::Q2NQ2, "Q2NQ2"},
    {Pairing::T2Elastic, "T2-elastic"},
    {Pairing::Q2Elastic, "Q2-elastic"},
}};

}  // namespace

Formulation formulation(Pairing p) {
  switch (p) {
    case Pairing::T2T1: return {p, CellKind::tri, 2, PSpace::nodal, 1};
    case Pairing::T2T2: return {p, CellKind::tri, 2, PSpace::nodal, 2};
    case Pairing::T2NT1: return {p, CellKind::tri, 2, PSpace::nedelec, 1};
    case Pairing::T2NT2: return {p, CellKind::tri, 2, PSpace::nedelec, 2};
    case Pairing::Q2NQ1: return {p, CellKind::quad, 2, PSpace::nedelec, 1};
    case Pairing::Q2NQ2: return {p, CellKind::quad, 2, PSpace::nedelec, 2};
    case Pairing::T2Elastic: return {p, CellKind::tri, 2, PSpace::none, 0};
    case Pairing::Q2Elastic: return {p, CellKind::quad, 2, PSpace::none, 0};
  }
  throw ContractError("unknown pairing");
}

std::string to_string(Pairing p) {
  for (const auto& [v, n] : kNames)
    if (v == p) return n;
  throw ContractError("unknown pairing");
}

Pairing parse_pairing(const std::string& name) {
  for (const auto& [v, n] : kNames)
    if (name == n) return v;
  std::string valid;
  for (const auto& [v, n] : kNames) valid += (valid.empty() ? "" : ", ") + std::string(n);
  throw ParameterError("unknown element pairing '" + name + "' (valid: " + valid + ")");
}

std::vector<std::string> pairing_names() {
  std::vector<std::string> out;
  for (const auto& [v, n] : kNames) out.emplace_back(n);
  return out;
}

}  // namespace rmm
