#pragma once

#include <string>
#include <vector>

#include "tiltbound/model.hpp"

namespace tiltbound {

/// One failed assumption with a human-readable witness.
struct Violation {
  int id = 0;              ///< 1..4
  std::string witness;     ///< e.g. "state(s) {'1'} have no one-step transition into S_b = {'-1'}"
  StateSet states;         ///< offending states
};

/// Positivity-pattern assumptions relative to the observable:
///   A1  the submatrix of P on S_b is irreducible;
///   A2  every state outside S_b has a one-step transition into S_b;
///   A3, A4  the same for S_a (i.e. A1, A2 for -f).
/// A1-A2 back upper-tail bounds, A3-A4 lower-tail bounds.
struct AssumptionReport {
  bool a1 = false, a2 = false, a3 = false, a4 = false;
  StateSet S_b, S_a;
  std::vector<Violation> violations;

  bool upper() const noexcept { return a1 && a2; }
  bool lower() const noexcept { return a3 && a4; }
  bool holds(Side side) const noexcept { return side == Side::upper ? upper() : lower(); }
  bool all() const noexcept { return upper() && lower(); }
};

/// Throws AssumptionError when P is not irreducible.
AssumptionReport validate(const MarkovModel& model);

/// Throws AssumptionError (naming the violations) unless `side` is supported.
void require_side(const MarkovModel& model, Side side, const char* module);

}  // namespace tiltbound
