#include "tiltbound/assumptions.hpp"

#include "tiltbound/error.hpp"

namespace tiltbound {
namespace {

std::string label_set(const MarkovModel& m, const StateSet& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? ", '" : "'") + m.states()[s[i]] + "'";
  return out + "}";
}

// Irreducibility of the block on `level`, with a witness pair on failure.
bool check_block(const MarkovModel& m, const StateSet& level, const char* name, int id,
                 std::vector<Violation>& out) {
  const Matrix block = m.transition().principal(level);
  if (is_irreducible(block)) return true;
  Violation v;
  v.id = id;
  if (level.size() == 1) {
    v.states = level;
    v.witness = std::string(name) + " = " + label_set(m, level) +
                " is a single state without a self-loop";
  } else {
    // Find x, y in the block with no path x -> y inside the block.
    for (std::size_t i = 0; i < level.size() && v.states.empty(); ++i) {
      const auto seen = reachable_from(block, i);
      for (std::size_t j = 0; j < level.size(); ++j)
        if (!seen[j]) {
          v.states = {level[i], level[j]};
          v.witness = std::string("inside ") + name + " = " + label_set(m, level) +
                      ", state '" + m.states()[level[i]] + "' cannot reach state '" +
                      m.states()[level[j]] + "'";
          break;
        }
    }
  }
  out.push_back(std::move(v));
  return false;
}

bool check_entry(const MarkovModel& m, const StateSet& level, const char* name, int id,
                 std::vector<Violation>& out) {
  const std::size_t n = m.size();
  std::vector<bool> in_level(n, false);
  for (std::size_t x : level) in_level[x] = true;
  StateSet stuck;
  for (std::size_t x = 0; x < n; ++x) {
    if (in_level[x]) continue;
    bool hit = false;
    for (std::size_t y : level) hit = hit || m.transition()(x, y) > 0.0;
    if (!hit) stuck.push_back(x);
  }
  if (stuck.empty()) return true;
  Violation v;
  v.id = id;
  v.states = stuck;
  v.witness = "state(s) " + label_set(m, stuck) +
              " have no one-step transition into " + name + " = " + label_set(m, level);
  out.push_back(std::move(v));
  return false;
}

}  // namespace

AssumptionReport validate(const MarkovModel& model) {
  if (!is_irreducible(model.transition()))
    throw AssumptionError("assumptions", "transition matrix is not irreducible");
  const LevelSets ls = level_sets(model);
  AssumptionReport r;
  r.S_b = ls.S_b;
  r.S_a = ls.S_a;
  r.a1 = check_block(model, ls.S_b, "S_b", 1, r.violations);
  r.a2 = check_entry(model, ls.S_b, "S_b", 2, r.violations);
  r.a3 = check_block(model, ls.S_a, "S_a", 3, r.violations);
  r.a4 = check_entry(model, ls.S_a, "S_a", 4, r.violations);
  return r;
}

void require_side(const MarkovModel& model, Side side, const char* module) {
  const AssumptionReport r = validate(model);
  if (r.holds(side)) return;
  std::string what = std::string(to_string(side)) + "-tail assumptions do not hold";
  const int first = side == Side::upper ? 1 : 3;
  for (const auto& v : r.violations)
    if (v.id == first || v.id == first + 1) what += "; A" + std::to_string(v.id) + ": " + v.witness;
  throw AssumptionError(module, what);
}

}  // namespace tiltbound
