#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tiltbound/matrix.hpp"

namespace tiltbound {

/// Which tail is being bounded. The lower tail is always handled by running
/// the upper-tail machinery on the negated observable.
enum class Side { upper, lower };

std::string_view to_string(Side side);
Side parse_side(std::string_view text);

/// Ordered set of state indices.
using StateSet = std::vector<std::size_t>;

/// Tolerance on row sums of the transition matrix and on the sum of the
/// initial distribution.
inline constexpr double kStochasticTolerance = 1e-12;

/// A finite-state Markov chain together with an observable and an initial
/// distribution. Instances are validated on construction and immutable.
class MarkovModel {
 public:
  /// Validates and builds a model. An empty `initial` means uniform.
  /// Throws InputError naming the offending row or entry.
  MarkovModel(std::vector<std::string> states, Matrix transition, Vector observable,
              Vector initial = {});

  std::size_t size() const noexcept { return states_.size(); }
  const std::vector<std::string>& states() const noexcept { return states_; }
  const Matrix& transition() const noexcept { return transition_; }
  const Vector& observable() const noexcept { return observable_; }
  const Vector& initial() const noexcept { return initial_; }

  /// Same chain with the observable replaced by `observable`.
  MarkovModel with_observable(Vector observable) const;
  /// Same chain with the transition matrix replaced.
  MarkovModel with_transition(Matrix transition) const;
  /// Same chain with the initial distribution replaced.
  MarkovModel with_initial(Vector initial) const;
  /// Same chain observing -f.
  MarkovModel negated() const;
  /// The model as seen by the upper-tail machinery for `side`.
  MarkovModel oriented(Side side) const;

 private:
  std::vector<std::string> states_;
  Matrix transition_;
  Vector observable_;
  Vector initial_;
};

/// Convenience constructor with generated labels "0", "1", ...
MarkovModel make_model(Matrix transition, Vector observable, Vector initial = {});

/// Parses a model document. Accepted syntax is YAML (JSON is a subset) with
/// keys `states`, `P`, `f` and optional `q`.
MarkovModel load_model(std::string_view text);
MarkovModel load_model_file(const std::filesystem::path& path);

/// Serializes a model in the same document format.
std::string dump_model(const MarkovModel& model);

/// True iff the positivity digraph of `m` is strongly connected. A 1x1 matrix
/// additionally needs a positive entry (a self-loop), so that irreducible
/// always implies a positive spectral radius.
bool is_irreducible(const Matrix& m);

/// States reachable from `from` along positive entries (including `from`).
std::vector<bool> reachable_from(const Matrix& m, std::size_t from);

/// Period of the positivity digraph of an irreducible matrix (1 = aperiodic).
std::size_t period(const Matrix& m);

/// Max and min of the observable with the exact argmax / argmin sets.
struct LevelSets {
  double a = 0.0;  ///< min f
  double b = 0.0;  ///< max f
  StateSet S_b;    ///< states with f == b
  StateSet S_a;    ///< states with f == a
};

/// Uses exact floating-point equality: ties must be encoded exactly.
LevelSets level_sets(const MarkovModel& model);

}  // namespace tiltbound
