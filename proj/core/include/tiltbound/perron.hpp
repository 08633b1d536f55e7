#pragma once

#include <cstddef>

#include "tiltbound/matrix.hpp"
#include "tiltbound/model.hpp"

namespace tiltbound {

/// Perron-Frobenius eigentriple of a nonnegative matrix M.
///
/// Normalized so that sum(u) == 1 and sum(u .* v) == 1. `v` is strictly
/// positive; `u` is strictly positive for irreducible M and supported on the
/// core block for the extended (reducible) case.
struct PerronTriple {
  double rho = 0.0;
  Vector u;
  Vector v;
  double residual = 0.0;         ///< max(|Mᵀu - ρu|∞, |Mv - ρv|∞)
  std::size_t iterations = 0;    ///< power-iteration steps actually used
  bool shifted = false;          ///< iterated on M + εI (periodic pattern)
};

/// The block shape
///
///     M = [ A 0 ]
///         [ B 0 ]
///
/// after a consistent renumbering: `core` indexes the irreducible block A, every
/// fringe row of B has a positive entry into the core, and every column outside
/// the core is zero.
struct BlockStructure {
  StateSet core;
  StateSet fringe;
  /// witness[i]: a core state that fringe[i] transitions into.
  StateSet witness;
};

/// Power-iteration settings. Defaults follow the documented solver contract.
struct PerronOptions {
  double relative_tolerance = 1e-13;
  std::size_t budget = 100000;
  /// Iterations without convergence after which an aperiodic matrix is
  /// retried with the ε-shift (near-periodic spectra oscillate slowly).
  std::size_t shift_after = 2000;
  double shift_fraction = 1e-3;
  std::size_t polish_steps = 2;
};

/// Eigen-residual tolerance for a matrix with the given largest entry and
/// eigenvector scale: 1e-11 · max entry · max(1, |v|∞).
double perron_tolerance(double max_entry, double v_scale);

/// PF eigentriple of a nonnegative irreducible matrix. Throws NumericalError
/// when the residual cannot be brought below tolerance.
PerronTriple pf_irreducible(const Matrix& m, const PerronOptions& options = {});

/// Checks that `m` matches `structure`; throws InputError describing the
/// first mismatch otherwise.
void check_structure(const Matrix& m, const BlockStructure& structure);

/// Derives the block structure of `m` from its nonzero columns, if it has one.
/// Returns false when the shape does not fit.
bool infer_structure(const Matrix& m, BlockStructure& structure);

/// Extended PF eigentriple for the block shape above: the core triple comes
/// from pf_irreducible(A) and the fringe part of v is B v_A / ρ(A).
PerronTriple pf_extended(const Matrix& m, const BlockStructure& structure,
                         const PerronOptions& options = {});

/// PF triple of a reducible matrix of the shape [A 0; B D]: A is the unique
/// closed communicating class, every other state reaches A and ρ(D) < ρ(A). Then v_R = (ρ I - D)^{-1} B v_A and u vanishes off A. This is
/// what a far tilt looks like once some columns underflow. Throws
/// NumericalError when the shape does not fit.
PerronTriple pf_closed_core(const Matrix& m, const PerronOptions& options = {});

/// θ → ∞ limit of the rescaled tilted matrix together with its block shape and
/// extended PF triple.
struct LimitMatrix {
  Matrix matrix;  ///< P with every column outside S_b zeroed
  BlockStructure structure;
  PerronTriple triple;
};

/// For Side::lower the construction runs on -f. Throws AssumptionError when the
/// side's assumptions fail.
LimitMatrix limit_matrix(const MarkovModel& model, Side side);

}  // namespace tiltbound
