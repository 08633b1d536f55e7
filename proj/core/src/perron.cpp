#include "tiltbound/perron.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tiltbound/assumptions.hpp"
#include "tiltbound/error.hpp"

namespace tiltbound {
namespace {

constexpr const char* kModule = "pf";
constexpr std::size_t kSettleSteps = 200;

struct PowerResult {
  Vector x;
  double rho = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  bool shifted = false;
};

// Power iteration with sup-norm normalization from the all-ones vector. The
// optional shift iterates on M + εI, which moves every eigenvalue by ε and
// keeps the eigenvectors.
PowerResult power_iterate(const Matrix& m, bool start_shifted, const PerronOptions& opt) {
  const std::size_t n = m.rows();
  const double eps = opt.shift_fraction * m.max_entry();
  PowerResult r;
  r.shifted = start_shifted;
  r.x.assign(n, 1.0);
  double previous = std::numeric_limits<double>::quiet_NaN();
  std::size_t since_shift = 0;
  for (std::size_t it = 0; it < opt.budget; ++it, ++since_shift) {
    Vector y = multiply(m, r.x);
    if (r.shifted)
      for (std::size_t i = 0; i < n; ++i) y[i] += eps * r.x[i];
    const double norm = sup_norm(y);
    if (!(norm > 0.0) || !std::isfinite(norm))
      throw NumericalError(kModule, "power iteration produced a zero or non-finite iterate");
    for (std::size_t i = 0; i < n; ++i) r.x[i] = y[i] / norm;
    const double estimate = r.shifted ? norm - eps : norm;
    r.iterations = it + 1;
    if (std::abs(estimate - previous) <= opt.relative_tolerance * std::abs(estimate)) {
      r.rho = estimate;
      r.converged = true;
      return r;
    }
    previous = estimate;
    if (!r.shifted && since_shift + 1 >= opt.shift_after) {
      r.shifted = true;
      previous = std::numeric_limits<double>::quiet_NaN();
      since_shift = 0;
    }
  }
  r.rho = previous;
  return r;
}

// One inverse-iteration step at shift sigma, normalized to a positive
// dominant entry.
void inverse_step(const Matrix& m, double sigma, Vector& x) {
  Matrix a = m;
  for (std::size_t i = 0; i < a.rows(); ++i) a(i, i) -= sigma;
  Vector y = solve_nudged(std::move(a), x);
  std::size_t arg = 0;
  for (std::size_t i = 1; i < y.size(); ++i)
    if (std::abs(y[i]) > std::abs(y[arg])) arg = i;
  const double scale = y[arg];
  if (!std::isfinite(scale) || scale == 0.0) return;
  for (double& yi : y) yi /= scale;
  if (std::all_of(y.begin(), y.end(), [](double t) { return std::isfinite(t); })) x = std::move(y);
}

// Componentwise relative agreement to a few ulps.
bool settled(const Vector& a, const Vector& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > 4 * std::numeric_limits<double>::epsilon() * std::abs(b[i]))
      return false;
  return true;
}

void normalize_sup(Vector& x) {
  const double s = sup_norm(x);
  if (s > 0.0)
    for (double& xi : x) xi /= s;
}

double residual_of(const Matrix& m, double rho, const Vector& u, const Vector& v) {
  const Vector mv = multiply(m, v);
  const Vector um = left_multiply(u, m);
  double r = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    r = std::max(r, std::abs(mv[i] - rho * v[i]));
    r = std::max(r, std::abs(um[i] - rho * u[i]));
  }
  return r;
}

void check_square_nonnegative(const Matrix& m) {
  if (!m.square() || m.rows() == 0) throw InputError(kModule, "matrix must be square and nonempty");
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (!(m(i, j) >= 0.0) || !std::isfinite(m(i, j)))
        throw InputError(kModule, "matrix entries must be finite and nonnegative");
}

std::string describe(const StateSet& s) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << '}';
  return os.str();
}

// Osborne balancing with exact power-of-two factors: returns d with
// D^{-1} M D having comparable off-diagonal row and column sums. Tilts far out
// in θ are badly scaled (ρ far below the largest entry), which defeats both the
// convergence test and the ε-shift; the similarity fixes that without changing
// the spectrum. The sweeps only choose exponents; the balanced matrix is then
// rebuilt from M in one exact step, and balancing is skipped when that would
// leave an entry outside the normal range.
Vector balance(Matrix& m) {
  const std::size_t n = m.rows();
  std::vector<int> e(n, 0);
  Matrix b = m;
  for (int sweep = 0; sweep < 200; ++sweep) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) {
          c += b(j, i);
          r += b(i, j);
        }
      if (c == 0.0 || r == 0.0) continue;
      const double total = c + r;
      int k = 0;
      while (c < r / 2) {
        ++k;
        c *= 4;
      }
      while (c >= r * 2) {
        --k;
        c /= 4;
      }
      if ((c + r) / std::ldexp(1.0, k) >= 0.95 * total) continue;
      changed = true;
      e[i] += k;
      for (std::size_t j = 0; j < n; ++j) {
        b(i, j) = std::ldexp(b(i, j), -k);
        b(j, i) = std::ldexp(b(j, i), k);
      }
    }
    if (!changed) break;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (m(i, j) == 0.0) continue;
      b(i, j) = std::ldexp(m(i, j), e[j] - e[i]);
      if (!std::isnormal(b(i, j))) return Vector(n, 1.0);
    }
  m = std::move(b);
  Vector d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = std::ldexp(1.0, e[i]);
  return d;
}

}  // namespace

double perron_tolerance(double max_entry, double v_scale) {
  return 1e-11 * max_entry * std::max(1.0, v_scale);
}

PerronTriple pf_irreducible(const Matrix& m, const PerronOptions& options) {
  check_square_nonnegative(m);
  const std::size_t n = m.rows();
  PerronTriple t;
  if (n == 1) {
    if (!(m(0, 0) > 0.0)) throw InputError(kModule, "1x1 matrix must be positive");
    t.rho = m(0, 0);
    t.u = {1.0};
    t.v = {1.0};
    return t;
  }

  const bool periodic = period(m) > 1;
  Matrix mb = m;
  const Vector d = balance(mb);
  const Matrix mt = mb.transposed();
  PowerResult right = power_iterate(mb, periodic, options);
  PowerResult left = power_iterate(mt, periodic, options);
  t.iterations = std::max(right.iterations, left.iterations);
  t.shifted = right.shifted || left.shifted;

  Vector v = std::move(right.x);
  Vector u = std::move(left.x);
  double rho = right.rho;
  if (!std::isfinite(rho) || rho <= 0.0) rho = sup_norm(multiply(mb, v)) / sup_norm(v);

  for (std::size_t k = 0; k < options.polish_steps; ++k) {
    inverse_step(mb, rho, v);
    inverse_step(mt, rho, u);
    const double q = dot(u, multiply(mb, v)) / dot(u, v);
    if (std::isfinite(q) && q > 0.0) rho = q;
  }
  // Plain power steps at the converged value restore strict positivity after
  // the (sign-agnostic) inverse iteration. Entries far below the vector scale
  // can come out of the solve as rounding-level negatives; they start at zero
  // and the steps continue until every component has settled.
  for (double& x : v) x = std::max(x, 0.0);
  for (double& x : u) x = std::max(x, 0.0);
  for (std::size_t k = 0; k < n + kSettleSteps; ++k) {
    const Vector pv = v, pu = u;
    v = multiply(mb, v);
    normalize_sup(v);
    u = left_multiply(u, mb);
    normalize_sup(u);
    if (k + 1 >= n && settled(pv, v) && settled(pu, u)) break;
  }
  rho = dot(u, multiply(mb, v)) / dot(u, v);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] *= d[i];
    u[i] /= d[i];
  }

  for (double x : v)
    if (!(x > 0.0))
      throw NumericalError(kModule, "right Perron vector lost positivity (ill-conditioned matrix)");
  for (double x : u)
    if (x < 0.0)
      throw NumericalError(kModule, "left Perron vector lost nonnegativity (ill-conditioned matrix)");

  const double su = sum(u);
  for (double& x : u) x /= su;
  const double uv = dot(u, v);
  for (double& x : v) x /= uv;

  t.rho = rho;
  t.u = std::move(u);
  t.v = std::move(v);
  t.residual = residual_of(m, t.rho, t.u, t.v);
  const double tol = perron_tolerance(m.max_entry(), sup_norm(t.v));
  if (!(t.residual <= tol)) {
    std::ostringstream os;
    os.precision(3);
    os << "Perron iteration did not converge: residual " << t.residual << " > tolerance " << tol
       << " after " << t.iterations << " iterations";
    throw NumericalError(kModule, os.str());
  }
  return t;
}

void check_structure(const Matrix& m, const BlockStructure& s) {
  const std::size_t n = m.rows();
  if (!m.square()) throw InputError(kModule, "structure mismatch: matrix not square");
  if (s.core.empty()) throw InputError(kModule, "structure mismatch: empty core");
  if (s.witness.size() != s.fringe.size())
    throw InputError(kModule, "structure mismatch: one witness per fringe state required");
  std::vector<int> role(n, -1);
  for (std::size_t x : s.core) {
    if (x >= n || role[x] != -1) throw InputError(kModule, "structure mismatch: bad core index");
    role[x] = 0;
  }
  for (std::size_t x : s.fringe) {
    if (x >= n || role[x] != -1) throw InputError(kModule, "structure mismatch: bad fringe index");
    role[x] = 1;
  }
  if (std::count(role.begin(), role.end(), -1) != 0)
    throw InputError(kModule, "structure mismatch: core and fringe must cover all states");
  for (std::size_t y = 0; y < n; ++y) {
    if (role[y] == 0) continue;
    for (std::size_t x = 0; x < n; ++x)
      if (m(x, y) != 0.0)
        throw InputError(kModule, "structure mismatch: column " + std::to_string(y) +
                                      " is outside the core but has a nonzero entry");
  }
  for (std::size_t i = 0; i < s.fringe.size(); ++i) {
    const std::size_t w = s.witness[i];
    if (w >= n || role[w] != 0 || !(m(s.fringe[i], w) > 0.0))
      throw InputError(kModule, "structure mismatch: fringe state " + std::to_string(s.fringe[i]) +
                                    " has no positive entry into the core at its witness");
  }
  if (!is_irreducible(m.principal(s.core)))
    throw InputError(kModule, "structure mismatch: core block " + describe(s.core) +
                                  " is not irreducible");
}

bool infer_structure(const Matrix& m, BlockStructure& s) {
  s = {};
  const std::size_t n = m.rows();
  for (std::size_t y = 0; y < n; ++y) {
    bool nonzero = false;
    for (std::size_t x = 0; x < n && !nonzero; ++x) nonzero = m(x, y) != 0.0;
    (nonzero ? s.core : s.fringe).push_back(y);
  }
  for (std::size_t x : s.fringe) {
    std::size_t best = n;
    for (std::size_t y : s.core)
      if (m(x, y) > 0.0 && (best == n || m(x, y) > m(x, best))) best = y;
    if (best == n) return false;
    s.witness.push_back(best);
  }
  try {
    check_structure(m, s);
  } catch (const InputError&) {
    return false;
  }
  return true;
}

PerronTriple pf_extended(const Matrix& m, const BlockStructure& s, const PerronOptions& options) {
  check_square_nonnegative(m);
  check_structure(m, s);
  const PerronTriple core = pf_irreducible(m.principal(s.core), options);

  const std::size_t n = m.rows();
  PerronTriple t;
  t.rho = core.rho;
  t.iterations = core.iterations;
  t.shifted = core.shifted;
  t.u.assign(n, 0.0);
  t.v.assign(n, 0.0);
  for (std::size_t i = 0; i < s.core.size(); ++i) {
    t.u[s.core[i]] = core.u[i];
    t.v[s.core[i]] = core.v[i];
  }
  for (std::size_t x : s.fringe) {
    double acc = 0.0;
    for (std::size_t i = 0; i < s.core.size(); ++i) acc += m(x, s.core[i]) * core.v[i];
    t.v[x] = acc / core.rho;
  }
  t.residual = residual_of(m, t.rho, t.u, t.v);
  return t;
}

PerronTriple pf_closed_core(const Matrix& m, const PerronOptions& options) {
  check_square_nonnegative(m);
  const std::size_t n = m.rows();
  // Walk down the reachability order until reaching a closed communicating class.
  std::size_t root = 0;
  std::vector<bool> core = reachable_from(m, root);
  for (bool moved = true; moved;) {
    moved = false;
    for (std::size_t y = 0; y < n && !moved; ++y) {
      if (!core[y] || y == root) continue;
      std::vector<bool> r = reachable_from(m, y);
      if (!r[root]) {
        root = y;
        core = std::move(r);
        moved = true;
      }
    }
  }
  BlockStructure s;
  for (std::size_t x = 0; x < n; ++x) (core[x] ? s.core : s.fringe).push_back(x);
  const Matrix a = m.principal(s.core);
  if (!is_irreducible(a))
    throw NumericalError(kModule, "closed class " + describe(s.core) + " has no cycle");
  for (std::size_t x : s.fringe) {
    const std::vector<bool> r = reachable_from(m, x);
    if (std::none_of(s.core.begin(), s.core.end(), [&](std::size_t c) { return r[c]; }))
      throw NumericalError(kModule, "state " + std::to_string(x) +
                                        " cannot reach the closed class " + describe(s.core));
  }

  const PerronTriple inner = pf_irreducible(a, options);
  PerronTriple t;
  t.rho = inner.rho;
  t.iterations = inner.iterations;
  t.shifted = inner.shifted;
  t.u.assign(n, 0.0);
  t.v.assign(n, 0.0);
  for (std::size_t i = 0; i < s.core.size(); ++i) {
    t.u[s.core[i]] = inner.u[i];
    t.v[s.core[i]] = inner.v[i];
  }
  if (!s.fringe.empty()) {
    // (ρ I - D) v_R = B v_A. A positive solution of this Z-matrix system with
    // B v_A ≥ 0, where every fringe row reaches a row with B v_A > 0,
    // certifies ρ(D) < ρ (nonsingular M-matrix).
    const std::size_t k = s.fringe.size();
    Matrix sys(k, k);
    Vector rhs(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t x = s.fringe[i];
      for (std::size_t j = 0; j < k; ++j) sys(i, j) = -m(x, s.fringe[j]);
      sys(i, i) += t.rho;
      for (std::size_t c = 0; c < s.core.size(); ++c) rhs[i] += m(x, s.core[c]) * inner.v[c];
    }
    const Vector vr = solve_nudged(std::move(sys), std::move(rhs));
    for (std::size_t i = 0; i < k; ++i) {
      if (!(vr[i] > 0.0) || !std::isfinite(vr[i]))
        throw NumericalError(kModule, "closed class " + describe(s.core) +
                                          " does not dominate the remaining states");
      t.v[s.fringe[i]] = vr[i];
    }
  }
  t.residual = residual_of(m, t.rho, t.u, t.v);
  const double tol = perron_tolerance(m.max_entry(), sup_norm(t.v));
  if (!(t.residual <= tol)) {
    std::ostringstream os;
    os.precision(3);
    os << "closed-class Perron triple residual " << t.residual << " > tolerance " << tol;
    throw NumericalError(kModule, os.str());
  }
  return t;
}

LimitMatrix limit_matrix(const MarkovModel& model, Side side) {
  const MarkovModel oriented = model.oriented(side);
  const AssumptionReport report = validate(oriented);
  if (!report.a1 || !report.a2) {
    std::string what = std::string("assumptions for the ") + std::string(to_string(side)) +
                       " tail do not hold";
    for (const auto& v : report.violations)
      if (v.id == 1 || v.id == 2) what += "; " + v.witness;
    throw AssumptionError(kModule, what);
  }

  const Matrix& p = oriented.transition();
  const std::size_t n = p.rows();
  std::vector<bool> in_core(n, false);
  for (std::size_t x : report.S_b) in_core[x] = true;

  LimitMatrix lim;
  lim.matrix = Matrix(n, n);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      if (in_core[y]) lim.matrix(x, y) = p(x, y);

  lim.structure.core = report.S_b;
  for (std::size_t x = 0; x < n; ++x) {
    if (in_core[x]) continue;
    std::size_t best = n;
    for (std::size_t y : report.S_b)
      if (p(x, y) > 0.0 && (best == n || p(x, y) > p(x, best))) best = y;
    lim.structure.fringe.push_back(x);
    lim.structure.witness.push_back(best);
  }
  lim.triple = pf_extended(lim.matrix, lim.structure);
  return lim;
}

}  // namespace tiltbound
