#include "tiltbound/model.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "tiltbound/error.hpp"

namespace tiltbound {
namespace {

constexpr const char* kModule = "matrix_core";

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

[[noreturn]] void fail(const std::string& what) { throw InputError(kModule, what); }

void check_probability_vector(const Vector& q, std::size_t n) {
  if (q.size() != n)
    fail("dimension mismatch: q has " + std::to_string(q.size()) + " entries, expected " +
         std::to_string(n));
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(q[i])) fail("q[" + std::to_string(i) + "] is not finite");
    if (q[i] < 0.0) fail("q[" + std::to_string(i) + "] is negative (" + num(q[i]) + ")");
    total += q[i];
  }
  if (std::abs(total - 1.0) > kStochasticTolerance)
    fail("q not a probability vector: sums to " + num(total));
}

// Iterative DFS; `transpose` walks edges backwards.
std::vector<bool> sweep(const Matrix& m, std::size_t from, bool transpose) {
  const std::size_t n = m.rows();
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{from};
  seen[from] = true;
  while (!stack.empty()) {
    const std::size_t x = stack.back();
    stack.pop_back();
    for (std::size_t y = 0; y < n; ++y) {
      const double w = transpose ? m(y, x) : m(x, y);
      if (w > 0.0 && !seen[y]) {
        seen[y] = true;
        stack.push_back(y);
      }
    }
  }
  return seen;
}

}  // namespace

std::string_view to_string(Side side) { return side == Side::upper ? "upper" : "lower"; }

Side parse_side(std::string_view text) {
  if (text == "upper") return Side::upper;
  if (text == "lower") return Side::lower;
  throw InputError("cli", "side must be 'upper' or 'lower', got '" + std::string(text) + "'");
}

MarkovModel::MarkovModel(std::vector<std::string> states, Matrix transition,
                         Vector observable, Vector initial)
    : states_(std::move(states)),
      transition_(std::move(transition)),
      observable_(std::move(observable)),
      initial_(std::move(initial)) {
  const std::size_t n = states_.size();
  if (n == 0) fail("model needs at least one state");
  if (std::set<std::string>(states_.begin(), states_.end()).size() != n)
    fail("state labels must be distinct");
  if (transition_.rows() != n || transition_.cols() != n)
    fail("dimension mismatch: P is " + std::to_string(transition_.rows()) + "x" +
         std::to_string(transition_.cols()) + " but there are " + std::to_string(n) +
         " states");
  if (observable_.size() != n)
    fail("dimension mismatch: f has " + std::to_string(observable_.size()) +
         " entries, expected " + std::to_string(n));
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(observable_[i])) fail("f[" + std::to_string(i) + "] is not finite");

  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double p = transition_(i, j);
      if (!std::isfinite(p))
        fail("P[" + std::to_string(i) + "][" + std::to_string(j) + "] is not finite");
      if (p < 0.0)
        fail("P[" + std::to_string(i) + "][" + std::to_string(j) + "] is negative (" +
             num(p) + ")");
      total += p;
    }
    if (std::abs(total - 1.0) > kStochasticTolerance)
      fail("row not stochastic: row " + std::to_string(i) + " (" + states_[i] + ") sums to " +
           num(total));
  }

  if (initial_.empty()) initial_.assign(n, 1.0 / static_cast<double>(n));
  check_probability_vector(initial_, n);
}

MarkovModel MarkovModel::with_observable(Vector observable) const {
  return MarkovModel(states_, transition_, std::move(observable), initial_);
}

MarkovModel MarkovModel::with_transition(Matrix transition) const {
  return MarkovModel(states_, std::move(transition), observable_, initial_);
}

MarkovModel MarkovModel::with_initial(Vector initial) const {
  return MarkovModel(states_, transition_, observable_, std::move(initial));
}

MarkovModel MarkovModel::negated() const {
  Vector g(observable_.size());
  std::transform(observable_.begin(), observable_.end(), g.begin(),
                 [](double x) { return -x; });
  return with_observable(std::move(g));
}

MarkovModel MarkovModel::oriented(Side side) const {
  return side == Side::upper ? *this : negated();
}

MarkovModel make_model(Matrix transition, Vector observable, Vector initial) {
  std::vector<std::string> labels(observable.size());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = std::to_string(i);
  return MarkovModel(std::move(labels), std::move(transition), std::move(observable),
                     std::move(initial));
}

MarkovModel load_model(std::string_view text) {
  YAML::Node doc;
  try {
    doc = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    fail(std::string("parse failure: ") + e.what());
  }
  if (!doc.IsMap()) fail("parse failure: model document must be a mapping");

  try {
    if (!doc["P"]) fail("parse failure: missing key 'P'");
    if (!doc["f"]) fail("parse failure: missing key 'f'");

    const YAML::Node p_node = doc["P"];
    if (!p_node.IsSequence()) fail("parse failure: 'P' must be a list of rows");
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < p_node.size(); ++i) {
      if (!p_node[i].IsSequence())
        fail("parse failure: row " + std::to_string(i) + " of 'P' is not a list");
      rows.push_back(p_node[i].as<std::vector<double>>());
      if (rows.back().size() != p_node.size())
        fail("dimension mismatch: row " + std::to_string(i) + " of P has " +
             std::to_string(rows.back().size()) + " entries, expected " +
             std::to_string(p_node.size()));
    }
    Vector f = doc["f"].as<std::vector<double>>();
    Vector q;
    if (doc["q"]) q = doc["q"].as<std::vector<double>>();

    std::vector<std::string> states;
    if (doc["states"]) {
      states = doc["states"].as<std::vector<std::string>>();
    } else {
      for (std::size_t i = 0; i < rows.size(); ++i) states.push_back(std::to_string(i));
    }
    return MarkovModel(std::move(states), Matrix::from_rows(rows), std::move(f),
                       std::move(q));
  } catch (const YAML::Exception& e) {
    fail(std::string("parse failure: ") + e.what());
  }
}

MarkovModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open model file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_model(buf.str());
}

std::string dump_model(const MarkovModel& model) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "states" << YAML::Value << YAML::Flow << model.states();
  out << YAML::Key << "P" << YAML::Value << YAML::BeginSeq;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto r = model.transition().row(i);
    out << YAML::Flow << std::vector<double>(r.begin(), r.end());
  }
  out << YAML::EndSeq;
  out << YAML::Key << "f" << YAML::Value << YAML::Flow << model.observable();
  out << YAML::Key << "q" << YAML::Value << YAML::Flow << model.initial();
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::vector<bool> reachable_from(const Matrix& m, std::size_t from) {
  return sweep(m, from, false);
}

bool is_irreducible(const Matrix& m) {
  if (!m.square() || m.rows() == 0) return false;
  if (m.rows() == 1) return m(0, 0) > 0.0;
  const auto fwd = sweep(m, 0, false);
  const auto bwd = sweep(m, 0, true);
  return std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
         std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
}

std::size_t period(const Matrix& m) {
  const std::size_t n = m.rows();
  // BFS levels from state 0; the period is the gcd of level(x)+1-level(y)
  // over all edges x->y.
  std::vector<long> level(n, -1);
  std::vector<std::size_t> queue{0};
  level[0] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::size_t x = queue[head];
    for (std::size_t y = 0; y < n; ++y)
      if (m(x, y) > 0.0 && level[y] < 0) {
        level[y] = level[x] + 1;
        queue.push_back(y);
      }
  }
  long g = 0;
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y)
      if (m(x, y) > 0.0 && level[x] >= 0 && level[y] >= 0)
        g = std::gcd(g, std::labs(level[x] + 1 - level[y]));
  return g == 0 ? 1 : static_cast<std::size_t>(g);
}

LevelSets level_sets(const MarkovModel& model) {
  const Vector& f = model.observable();
  LevelSets ls;
  ls.a = *std::min_element(f.begin(), f.end());
  ls.b = *std::max_element(f.begin(), f.end());
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] == ls.b) ls.S_b.push_back(i);
    if (f[i] == ls.a) ls.S_a.push_back(i);
  }
  return ls;
}

}  // namespace tiltbound
