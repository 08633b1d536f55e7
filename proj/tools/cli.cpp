#include "cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "tiltbound/assumptions.hpp"
#include "tiltbound/bounds.hpp"
#include "tiltbound/error.hpp"
#include "tiltbound/family.hpp"
#include "tiltbound/sim.hpp"

#ifndef TILTBOUND_VERSION
#define TILTBOUND_VERSION "0.0.0"
#endif

namespace tiltbound::cli {
namespace {

using json = nlohmann::ordered_json;

constexpr const char* kModule = "cli";
constexpr std::string_view kTool = "tiltbound";
constexpr std::string_view kVersion = TILTBOUND_VERSION;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_real(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InputError(kModule, fmt::format("not a number: '{}'", s));
  if (!std::isfinite(value)) throw InputError(kModule, fmt::format("not finite: '{}'", s));
  return value;
}

std::int64_t parse_int(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InputError(kModule, fmt::format("not an integer: '{}'", s));
  return value;
}

template <class T>
void sort_unique(std::vector<T>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// ---------------------------------------------------------------- reporting

json num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

json labels(const MarkovModel& model, const StateSet& set) {
  json out = json::array();
  for (std::size_t i : set) out.push_back(model.states()[i]);
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::numerical, kModule, "SHA-256 computation failed");
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string text_scalar(const json& v, bool full_precision = false) {
  if (v.is_number_float()) {
    const double x = v.get<double>();
    return full_precision ? fmt::format("{}", x) : fmt::format("{:.10g}", x);
  }
  if (v.is_number()) return v.dump();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "-";
  if (v.is_array()) {
    std::vector<std::string> items;
    for (const auto& x : v) items.push_back(text_scalar(x, full_precision));
    if (items.size() > 6)
      return fmt::format("{{{}, {}, ..., {}}} ({} values)", items[0], items[1], items.back(),
                         items.size());
    return fmt::format("{{{}}}", fmt::join(items, ", "));
  }
  return v.dump();
}

bool is_table(const json& v) {
  return v.is_array() && !v.empty() && std::all_of(v.begin(), v.end(), [](const json& x) {
           return x.is_object();
         });
}

void render_table(const json& rows, std::ostream& os, const std::string& indent) {
  std::vector<std::string> columns;
  for (const auto& [key, _] : rows.front().items()) columns.push_back(key);
  std::vector<std::vector<std::string>> cells;
  std::vector<std::size_t> width(columns.size());
  std::vector<bool> numeric(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    width[c] = columns[c].size();
    numeric[c] = rows.front()[columns[c]].is_number();
  }
  for (const auto& row : rows) {
    auto& line = cells.emplace_back();
    for (std::size_t c = 0; c < columns.size(); ++c) {
      line.push_back(row.contains(columns[c]) ? text_scalar(row[columns[c]]) : "");
      width[c] = std::max(width[c], line.back().size());
    }
  }
  auto emit = [&](const std::vector<std::string>& line) {
    std::string s = indent;
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c) s += "  ";
      s += numeric[c] ? fmt::format("{:>{}}", line[c], width[c])
                      : fmt::format("{:<{}}", line[c], width[c]);
    }
    while (!s.empty() && s.back() == ' ') s.pop_back();
    os << s << '\n';
  };
  emit(columns);
  for (const auto& line : cells) emit(line);
}

void render_object(const json& obj, std::ostream& os, const std::string& indent) {
  auto is_section = [](const json& v) { return v.is_object() || is_table(v); };
  std::size_t width = 0;
  for (const auto& [key, value] : obj.items())
    if (!is_section(value)) width = std::max(width, key.size());
  for (const auto& [key, value] : obj.items()) {
    if (is_section(value)) continue;
    const std::string text = value.is_array() && value.empty() ? "(none)" : text_scalar(value);
    os << indent << fmt::format("{:<{}}  {}", key, width, text) << '\n';
  }
  for (const auto& [key, value] : obj.items()) {
    if (!is_section(value)) continue;
    os << '\n' << indent << '[' << key << "]\n";
    if (value.is_object())
      render_object(value, os, indent + "  ");
    else
      render_table(value, os, indent + "  ");
  }
}

void render_header(const json& report, std::ostream& os) {
  os << "# " << kTool << ' ' << report["version"].get<std::string>() << ' '
     << report["command"].get<std::string>() << '\n';
  os << "# model " << report["model"]["path"].get<std::string>()
     << " sha256=" << report["model"]["sha256"].get<std::string>() << '\n';
  std::vector<std::string> params;
  for (const auto& [key, value] : report["parameters"].items())
    params.push_back(fmt::format("{}={}", key, text_scalar(value)));
  os << "# parameters " << fmt::format("{}", fmt::join(params, " ")) << '\n';
}

std::string csv_cell(const json& v) {
  std::string s = text_scalar(v, true);
  if (s.find_first_of(",\"\n") != std::string::npos) {
    std::string quoted = "\"";
    for (char c : s) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    return quoted + '"';
  }
  return s;
}

void render_csv(const json& report, std::ostream& os) {
  render_header(report, os);
  const json& rows = report["result"]["rows"];
  if (rows.empty()) return;
  std::vector<std::string> columns;
  for (const auto& [key, _] : rows.front().items()) columns.push_back(key);
  os << fmt::format("{}", fmt::join(columns, ",")) << '\n';
  for (const auto& row : rows) {
    std::vector<std::string> cells;
    for (const auto& c : columns) cells.push_back(csv_cell(row[c]));
    os << fmt::format("{}", fmt::join(cells, ",")) << '\n';
  }
}

void render(const json& report, Format format, std::ostream& os) {
  switch (format) {
    case Format::machine:
      os << report.dump(2) << '\n';
      break;
    case Format::csv:
      render_csv(report, os);
      break;
    case Format::text:
      render_header(report, os);
      os << '\n';
      render_object(report["result"], os, "");
      break;
  }
}

// ----------------------------------------------------------------- commands

struct Outcome {
  json result;
  int status = kExitOk;
};

Side side_or_upper(const RunConfig& c) { return c.side.value_or(Side::upper); }

json constants_json(const BoundConstants& c) {
  json j;
  j["side"] = std::string(to_string(c.side));
  j["K"] = num(c.K);
  j["L"] = num(c.L);
  j["sigma2"] = num(c.sigma2);
  j["rho_inf"] = num(c.rho_inf);
  j["a"] = num(c.a);
  j["b"] = num(c.b);
  j["stationary_mean"] = num(c.stationary_mean);
  const GridSummary& g = c.grid;
  j["grid_summary"] = {
      {"theta_max", num(g.theta_max)},
      {"rounds", g.rounds},
      {"points", g.points},
      {"converged", g.converged},
      {"K_at_limit", g.K_at_limit},
      {"K_argmax", num(g.K_argmax)},
      {"L_argmax", num(g.L_argmax)},
      {"sigma2_argmax", num(g.sigma2_argmax)},
      {"tail_lambda2_at_theta_max", num(g.tail_lambda2_at_theta_max)},
      {"tail_lambda2_at_twice_theta_max", num(g.tail_lambda2_at_twice_theta_max)},
  };
  return j;
}

void warn_unconverged(const BoundConstants& c, std::ostream& err) {
  if (!c.grid.converged)
    err << kTool << ": warning [bounds]: " << to_string(c.side)
        << " constants: grid refinement budget exhausted, values are best-so-far\n";
}

Outcome cmd_validate(const MarkovModel& model, const RunConfig& config) {
  const AssumptionReport r = validate(model);
  const LevelSets ls = level_sets(model);
  Outcome o;
  json& j = o.result;
  j["irreducible"] = true;
  j["a"] = num(ls.a);
  j["b"] = num(ls.b);
  j["S_b"] = labels(model, r.S_b);
  j["S_a"] = labels(model, r.S_a);
  j["A1"] = r.a1;
  j["A2"] = r.a2;
  j["A3"] = r.a3;
  j["A4"] = r.a4;
  j["upper_tail_supported"] = r.upper();
  j["lower_tail_supported"] = r.lower();
  json violations = json::array();
  for (const Violation& v : r.violations)
    violations.push_back(
        {{"assumption", fmt::format("A{}", v.id)}, {"witness", v.witness}, {"states", labels(model, v.states)}});
  j["violations"] = violations;
  const bool ok = config.side ? r.holds(*config.side) : r.all();
  j["checked"] = config.side ? std::string(to_string(*config.side)) : std::string("both");
  j["pass"] = ok;
  o.status = ok ? kExitOk : kExitInvalid;
  return o;
}

Outcome cmd_spectrum(const MarkovModel& model, const RunConfig& config) {
  const Family fam(model);
  const MeanSet ms = mean_set(fam);
  Outcome o;
  json& j = o.result;
  j["degenerate"] = ms.degenerate;
  j["stationary_mean"] = num(ms.stationary_mean);
  j["mean_set_lo"] = num(ms.lo);
  j["mean_set_hi"] = num(ms.hi);
  json rows = json::array();
  for (double theta : config.theta) {
    const auto pt = fam.point(theta);
    rows.push_back({{"theta", num(theta)},
                    {"Lambda", num(pt->Lambda)},
                    {"Lambda1", num(pt->mean)},
                    {"Lambda2", num(fam.lambda_second(theta))},
                    {"rho", num(std::exp(pt->Lambda))}});
  }
  j["rows"] = rows;
  return o;
}

Outcome cmd_rate(const MarkovModel& model, const RunConfig& config) {
  const Side side = side_or_upper(config);
  const Family fam(model);
  const MeanSet ms = mean_set(fam);
  Outcome o;
  json& j = o.result;
  j["side"] = std::string(to_string(side));
  j["stationary_mean"] = num(ms.stationary_mean);
  j["a"] = num(fam.a());
  j["b"] = num(fam.b());
  j["degenerate"] = ms.degenerate;
  json rows = json::array();
  for (double mu : config.mu) {
    const RatePoint r = rate_function(fam, mu, side);
    rows.push_back({{"mu", num(r.mu)}, {"theta_mu", num(r.theta_mu)}, {"value", num(r.value)}});
  }
  j["rows"] = rows;
  return o;
}

Outcome cmd_constants(const MarkovModel& model, const RunConfig& config, std::ostream& err) {
  const BoundConstants c = constants(model, side_or_upper(config));
  warn_unconverged(c, err);
  return {constants_json(c), kExitOk};
}

json bound_json(const BoundReport& r) {
  return {{"side", std::string(to_string(r.side))},
          {"n", r.n},
          {"mu", num(r.mu)},
          {"rate", num(r.rate)},
          {"theta_mu", num(r.theta_mu)},
          {"chernoff", num(r.chernoff)},
          {"hoeffding_sigma", num(r.hoeffding_sigma)},
          {"hoeffding_range", num(r.hoeffding_range)},
          {"chernoff_clipped", num(r.chernoff_clipped)},
          {"hoeffding_sigma_clipped", num(r.hoeffding_sigma_clipped)},
          {"hoeffding_range_clipped", num(r.hoeffding_range_clipped)},
          {"ordering_holds",
           r.chernoff <= r.hoeffding_sigma + 1e-12 && r.hoeffding_sigma <= r.hoeffding_range + 1e-12}};
}

Outcome cmd_bound(const MarkovModel& model, const RunConfig& config, std::ostream& err) {
  const std::int64_t n = config.n.front();
  Outcome o;
  json& j = o.result;
  if (!config.mu.empty()) {
    const BoundConstants c = constants(model, side_or_upper(config));
    warn_unconverged(c, err);
    j = bound_json(evaluate_bounds(model, c, n, config.mu.front()));
    j["constants"] = constants_json(c);
  }
  if (config.interval) {
    require_side(model, Side::upper, "bounds");
    require_side(model, Side::lower, "bounds");
    const BoundConstants up = constants(model, Side::upper);
    const BoundConstants lo = constants(model, Side::lower);
    warn_unconverged(up, err);
    warn_unconverged(lo, err);
    const auto [a, b] = *config.interval;
    j["two_sided"] = {{"lo", num(a)},
                      {"hi", num(b)},
                      {"n", n},
                      {"K_upper", num(up.K)},
                      {"K_lower", num(lo.K)},
                      {"value", num(two_sided_bound(model, up, lo, n, a, b))}};
  }
  return o;
}

Outcome cmd_simulate(const MarkovModel& model, const RunConfig& config, std::ostream& err) {
  const Side side = side_or_upper(config);
  const std::int64_t n = config.n.front();
  const double mu = config.mu.front();
  const BoundConstants c = constants(model, side);
  warn_unconverged(c, err);
  const BoundReport b = evaluate_bounds(model, c, n, mu);
  const TailEstimate t = empirical_tail(model, n, mu, side, config.trials, config.seed);
  Outcome o;
  json& j = o.result;
  j["estimate"] = {{"n", t.n},
                   {"mu", num(t.mu)},
                   {"side", std::string(to_string(t.side))},
                   {"trials", t.trials},
                   {"hits", t.hits},
                   {"p_hat", num(t.p_hat)},
                   {"ci_low", num(t.ci_low)},
                   {"ci_high", num(t.ci_high)},
                   {"seed", t.seed}};
  j["bound"] = bound_json(b);
  j["consistent"] = t.ci_low <= b.chernoff && t.ci_low <= b.hoeffding_sigma &&
                    t.ci_low <= b.hoeffding_range;
  return o;
}

Outcome cmd_ergodic(const MarkovModel& model, const RunConfig& config, std::ostream& err) {
  require_side(model, Side::upper, "sim");
  require_side(model, Side::lower, "sim");
  const BoundConstants up = constants(model, Side::upper);
  const BoundConstants lo = constants(model, Side::lower);
  warn_unconverged(up, err);
  warn_unconverged(lo, err);
  const double K = std::max(up.K, lo.K);
  Outcome o;
  json& j = o.result;
  j["K"] = num(K);
  json rows = json::array();
  bool all_pass = true;
  for (double theta : config.theta) {
    for (std::int64_t n : config.n) {
      const ErgodicCheck e = ergodic_check(model, theta, n, K);
      all_pass = all_pass && e.pass;
      rows.push_back({{"theta", num(e.theta)},
                      {"n", e.n},
                      {"Lambda_n", num(e.Lambda_n)},
                      {"Lambda", num(e.Lambda)},
                      {"gap", num(e.gap)},
                      {"bound", num(e.bound)},
                      {"pass", e.pass}});
    }
  }
  j["all_pass"] = all_pass;
  j["rows"] = rows;
  return o;
}

json parameters_json(const RunConfig& c) {
  json p;
  auto reals = [](const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(num(x));
    return a;
  };
  switch (c.command) {
    case Command::validate:
      p["side"] = c.side ? std::string(to_string(*c.side)) : std::string("both");
      break;
    case Command::spectrum:
      p["theta"] = reals(c.theta);
      break;
    case Command::rate:
      p["side"] = std::string(to_string(side_or_upper(c)));
      p["mu"] = reals(c.mu);
      break;
    case Command::constants:
      p["side"] = std::string(to_string(side_or_upper(c)));
      break;
    case Command::bound:
      p["side"] = std::string(to_string(side_or_upper(c)));
      if (!c.mu.empty()) p["mu"] = num(c.mu.front());
      if (c.interval) p["interval"] = {num(c.interval->first), num(c.interval->second)};
      p["n"] = c.n.front();
      break;
    case Command::simulate:
      p["side"] = std::string(to_string(side_or_upper(c)));
      p["mu"] = num(c.mu.front());
      p["n"] = c.n.front();
      p["trials"] = c.trials;
      p["seed"] = c.seed;
      break;
    case Command::ergodic:
      p["theta"] = reals(c.theta);
      p["n"] = c.n;
      break;
  }
  p["format"] = std::string(to_string(c.format));
  return p;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(kModule, fmt::format("cannot read model file '{}'", path.string()));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::validate: return "validate";
    case Command::spectrum: return "spectrum";
    case Command::rate: return "rate";
    case Command::constants: return "constants";
    case Command::bound: return "bound";
    case Command::simulate: return "simulate";
    case Command::ergodic: return "ergodic";
  }
  return "?";
}

std::string_view to_string(Format format) {
  switch (format) {
    case Format::text: return "text";
    case Format::machine: return "machine";
    case Format::csv: return "csv";
  }
  return "?";
}

Format parse_format(std::string_view text) {
  if (text == "text") return Format::text;
  if (text == "machine") return Format::machine;
  if (text == "csv") return Format::csv;
  throw InputError(kModule, fmt::format("unknown format '{}' (expected text|machine|csv)", text));
}

std::vector<double> parse_real_grid(std::string_view text) {
  std::vector<double> grid;
  if (text.find(':') != std::string_view::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw InputError(kModule, fmt::format("grid '{}' is not lo:hi:count", text));
    const double lo = parse_real(parts[0]);
    const double hi = parse_real(parts[1]);
    const std::int64_t count = parse_int(parts[2]);
    if (count < 1) throw InputError(kModule, fmt::format("grid '{}' needs count >= 1", text));
    if (lo > hi) throw InputError(kModule, fmt::format("grid '{}' needs lo <= hi", text));
    grid = linear_grid(lo, hi, static_cast<std::size_t>(count));
  } else {
    for (auto part : split(text, ',')) grid.push_back(parse_real(part));
  }
  sort_unique(grid);
  return grid;
}

std::vector<std::int64_t> parse_int_range(std::string_view text) {
  std::vector<std::int64_t> values;
  if (text.find(':') != std::string_view::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 2) throw InputError(kModule, fmt::format("range '{}' is not lo:hi", text));
    const std::int64_t lo = parse_int(parts[0]);
    const std::int64_t hi = parse_int(parts[1]);
    if (lo > hi) throw InputError(kModule, fmt::format("range '{}' needs lo <= hi", text));
    if (hi - lo > 10'000'000) throw InputError(kModule, fmt::format("range '{}' is too long", text));
    for (std::int64_t k = lo; k <= hi; ++k) values.push_back(k);
  } else {
    for (auto part : split(text, ',')) values.push_back(parse_int(part));
  }
  sort_unique(values);
  return values;
}

std::pair<double, double> parse_interval(std::string_view text) {
  const auto parts = split(text, ',');
  if (parts.size() != 2) throw InputError(kModule, fmt::format("interval '{}' is not LO,HI", text));
  const double lo = parse_real(parts[0]);
  const double hi = parse_real(parts[1]);
  if (lo > hi) throw InputError(kModule, fmt::format("interval '{}' needs LO <= HI", text));
  return {lo, hi};
}

void check_config(const RunConfig& c) {
  const auto name = to_string(c.command);
  auto need = [&](bool present, std::string_view flag) {
    if (!present) throw InputError(kModule, fmt::format("{} requires {}", name, flag));
  };
  need(!c.model_path.empty(), "--model");
  switch (c.command) {
    case Command::validate:
    case Command::constants:
      break;
    case Command::spectrum:
      need(!c.theta.empty(), "--theta");
      break;
    case Command::rate:
      need(!c.mu.empty(), "--mu");
      break;
    case Command::bound:
      need(!c.mu.empty() || c.interval.has_value(), "--mu or --interval");
      need(c.mu.size() <= 1, "a single --mu value");
      need(c.n.size() == 1, "a single --n value");
      break;
    case Command::simulate:
      need(c.mu.size() == 1, "a single --mu value");
      need(c.n.size() == 1, "a single --n value");
      need(c.trials >= 1, "--trials >= 1");
      break;
    case Command::ergodic:
      need(!c.theta.empty(), "--theta");
      need(!c.n.empty(), "--n");
      break;
  }
  for (std::int64_t n : c.n)
    if (n < 1) throw InputError(kModule, fmt::format("--n values must be >= 1 (got {})", n));
  const bool grid_valued = c.command == Command::spectrum || c.command == Command::rate ||
                           c.command == Command::ergodic;
  if (c.format == Format::csv && !grid_valued)
    throw InputError(kModule, fmt::format("csv output is only available for spectrum, rate and ergodic"));
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    check_config(config);
    const std::string bytes = read_file(config.model_path);
    const MarkovModel model = load_model(bytes);

    Outcome outcome;
    switch (config.command) {
      case Command::validate: outcome = cmd_validate(model, config); break;
      case Command::spectrum: outcome = cmd_spectrum(model, config); break;
      case Command::rate: outcome = cmd_rate(model, config); break;
      case Command::constants: outcome = cmd_constants(model, config, err); break;
      case Command::bound: outcome = cmd_bound(model, config, err); break;
      case Command::simulate: outcome = cmd_simulate(model, config, err); break;
      case Command::ergodic: outcome = cmd_ergodic(model, config, err); break;
    }

    json report;
    report["tool"] = std::string(kTool);
    report["version"] = std::string(kVersion);
    report["command"] = std::string(to_string(config.command));
    report["model"] = {{"path", config.model_path.generic_string()},
                       {"sha256", sha256_hex(bytes)},
                       {"states", model.states()}};
    report["parameters"] = parameters_json(config);
    report["result"] = std::move(outcome.result);

    if (config.out) {
      std::ofstream file(*config.out, std::ios::binary);
      if (!file) throw InputError(kModule, fmt::format("cannot write '{}'", config.out->string()));
      render(report, config.format, file);
    } else {
      render(report, config.format, out);
    }
    return outcome.status;
  } catch (const Error& e) {
    err << kTool << ": error [" << e.module() << "]: " << e.what() << '\n';
    return e.kind() == ErrorKind::numerical ? kExitNumerical : kExitInvalid;
  } catch (const std::exception& e) {
    err << kTool << ": error [internal]: " << e.what() << '\n';
    return kExitNumerical;
  }
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite-sample Chernoff and Hoeffding tail bounds for Markov chains", std::string(kTool)};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1, 1);

  struct Raw {
    std::string model, side, mu, interval, n, theta, format = "text", out;
    std::uint64_t trials = 10000;
    std::uint64_t seed = 0;
  } raw;

  struct Subcommand {
    Command command;
    const char* help;
    bool side, mu, interval, n, theta, sim;
  };
  const Subcommand table[] = {
      {Command::validate, "Check the structural assumptions", true, false, false, false, false, false},
      {Command::spectrum, "Tabulate Lambda and its derivatives over a theta grid", false, false, false,
       false, true, false},
      {Command::rate, "Evaluate the rate function", true, true, false, false, false, false},
      {Command::constants, "Compute the bound constants K, L, sigma2", true, false, false, false, false,
       false},
      {Command::bound, "Evaluate Chernoff, Hoeffding and two-sided bounds", true, true, true, true,
       false, false},
      {Command::simulate, "Monte Carlo tail estimate next to the bounds", true, true, false, true,
       false, true},
      {Command::ergodic, "Compare Lambda_n with Lambda over theta and n grids", false, false, false,
       true, true, false},
  };

  std::vector<std::pair<CLI::App*, Command>> subcommands;
  for (const Subcommand& s : table) {
    CLI::App* sub = app.add_subcommand(std::string(to_string(s.command)), s.help);
    sub->add_option("--model", raw.model, "Model file (YAML or JSON)")->required();
    if (s.side) sub->add_option("--side", raw.side, "upper|lower");
    if (s.mu) sub->add_option("--mu", raw.mu, "Mean level (rate also takes a grid)");
    if (s.interval) sub->add_option("--interval", raw.interval, "Closed interval LO,HI");
    if (s.n) sub->add_option("--n", raw.n, "Sample size: INT, lo:hi or comma list");
    if (s.theta)
      sub->add_option("--theta", raw.theta,
                      s.command == Command::spectrum ? "Theta grid lo:hi:count or list (default -4:4:81)"
                                                     : "Theta grid lo:hi:count or list");
    if (s.sim) {
      sub->add_option("--trials", raw.trials, "Monte Carlo trials")->capture_default_str();
      sub->add_option("--seed", raw.seed, "Master seed")->capture_default_str();
    }
    sub->add_option("--format", raw.format, "text|machine|csv")->capture_default_str();
    sub->add_option("--out", raw.out, "Write the report to this file");
    subcommands.emplace_back(sub, s.command);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    RunConfig config;
    for (const auto& [sub, command] : subcommands)
      if (sub->parsed()) config.command = command;
    config.model_path = raw.model;
    if (!raw.side.empty()) config.side = parse_side(raw.side);
    if (!raw.mu.empty()) config.mu = parse_real_grid(raw.mu);
    if (!raw.interval.empty()) config.interval = parse_interval(raw.interval);
    if (!raw.n.empty()) config.n = parse_int_range(raw.n);
    if (!raw.theta.empty())
      config.theta = parse_real_grid(raw.theta);
    else if (config.command == Command::spectrum)
      config.theta = linear_grid(-4.0, 4.0, 81);
    config.trials = raw.trials;
    config.seed = raw.seed;
    config.format = parse_format(raw.format);
    if (!raw.out.empty()) config.out = raw.out;
    return run(config, out, err);
  } catch (const Error& e) {
    err << kTool << ": error [" << e.module() << "]: " << e.what() << '\n';
    return kExitInvalid;
  }
}

}  // namespace tiltbound::cli
