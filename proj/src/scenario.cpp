#include "mtd/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "canonical_margins.hpp"
#include "mtd/dynamics.hpp"
#include "mtd/errors.hpp"
#include "mtd/opt_structs.hpp"

namespace mtd {

namespace {

using json = nlohmann::json;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string arr(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += num(v[i]);
  }
  return out + "]";
}

std::string arr(const std::vector<int>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out + "]";
}

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ValidationError("scenario: " + path + ": " + msg);
}

void check_fields(const json& obj, const std::string& path,
                  std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* a : allowed) {
      if (it.key() == a) {
        known = true;
        break;
      }
    }
    if (!known) fail(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
  }
}

const json* find(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& need(const json& obj, const std::string& path, const char* key) {
  const json* v = find(obj, key);
  if (!v) fail(path, std::string("missing required field '") + key + "'");
  return *v;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

std::uint64_t as_seed(const json& v, const std::string& path) {
  if (!(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0))) {
    fail(path, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected a boolean");
  return v.get<bool>();
}

CostFunction parse_cost(const json& obj, const std::string& path, ShapeHint& shape_out) {
  if (!obj.is_object()) fail(path, "expected an object");
  check_fields(obj, path, {"kind", "params", "points", "shape"});
  const std::string kind = as_string(need(obj, path, "kind"), path + ".kind");
  shape_out = ShapeHint::None;
  if (const json* s = find(obj, "shape")) {
    const std::string v = as_string(*s, path + ".shape");
    if (v == "convex") {
      shape_out = ShapeHint::Convex;
    } else if (v == "concave") {
      shape_out = ShapeHint::Concave;
    } else {
      fail(path + ".shape", "expected \"convex\" or \"concave\" (got \"" + v + "\")");
    }
  }
  if (kind == "table") {
    const json& pts = need(obj, path, "points");
    if (find(obj, "params")) fail(path + ".params", "table costs take 'points', not 'params'");
    if (!pts.is_array() || pts.size() < 2) {
      fail(path + ".points", "expected an array of at least 2 [margin, cost] pairs");
    }
    std::vector<std::pair<double, double>> points;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::string ppath = path + ".points[" + std::to_string(i) + "]";
      if (!pts[i].is_array() || pts[i].size() != 2) fail(ppath, "expected a [margin, cost] pair");
      points.emplace_back(as_number(pts[i][0], ppath + "[0]"),
                          as_number(pts[i][1], ppath + "[1]"));
    }
    return CostFunction::table(std::move(points));
  }
  const json& params = need(obj, path, "params");
  if (find(obj, "points")) fail(path + ".points", "analytic costs take 'params', not 'points'");
  if (!params.is_array() || params.size() != 2) {
    fail(path + ".params", "expected an array of exactly 2 numbers");
  }
  const double p0 = as_number(params[0], path + ".params[0]");
  const double p1 = as_number(params[1], path + ".params[1]");
  if (kind == "affine") return CostFunction::affine(p0, p1);
  if (kind == "quadratic_shifted") return CostFunction::quadratic_shifted(p0, p1);
  if (kind == "sqrt_shifted") return CostFunction::sqrt_shifted(p0, p1);
  fail(path + ".kind", "expected one of \"affine\", \"quadratic_shifted\", \"sqrt_shifted\", "
                       "\"table\" (got \"" + kind + "\")");
}

std::shared_ptr<const AttackDefenseStructure> parse_generator(const json& obj,
                                                              const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  check_fields(obj, path, {"kind", "n", "leaves", "p", "seed"});
  const std::string kind = as_string(need(obj, path, "kind"), path + ".kind");
  if (kind == "complete") {
    return std::make_shared<AttackDefenseStructure>(
        generate_complete(as_int(need(obj, path, "n"), path + ".n")));
  }
  if (kind == "star") {
    return std::make_shared<AttackDefenseStructure>(
        generate_star(as_int(need(obj, path, "leaves"), path + ".leaves")));
  }
  if (kind == "path") {
    return std::make_shared<AttackDefenseStructure>(
        generate_path(as_int(need(obj, path, "n"), path + ".n")));
  }
  if (kind == "erdos_renyi") {
    return std::make_shared<AttackDefenseStructure>(generate_erdos_renyi(
        as_int(need(obj, path, "n"), path + ".n"), as_number(need(obj, path, "p"), path + ".p"),
        as_seed(need(obj, path, "seed"), path + ".seed")));
  }
  fail(path + ".kind",
       "expected one of \"complete\", \"star\", \"path\", \"erdos_renyi\" (got \"" + kind +
           "\")");
}

Configuration parse_configuration(const json& obj, const std::string& path,
                                  const std::string& base_dir) {
  if (!obj.is_object()) fail(path, "expected an object");
  check_fields(obj, path, {"id", "beta", "gamma", "lambda1", "graph_file", "directed",
                           "generator"});
  const int id = as_int(need(obj, path, "id"), path + ".id");
  const double beta = as_number(need(obj, path, "beta"), path + ".beta");
  const double gamma = as_number(need(obj, path, "gamma"), path + ".gamma");

  const json* lambda1 = find(obj, "lambda1");
  const json* graph_file = find(obj, "graph_file");
  const json* generator = find(obj, "generator");
  const int sources = (lambda1 != nullptr) + (graph_file != nullptr) + (generator != nullptr);
  if (sources != 1) {
    fail(path, "exactly one of 'lambda1', 'graph_file', 'generator' must be present (found " +
                   std::to_string(sources) + ")");
  }
  if (find(obj, "directed") && !graph_file) {
    fail(path + ".directed", "only applies to 'graph_file'");
  }

  if (lambda1) {
    return Configuration::with_lambda1(id, beta, gamma,
                                       as_number(*lambda1, path + ".lambda1"));
  }
  if (graph_file) {
    const std::string rel = as_string(*graph_file, path + ".graph_file");
    std::filesystem::path fp(rel);
    if (fp.is_relative() && !base_dir.empty()) fp = std::filesystem::path(base_dir) / fp;
    bool directed = false;
    if (const json* d = find(obj, "directed")) directed = as_bool(*d, path + ".directed");
    try {
      auto g = std::make_shared<AttackDefenseStructure>(
          load_edge_list_file(fp.string(), directed));
      return Configuration::with_structure(id, beta, gamma, std::move(g));
    } catch (const Error& e) {
      fail(path + ".graph_file", e.what());
    }
  }
  return Configuration::with_structure(id, beta, gamma,
                                       parse_generator(*generator, path + ".generator"));
}

}  // namespace

Scenario parse_scenario(const std::string& json_text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scenario: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ValidationError("scenario: top level must be an object");
  check_fields(root, "", {"version", "mode", "delta", "pi1", "cost", "constants", "simulation",
                          "configurations"});

  Scenario s;
  s.version = as_int(need(root, "(top level)", "version"), "version");
  if (s.version != 1) {
    fail("version", "unsupported version " + std::to_string(s.version) + " (expected 1)");
  }

  const std::string mode = as_string(need(root, "(top level)", "mode"), "mode");
  if (mode == "params") {
    s.mode = Scenario::Mode::Params;
  } else if (mode == "structures") {
    s.mode = Scenario::Mode::Structures;
  } else {
    fail("mode", "expected \"params\" or \"structures\" (got \"" + mode + "\")");
  }

  if (const json* v = find(root, "delta")) {
    const double d = as_number(*v, "delta");
    if (!(d >= 0.0) || !std::isfinite(d)) fail("delta", "must be a non-negative real");
    s.delta = d;
    s.constants.delta = d;
  }
  if (const json* v = find(root, "pi1")) {
    const double p = as_number(*v, "pi1");
    if (!(p >= 0.0 && p < 1.0)) fail("pi1", "must lie in [0, 1)");
    s.pi1 = p;
  }
  if (const json* v = find(root, "cost")) s.cost = parse_cost(*v, "cost", s.shape);
  if (const json* v = find(root, "constants")) {
    if (!v->is_object()) fail("constants", "expected an object");
    check_fields(*v, "constants", {"a", "b", "c"});
    s.constants.a = as_number(need(*v, "constants", "a"), "constants.a");
    s.constants.b = as_number(need(*v, "constants", "b"), "constants.b");
    s.constants.c = as_number(need(*v, "constants", "c"), "constants.c");
    s.has_constants = true;
  }
  if (const json* v = find(root, "simulation")) {
    if (!v->is_object()) fail("simulation", "expected an object");
    check_fields(*v, "simulation",
                 {"dt", "horizon", "seed", "initial_infection", "resolution", "output_stride",
                  "convergence_eps", "convergence_window"});
    SimulationSettings sim;
    sim.dt = as_number(need(*v, "simulation", "dt"), "simulation.dt");
    if (!(sim.dt > 0.0) || !std::isfinite(sim.dt)) fail("simulation.dt", "must be > 0");
    sim.horizon = as_number(need(*v, "simulation", "horizon"), "simulation.horizon");
    if (!(sim.horizon >= 0.0) || !std::isfinite(sim.horizon)) {
      fail("simulation.horizon", "must be a non-negative real");
    }
    sim.initial_infection =
        as_number(need(*v, "simulation", "initial_infection"), "simulation.initial_infection");
    if (!(sim.initial_infection >= 0.0 && sim.initial_infection <= 1.0)) {
      fail("simulation.initial_infection", "must lie in [0, 1]");
    }
    if (const json* w = find(*v, "seed")) sim.seed = as_seed(*w, "simulation.seed");
    if (const json* w = find(*v, "resolution")) {
      sim.resolution = as_number(*w, "simulation.resolution");
      if (!(sim.resolution > 0.0) || !std::isfinite(sim.resolution)) {
        fail("simulation.resolution", "must be > 0");
      }
    }
    if (const json* w = find(*v, "output_stride")) {
      sim.output_stride = as_int(*w, "simulation.output_stride");
      if (sim.output_stride < 1) fail("simulation.output_stride", "must be >= 1");
    }
    if (const json* w = find(*v, "convergence_eps")) {
      sim.convergence_eps = as_number(*w, "simulation.convergence_eps");
      if (!(sim.convergence_eps > 0.0)) fail("simulation.convergence_eps", "must be > 0");
    }
    if (const json* w = find(*v, "convergence_window")) {
      sim.convergence_window = as_number(*w, "simulation.convergence_window");
      if (!(sim.convergence_window >= 0.0)) {
        fail("simulation.convergence_window", "must be >= 0");
      }
    }
    s.simulation = sim;
  }

  const json& configs = need(root, "(top level)", "configurations");
  if (!configs.is_array() || configs.empty()) {
    fail("configurations", "expected a non-empty array");
  }
  for (std::size_t i = 0; i < configs.size(); ++i) {
    s.configurations.push_back(parse_configuration(
        configs[i], "configurations[" + std::to_string(i) + "]", base_dir));
  }
  for (std::size_t i = 0; i < s.configurations.size(); ++i) {
    for (std::size_t k = i + 1; k < s.configurations.size(); ++k) {
      if (s.configurations[i].id == s.configurations[k].id) {
        fail("configurations[" + std::to_string(k) + "].id",
             "duplicate id " + std::to_string(s.configurations[k].id));
      }
    }
  }

  if (s.mode == Scenario::Mode::Structures && s.configurations.size() >= 2) {
    const double beta = s.configurations.front().beta;
    const double gamma = s.configurations.front().gamma;
    for (std::size_t i = 1; i < s.configurations.size(); ++i) {
      if (s.configurations[i].beta != beta || s.configurations[i].gamma != gamma) {
        fail("configurations[" + std::to_string(i) + "]",
             "structure-switching scenarios share one (beta, gamma) pair across "
             "configurations; only the structure may vary");
      }
    }
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("scenario: cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), std::filesystem::path(path).parent_path().string());
}

namespace {

std::vector<double> scenario_margins(const Scenario& s) {
  std::vector<double> margins;
  margins.reserve(s.configurations.size());
  for (const auto& c : s.configurations) margins.push_back(c.margin());
  return margins;
}

std::vector<int> config_ids(const Scenario& s) {
  std::vector<int> ids;
  ids.reserve(s.configurations.size());
  for (const auto& c : s.configurations) ids.push_back(c.id);
  return ids;
}

double require_delta(const Scenario& s) {
  if (!s.delta.has_value()) {
    throw ValidationError("scenario: delta: required by this command");
  }
  return *s.delta;
}

int violator_position(const std::vector<double>& margins) {
  int pos = -1;
  for (std::size_t i = 0; i < margins.size(); ++i) {
    if (margins[i] <= 0.0) {
      if (pos >= 0) {
        throw ValidationError("scenario: configurations: more than one non-positive margin");
      }
      pos = static_cast<int>(i);
    }
  }
  if (pos < 0) {
    throw ValidationError("scenario: configurations: no configuration violates the threshold, "
                          "so there is nothing to schedule around");
  }
  return pos;
}

std::vector<int> ids_of_positions(const Scenario& s, const std::vector<int>& positions) {
  std::vector<int> ids;
  ids.reserve(positions.size());
  for (int p : positions) ids.push_back(s.configurations[p].id);
  return ids;
}

}  // namespace

AnalyzeOutcome cmd_analyze(const Scenario& s) {
  std::ostringstream out;
  out << "{\"command\":\"analyze\",\"mode\":\""
      << (s.mode == Scenario::Mode::Params ? "params" : "structures")
      << "\",\"configurations\":[";
  bool any = false;
  for (std::size_t i = 0; i < s.configurations.size(); ++i) {
    const Configuration& c = s.configurations[i];
    const double lambda1 = c.lambda1();
    const double margin = c.beta - c.gamma * lambda1;
    const bool converges = check_static_threshold(c) == ThresholdVerdict::Converges;
    any = any || converges;
    if (i) out << ",";
    out << "{\"id\":" << c.id << ",\"beta\":" << num(c.beta) << ",\"gamma\":" << num(c.gamma)
        << ",\"lambda1\":" << num(lambda1) << ",\"margin\":" << num(margin)
        << ",\"verdict\":\"" << (converges ? "converges" : "may_not_converge") << "\"}";
  }
  out << "],\"any_satisfying\":" << (any ? "true" : "false") << "}\n";
  return AnalyzeOutcome{out.str(), any};
}

namespace {

OptimizeOutcome optimize_params(const Scenario& s) {
  const std::vector<double> margins = scenario_margins(s);
  const std::vector<int> ids = config_ids(s);
  const double delta = require_delta(s);
  const int violator = violator_position(margins);

  ParamOptProblem p;
  p.margins = margins;
  p.delta = delta;
  p.pi1 = s.pi1;
  p.cost = s.cost;
  p.shape = s.shape;

  const bool want_cost = s.cost.has_value();
  if (want_cost && !s.pi1.has_value()) {
    throw ValidationError("scenario: pi1: required for the minimum-cost branch (a cost "
                          "function is present)");
  }

  ParamOptResult r = want_cost
                         ? (s.shape != ShapeHint::None ? min_cost_shaped(p) : min_cost(p))
                         : max_pi1(p);

  const SimulationSettings sim = s.simulation.value_or(SimulationSettings{});
  std::ostringstream res;
  res << "{\"command\":\"optimize\",\"mode\":\"params\",\"objective\":\""
      << (want_cost ? "min_cost" : "max_pi1") << "\",\"delta\":" << num(delta)
      << ",\"config_ids\":" << arr(ids) << ",\"margins\":" << arr(margins);
  if (want_cost) {
    res << ",\"pi1\":" << num(*s.pi1) << ",\"cost\":" << num(*r.cost)
        << ",\"k_star\":" << *r.k_star << ",\"pair\":";
    if (r.pair) {
      res << "[" << r.pair->first << "," << r.pair->second << "]";
    } else {
      res << "null";
    }
  } else {
    res << ",\"pi1_star\":" << num(r.mix.fractions[violator]);
  }
  res << ",\"mix\":" << arr(r.mix.fractions)
      << ",\"active_ids\":" << arr(ids_of_positions(s, r.active)) << "}\n";

  std::ostringstream sched;
  sched << "{\"version\":1,\"scheduler\":\"fixed_mix\",\"config_ids\":" << arr(ids)
        << ",\"pi\":" << arr(r.mix.fractions) << ",\"resolution\":" << num(sim.resolution)
        << ",\"seed\":" << sim.seed << ",\"violator_state\":" << violator << "}\n";
  return OptimizeOutcome{res.str(), sched.str(), ""};
}

std::string rates_json(const GeneratorMatrix& q) {
  std::string out = "[";
  for (int r = 0; r < q.size(); ++r) {
    if (r) out += ",";
    out += "[";
    for (int c = 0; c < q.size(); ++c) {
      if (c) out += ",";
      out += num(q.rate(r, c));
    }
    out += "]";
  }
  return out + "]";
}

OptimizeOutcome optimize_structs(const Scenario& s) {
  const std::vector<double> margins = scenario_margins(s);
  const std::vector<int> ids = config_ids(s);
  const double delta = require_delta(s);
  const int violator = violator_position(margins);

  StructOptProblem p;
  p.margins = margins;
  p.constants = s.constants;
  p.constants.delta = delta;
  p.constants.violators = 1;
  p.pi1 = s.pi1;
  p.cost = s.cost;

  const bool want_cost = s.cost.has_value();
  if (want_cost && !s.pi1.has_value()) {
    throw ValidationError("scenario: pi1: required for the minimum-cost branch (a cost "
                          "function is present)");
  }
  StructOptResult r = want_cost ? min_cost_struct(p) : max_pi1_struct(p);

  // Chain states: violator first, then the active induced configurations by
  // ascending margin (the canonical order the sojourn vector is stated in).
  std::vector<int> induced;
  for (std::size_t i = 0; i < margins.size(); ++i) {
    if (static_cast<int>(i) != violator && r.mix.fractions[i] > 0.0) {
      induced.push_back(static_cast<int>(i));
    }
  }
  std::stable_sort(induced.begin(), induced.end(),
                   [&](int a, int b) { return margins[a] < margins[b]; });

  GeneratorMatrix q = [&]() {
    if (!want_cost) {
      // Bound-saturating two-state generator; its stationary law is the
      // optimal mix.
      std::vector<double> chain_margins = {margins[violator], margins[induced.front()]};
      return build_generator(chain_margins, p.constants);
    }
    // Rates straight from the optimal sojourn means: exit rate 1/x_r, jumps
    // uniform over the other states.
    const int n = static_cast<int>(r.sojourn.size());
    std::vector<double> rates(static_cast<std::size_t>(n) * n, 0.0);
    for (int row = 0; row < n; ++row) {
      const double exit = 1.0 / r.sojourn[row];
      rates[static_cast<std::size_t>(row) * n + row] = -exit;
      for (int col = 0; col < n; ++col) {
        if (col != row) rates[static_cast<std::size_t>(row) * n + col] = exit / (n - 1);
      }
    }
    return GeneratorMatrix(std::move(rates), n);
  }();

  std::vector<int> chain_ids = {s.configurations[violator].id};
  for (int pos : induced) chain_ids.push_back(s.configurations[pos].id);

  const SimulationSettings sim = s.simulation.value_or(SimulationSettings{});
  std::ostringstream res;
  res << "{\"command\":\"optimize\",\"mode\":\"structures\",\"objective\":\""
      << (want_cost ? "min_cost" : "max_pi1") << "\",\"delta\":" << num(delta)
      << ",\"config_ids\":" << arr(ids) << ",\"margins\":" << arr(margins);
  if (want_cost) {
    res << ",\"pi1\":" << num(*s.pi1) << ",\"cost\":" << num(*r.cost)
        << ",\"slack\":" << num(r.slack);
  } else {
    res << ",\"pi1_star\":" << num(r.mix.fractions[violator]);
  }
  res << ",\"mix\":" << arr(r.mix.fractions) << ",\"active_ids\":" << arr(chain_ids)
      << ",\"subset_ids\":" << arr(std::vector<int>(chain_ids.begin() + 1, chain_ids.end()))
      << ",\"sojourn\":" << arr(r.sojourn) << "}\n";

  std::ostringstream sched;
  sched << "{\"version\":1,\"scheduler\":\"markov_generator\",\"config_ids\":"
        << arr(chain_ids) << ",\"rates\":" << rates_json(q) << ",\"seed\":" << sim.seed
        << ",\"start_state\":0}\n";
  return OptimizeOutcome{res.str(), sched.str(), q.to_csv()};
}

}  // namespace

OptimizeOutcome cmd_optimize(const Scenario& s) {
  return s.mode == Scenario::Mode::Params ? optimize_params(s) : optimize_structs(s);
}

namespace {

struct ScheduleSpec {
  std::string scheduler;  // "fixed_mix" | "markov_generator"
  std::vector<int> ids;   // chain state -> configuration id
  std::vector<double> pi;
  double resolution = 1.0;
  std::uint64_t seed = 0;
  int violator_state = 0;
  std::vector<double> rates;  // row-major, markov only
  int start_state = 0;
};

ScheduleSpec parse_schedule_spec(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("schedule spec: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ValidationError("schedule spec: top level must be an object");

  ScheduleSpec spec;
  const int version = as_int(need(root, "(top level)", "version"), "version");
  if (version != 1) {
    throw ValidationError("schedule spec: version: unsupported version " +
                          std::to_string(version));
  }
  spec.scheduler = as_string(need(root, "(top level)", "scheduler"), "scheduler");

  const json& ids = need(root, "(top level)", "config_ids");
  if (!ids.is_array() || ids.empty()) {
    throw ValidationError("schedule spec: config_ids: expected a non-empty array");
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    spec.ids.push_back(as_int(ids[i], "config_ids[" + std::to_string(i) + "]"));
  }

  if (spec.scheduler == "fixed_mix") {
    check_fields(root, "",
                 {"version", "scheduler", "config_ids", "pi", "resolution", "seed",
                  "violator_state"});
    const json& pi = need(root, "(top level)", "pi");
    if (!pi.is_array() || pi.size() != spec.ids.size()) {
      throw ValidationError("schedule spec: pi: expected an array matching config_ids");
    }
    for (std::size_t i = 0; i < pi.size(); ++i) {
      spec.pi.push_back(as_number(pi[i], "pi[" + std::to_string(i) + "]"));
    }
    spec.resolution = as_number(need(root, "(top level)", "resolution"), "resolution");
    spec.seed = as_seed(need(root, "(top level)", "seed"), "seed");
    spec.violator_state =
        as_int(need(root, "(top level)", "violator_state"), "violator_state");
  } else if (spec.scheduler == "markov_generator") {
    check_fields(root, "",
                 {"version", "scheduler", "config_ids", "rates", "seed", "start_state"});
    const json& rates = need(root, "(top level)", "rates");
    const std::size_t n = spec.ids.size();
    if (!rates.is_array() || rates.size() != n) {
      throw ValidationError("schedule spec: rates: expected an array of " + std::to_string(n) +
                            " rows");
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (!rates[r].is_array() || rates[r].size() != n) {
        throw ValidationError("schedule spec: rates[" + std::to_string(r) +
                              "]: expected a row of " + std::to_string(n) + " numbers");
      }
      for (std::size_t c = 0; c < n; ++c) {
        spec.rates.push_back(
            as_number(rates[r][c], "rates[" + std::to_string(r) + "][" + std::to_string(c) +
                                       "]"));
      }
    }
    spec.seed = as_seed(need(root, "(top level)", "seed"), "seed");
    spec.start_state = as_int(need(root, "(top level)", "start_state"), "start_state");
  } else {
    throw ValidationError("schedule spec: scheduler: expected \"fixed_mix\" or "
                          "\"markov_generator\" (got \"" + spec.scheduler + "\")");
  }
  return spec;
}

}  // namespace

SimulateOutcome cmd_simulate(const Scenario& s, const std::string& schedule_spec_json,
                             std::optional<std::uint64_t> seed_override) {
  if (!s.simulation.has_value()) {
    throw ValidationError("scenario: simulation: block required by the simulate command");
  }
  const SimulationSettings& sim = *s.simulation;
  ScheduleSpec spec = parse_schedule_spec(schedule_spec_json);
  if (seed_override) spec.seed = *seed_override;

  // Chain state -> configuration, each with an explicit structure.
  std::vector<Configuration> chain;
  for (int id : spec.ids) {
    const Configuration* found = nullptr;
    for (const auto& c : s.configurations) {
      if (c.id == id) {
        found = &c;
        break;
      }
    }
    if (!found) {
      throw ValidationError("schedule spec: config_ids: id " + std::to_string(id) +
                            " does not exist in the scenario");
    }
    if (!found->has_structure()) {
      throw ValidationError(
          "configuration id=" + std::to_string(id) +
          " carries only a bare lambda1, which is enough for analysis but not for "
          "node-level simulation; give it a graph_file or a generator recipe such as "
          "{\"kind\": \"complete\", \"n\": 20}");
    }
    chain.push_back(*found);
  }

  Scheduler scheduler =
      spec.scheduler == "fixed_mix"
          ? Scheduler::fixed_mix(spec.pi, spec.resolution, spec.seed, spec.violator_state)
          : Scheduler::markov_generator(
                GeneratorMatrix(spec.rates, static_cast<int>(spec.ids.size())), spec.seed,
                spec.start_state);

  // Target long-run occupancies for the summary's measured-vs-target table.
  std::vector<double> target;
  if (spec.scheduler == "fixed_mix") {
    target = spec.pi;
  } else {
    target = stationary_distribution(
                 GeneratorMatrix(spec.rates, static_cast<int>(spec.ids.size())))
                 .fractions;
  }

  const auto schedule = scheduler.sample(sim.horizon);

  const int n = chain.front().structure_or_null()->node_count();
  InfectionState initial;
  initial.values.assign(n, sim.initial_infection);
  initial.time = 0.0;

  IntegrationOptions options;
  options.output_stride = sim.output_stride;

  Trajectory traj = run_schedule(chain, schedule, initial, sim.dt, sim.horizon, options);

  const double window =
      sim.convergence_window > 0.0 ? std::min(sim.convergence_window, sim.horizon)
                                   : sim.horizon / 10.0;
  const bool converged = clean_equilibrium_check(traj, sim.convergence_eps, window);

  double max_err = 0.0;
  std::ostringstream occ;
  occ << "[";
  for (std::size_t state = 0; state < spec.ids.size(); ++state) {
    double measured = 0.0;
    for (const auto& [id, frac] : traj.occupancy) {
      if (id == spec.ids[state]) measured = frac;
    }
    max_err = std::max(max_err, std::abs(measured - target[state]));
    if (state) occ << ",";
    occ << "{\"id\":" << spec.ids[state] << ",\"target\":" << num(target[state])
        << ",\"measured\":" << num(measured) << "}";
  }
  occ << "]";

  std::ostringstream out;
  out << "{\"command\":\"simulate\",\"scheduler\":\"" << spec.scheduler
      << "\",\"dt\":" << num(sim.dt) << ",\"horizon\":" << num(sim.horizon)
      << ",\"seed\":" << spec.seed << ",\"final_time\":" << num(traj.samples.back().t)
      << ",\"final_sup_norm\":" << num(traj.samples.back().sup_norm)
      << ",\"convergence_eps\":" << num(sim.convergence_eps)
      << ",\"convergence_window\":" << num(window)
      << ",\"converged\":" << (converged ? "true" : "false") << ",\"occupancy\":" << occ.str()
      << ",\"max_occupancy_error\":" << num(max_err) << "}\n";

  return SimulateOutcome{out.str(), trajectory_to_csv(traj), schedule_to_csv(schedule),
                         converged};
}

OracleOutcome cmd_oracle(const Scenario& s, double grid_step) {
  const std::vector<double> margins = scenario_margins(s);
  const double delta = require_delta(s);
  if (!s.cost.has_value() || !s.pi1.has_value()) {
    throw ValidationError("scenario: the oracle comparison needs both cost and pi1 (it checks "
                          "the minimum-cost branch)");
  }

  double closed_cost = 0.0, oracle_cost = 0.0;
  std::vector<double> closed_mix, oracle_mix;
  if (s.mode == Scenario::Mode::Params) {
    ParamOptProblem p;
    p.margins = margins;
    p.delta = delta;
    p.pi1 = s.pi1;
    p.cost = s.cost;
    ParamOptResult closed = min_cost(p);
    ParamOptResult grid = oracle_min_cost(p, grid_step);
    closed_cost = *closed.cost;
    oracle_cost = *grid.cost;
    closed_mix = closed.mix.fractions;
    oracle_mix = grid.mix.fractions;
  } else {
    StructOptProblem p;
    p.margins = margins;
    p.constants = s.constants;
    p.constants.delta = delta;
    p.constants.violators = 1;
    p.pi1 = s.pi1;
    p.cost = s.cost;
    StructOptResult closed = min_cost_struct(p);
    StructOptResult grid = oracle_min_cost_struct(p, grid_step);
    closed_cost = *closed.cost;
    oracle_cost = *grid.cost;
    closed_mix = closed.mix.fractions;
    oracle_mix = grid.mix.fractions;
  }

  const CostFunction& f = *s.cost;
  double fmin = 0.0, fmax = 0.0;
  bool first = true;
  for (double m : margins) {
    const double v = f(m);
    fmin = first ? v : std::min(fmin, v);
    fmax = first ? v : std::max(fmax, v);
    first = false;
  }
  // Rounding the optimum onto the grid moves at most n-2 free coordinates by
  // one step each, so the grid optimum sits within this band above the
  // closed form.
  const double free_coords = std::max<std::size_t>(1, margins.size() - 2);
  const double tolerance = free_coords * grid_step * (fmax - fmin) + 1e-9;
  const double diff = std::abs(closed_cost - oracle_cost);
  const bool agree = diff <= tolerance;

  std::ostringstream out;
  out << "{\"command\":\"oracle\",\"mode\":\""
      << (s.mode == Scenario::Mode::Params ? "params" : "structures")
      << "\",\"grid_step\":" << num(grid_step) << ",\"closed_cost\":" << num(closed_cost)
      << ",\"closed_mix\":" << arr(closed_mix) << ",\"oracle_cost\":" << num(oracle_cost)
      << ",\"oracle_mix\":" << arr(oracle_mix) << ",\"cost_difference\":" << num(diff)
      << ",\"tolerance\":" << num(tolerance) << ",\"agree\":" << (agree ? "true" : "false")
      << "}\n";
  return OracleOutcome{out.str(), agree};
}

namespace {

void check_sweep_range(double lo, double hi, double step) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
    throw ValidationError("sweep: need finite bounds with min < max");
  }
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw ValidationError("sweep: step must be a positive real");
  }
}

}  // namespace

std::string sweep_pi1_params(const Scenario& s, double lo, double hi, double step) {
  check_sweep_range(lo, hi, step);
  const double delta = require_delta(s);
  const int n = static_cast<int>(std::lround((hi - lo) / step));
  std::ostringstream out;
  out << "mu1_abs,mu_n,pi1_star\n";
  for (int i = 0; i <= n; ++i) {
    const double mu1_abs = lo + i * step;
    for (int k = 0; k <= n; ++k) {
      const double mu_n = lo + k * step;
      double pi1 = 0.0;
      if (mu_n > delta) pi1 = (mu_n - delta) / (mu_n + mu1_abs);
      out << num(mu1_abs) << ',' << num(mu_n) << ',' << num(pi1) << '\n';
    }
  }
  return out.str();
}

std::string sweep_pi1_structs(const Scenario& s, double lo, double hi, double step) {
  check_sweep_range(lo, hi, step);
  const double delta = require_delta(s);
  GeneratorConstants constants = s.constants;
  constants.delta = delta;
  constants.violators = 1;
  validate_constants(constants, 2);
  const int n = static_cast<int>(std::lround((hi - lo) / step));
  std::ostringstream out;
  out << "mu1_abs,mu_n,pi1_star\n";
  for (int i = 0; i <= n; ++i) {
    const double mu1_abs = lo + i * step;
    const double x = (constants.b - 1.0) / (2.0 * constants.b * (mu1_abs + delta));
    for (int k = 0; k <= n; ++k) {
      const double mu_n = lo + k * step;
      double pi1 = 0.0;
      if (mu_n > delta) {
        const double y = (constants.c - constants.a) / (2.0 * constants.a * (mu_n - delta));
        pi1 = x / (x + y);
      }
      out << num(mu1_abs) << ',' << num(mu_n) << ',' << num(pi1) << '\n';
    }
  }
  return out.str();
}

std::string sweep_cost_surface(const Scenario& s, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw ValidationError("sweep: step must be a positive real");
  }
  const double delta = require_delta(s);
  if (!s.cost.has_value() || !s.pi1.has_value()) {
    throw ValidationError("sweep: the cost surface needs both cost and pi1");
  }
  const std::vector<double> margins = scenario_margins(s);
  if (margins.size() != 4) {
    throw ValidationError("sweep: the cost surface is defined for exactly 4 configurations "
                          "(got " + std::to_string(margins.size()) + ")");
  }
  const auto canon = detail::canonical_margins(margins, "sweep");
  const CostFunction& f = *s.cost;
  const double pi1 = *s.pi1;
  const double rest = 1.0 - pi1;
  const int n = static_cast<int>(std::lround(rest / step));
  const double h = rest / std::max(1, n);

  std::ostringstream out;
  out << "pi2,pi3,pi4,cost,feasible\n";
  const double base = pi1 * f(canon.mu[0]);
  for (int i = 0; i <= n; ++i) {
    const double pi2 = i * h;
    for (int k = 0; i * h + k * h <= rest + 1e-12 && k <= n; ++k) {
      const double pi3 = k * h;
      double pi4 = rest - pi2 - pi3;
      if (pi4 < 0.0) pi4 = 0.0;
      const double cost = base + pi2 * f(canon.mu[1]) + pi3 * f(canon.mu[2]) +
                          pi4 * f(canon.mu[3]);
      const double rate = pi1 * canon.mu[0] + pi2 * canon.mu[1] + pi3 * canon.mu[2] +
                          pi4 * canon.mu[3];
      out << num(pi2) << ',' << num(pi3) << ',' << num(pi4) << ',' << num(cost) << ','
          << (rate >= delta ? 1 : 0) << '\n';
    }
  }
  return out.str();
}

}  // namespace mtd
