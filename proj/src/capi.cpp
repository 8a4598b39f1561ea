#include "mtdsched.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mtd/errors.hpp"
#include "mtd/graph.hpp"
#include "mtd/model.hpp"
#include "mtd/opt_params.hpp"
#include "mtd/opt_structs.hpp"
#include "mtd/scenario.hpp"

struct mtd_structure {
  std::shared_ptr<const mtd::AttackDefenseStructure> graph;
};

struct mtd_scenario {
  mtd::Scenario scenario;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put(char** slot, const std::string& value) {
  if (slot) *slot = dup_string(value);
}

// Runs the body and folds any exception into an error code.
template <typename Fn>
int guard(Fn&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const mtd::Error& e) {
    g_last_error = e.what();
    return e.exit_code();
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MTD_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return MTD_ERR_INTERNAL;
  }
}

int make_structure(mtd_structure** out, mtd::AttackDefenseStructure g) {
  if (!out) {
    g_last_error = "output pointer must not be null";
    return MTD_ERR_VALIDATION;
  }
  *out = new mtd_structure{
      std::make_shared<const mtd::AttackDefenseStructure>(std::move(g))};
  return MTD_OK;
}

std::vector<double> margin_vector(const double* margins, int n) {
  if (!margins || n <= 0) throw mtd::ValidationError("margins must be a non-empty array");
  return std::vector<double>(margins, margins + n);
}

mtd::CostFunction cost_from_c(const char* kind, const double* params, int n_params) {
  if (!kind) throw mtd::ValidationError("cost kind must not be null");
  const std::string k = kind;
  if (k == "table") {
    if (!params || n_params < 4 || n_params % 2 != 0) {
      throw mtd::ValidationError(
          "table costs need an even number (>= 4) of params: m0,c0,m1,c1,...");
    }
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < n_params; i += 2) pts.emplace_back(params[i], params[i + 1]);
    return mtd::CostFunction::table(std::move(pts));
  }
  if (!params || n_params != 2) {
    throw mtd::ValidationError("analytic costs need exactly 2 params");
  }
  if (k == "affine") return mtd::CostFunction::affine(params[0], params[1]);
  if (k == "quadratic_shifted") return mtd::CostFunction::quadratic_shifted(params[0], params[1]);
  if (k == "sqrt_shifted") return mtd::CostFunction::sqrt_shifted(params[0], params[1]);
  throw mtd::ValidationError("unknown cost kind: " + k);
}

void copy_mix(const mtd::ScheduleMix& mix, double* out) {
  if (!out) return;
  for (std::size_t i = 0; i < mix.fractions.size(); ++i) out[i] = mix.fractions[i];
}

}  // namespace

extern "C" {

const char* mtd_version_string(void) { return "mtdsched 0.1.0"; }

const char* mtd_last_error(void) { return g_last_error.c_str(); }

void mtd_string_free(char* s) { std::free(s); }

int mtd_structure_complete(int node_count, mtd_structure** out) {
  return guard([&] { return make_structure(out, mtd::generate_complete(node_count)); });
}

int mtd_structure_star(int leaves, mtd_structure** out) {
  return guard([&] { return make_structure(out, mtd::generate_star(leaves)); });
}

int mtd_structure_path(int node_count, mtd_structure** out) {
  return guard([&] { return make_structure(out, mtd::generate_path(node_count)); });
}

int mtd_structure_erdos_renyi(int node_count, double edge_probability, uint64_t seed,
                              mtd_structure** out) {
  return guard([&] {
    return make_structure(out, mtd::generate_erdos_renyi(node_count, edge_probability, seed));
  });
}

int mtd_structure_load(const char* path, int directed, mtd_structure** out) {
  return guard([&] {
    if (!path) throw mtd::ValidationError("path must not be null");
    return make_structure(out, mtd::load_edge_list_file(path, directed != 0));
  });
}

int mtd_structure_node_count(const mtd_structure* g) {
  return g ? g->graph->node_count() : -1;
}

int mtd_structure_edge_count(const mtd_structure* g) {
  return g ? static_cast<int>(g->graph->ordered_edge_count()) : -1;
}

int mtd_structure_spectral_radius(const mtd_structure* g, double tol, double* out) {
  return guard([&] {
    if (!g || !out) throw mtd::ValidationError("null argument");
    *out = tol > 0.0 ? g->graph->spectral_radius(tol) : g->graph->spectral_radius();
    return MTD_OK;
  });
}

void mtd_structure_free(mtd_structure* g) { delete g; }

int mtd_margin(double beta, double gamma, double lambda1, double* out) {
  return guard([&] {
    if (!out) throw mtd::ValidationError("null argument");
    *out = mtd::Configuration::with_lambda1(0, beta, gamma, lambda1).margin();
    return MTD_OK;
  });
}

int mtd_max_pi1(const double* margins, int n, double delta, double* pi1_star, double* mix) {
  return guard([&] {
    mtd::ParamOptProblem p;
    p.margins = margin_vector(margins, n);
    p.delta = delta;
    mtd::ParamOptResult r = mtd::max_pi1(p);
    if (pi1_star) {
      for (int i = 0; i < n; ++i) {
        if (p.margins[i] <= 0.0) *pi1_star = r.mix.fractions[i];
      }
    }
    copy_mix(r.mix, mix);
    return MTD_OK;
  });
}

int mtd_min_cost(const double* margins, int n, double delta, double pi1,
                 const char* cost_kind, const double* cost_params, int n_params, double* cost,
                 double* mix, int* pair_l, int* pair_m) {
  return guard([&] {
    mtd::ParamOptProblem p;
    p.margins = margin_vector(margins, n);
    p.delta = delta;
    p.pi1 = pi1;
    p.cost = cost_from_c(cost_kind, cost_params, n_params);
    mtd::ParamOptResult r = mtd::min_cost(p);
    if (cost) *cost = *r.cost;
    copy_mix(r.mix, mix);
    if (pair_l) *pair_l = r.pair ? r.pair->first : 0;
    if (pair_m) *pair_m = r.pair ? r.pair->second : 0;
    return MTD_OK;
  });
}

int mtd_max_pi1_struct(const double* margins, int n, double a, double b, double c,
                       double delta, double* pi1_star, double* mix) {
  return guard([&] {
    mtd::StructOptProblem p;
    p.margins = margin_vector(margins, n);
    p.constants = mtd::GeneratorConstants{a, b, c, delta, 1};
    mtd::StructOptResult r = mtd::max_pi1_struct(p);
    if (pi1_star) {
      for (int i = 0; i < n; ++i) {
        if (p.margins[i] <= 0.0) *pi1_star = r.mix.fractions[i];
      }
    }
    copy_mix(r.mix, mix);
    return MTD_OK;
  });
}

int mtd_min_cost_struct(const double* margins, int n, double a, double b, double c,
                        double delta, double pi1, const char* cost_kind,
                        const double* cost_params, int n_params, double* cost, double* mix) {
  return guard([&] {
    mtd::StructOptProblem p;
    p.margins = margin_vector(margins, n);
    p.constants = mtd::GeneratorConstants{a, b, c, delta, 1};
    p.pi1 = pi1;
    p.cost = cost_from_c(cost_kind, cost_params, n_params);
    mtd::StructOptResult r = mtd::min_cost_struct(p);
    if (cost) *cost = *r.cost;
    copy_mix(r.mix, mix);
    return MTD_OK;
  });
}

int mtd_scenario_parse(const char* json_text, const char* base_dir, mtd_scenario** out) {
  return guard([&] {
    if (!json_text || !out) throw mtd::ValidationError("null argument");
    *out = new mtd_scenario{mtd::parse_scenario(json_text, base_dir ? base_dir : "")};
    return MTD_OK;
  });
}

int mtd_scenario_load(const char* path, mtd_scenario** out) {
  return guard([&] {
    if (!path || !out) throw mtd::ValidationError("null argument");
    *out = new mtd_scenario{mtd::load_scenario(path)};
    return MTD_OK;
  });
}

void mtd_scenario_free(mtd_scenario* s) { delete s; }

int mtd_cmd_analyze(const mtd_scenario* s, char** report_json) {
  return guard([&] {
    if (!s) throw mtd::ValidationError("null scenario");
    mtd::AnalyzeOutcome outcome = mtd::cmd_analyze(s->scenario);
    put(report_json, outcome.report_json);
    if (!outcome.any_satisfying) {
      g_last_error = "no configuration satisfies the convergence threshold on its own";
      return MTD_ERR_INFEASIBLE;
    }
    return MTD_OK;
  });
}

int mtd_cmd_optimize(const mtd_scenario* s, char** result_json, char** schedule_json,
                     char** generator_csv) {
  return guard([&] {
    if (!s) throw mtd::ValidationError("null scenario");
    mtd::OptimizeOutcome outcome = mtd::cmd_optimize(s->scenario);
    put(result_json, outcome.result_json);
    put(schedule_json, outcome.schedule_json);
    put(generator_csv, outcome.generator_csv);
    return MTD_OK;
  });
}

int mtd_cmd_simulate(const mtd_scenario* s, const char* schedule_spec_json,
                     int has_seed_override, uint64_t seed_override, char** summary_json,
                     char** trajectory_csv, char** schedule_csv, int* converged) {
  return guard([&] {
    if (!s || !schedule_spec_json) throw mtd::ValidationError("null argument");
    std::optional<uint64_t> seed;
    if (has_seed_override) seed = seed_override;
    mtd::SimulateOutcome outcome = mtd::cmd_simulate(s->scenario, schedule_spec_json, seed);
    put(summary_json, outcome.summary_json);
    put(trajectory_csv, outcome.trajectory_csv);
    put(schedule_csv, outcome.schedule_csv);
    if (converged) *converged = outcome.converged ? 1 : 0;
    return MTD_OK;
  });
}

int mtd_cmd_oracle(const mtd_scenario* s, double grid_step, char** report_json) {
  return guard([&] {
    if (!s) throw mtd::ValidationError("null scenario");
    mtd::OracleOutcome outcome = mtd::cmd_oracle(s->scenario, grid_step);
    put(report_json, outcome.report_json);
    if (!outcome.agree) {
      g_last_error = "grid oracle disagrees with the closed form beyond tolerance";
      return MTD_ERR_NUMERICAL;
    }
    return MTD_OK;
  });
}

int mtd_sweep(const mtd_scenario* s, const char* kind, double min, double max, double step,
              char** csv) {
  return guard([&] {
    if (!s || !kind) throw mtd::ValidationError("null argument");
    const std::string k = kind;
    std::string out;
    if (k == "pi1_params") {
      out = mtd::sweep_pi1_params(s->scenario, min, max, step);
    } else if (k == "pi1_structs") {
      out = mtd::sweep_pi1_structs(s->scenario, min, max, step);
    } else if (k == "cost_surface") {
      out = mtd::sweep_cost_surface(s->scenario, step);
    } else {
      throw mtd::ValidationError(
          "sweep: kind: expected \"pi1_params\", \"pi1_structs\", or \"cost_surface\" (got "
          "\"" + k + "\")");
    }
    put(csv, out);
    return MTD_OK;
  });
}

}  // extern "C"
