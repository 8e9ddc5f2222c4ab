#include "config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "spde/error.hpp"

namespace spde::app {

namespace {

using nlohmann::json;

[[noreturn]] void fail(ConfigErrorKind kind, const std::string& msg) { throw ConfigError(kind, msg); }

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(ConfigErrorKind::kInvalidValue, path + ": expected an object");
  return j;
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.count(key)) {
      fail(ConfigErrorKind::kUnknownKey, "unknown key '" + join(path, key) + "'");
    }
  }
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(ConfigErrorKind::kInvalidValue, path + ": expected a number");
  return v.get<double>();
}

std::uint64_t get_unsigned(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    fail(ConfigErrorKind::kInvalidValue, path + ": expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string get_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(ConfigErrorKind::kInvalidValue, path + ": expected a string");
  return v.get<std::string>();
}

template <class T>
void opt_number(const json& obj, const std::string& path, const char* key, T& out) {
  if (const json* v = find(obj, key)) out = static_cast<T>(get_number(*v, join(path, key)));
}

void opt_unsigned(const json& obj, const std::string& path, const char* key, std::size_t& out) {
  if (const json* v = find(obj, key)) out = get_unsigned(*v, join(path, key));
}

template <class E>
E choose(const std::string& value, const std::string& path,
         std::initializer_list<std::pair<const char*, E>> options) {
  std::string names;
  for (const auto& [name, e] : options) {
    if (value == name) return e;
    names += names.empty() ? name : std::string(", ") + name;
  }
  fail(ConfigErrorKind::kInvalidValue, path + ": '" + value + "' is not one of " + names);
}

DibParams parse_dib(const json& j, const std::string& path) {
  require_object(j, path);
  check_keys(j, path,
             {"d1", "d2", "rho", "A1", "A2", "B", "alpha", "C", "D", "gamma", "k2", "k3"});
  auto req = [&](const char* key) {
    const json* v = find(j, key);
    if (!v) fail(ConfigErrorKind::kMissingKey, "missing required key '" + join(path, key) + "'");
    return get_number(*v, join(path, key));
  };
  DibParams p{req("d1"), req("d2"), req("rho"),   req("A1"), req("A2"), req("B"),
              req("alpha"), req("C"), req("D"), req("gamma"), req("k2"), req("k3")};
  return p;
}

void parse_problem(const json& j, RunConfig& cfg) {
  const std::string path = "problem";
  require_object(j, path);
  check_keys(j, path, {"name", "params"});
  const json* name = find(j, "name");
  if (!name) fail(ConfigErrorKind::kMissingKey, "missing required key 'problem.name'");
  cfg.problem = get_string(*name, "problem.name");
  choose<int>(cfg.problem, "problem.name",
              {{"ginzburg_landau", 0}, {"cahn_hilliard", 1}, {"uncoupled", 2}, {"dib", 3}});
  const json* params = find(j, "params");
  if (cfg.problem == "dib") {
    if (!params) fail(ConfigErrorKind::kMissingKey, "missing required key 'problem.params' (dib)");
    cfg.dib = parse_dib(*params, "problem.params");
  } else if (params) {
    fail(ConfigErrorKind::kUnknownKey,
         "unknown key 'problem.params': only the dib problem takes parameters");
  }
}

void parse_grid(const json& j, RunConfig& cfg) {
  const std::string path = "grid";
  require_object(j, path);
  check_keys(j, path, {"x_left", "x_right", "n_points", "n_points_list"});
  opt_number(j, path, "x_left", cfg.x_left);
  opt_number(j, path, "x_right", cfg.x_right);
  const json* single = find(j, "n_points");
  const json* list = find(j, "n_points_list");
  if (single && list) {
    fail(ConfigErrorKind::kInvalidValue, "grid: give either n_points or n_points_list, not both");
  }
  if (single) {
    cfg.n_points = {get_unsigned(*single, "grid.n_points")};
  } else if (list) {
    if (!list->is_array() || list->empty()) {
      fail(ConfigErrorKind::kInvalidValue, "grid.n_points_list: expected a non-empty array");
    }
    for (std::size_t i = 0; i < list->size(); ++i) {
      cfg.n_points.push_back(
          get_unsigned((*list)[i], "grid.n_points_list[" + std::to_string(i) + "]"));
    }
  } else {
    fail(ConfigErrorKind::kMissingKey, "missing required key 'grid.n_points' (or n_points_list)");
  }
}

void parse_scheme(const json& j, RunConfig& cfg) {
  const std::string path = "scheme";
  require_object(j, path);
  check_keys(j, path,
             {"name", "theta", "n_steps", "final_time", "newton_tol", "newton_max_iter",
              "imex_reaction_weight", "noise_scaling"});
  SchemeConfig& s = cfg.scheme;
  if (const json* v = find(j, "name")) {
    s.scheme = choose<Scheme>(get_string(*v, "scheme.name"), "scheme.name",
                              {{"theta_maruyama", Scheme::kThetaMaruyama},
                               {"theta_imex", Scheme::kThetaImex}});
  }
  opt_number(j, path, "theta", s.theta);
  opt_unsigned(j, path, "n_steps", s.n_steps);
  double final_time = 1.0;
  opt_number(j, path, "final_time", final_time);
  opt_number(j, path, "newton_tol", s.newton_tol);
  opt_unsigned(j, path, "newton_max_iter", s.newton_max_iter);
  if (const json* v = find(j, "imex_reaction_weight")) {
    s.imex_reaction_weight =
        choose<ImexReactionWeight>(get_string(*v, "scheme.imex_reaction_weight"),
                                   "scheme.imex_reaction_weight",
                                   {{"dt", ImexReactionWeight::kDt},
                                    {"theta_dt", ImexReactionWeight::kThetaDt}});
  }
  if (const json* v = find(j, "noise_scaling")) {
    s.noise_scaling = choose<NoiseScaling>(get_string(*v, "scheme.noise_scaling"),
                                           "scheme.noise_scaling",
                                           {{"none", NoiseScaling::kNone},
                                            {"inv_sqrt_dx", NoiseScaling::kInvSqrtDx}});
  }
  if (s.n_steps == 0) fail(ConfigErrorKind::kInvalidValue, "scheme.n_steps: must be >= 1");
  if (!(final_time > 0.0)) fail(ConfigErrorKind::kInvalidValue, "scheme.final_time: must be > 0");
  s.dt = final_time / static_cast<double>(s.n_steps);
}

void parse_noise(const json& j, RunConfig& cfg) {
  const std::string path = "noise";
  require_object(j, path);
  check_keys(j, path, {"kind", "epsilon"});
  const json* kind = find(j, "kind");
  if (!kind) fail(ConfigErrorKind::kMissingKey, "missing required key 'noise.kind'");
  const int k = choose<int>(get_string(*kind, "noise.kind"), "noise.kind",
                            {{"additive", 0}, {"linear", 1}, {"quadratic", 2}});
  const json* eps = find(j, "epsilon");
  if (k == 0) {
    cfg.noise = noise::Additive{eps ? get_number(*eps, "noise.epsilon") : 0.1};
  } else if (eps) {
    fail(ConfigErrorKind::kUnknownKey, "unknown key 'noise.epsilon': only additive noise has one");
  } else if (k == 1) {
    cfg.noise = noise::MultiplicativeLinear{};
  } else {
    cfg.noise = noise::MultiplicativeQuadratic{};
  }
}

void parse_experiment(const json& j, RunConfig& cfg) {
  const std::string path = "experiment";
  require_object(j, path);
  check_keys(j, path,
             {"n_paths", "seed", "norm_scaling", "m_variant", "initial", "order", "analyze"});
  opt_unsigned(j, path, "n_paths", cfg.n_paths);
  if (const json* v = find(j, "seed")) cfg.scheme.seed = get_unsigned(*v, "experiment.seed");
  if (const json* v = find(j, "norm_scaling")) {
    cfg.scheme.norm_scaling = choose<NormScaling>(
        get_string(*v, "experiment.norm_scaling"), "experiment.norm_scaling",
        {{"none", NormScaling::kNone}, {"sqrt_dx", NormScaling::kSqrtDx}});
  }
  if (const json* v = find(j, "m_variant")) {
    const int m = choose<int>(get_string(*v, "experiment.m_variant"), "experiment.m_variant",
                              {{"auto", 0}, {"norm", 1}, {"norm_squared", 2}});
    if (m == 1) cfg.m_variant = MVariant::kExpectationOfNorm;
    if (m == 2) cfg.m_variant = MVariant::kExpectationOfNormSquared;
  }
  if (const json* v = find(j, "initial")) {
    const std::string p = "experiment.initial";
    require_object(*v, p);
    check_keys(*v, p, {"mode", "u_amplitude", "y_amplitude"});
    opt_number(*v, p, "mode", cfg.initial.mode);
    opt_number(*v, p, "u_amplitude", cfg.initial.u_amplitude);
    opt_number(*v, p, "y_amplitude", cfg.initial.y_amplitude);
  }
  if (const json* v = find(j, "order")) {
    const std::string p = "experiment.order";
    require_object(*v, p);
    check_keys(*v, p,
               {"dt_exponents", "final_time", "reference_refinement", "n_paths", "error_norm"});
    if (const json* e = find(*v, "dt_exponents")) {
      if (!e->is_array() || e->size() < 2) {
        fail(ConfigErrorKind::kInvalidValue, p + ".dt_exponents: expected at least two integers");
      }
      cfg.order.dt_exponents.clear();
      for (const auto& x : *e) {
        if (!x.is_number_integer()) {
          fail(ConfigErrorKind::kInvalidValue, p + ".dt_exponents: expected integers");
        }
        cfg.order.dt_exponents.push_back(x.get<int>());
      }
    }
    if (const json* t = find(*v, "final_time")) cfg.order.final_time = get_number(*t, p + ".final_time");
    opt_unsigned(*v, p, "reference_refinement", cfg.order.reference_refinement);
    opt_unsigned(*v, p, "n_paths", cfg.order.n_paths);
    if (const json* n = find(*v, "error_norm")) {
      cfg.order.error_norm =
          choose<ErrorNorm>(get_string(*n, p + ".error_norm"), p + ".error_norm",
                            {{"grid_l2", ErrorNorm::kGridL2}, {"lowest_mode", ErrorNorm::kLowestMode}});
    }
  }
  if (const json* v = find(j, "analyze")) {
    const std::string p = "experiment.analyze";
    require_object(*v, p);
    check_keys(*v, p, {"framework", "m_paths", "p", "norm_A", "M", "mu", "L_g"});
    if (const json* f = find(*v, "framework")) {
      cfg.analyze.framework = choose<Framework>(
          get_string(*f, p + ".framework"), p + ".framework",
          {{"lemma", Framework::kLemma}, {"one_sided_lipschitz", Framework::kOneSidedLipschitz}});
    }
    opt_unsigned(*v, p, "m_paths", cfg.analyze.m_paths);
    if (const json* x = find(*v, "p")) cfg.analyze.order_p = static_cast<int>(get_unsigned(*x, p + ".p"));
    if (const json* x = find(*v, "norm_A")) cfg.analyze.norm_A = get_number(*x, p + ".norm_A");
    if (const json* x = find(*v, "M")) cfg.analyze.M = get_number(*x, p + ".M");
    if (const json* x = find(*v, "mu")) cfg.analyze.mu = get_number(*x, p + ".mu");
    if (const json* x = find(*v, "L_g")) cfg.analyze.L_g = get_number(*x, p + ".L_g");
  }
}

std::string parse_error_context(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

MVariant RunConfig::effective_m_variant() const {
  if (m_variant) return *m_variant;
  return scheme.scheme == Scheme::kThetaMaruyama && is_additive(noise)
             ? MVariant::kExpectationOfNormSquared
             : MVariant::kExpectationOfNorm;
}

SemiDiscreteProblem RunConfig::make_problem(std::size_t points) const {
  const GridSpec grid = build_grid(x_left, x_right, points);
  if (problem == "ginzburg_landau") return make_ginzburg_landau(grid, noise);
  if (problem == "cahn_hilliard") return make_cahn_hilliard(grid, noise);
  if (problem == "uncoupled") return make_uncoupled_system(grid, noise);
  return make_dib(grid, *dib, noise);
}

InitialCondition RunConfig::initial_condition() const {
  return InitialCondition::sine(initial.mode, initial.u_amplitude, initial.y_amplitude);
}

nlohmann::json RunConfig::echo() const {
  nlohmann::json j;
  j["problem"] = problem;
  if (dib) {
    const DibParams& d = *dib;
    j["dib"] = {{"d1", d.d1}, {"d2", d.d2}, {"rho", d.rho},     {"A1", d.A1},
                {"A2", d.A2}, {"B", d.B},   {"alpha", d.alpha}, {"C", d.C},
                {"D", d.D},   {"gamma", d.gamma}, {"k2", d.k2}, {"k3", d.k3}};
  }
  j["x_left"] = x_left;
  j["x_right"] = x_right;
  j["n_points"] = n_points;
  j["scheme"] = to_string(scheme.scheme);
  j["theta"] = scheme.theta;
  j["dt"] = scheme.dt;
  j["n_steps"] = scheme.n_steps;
  j["final_time"] = scheme.final_time();
  j["newton_tol"] = scheme.newton_tol;
  j["newton_max_iter"] = scheme.newton_max_iter;
  j["imex_reaction_weight"] =
      scheme.imex_reaction_weight == ImexReactionWeight::kDt ? "dt" : "theta_dt";
  j["noise_scaling"] = scheme.noise_scaling == NoiseScaling::kNone ? "none" : "inv_sqrt_dx";
  j["norm_scaling"] = scheme.norm_scaling == NormScaling::kNone ? "none" : "sqrt_dx";
  j["noise"] = describe(noise);
  j["seed"] = scheme.seed;
  j["n_paths"] = n_paths;
  j["m_variant"] = to_string(effective_m_variant());
  j["initial"] = {{"mode", initial.mode},
                  {"u_amplitude", initial.u_amplitude},
                  {"y_amplitude", initial.y_amplitude}};
  return j;
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ConfigErrorKind::kParse,
         "config is not valid JSON (" + parse_error_context(text, e.byte) + "): " + e.what());
  }
  require_object(root, "config");
  check_keys(root, "", {"problem", "grid", "scheme", "noise", "experiment", "output"});

  RunConfig cfg;
  const json* problem = find(root, "problem");
  if (!problem) fail(ConfigErrorKind::kMissingKey, "missing required key 'problem'");
  parse_problem(*problem, cfg);
  const json* grid = find(root, "grid");
  if (!grid) fail(ConfigErrorKind::kMissingKey, "missing required key 'grid'");
  parse_grid(*grid, cfg);
  if (const json* v = find(root, "scheme")) parse_scheme(*v, cfg);
  if (const json* v = find(root, "noise")) parse_noise(*v, cfg);
  if (const json* v = find(root, "experiment")) parse_experiment(*v, cfg);
  if (const json* v = find(root, "output")) {
    require_object(*v, "output");
    check_keys(*v, "output", {"dir"});
    if (const json* d = find(*v, "dir")) cfg.output_dir = get_string(*d, "output.dir");
  }

  try {
    validate(cfg.scheme);
    if (cfg.dib) validate(*cfg.dib);
  } catch (const Error& e) {
    fail(ConfigErrorKind::kInvalidValue, e.what());
  }
  if (cfg.n_paths < 2) fail(ConfigErrorKind::kInvalidValue, "experiment.n_paths: must be >= 2");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace spde::app
