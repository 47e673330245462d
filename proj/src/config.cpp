#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "doco/error.hpp"
#include "doco/experiment.hpp"

namespace doco {

namespace {

using nlohmann::json;

void allow_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items()) {
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

const json& need(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(where + ": missing key '" + key + "'");
  return *it;
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  return v.get<double>();
}

std::int64_t as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return v.get<std::int64_t>();
}

std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError(where + ": expected a string");
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& where) {
  if (!v.is_boolean()) throw ConfigError(where + ": expected true or false");
  return v.get<bool>();
}

template <typename E>
E pick(const std::string& s, std::initializer_list<std::pair<const char*, E>> table,
       const std::string& where) {
  std::string names;
  for (const auto& [name, value] : table) {
    if (s == name) return value;
    names += names.empty() ? name : std::string(", ") + name;
  }
  throw ConfigError(where + ": unknown value '" + s + "' (expected one of " + names + ")");
}

/// A number, or {"scale": c, "exponent": p} meaning c * T^p.
BudgetRule parse_budget(const json& v, const std::string& where) {
  BudgetRule b;
  if (v.is_number()) {
    b.scale = v.get<double>();
    return b;
  }
  allow_keys(v, {"scale", "exponent"}, where);
  b.scale = v.contains("scale") ? as_number(v["scale"], where + ".scale") : 1.0;
  b.exponent = as_number(need(v, "exponent", where), where + ".exponent");
  return b;
}

bool valid_id(const std::string& id) {
  if (id.empty()) return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '-' || c == '.';
    if (!ok) return false;
  }
  return id.find("__") == std::string::npos;
}

void parse_scenario(const json& j, ExperimentConfig& cfg) {
  const std::string w = "scenario";
  allow_keys(j, {"id", "kind", "T", "n", "D", "V", "segments", "gamma0", "noise", "loss"}, w);
  ScenarioSpec& s = cfg.scenario;
  s.kind = pick<ScenarioKind>(as_string(need(j, "kind", w), w + ".kind"),
                              {{"stationary", ScenarioKind::Stationary},
                               {"random_walk", ScenarioKind::RandomWalk},
                               {"piecewise_constant", ScenarioKind::PiecewiseConstant},
                               {"lower_bound_adversary", ScenarioKind::LowerBoundAdversary}},
                              w + ".kind");
  cfg.scenario_id = j.contains("id") ? as_string(j["id"], w + ".id") : to_string(s.kind);
  if (!valid_id(cfg.scenario_id)) throw ConfigError(w + ".id: use letters, digits, '_', '-', '.'");

  const json& T = need(j, "T", w);
  if (T.is_array()) {
    for (const auto& t : T) cfg.horizons.push_back(as_int(t, w + ".T[]"));
  } else {
    cfg.horizons.push_back(as_int(T, w + ".T"));
  }
  for (std::int64_t t : cfg.horizons) {
    if (t < 2) throw ConfigError(w + ".T: horizons must be >= 2");
  }
  if (j.contains("n")) s.n = static_cast<int>(as_int(j["n"], w + ".n"));
  if (j.contains("D")) s.D = as_number(j["D"], w + ".D");
  if (j.contains("V")) cfg.scenario_V = parse_budget(j["V"], w + ".V");
  if (j.contains("segments")) s.segments = static_cast<int>(as_int(j["segments"], w + ".segments"));
  if (j.contains("gamma0")) s.gamma0 = as_number(j["gamma0"], w + ".gamma0");
  if (j.contains("noise")) s.noise = as_number(j["noise"], w + ".noise");
  if (j.contains("loss")) {
    const json& l = j["loss"];
    const std::string lw = w + ".loss";
    allow_keys(l, {"family", "m", "ell", "u"}, lw);
    s.loss.family = pick<LossKind>(as_string(need(l, "family", lw), lw + ".family"),
                                   {{"tracking_quadratic", LossKind::TrackingQuadratic},
                                    {"general_least_squares", LossKind::GeneralLeastSquares}},
                                   lw + ".family");
    if (s.loss.family == LossKind::GeneralLeastSquares) {
      s.loss.m = static_cast<int>(as_int(need(l, "m", lw), lw + ".m"));
      s.loss.ell = as_number(need(l, "ell", lw), lw + ".ell");
      s.loss.u = as_number(need(l, "u", lw), lw + ".u");
    } else if (l.contains("m") || l.contains("ell") || l.contains("u")) {
      throw ConfigError(lw + ": m, ell and u apply only to general_least_squares");
    }
  }
}

ScheduleSpec parse_schedule(const json& j, const std::string& w) {
  allow_keys(j, {"type", "beta", "V", "gamma"}, w);
  ScheduleSpec s;
  s.kind = pick<ScheduleSpec::Kind>(as_string(need(j, "type", w), w + ".type"),
                                    {{"beta_power", ScheduleSpec::Kind::BetaPower},
                                     {"path_tuned", ScheduleSpec::Kind::PathTuned},
                                     {"fixed", ScheduleSpec::Kind::Fixed}},
                                    w + ".type");
  auto forbid = [&](const char* key) {
    if (j.contains(key)) throw ConfigError(w + ": '" + key + "' does not apply to this schedule");
  };
  switch (s.kind) {
    case ScheduleSpec::Kind::BetaPower:
      s.beta = as_number(need(j, "beta", w), w + ".beta");
      forbid("V");
      forbid("gamma");
      break;
    case ScheduleSpec::Kind::PathTuned:
      if (j.contains("V")) s.V = parse_budget(j["V"], w + ".V");
      forbid("beta");
      forbid("gamma");
      break;
    case ScheduleSpec::Kind::Fixed:
      s.gamma = as_number(need(j, "gamma", w), w + ".gamma");
      forbid("beta");
      forbid("V");
      break;
  }
  return s;
}

NewtonRegime parse_regime(const json& v, const std::string& w) {
  return pick<NewtonRegime>(as_string(v, w),
                            {{"exp_concave", NewtonRegime::ExpConcave},
                             {"strongly_convex_smooth", NewtonRegime::StronglyConvexSmooth},
                             {"quad_bound", NewtonRegime::QuadBound}},
                            w);
}

GdRule parse_rule(const json& v, const std::string& w) {
  return pick<GdRule>(as_string(v, w),
                      {{"strongly_convex", GdRule::StronglyConvex},
                       {"smooth_strongly_convex", GdRule::SmoothStronglyConvex}},
                      w);
}

void parse_epsilon(const json& v, AlgorithmSpec& a, const std::string& w) {
  if (v.is_number()) {
    a.epsilon = v.get<double>();
    return;
  }
  a.epsilon_preset = pick<EpsilonPreset>(as_string(v, w),
                                         {{"one", EpsilonPreset::One},
                                          {"inverse_rho_sq_d_sq", EpsilonPreset::InverseRhoSqDSq},
                                          {"inverse_rho_sq_d_sq_n", EpsilonPreset::InverseRhoSqDSqN}},
                                         w);
}

AlgorithmSpec parse_algorithm(const json& j, std::size_t index) {
  std::string w = "algorithms[" + std::to_string(index) + "]";
  if (!j.is_object()) throw ConfigError(w + ": expected an object");
  AlgorithmSpec a;
  const std::string type = as_string(need(j, "type", w), w + ".type");
  a.type = pick<AlgorithmType>(type,
                               {{"newton", AlgorithmType::Newton},
                                {"gd", AlgorithmType::Gd},
                                {"rls", AlgorithmType::Rls},
                                {"meta", AlgorithmType::Meta}},
                               w + ".type");
  a.id = j.contains("id") ? as_string(j["id"], w + ".id") : type;
  if (!valid_id(a.id)) throw ConfigError(w + ".id: use letters, digits, '_', '-', '.'");
  switch (a.type) {
    case AlgorithmType::Newton:
      allow_keys(j, {"id", "type", "schedule", "regime", "eta", "epsilon"}, w);
      a.regime = parse_regime(need(j, "regime", w), w + ".regime");
      break;
    case AlgorithmType::Gd:
      allow_keys(j, {"id", "type", "schedule", "rule"}, w);
      a.rule = parse_rule(need(j, "rule", w), w + ".rule");
      break;
    case AlgorithmType::Rls:
      allow_keys(j, {"id", "type", "schedule"}, w);
      break;
    case AlgorithmType::Meta: {
      allow_keys(j, {"id", "type", "expert", "regime", "rule", "eta", "epsilon",
                     "include_gamma_one", "lambda"},
                 w);
      a.expert = pick<ExpertFamily>(as_string(need(j, "expert", w), w + ".expert"),
                                    {{"newton", ExpertFamily::Newton}, {"gd", ExpertFamily::Gd}},
                                    w + ".expert");
      if (a.expert == ExpertFamily::Newton) {
        a.regime = parse_regime(need(j, "regime", w), w + ".regime");
        if (j.contains("rule")) throw ConfigError(w + ": 'rule' applies to gd experts");
      } else {
        a.rule = parse_rule(need(j, "rule", w), w + ".rule");
        for (const char* k : {"regime", "eta", "epsilon"}) {
          if (j.contains(k)) throw ConfigError(w + ": '" + k + "' applies to newton experts");
        }
      }
      if (j.contains("include_gamma_one")) {
        a.include_gamma_one = as_bool(j["include_gamma_one"], w + ".include_gamma_one");
      }
      if (j.contains("lambda")) a.lambda = as_number(j["lambda"], w + ".lambda");
      break;
    }
  }
  if (j.contains("eta")) a.eta = as_number(j["eta"], w + ".eta");
  if (j.contains("epsilon")) parse_epsilon(j["epsilon"], a, w + ".epsilon");
  if (a.type != AlgorithmType::Meta) a.schedule = parse_schedule(need(j, "schedule", w), w + ".schedule");
  return a;
}

ComparatorSpec parse_comparator(const json& j, std::size_t index) {
  const std::string w = "comparators[" + std::to_string(index) + "]";
  ComparatorSpec c;
  if (j.is_string()) {
    c.kind = pick<ComparatorKind>(j.get<std::string>(),
                                  {{"fixed_optimum", ComparatorKind::FixedOptimum},
                                   {"per_round_minimizer", ComparatorKind::PerRoundMinimizer},
                                   {"explicit", ComparatorKind::Explicit}},
                                  w);
    return c;
  }
  allow_keys(j, {"kind", "budget"}, w);
  c.kind = pick<ComparatorKind>(as_string(need(j, "kind", w), w + ".kind"),
                                {{"fixed_optimum", ComparatorKind::FixedOptimum},
                                 {"per_round_minimizer", ComparatorKind::PerRoundMinimizer},
                                 {"explicit", ComparatorKind::Explicit}},
                                w + ".kind");
  if (j.contains("budget")) {
    if (c.kind != ComparatorKind::Explicit) throw ConfigError(w + ": budget applies to explicit comparators");
    c.budget = parse_budget(j["budget"], w + ".budget");
  }
  return c;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  allow_keys(root, {"scenario", "algorithms", "comparators", "seeds", "output_dir"}, "config");
  ExperimentConfig cfg;
  parse_scenario(need(root, "scenario", "config"), cfg);

  const json& algs = need(root, "algorithms", "config");
  if (!algs.is_array() || algs.empty()) throw ConfigError("config.algorithms: expected a non-empty list");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < algs.size(); ++i) {
    cfg.algorithms.push_back(parse_algorithm(algs[i], i));
    if (!ids.insert(cfg.algorithms.back().id).second) {
      throw ConfigError("config.algorithms: duplicate id '" + cfg.algorithms.back().id + "'");
    }
  }

  const json& comps = need(root, "comparators", "config");
  if (!comps.is_array() || comps.empty()) throw ConfigError("config.comparators: expected a non-empty list");
  std::set<ComparatorKind> kinds;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    cfg.comparators.push_back(parse_comparator(comps[i], i));
    if (!kinds.insert(cfg.comparators.back().kind).second) {
      throw ConfigError("config.comparators: each kind may appear once");
    }
  }

  const json& seeds = need(root, "seeds", "config");
  if (!seeds.is_array() || seeds.empty()) throw ConfigError("config.seeds: expected a non-empty list");
  for (const auto& s : seeds) {
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      throw ConfigError("config.seeds: seeds must be non-negative integers");
    }
    cfg.seeds.push_back(s.get<std::uint64_t>());
  }

  std::filesystem::path out = as_string(need(root, "output_dir", "config"), "config.output_dir");
  cfg.output_dir = out.is_relative() && !base_dir.empty() ? base_dir / out : out;
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

}  // namespace doco
