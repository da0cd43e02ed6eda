#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "coneflow/cli.hpp"
#include "coneflow/error.hpp"

namespace coneflow::cli {

namespace {

struct ScenarioName {
  Scenario scenario;
  const char* name;
};

constexpr ScenarioName kScenarios[] = {
    {Scenario::onedim_blowup, "onedim-blowup"},   {Scenario::axis_onedim, "axis-onedim"},
    {Scenario::elliptic_validate, "elliptic-validate"}, {Scenario::axisym_blowup, "axisym-blowup"},
    {Scenario::axisym_noswirl, "axisym-noswirl"},
};

double to_real(const std::string& key, const std::string& v) {
  double x = 0.0;
  const char* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end || !std::isfinite(x)) throw ConfigError(key, "'" + v + "' is not a number");
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  int x = 0;
  const char* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end) throw ConfigError(key, "'" + v + "' is not an integer");
  return x;
}

double positive(const std::string& key, const std::string& v) {
  const double x = to_real(key, v);
  if (!(x > 0.0)) throw InvalidParameter(key, "must be positive");
  return x;
}

int at_least(const std::string& key, const std::string& v, int lo) {
  const int x = to_int(key, v);
  if (x < lo) throw InvalidParameter(key, "must be at least " + std::to_string(lo));
  return x;
}

std::string one_of(const std::string& key, const std::string& v, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (v == a) return v;
  std::string list;
  for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
  throw ConfigError(key, "'" + v + "' is not one of " + list);
}

struct Key {
  const char* name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string num(double v) { return format_double(v); }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      {"scenario",
       [](RunConfig& c, const std::string& v) {
         for (const auto& s : kScenarios)
           if (v == s.name) {
             c.scenario = s.scenario;
             return;
           }
         throw ConfigError("scenario", "unknown scenario '" + v + "'");
       },
       [](const RunConfig& c) { return std::string(to_string(c.scenario)); }},
      {"epsilon", [](RunConfig& c, const std::string& v) { c.epsilon = positive("epsilon", v); },
       [](const RunConfig& c) { return num(c.epsilon); }},
      {"n", [](RunConfig& c, const std::string& v) { c.n = at_least("n", v, 17); },
       [](const RunConfig& c) { return std::to_string(c.n); }},
      {"nr", [](RunConfig& c, const std::string& v) { c.nr = at_least("nr", v, 3); },
       [](const RunConfig& c) { return std::to_string(c.nr); }},
      {"ntheta", [](RunConfig& c, const std::string& v) { c.ntheta = at_least("ntheta", v, 4); },
       [](const RunConfig& c) { return std::to_string(c.ntheta); }},
      {"r_max", [](RunConfig& c, const std::string& v) { c.r_max = positive("r_max", v); },
       [](const RunConfig& c) { return num(c.r_max); }},
      {"r_min", [](RunConfig& c, const std::string& v) { c.r_min = positive("r_min", v); },
       [](const RunConfig& c) { return num(c.r_min); }},
      {"grading",
       [](RunConfig& c, const std::string& v) {
         c.grading = to_real("grading", v);
         if (c.grading != 0.0 && !(c.grading > 1.0)) throw InvalidParameter("grading", "must be 0 or above 1");
       },
       [](const RunConfig& c) { return num(c.grading); }},
      {"alpha", [](RunConfig& c, const std::string& v) { c.alpha = positive("alpha", v); },
       [](const RunConfig& c) { return num(c.alpha); }},
      {"dt_ceiling", [](RunConfig& c, const std::string& v) { c.dt_ceiling = positive("dt_ceiling", v); },
       [](const RunConfig& c) { return num(c.dt_ceiling); }},
      {"dt_floor", [](RunConfig& c, const std::string& v) { c.dt_floor = positive("dt_floor", v); },
       [](const RunConfig& c) { return num(c.dt_floor); }},
      {"t_end", [](RunConfig& c, const std::string& v) { c.t_end = positive("t_end", v); },
       [](const RunConfig& c) { return c.t_end ? num(*c.t_end) : std::string("auto"); }},
      {"t_end_fraction",
       [](RunConfig& c, const std::string& v) {
         c.t_end_fraction = positive("t_end_fraction", v);
         if (c.t_end_fraction >= 1.0) throw InvalidParameter("t_end_fraction", "must lie in (0, 1)");
       },
       [](const RunConfig& c) { return num(c.t_end_fraction); }},
      {"cfl",
       [](RunConfig& c, const std::string& v) {
         c.cfl = positive("cfl", v);
         if (c.cfl > 1.0) throw InvalidParameter("cfl", "must lie in (0, 1]");
       },
       [](const RunConfig& c) { return num(c.cfl); }},
      {"blowup_factor", [](RunConfig& c, const std::string& v) { c.blowup_factor = positive("blowup_factor", v); },
       [](const RunConfig& c) { return num(c.blowup_factor); }},
      {"record_every", [](RunConfig& c, const std::string& v) { c.record_every = at_least("record_every", v, 1); },
       [](const RunConfig& c) { return std::to_string(c.record_every); }},
      {"snapshot_every",
       [](RunConfig& c, const std::string& v) { c.snapshot_every = at_least("snapshot_every", v, 0); },
       [](const RunConfig& c) { return std::to_string(c.snapshot_every); }},
      {"preset",
       [](RunConfig& c, const std::string& v) { c.preset = one_of("preset", v, {"paper-blowup", "sine", "custom"}); },
       [](const RunConfig& c) { return c.preset; }},
      {"initial_data", [](RunConfig& c, const std::string& v) { c.initial_data = v; },
       [](const RunConfig& c) { return c.initial_data.string(); }},
      {"amplitude", [](RunConfig& c, const std::string& v) { c.amplitude = to_real("amplitude", v); },
       [](const RunConfig& c) { return num(c.amplitude); }},
      {"orientation",
       [](RunConfig& c, const std::string& v) {
         c.orientation = to_real("orientation", v);
         if (c.orientation != 1.0 && c.orientation != -1.0) throw InvalidParameter("orientation", "must be 1 or -1");
       },
       [](const RunConfig& c) { return num(c.orientation); }},
      {"partner_n", [](RunConfig& c, const std::string& v) { c.partner_n = at_least("partner_n", v, 0); },
       [](const RunConfig& c) { return std::to_string(c.partner_n); }},
      {"advection",
       [](RunConfig& c, const std::string& v) {
         c.advection = one_of("advection", v, {"upwind", "central", "hybrid"});
       },
       [](const RunConfig& c) { return c.advection; }},
      {"interpolation",
       [](RunConfig& c, const std::string& v) { c.interpolation = one_of("interpolation", v, {"cubic", "bilinear"}); },
       [](const RunConfig& c) { return c.interpolation; }},
      {"levels", [](RunConfig& c, const std::string& v) { c.levels = at_least("levels", v, 2); },
       [](const RunConfig& c) { return std::to_string(c.levels); }},
      {"out", [](RunConfig& c, const std::string& v) { c.out = v; },
       [](const RunConfig& c) { return c.out.string(); }},
  };
  return table;
}

const Key* find_key(const std::string& name) {
  for (const Key& k : keys())
    if (name == k.name) return &k;
  return nullptr;
}

void apply_scenario_defaults(RunConfig& c, const std::set<std::string>& given) {
  const bool d2 = c.scenario == Scenario::axisym_blowup || c.scenario == Scenario::axisym_noswirl;
  if (!given.count("cfl")) c.cfl = d2 ? 0.8 : 0.4;
  if (c.scenario == Scenario::elliptic_validate) {
    if (!given.count("nr")) c.nr = 33;
    if (!given.count("ntheta")) c.ntheta = 17;
  }
  if (c.scenario == Scenario::axisym_noswirl && !given.count("preset")) c.preset = "sine";
  if (!given.count("t_end")) {
    switch (c.scenario) {
      case Scenario::onedim_blowup: c.t_end = 50.0; break;
      case Scenario::axis_onedim: c.t_end = 10.0; break;
      case Scenario::axisym_noswirl: c.t_end = 2.0; break;
      default: c.t_end.reset(); break;
    }
  }
}

}  // namespace

const char* to_string(Scenario scenario) {
  for (const auto& s : kScenarios)
    if (s.scenario == scenario) return s.name;
  return "?";
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const Key& k : keys()) v.emplace_back(k.name);
    return v;
  }();
  return names;
}

KeyValues to_key_values(const RunConfig& config) {
  KeyValues kv;
  for (const Key& k : keys()) kv.emplace_back(k.name, k.get(config));
  return kv;
}

void set_key(RunConfig& config, const std::string& key, const std::string& value) {
  const Key* k = find_key(key);
  if (!k) throw ConfigError(key, "unknown key '" + key + "'");
  k->set(config, value);
}

void validate(const RunConfig& c) {
  if (!(c.r_min < c.r_max)) throw InvalidParameter("r_min", "must be below r_max");
  if (c.preset == "custom" && c.initial_data.empty())
    throw ConfigError("initial_data", "preset custom needs initial_data");
  if (c.scenario == Scenario::axisym_blowup && c.partner_n > 0 && (c.partner_n - 1) % (c.ntheta - 1) != 0)
    throw InvalidParameter("partner_n", "partner_n - 1 must be a multiple of ntheta - 1");
  if (c.scenario == Scenario::elliptic_validate && c.levels < 2) throw InvalidParameter("levels", "need two grids");
}

ParsedConfig parse_config(const ConfigSources& sources) {
  ParsedConfig parsed;
  std::map<std::string, std::string> from_file;
  auto accept = [&](const std::string& key) {
    if (find_key(key)) return true;
    if (sources.strict) throw ConfigError(key, "unknown key '" + key + "'");
    parsed.warnings.push_back("ignoring unknown key '" + key + "'");
    return false;
  };
  if (sources.file) {
    if (!std::filesystem::is_regular_file(*sources.file))
      throw ConfigError("config", "cannot read config file " + sources.file->string());
    for (const auto& [k, v] : read_key_values(*sources.file)) {
      if (!accept(k)) continue;
      if (from_file.count(k)) throw ConfigError(k, "key '" + k + "' given twice in " + sources.file->string());
      from_file[k] = v;
    }
  }
  std::map<std::string, std::string> merged = from_file;
  for (const auto& [k, v] : sources.flags) {
    if (!accept(k)) continue;
    const auto it = from_file.find(k);
    if (it != from_file.end() && it->second != v)
      parsed.warnings.push_back("flag " + k + "=" + v + " overrides " + k + "=" + it->second + " from the config file");
    merged[k] = v;
  }
  std::set<std::string> given;
  // scenario first, so scenario defaults and later keys see it.
  if (const auto it = merged.find("scenario"); it != merged.end()) set_key(parsed.config, it->first, it->second);
  for (const auto& [k, v] : merged) {
    given.insert(k);
    if (k != "scenario") set_key(parsed.config, k, v);
  }
  apply_scenario_defaults(parsed.config, given);
  validate(parsed.config);
  return parsed;
}

Sweep parse_sweep(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
    throw ConfigError("sweep", "expected KEY=v1,v2,...");
  Sweep s;
  s.key = spec.substr(0, eq);
  if (!find_key(s.key)) throw ConfigError(s.key, "unknown key '" + s.key + "' in sweep");
  if (s.key == "out") throw ConfigError("sweep", "cannot sweep over out");
  std::string rest = spec.substr(eq + 1);
  std::size_t pos = 0;
  while (pos <= rest.size()) {
    const auto comma = rest.find(',', pos);
    const std::string v = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (v.empty()) throw ConfigError("sweep", "empty value in sweep list");
    s.values.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return s;
}

}  // namespace coneflow::cli
