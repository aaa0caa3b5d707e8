#include "chns/config.hpp"

#include <charconv>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

namespace chns {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Line 0 marks values supplied on the command line rather than in the file.
[[noreturn]] void fail(int line, const std::string& msg) {
  const std::string where =
      line == 0 ? "command line" : "line " + std::to_string(line);
  throw ConfigError("config error: " + where + ": " + msg);
}

double to_double(const std::string& v, int line, const std::string& key) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    fail(line, "key '" + key + "': '" + v + "' is not a number");
  return x;
}

int to_int(const std::string& v, int line, const std::string& key) {
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0' || x < -1000000000 || x > 1000000000)
    fail(line, "key '" + key + "': '" + v + "' is not an integer");
  return int(x);
}

bool to_bool(const std::string& v, int line, const std::string& key) {
  if (v == "on") return true;
  if (v == "off") return false;
  fail(line, "key '" + key + "': expected on or off, got '" + v + "'");
}

std::vector<double> to_number_list(const std::string& v, int line,
                                   const std::string& key) {
  std::vector<double> out;
  std::istringstream ss(v);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (cell.empty()) fail(line, "key '" + key + "': empty list entry");
    out.push_back(to_double(cell, line, key));
  }
  return out;
}

std::string num(double x) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, p);
}

std::string num(int x) { return std::to_string(x); }

const char* onoff(bool b) { return b ? "on" : "off"; }

const char* strategy_word(StrategyMode mode) {
  switch (mode) {
    case StrategyMode::monolithic: return "monolithic";
    case StrategyMode::partitioned_direct: return "partitioned_direct";
    case StrategyMode::partitioned_iterative: return "partitioned_iterative";
  }
  return "monolithic";
}

StrategyMode strategy_from(const std::string& v, int line) {
  for (StrategyMode m :
       {StrategyMode::monolithic, StrategyMode::partitioned_direct,
        StrategyMode::partitioned_iterative})
    if (v == strategy_word(m)) return m;
  fail(line, "unknown strategy '" + v + "'");
}

struct KeyHandler {
  const char* name;
  std::function<void(Config&, const std::string&, int)> set;
  std::function<std::string(const Config&)> get;
};

// One entry per key, in canonical serialization order.
const std::vector<KeyHandler>& key_table() {
  static const std::vector<KeyHandler> table = [] {
    std::vector<KeyHandler> t;
    auto add = [&t](const char* name, auto setter, auto getter) {
      t.push_back({name, setter, getter});
    };

    add("scenario",
        [](Config&, const std::string&, int) { /* applied in a first pass */ },
        [](const Config& c) {
          return std::string(scenario_name(c.scenario.kind));
        });
    add("strategy",
        [](Config& c, const std::string& v, int line) {
          c.strategy.mode = strategy_from(v, line);
        },
        [](const Config& c) {
          return std::string(strategy_word(c.strategy.mode));
        });

    add("lx",
        [](Config& c, const std::string& v, int l) {
          c.scenario.lx = to_double(v, l, "lx");
        },
        [](const Config& c) { return num(c.scenario.lx); });
    add("ly",
        [](Config& c, const std::string& v, int l) {
          c.scenario.ly = to_double(v, l, "ly");
        },
        [](const Config& c) { return num(c.scenario.ly); });
    add("circles",
        [](Config& c, const std::string& v, int l) {
          c.scenario.circles.clear();
          if (v.empty()) return;
          std::istringstream ss(v);
          std::string item;
          while (std::getline(ss, item, ';')) {
            const std::vector<double> d =
                to_number_list(trim(item), l, "circles");
            if (d.size() != 3)
              fail(l, "key 'circles': each entry is x,y,radius");
            c.scenario.circles.push_back({{d[0], d[1]}, d[2]});
          }
        },
        [](const Config& c) {
          std::string s;
          for (const Circle& k : c.scenario.circles) {
            if (!s.empty()) s += "; ";
            s += num(k.center.x) + "," + num(k.center.y) + "," + num(k.radius);
          }
          return s;
        });
    add("rectangles",
        [](Config& c, const std::string& v, int l) {
          c.scenario.rectangles.clear();
          if (v.empty()) return;
          std::istringstream ss(v);
          std::string item;
          while (std::getline(ss, item, ';')) {
            const std::vector<double> d =
                to_number_list(trim(item), l, "rectangles");
            if (d.size() != 4)
              fail(l, "key 'rectangles': each entry is x0,y0,x1,y1");
            c.scenario.rectangles.push_back({d[0], d[1], d[2], d[3]});
          }
        },
        [](const Config& c) {
          std::string s;
          for (const Rect& r : c.scenario.rectangles) {
            if (!s.empty()) s += "; ";
            s += num(r.x0) + "," + num(r.y0) + "," + num(r.x1) + "," +
                 num(r.y1);
          }
          return s;
        });
    add("inflow",
        [](Config& c, const std::string& v, int l) {
          c.scenario.inflow = to_bool(v, l, "inflow");
        },
        [](const Config& c) { return std::string(onoff(c.scenario.inflow)); });
    add("reactive",
        [](Config& c, const std::string& v, int l) {
          c.scenario.reactive = to_bool(v, l, "reactive");
        },
        [](const Config& c) {
          return std::string(onoff(c.scenario.reactive));
        });
    add("lid_stop_step",
        [](Config& c, const std::string& v, int l) {
          c.scenario.lid_stop_step = to_int(v, l, "lid_stop_step");
        },
        [](const Config& c) { return num(c.scenario.lid_stop_step); });
    add("c_init",
        [](Config& c, const std::string& v, int l) {
          c.scenario.c_init = to_double(v, l, "c_init");
        },
        [](const Config& c) { return num(c.scenario.c_init); });
    add("c_inlet",
        [](Config& c, const std::string& v, int l) {
          c.scenario.c_inlet = to_double(v, l, "c_inlet");
        },
        [](const Config& c) { return num(c.scenario.c_inlet); });

#define CHNS_PARAM_KEY(key)                                       \
  add(#key,                                                       \
      [](Config& c, const std::string& v, int l) {                \
        c.scenario.params.key = to_double(v, l, #key);            \
      },                                                          \
      [](const Config& c) { return num(c.scenario.params.key); })
    CHNS_PARAM_KEY(rho);
    CHNS_PARAM_KEY(gamma);
    CHNS_PARAM_KEY(d0);
    CHNS_PARAM_KEY(d_max);
    CHNS_PARAM_KEY(mobility);
    CHNS_PARAM_KEY(sigma);
    CHNS_PARAM_KEY(epsilon);
    CHNS_PARAM_KEY(delta);
    CHNS_PARAM_KEY(delta_dw);
    CHNS_PARAM_KEY(gamma_dw);
    CHNS_PARAM_KEY(m_pre);
    CHNS_PARAM_KEY(diffusivity);
    CHNS_PARAM_KEY(c_star);
    CHNS_PARAM_KEY(k_c);
    CHNS_PARAM_KEY(f_bar);
    CHNS_PARAM_KEY(tau);
#undef CHNS_PARAM_KEY
    add("n_pre",
        [](Config& c, const std::string& v, int l) {
          c.scenario.params.n_pre = to_int(v, l, "n_pre");
        },
        [](const Config& c) { return num(c.scenario.params.n_pre); });

    add("newton_max_iterations",
        [](Config& c, const std::string& v, int l) {
          c.strategy.newton.max_iterations =
              to_int(v, l, "newton_max_iterations");
        },
        [](const Config& c) { return num(c.strategy.newton.max_iterations); });
    add("newton_rel_tol",
        [](Config& c, const std::string& v, int l) {
          c.strategy.newton.rel_tol = to_double(v, l, "newton_rel_tol");
        },
        [](const Config& c) { return num(c.strategy.newton.rel_tol); });
    add("newton_abs_tol",
        [](Config& c, const std::string& v, int l) {
          c.strategy.newton.abs_tol = to_double(v, l, "newton_abs_tol");
        },
        [](const Config& c) { return num(c.strategy.newton.abs_tol); });
    add("newton_min_lin_red",
        [](Config& c, const std::string& v, int l) {
          c.strategy.newton.min_lin_red = to_double(v, l, "newton_min_lin_red");
        },
        [](const Config& c) { return num(c.strategy.newton.min_lin_red); });
    add("newton_max_line_search",
        [](Config& c, const std::string& v, int l) {
          c.strategy.newton.max_line_search =
              to_int(v, l, "newton_max_line_search");
        },
        [](const Config& c) { return num(c.strategy.newton.max_line_search); });
    add("newton_damping",
        [](Config& c, const std::string& v, int l) {
          c.strategy.newton.damping = to_double(v, l, "newton_damping");
        },
        [](const Config& c) { return num(c.strategy.newton.damping); });
    add("coupling_rel_tol",
        [](Config& c, const std::string& v, int l) {
          c.strategy.coupling_rel_tol = to_double(v, l, "coupling_rel_tol");
        },
        [](const Config& c) { return num(c.strategy.coupling_rel_tol); });
    add("max_coupling_iterations",
        [](Config& c, const std::string& v, int l) {
          c.strategy.max_coupling_iterations =
              to_int(v, l, "max_coupling_iterations");
        },
        [](const Config& c) {
          return num(c.strategy.max_coupling_iterations);
        });

    add("nx",
        [](Config& c, const std::string& v, int l) {
          c.run.nx = to_int(v, l, "nx");
        },
        [](const Config& c) { return num(c.run.nx); });
    add("ny",
        [](Config& c, const std::string& v, int l) {
          c.run.ny = to_int(v, l, "ny");
        },
        [](const Config& c) { return num(c.run.ny); });
    add("steps",
        [](Config& c, const std::string& v, int l) {
          c.run.n_steps = to_int(v, l, "steps");
        },
        [](const Config& c) { return num(c.run.n_steps); });
    add("adapt",
        [](Config& c, const std::string& v, int l) {
          c.run.adapt = to_bool(v, l, "adapt");
        },
        [](const Config& c) { return std::string(onoff(c.run.adapt)); });
    add("energy_audit",
        [](Config& c, const std::string& v, int l) {
          c.run.energy_audit = to_bool(v, l, "energy_audit");
        },
        [](const Config& c) { return std::string(onoff(c.run.energy_audit)); });
    add("initial_refine_levels",
        [](Config& c, const std::string& v, int l) {
          c.run.initial_refine_levels = to_int(v, l, "initial_refine_levels");
        },
        [](const Config& c) { return num(c.run.initial_refine_levels); });
    add("refine_threshold",
        [](Config& c, const std::string& v, int l) {
          c.run.refine_threshold = to_double(v, l, "refine_threshold");
        },
        [](const Config& c) { return num(c.run.refine_threshold); });
    add("max_refine_level",
        [](Config& c, const std::string& v, int l) {
          c.run.max_refine_level = to_int(v, l, "max_refine_level");
        },
        [](const Config& c) { return num(c.run.max_refine_level); });
    add("vtk_stride",
        [](Config& c, const std::string& v, int l) {
          c.run.vtk_stride = to_int(v, l, "vtk_stride");
        },
        [](const Config& c) { return num(c.run.vtk_stride); });
    return t;
  }();
  return table;
}

const KeyHandler* find_key(const std::string& name) {
  for (const KeyHandler& h : key_table())
    if (name == h.name) return &h;
  return nullptr;
}

void check_config(const Config& c, const std::map<std::string, int>& lines) {
  try {
    c.scenario.validate();
    const NewtonOptions& n = c.strategy.newton;
    if (n.max_iterations < 1 || n.max_line_search < 1)
      throw std::invalid_argument("newton iteration budgets must be at least 1");
    if (!(n.rel_tol > 0.0) || !(n.abs_tol > 0.0))
      throw std::invalid_argument("newton_rel_tol and newton_abs_tol must be positive");
    if (!(n.min_lin_red > 0.0) || n.min_lin_red >= 1.0)
      throw std::invalid_argument("newton_min_lin_red must lie in (0,1)");
    if (!(n.damping > 0.0) || n.damping >= 1.0)
      throw std::invalid_argument("newton_damping must lie in (0,1)");
    if (!(c.strategy.coupling_rel_tol > 0.0))
      throw std::invalid_argument("coupling_rel_tol must be positive");
    if (c.strategy.max_coupling_iterations < 1)
      throw std::invalid_argument("max_coupling_iterations must be at least 1");
    if (c.run.nx < 1 || c.run.ny < 1)
      throw std::invalid_argument("nx and ny must be at least 1");
    if (c.run.initial_refine_levels < 0 || c.run.max_refine_level < 0)
      throw std::invalid_argument("refinement levels must be nonnegative");
    if (!(c.run.refine_threshold > 0.0))
      throw std::invalid_argument("refine_threshold must be positive");
    if (c.run.vtk_stride < 0)
      throw std::invalid_argument("vtk_stride must be nonnegative");
  } catch (const std::invalid_argument& e) {
    // Cite the lines of the keys the message names, when the file set them.
    std::string msg = std::string("config error: ") + e.what();
    std::string cites;
    for (const auto& [key, line] : lines) {
      if (std::string(e.what()).find(key) == std::string::npos) continue;
      if (!cites.empty()) cites += ", ";
      cites += key + (line == 0 ? std::string(" on the command line")
                                : " at line " + std::to_string(line));
    }
    if (!cites.empty()) msg += " (" + cites + ")";
    throw ConfigError(msg);
  }
}

} // namespace

Config parse_config(const std::string& text) { return parse_config(text, {}); }

Config parse_config(
    const std::string& text,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  struct Entry {
    std::string key, value;
    int line;
  };
  std::vector<Entry> entries;
  std::map<std::string, int> line_of;

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::size_t cut = raw.find('#');
    std::string s = trim(cut == std::string::npos ? raw : raw.substr(0, cut));
    if (s.empty()) continue;
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value");
    Entry e{trim(s.substr(0, eq)), trim(s.substr(eq + 1)), line};
    if (e.key.empty()) fail(line, "missing key before '='");
    auto [it, fresh] = line_of.emplace(e.key, line);
    if (!fresh)
      fail(line, "duplicate key '" + e.key + "' (first at line " +
                     std::to_string(it->second) + ")");
    entries.push_back(std::move(e));
  }

  for (const auto& [key, value] : overrides) {
    bool replaced = false;
    for (Entry& e : entries)
      if (e.key == key) {
        e.value = value;
        e.line = 0;
        replaced = true;
        break;
      }
    if (!replaced) entries.push_back({key, value, 0});
    line_of[key] = 0;
  }

  Config cfg;
  cfg.scenario = make_scenario(ScenarioKind::cavity_inclusions);
  for (const Entry& e : entries) {
    if (e.key != "scenario") continue;
    try {
      cfg.scenario = scenario_by_name(e.value);
    } catch (const std::invalid_argument& ex) {
      fail(e.line, ex.what());
    }
  }
  for (const Entry& e : entries) {
    const KeyHandler* h = find_key(e.key);
    if (h == nullptr) fail(e.line, "unknown key '" + e.key + "'");
    if (e.value.empty() && e.key != "circles" && e.key != "rectangles")
      fail(e.line, "key '" + e.key + "': missing value");
    h->set(cfg, e.value, e.line);
  }

  check_config(cfg, line_of);
  return cfg;
}

std::string serialize_config(const Config& config) {
  std::string out;
  for (const KeyHandler& h : key_table())
    out += std::string(h.name) + " = " + h.get(config) + "\n";
  return out;
}

} // namespace chns
