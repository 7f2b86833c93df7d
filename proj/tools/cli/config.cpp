#include "config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace vpm::cli {

ConfigError::ConfigError(const std::string& message, int line)
    : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

void check_keys(const YAML::Node& node, const std::string& section, const std::set<std::string>& allowed) {
  if (!node.IsMap()) throw ConfigError("section '" + section + "' must be a mapping", line_of(node));
  for (auto it = node.begin(); it != node.end(); ++it) {
    const auto key = it->first.as<std::string>();
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in section '" + section + "'", line_of(it->first));
  }
}

template <class T>
T read(const YAML::Node& node, const std::string& key, const std::string& section, T fallback) {
  const YAML::Node v = node[key];
  if (!v) return fallback;
  try {
    return v.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("'" + section + "." + key + "' has the wrong type", line_of(v));
  }
}

std::vector<double> read_list(const YAML::Node& node, const std::string& key, const std::string& section,
                              std::vector<double> fallback) {
  const YAML::Node v = node[key];
  if (!v) return fallback;
  try {
    if (v.IsScalar()) return {v.as<double>()};
    return v.as<std::vector<double>>();
  } catch (const YAML::Exception&) {
    throw ConfigError("'" + section + "." + key + "' must be a number or a list of numbers", line_of(v));
  }
}

void require(bool ok, const std::string& message, const YAML::Node& where) {
  if (!ok) throw ConfigError(message, where ? line_of(where) : 0);
}

ProfileType parse_profile_type(const std::string& s, const YAML::Node& where) {
  if (s == "fermi_step") return ProfileType::fermi_step;
  if (s == "fermi_slab") return ProfileType::fermi_slab;
  if (s == "tabulated_fourier") return ProfileType::tabulated_fourier;
  if (s == "vacuum") return ProfileType::vacuum;
  throw ConfigError("unknown profile type '" + s + "'", line_of(where));
}

ProfileConfig parse_profile(const YAML::Node& node) {
  ProfileConfig p;
  if (!node) return p;
  if (!node.IsMap()) throw ConfigError("section 'profile' must be a mapping", line_of(node));
  p.type = parse_profile_type(read<std::string>(node, "type", "profile", "fermi_step"), node["type"]);
  switch (p.type) {
    case ProfileType::fermi_step:
    case ProfileType::fermi_slab: {
      check_keys(node, "profile", {"type", "h", "w", "s", "L"});
      p.fermi.h = read(node, "h", "profile", p.fermi.h);
      p.fermi.w = read(node, "w", "profile", p.fermi.w);
      p.fermi.s = read(node, "s", "profile", p.fermi.s);
      p.fermi.L = read(node, "L", "profile", p.fermi.L);
      try {
        validate(p.fermi);
      } catch (const Error& e) {
        throw ConfigError(e.what(), line_of(node));
      }
      p.period = p.fermi.L;
      break;
    }
    case ProfileType::vacuum:
      check_keys(node, "profile", {"type", "L"});
      p.period = read(node, "L", "profile", p.period);
      require(p.period > 0.0, "period must be positive", node["L"]);
      break;
    case ProfileType::tabulated_fourier: {
      check_keys(node, "profile", {"type", "L", "z", "components"});
      p.period = read(node, "L", "profile", p.period);
      p.z_nodes = read_list(node, "z", "profile", {});
      const YAML::Node comps = node["components"];
      require(comps && comps.IsSequence(), "tabulated profile needs a 'components' list", node);
      for (const auto& c : comps) {
        check_keys(c, "profile.components", {"n", "re", "im"});
        require(static_cast<bool>(c["n"]), "component entry needs 'n'", c);
        TabulatedComponent t;
        t.n = read(c, "n", "profile.components", 0);
        const auto re = read_list(c, "re", "profile.components", {});
        const auto im = read_list(c, "im", "profile.components", std::vector<double>(re.size(), 0.0));
        require(re.size() == p.z_nodes.size() && im.size() == p.z_nodes.size(),
                "component " + std::to_string(t.n) + " needs one value per z node", c);
        for (std::size_t i = 0; i < re.size(); ++i) t.values.emplace_back(re[i], im[i]);
        p.table.push_back(std::move(t));
      }
      try {
        (void)make_tabulated(p.period, p.z_nodes, p.table);
      } catch (const Error& e) {
        throw ConfigError(e.what(), line_of(node));
      }
      break;
    }
  }
  return p;
}

}  // namespace

std::string to_string(ProfileType type) {
  switch (type) {
    case ProfileType::fermi_step: return "fermi_step";
    case ProfileType::fermi_slab: return "fermi_slab";
    case ProfileType::tabulated_fourier: return "tabulated_fourier";
    case ProfileType::vacuum: return "vacuum";
  }
  return "";
}

FourierProfile build_profile(const ProfileConfig& p) {
  switch (p.type) {
    case ProfileType::fermi_step: return make_fermi_step(p.fermi);
    case ProfileType::fermi_slab: return make_fermi_slab(p.fermi.h, p.fermi.w, p.fermi.s, p.fermi.L);
    case ProfileType::tabulated_fourier: return make_tabulated(p.period, p.z_nodes, p.table);
    case ProfileType::vacuum: return make_vacuum(p.period);
  }
  throw Error("unknown profile type");
}

double profile_extent(const ProfileConfig& p) {
  switch (p.type) {
    case ProfileType::fermi_step:
    case ProfileType::fermi_slab: return p.fermi.w;
    case ProfileType::tabulated_fourier: return p.z_nodes.back();
    case ProfileType::vacuum: return 1.0;
  }
  return 1.0;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line + 1);
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  check_keys(root, "<top level>",
             {"profile", "geometry", "quadrature", "numerics", "slab", "output", "parallelism", "diagnostics"});

  RunConfig c;
  c.source = source;
  c.profile = parse_profile(root["profile"]);
  const double extent = profile_extent(c.profile);
  const bool fermi = c.profile.type == ProfileType::fermi_step || c.profile.type == ProfileType::fermi_slab;

  if (const YAML::Node q = root["quadrature"]) {
    check_keys(q, "quadrature",
               {"kappa_min", "kappa_max", "ky_min", "ky_max", "n_kappa", "n_kx", "n_ky", "panels", "rule"});
    auto& s = c.quadrature;
    s.kappa_min = read(q, "kappa_min", "quadrature", s.kappa_min);
    s.kappa_max = read(q, "kappa_max", "quadrature", s.kappa_max);
    s.ky_min = read(q, "ky_min", "quadrature", s.ky_min);
    s.ky_max = read(q, "ky_max", "quadrature", s.ky_max);
    s.n_kappa = read(q, "n_kappa", "quadrature", s.n_kappa);
    s.n_kx = read(q, "n_kx", "quadrature", s.n_kx);
    s.n_ky = read(q, "n_ky", "quadrature", s.n_ky);
    s.panels = read(q, "panels", "quadrature", s.panels);
    try {
      s.rule = parse_quadrature_rule(read<std::string>(q, "rule", "quadrature", to_string(s.rule)));
      validate(s);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(e.what(), line_of(q));
    }
  }

  auto& num = c.numerics;
  num.channel.z_fit = extent;
  num.channel.z_start = 4.0 * extent;
  if (const YAML::Node n = root["numerics"]) {
    check_keys(n, "numerics",
               {"n_trunc", "ode_method", "ode_rtol", "ode_atol", "z_start", "z_fit", "max_condition",
                "vacuum_threshold", "convergence_rtol"});
    if (n["n_trunc"] && !(n["n_trunc"].IsScalar() && n["n_trunc"].Scalar() == "auto")) {
      num.n_trunc = read(n, "n_trunc", "numerics", 0);
      num.n_trunc_auto = false;
      require(num.n_trunc >= 0, "numerics.n_trunc must be non-negative", n["n_trunc"]);
    }
    try {
      num.channel.ode.method = parse_ode_method(read<std::string>(n, "ode_method", "numerics", "fehlberg78"));
    } catch (const Error& e) {
      throw ConfigError(e.what(), line_of(n["ode_method"]));
    }
    num.channel.ode.rtol = read(n, "ode_rtol", "numerics", num.channel.ode.rtol);
    num.channel.ode.atol = read(n, "ode_atol", "numerics", num.channel.ode.atol);
    num.channel.z_start = read(n, "z_start", "numerics", num.channel.z_start);
    num.channel.z_fit = read(n, "z_fit", "numerics", num.channel.z_fit);
    num.channel.max_condition = read(n, "max_condition", "numerics", num.channel.max_condition);
    num.channel.ode.vacuum_threshold = read(n, "vacuum_threshold", "numerics", num.channel.ode.vacuum_threshold);
    num.convergence_rtol = read(n, "convergence_rtol", "numerics", num.convergence_rtol);
    require(num.channel.ode.rtol > 0.0 && num.channel.ode.atol > 0.0, "ODE tolerances must be positive", n);
    require(num.channel.z_fit > 0.0, "numerics.z_fit must be positive", n["z_fit"]);
    require(num.channel.z_start >= num.channel.z_fit, "numerics.z_start must not be below z_fit", n["z_start"]);
    require(num.channel.max_condition > 1.0, "numerics.max_condition must exceed 1", n["max_condition"]);
    require(num.convergence_rtol > 0.0, "numerics.convergence_rtol must be positive", n["convergence_rtol"]);
  }
  if (num.n_trunc_auto)
    num.n_trunc = harmonic_cutoff(c.profile.period, std::max(c.quadrature.kappa_max, c.quadrature.ky_max));

  c.slab.epsilon = fermi ? 2.0 * c.profile.fermi.h : 1.0;
  c.slab.w = extent;
  if (const YAML::Node s = root["slab"]) {
    check_keys(s, "slab", {"epsilon", "w"});
    c.slab.epsilon = read(s, "epsilon", "slab", c.slab.epsilon);
    c.slab.w = read(s, "w", "slab", c.slab.w);
    require(c.slab.epsilon >= 1.0, "slab.epsilon must be at least 1", s["epsilon"]);
    require(c.slab.w > 0.0, "slab.w must be positive", s["w"]);
  } else if (c.profile.type == ProfileType::tabulated_fourier) {
    throw ConfigError("a tabulated profile needs an explicit 'slab' section");
  }

  c.geometry.delta_z = {6.0};
  c.geometry.delta_x = {0.0};
  if (const YAML::Node g = root["geometry"]) {
    check_keys(g, "geometry", {"delta_z", "delta_x"});
    c.geometry.delta_z = read_list(g, "delta_z", "geometry", c.geometry.delta_z);
    c.geometry.delta_x = read_list(g, "delta_x", "geometry", c.geometry.delta_x);
    require(!c.geometry.delta_z.empty() && !c.geometry.delta_x.empty(), "geometry lists must not be empty", g);
    for (double dz : c.geometry.delta_z)
      require(dz > 2.0 * extent, "geometry.delta_z must exceed 2w = " + std::to_string(2.0 * extent),
              g["delta_z"]);
  }

  if (const YAML::Node o = root["output"]) {
    check_keys(o, "output", {"csv", "json", "cache_dir"});
    c.output.csv = read<std::string>(o, "csv", "output", "");
    c.output.json = read<std::string>(o, "json", "output", "");
    c.output.cache_dir = read<std::string>(o, "cache_dir", "output", "");
  }

  if (const YAML::Node p = root["parallelism"]) {
    check_keys(p, "parallelism", {"workers"});
    c.workers = read(p, "workers", "parallelism", 0);
    require(c.workers >= 0, "parallelism.workers must be non-negative", p["workers"]);
  }

  if (const YAML::Node d = root["diagnostics"]) {
    check_keys(d, "diagnostics", {"channels", "seed", "k_min", "k_max", "kx0_max", "ky0_max"});
    auto& s = c.diagnostics;
    s.channels = read(d, "channels", "diagnostics", s.channels);
    s.seed = read(d, "seed", "diagnostics", s.seed);
    s.k_min = read(d, "k_min", "diagnostics", s.k_min);
    s.k_max = read(d, "k_max", "diagnostics", s.k_max);
    s.kx0_max = read(d, "kx0_max", "diagnostics", s.kx0_max);
    s.ky0_max = read(d, "ky0_max", "diagnostics", s.ky0_max);
    require(s.channels >= 1, "diagnostics.channels must be at least 1", d["channels"]);
    require(s.k_min > 0.0 && s.k_max > s.k_min, "need 0 < diagnostics.k_min < k_max", d);
    require(s.kx0_max >= 0.0 && s.kx0_max <= kPi / c.profile.period, "diagnostics.kx0_max must lie in [0, pi/L]",
            d["kx0_max"]);
    require(s.ky0_max >= 0.0, "diagnostics.ky0_max must be non-negative", d["ky0_max"]);
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str(), path);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

namespace {

nlohmann::json profile_json(const ProfileConfig& p) {
  nlohmann::json j{{"type", to_string(p.type)}, {"L", p.period}};
  if (p.type == ProfileType::fermi_step || p.type == ProfileType::fermi_slab) {
    j["h"] = p.fermi.h;
    j["w"] = p.fermi.w;
    j["s"] = p.fermi.s;
  } else if (p.type == ProfileType::tabulated_fourier) {
    j["z"] = p.z_nodes;
    auto comps = nlohmann::json::array();
    for (const auto& t : p.table) {
      std::vector<double> re, im;
      for (const auto& v : t.values) {
        re.push_back(v.real());
        im.push_back(v.imag());
      }
      comps.push_back({{"n", t.n}, {"re", re}, {"im", im}});
    }
    j["components"] = comps;
  }
  return j;
}

nlohmann::json numerics_json(const NumericsConfig& n) {
  return {{"n_trunc", n.n_trunc},
          {"ode_method", to_string(n.channel.ode.method)},
          {"ode_rtol", n.channel.ode.rtol},
          {"ode_atol", n.channel.ode.atol},
          {"z_start", n.channel.z_start},
          {"z_fit", n.channel.z_fit},
          {"max_condition", n.channel.max_condition},
          {"vacuum_threshold", n.channel.ode.vacuum_threshold}};
}

nlohmann::json quadrature_json(const QuadratureSpec& q) {
  return {{"kappa_min", q.kappa_min}, {"kappa_max", q.kappa_max}, {"ky_min", q.ky_min},
          {"ky_max", q.ky_max},       {"n_kappa", q.n_kappa},     {"n_kx", q.n_kx},
          {"n_ky", q.n_ky},           {"panels", q.panels},       {"rule", to_string(q.rule)}};
}

}  // namespace

nlohmann::json to_json(const RunConfig& c) {
  auto numerics = numerics_json(c.numerics);
  numerics["convergence_rtol"] = c.numerics.convergence_rtol;
  return {{"profile", profile_json(c.profile)},
          {"geometry", {{"delta_z", c.geometry.delta_z}, {"delta_x", c.geometry.delta_x}}},
          {"quadrature", quadrature_json(c.quadrature)},
          {"numerics", numerics},
          {"slab", {{"epsilon", c.slab.epsilon}, {"w", c.slab.w}}},
          {"diagnostics",
           {{"channels", c.diagnostics.channels},
            {"seed", c.diagnostics.seed},
            {"k_min", c.diagnostics.k_min},
            {"k_max", c.diagnostics.k_max},
            {"kx0_max", c.diagnostics.kx0_max},
            {"ky0_max", c.diagnostics.ky0_max}}}};
}

std::string hash_hex(const nlohmann::json& j) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const RunConfig& c) { return hash_hex(to_json(c)); }

std::string node_cache_key(const RunConfig& c) {
  return hash_hex({{"format", 1},
                   {"profile", profile_json(c.profile)},
                   {"numerics", numerics_json(c.numerics)},
                   {"quadrature", quadrature_json(c.quadrature)}});
}

}  // namespace vpm::cli
