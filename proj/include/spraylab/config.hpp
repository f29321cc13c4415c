#pragma once

// Plain-text key=value configuration (INI sections allowed) and the string-ID
// factories for spaces, sets, sprays, samplers, automorphisms and vectors.

#include "spraylab/invariance.hpp"
#include "spraylab/samplers.hpp"
#include "spraylab/set_oracle.hpp"
#include "spraylab/spray.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace spraylab {

/// Bad configuration or unconstructible component (CLI exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

inline std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  if (trim(s).empty()) return out;
  for (const auto& part : split(s, ',')) out.push_back(parse_double(part));
  return out;
}

inline long parse_long(const std::string& s) {
  const double v = parse_double(s);
  if (v != std::floor(v)) throw ConfigError("not an integer: '" + s + "'");
  return static_cast<long>(v);
}

}  // namespace detail

class Config {
 public:
  Config() = default;

  static Config from_string(const std::string& text) {
    Config c;
    std::istringstream is(text);
    try {
      boost::property_tree::ini_parser::read_ini(is, c.tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return c;
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
  }

  bool has(const std::string& key) const { return tree_.get_optional<std::string>(key).has_value(); }

  std::string get(const std::string& key, const std::string& fallback) const {
    if (auto v = tree_.get_optional<std::string>(key)) return detail::trim(*v);
    return fallback;
  }
  double get_double(const std::string& key, double fallback) const {
    return has(key) ? detail::parse_double(get(key, "")) : fallback;
  }
  long get_long(const std::string& key, long fallback) const {
    return has(key) ? detail::parse_long(get(key, "")) : fallback;
  }
  bool get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto v = get(key, "");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("not a boolean: '" + v + "' for key " + key);
  }

  void set(const std::string& key, const std::string& value) { tree_.put(key, value); }

  /// Flattened "section.key" -> value, sorted.
  std::map<std::string, std::string> echo() const {
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : tree_) {
      if (v.empty()) {
        out[k] = v.data();
      } else {
        for (const auto& [k2, v2] : v) out[k + "." + k2] = v2.data();
      }
    }
    return out;
  }

 private:
  boost::property_tree::ptree tree_;
};

// ---------------------------------------------------------------------------
// Spaces

inline std::vector<GridSeminorm> parse_grid_seminorms(const std::string& text) {
  std::vector<GridSeminorm> out;
  for (const auto& item : detail::split(text, ',')) {
    const auto parts = detail::split(item, ':');
    if (parts.size() != 2) throw ConfigError("seminorm must be window:order, got '" + item + "'");
    out.push_back({detail::parse_double(parts[0]), static_cast<int>(detail::parse_long(parts[1]))});
  }
  return out;
}

/// Keys under [space]: kind (grid | circle | sequences | product), half_width,
/// step, points, codomain_dim, periodic, N, seminorms, max_order.
inline SpacePtr build_space(const Config& c) {
  const std::string kind = c.get("space.kind", "grid");
  const long max_order = c.get_long("space.max_order", kMaxDerivativeOrder);
  try {
    auto grid_space = [&](const Grid& g) {
      if (!c.has("space.seminorms")) return ModelSpace::grid_functions(g);
      auto sems = parse_grid_seminorms(c.get("space.seminorms", ""));
      for (const auto& s : sems)
        if (s.order > max_order) throw ConfigError("seminorm order exceeds space.max_order");
      return ModelSpace::grid_functions(g, sems);
    };
    const auto dim = static_cast<std::size_t>(c.get_long("space.codomain_dim", 1));
    if (kind == "grid") {
      return make_space(grid_space(Grid::uniform(c.get_double("space.half_width", 2.0), c.get_double("space.step", 0.01), dim,
                                                 c.get_bool("space.periodic", false))));
    }
    if (kind == "circle") {
      return make_space(grid_space(Grid::circle(static_cast<std::size_t>(c.get_long("space.points", 64)), dim)));
    }
    if (kind == "sequences") {
      const auto n = c.get_long("space.N", 16);
      if (n <= 0) throw ConfigError("space.N must be positive");
      return make_space(ModelSpace::sequences(static_cast<std::size_t>(n)));
    }
    if (kind == "product") {
      const ModelSpace g = grid_space(Grid::uniform(c.get_double("space.half_width", 2.0), c.get_double("space.step", 0.01),
                                                    dim, c.get_bool("space.periodic", false)));
      return make_space(ModelSpace::product({g, g}));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid space: ") + e.what());
  }
  throw ConfigError("unknown space kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Sets, sprays, automorphisms

inline SetOracle build_set(const std::string& id, SpacePtr space) {
  try {
    if (id.rfind("translate:", 0) == 0) {
      const auto rest = id.substr(10);
      const auto colon = rest.rfind(':');
      if (colon == std::string::npos) throw ConfigError("translate set needs translate:<id>:<a>");
      return translate_set(build_set(rest.substr(0, colon), space), detail::parse_double(rest.substr(colon + 1)));
    }
    if (id == "half-support") return half_support_union(space);
    if (id == "support+") return half_line_support(space, Side::Positive);
    if (id == "support-") return half_line_support(space, Side::Negative);
    if (id == "orthant") return nonneg_orthant(space);
    if (id == "constants") return constant_functions(space);
    if (id == "parabola") return parabola_graph(space);
    if (id == "circle-loops") return great_circle_constant_loops(space);
    if (id.rfind("fourier:", 0) == 0) return fourier_subspace(space, static_cast<int>(detail::parse_long(id.substr(8))));
    if (id == "strata") return finite_span(space, space->dimension());
    if (id.rfind("strata:", 0) == 0) {
      const long k = detail::parse_long(id.substr(7));
      if (k < 0) throw ConfigError("stratum index must be non-negative");
      return finite_span(space, static_cast<std::size_t>(k));
    }
  } catch (const std::logic_error& e) {
    throw ConfigError("cannot build set '" + id + "': " + e.what());
  }
  throw ConfigError("unknown set id '" + id + "'");
}

/// Bundle set A on space x space. Kinds: same-side, base-in, zero-section,
/// product (S x S), tangent-bundle.
inline SetOracle build_bundle_set(const std::string& kind, const SetOracle& s) {
  try {
    if (kind == "same-side") return half_support_bundle(s.space_ptr());
    if (kind == "base-in") return base_in_set_bundle(s);
    if (kind == "zero-section") return zero_section_bundle(s);
    if (kind == "product") return product_of(s, s);
    if (kind == "tangent-bundle") return circle_loops_tangent_bundle(s.space_ptr());
  } catch (const std::logic_error& e) {
    throw ConfigError("cannot build bundle set '" + kind + "': " + e.what());
  }
  throw ConfigError("unknown bundle set '" + kind + "'");
}

inline std::string default_bundle_kind(const std::string& set_id, const std::string& spray_id) {
  if (set_id == "half-support") return spray_id == "flat" ? "same-side" : "base-in";
  if (set_id == "parabola") return "zero-section";
  if (set_id == "circle-loops") return "tangent-bundle";
  return "product";
}

inline Spray build_spray(const std::string& id, SpacePtr space) {
  try {
    if (id == "flat") return flat_spray(space);
    if (id == "sphere") return sphere_pointwise_spray(space);
    if (id.rfind("bump:", 0) == 0) return bump_perturbed_spray(space, detail::parse_double(id.substr(5)));
    if (id.rfind("flat+bump:", 0) == 0)
      return projective_transform(flat_spray(space), bump_projective_factor(*space, detail::parse_double(id.substr(10))));
  } catch (const std::logic_error& e) {
    throw ConfigError("cannot build spray '" + id + "': " + e.what());
  }
  throw ConfigError("unknown spray id '" + id + "'");
}

/// id | translate:<a> | scale:<c> | sinh
inline Automorphism build_automorphism(const std::string& id, const ModelSpace& space) {
  try {
    if (id == "id") return identity_map();
    if (id == "sinh") return sinh_map();
    if (id.rfind("translate:", 0) == 0) return grid_translation(space.grid(), detail::parse_double(id.substr(10)));
    if (id.rfind("scale:", 0) == 0) return scaling_map(detail::parse_double(id.substr(6)));
  } catch (const std::logic_error& e) {
    throw ConfigError("cannot build automorphism '" + id + "': " + e.what());
  }
  throw ConfigError("unknown automorphism '" + id + "'");
}

// ---------------------------------------------------------------------------
// Vector expressions

namespace detail {

inline Vector parse_grid_term(const std::string& term, const ModelSpace& space) {
  const Grid& g = space.grid();
  const auto colon = term.find(':');
  const std::string head = colon == std::string::npos ? term : term.substr(0, colon);
  const auto args = colon == std::string::npos ? std::vector<double>{} : parse_doubles(term.substr(colon + 1));
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (args.size() < lo || args.size() > hi) throw ConfigError("wrong argument count in '" + term + "'");
  };
  if (head == "zero") return space.zero();
  if (head == "const3") {
    need(3, 3);
    if (g.codomain_dim != 3) throw ConfigError("const3 needs an R^3-valued grid");
    return detail::constant_loop(Eigen::Vector3d(args[0], args[1], args[2]), g.points);
  }
  if (g.codomain_dim != 1) throw ConfigError("'" + head + "' needs a scalar grid");
  if (head == "const") {
    need(1, 1);
    return Vector::Constant(static_cast<Eigen::Index>(g.points), args[0]);
  }
  if (head == "bump") {
    need(2, 3);
    const double amp = args.size() == 3 ? args[2] : 1.0;
    return space.sample([&](double x) { return amp * smooth_bump(x - args[0], args[1]); });
  }
  if (head == "poly") {
    need(1, 32);
    return space.sample([&](double x) {
      double s = 0.0;
      for (std::size_t k = args.size(); k-- > 0;) s = s * x + args[k];
      return s;
    });
  }
  if (head == "cos" || head == "sin") {
    need(1, 2);
    const double amp = args.size() == 2 ? args[1] : 1.0;
    const bool c = head == "cos";
    return space.sample([&](double x) {
      const double th = std::numbers::pi * args[0] * x / g.half_width;
      return amp * (c ? std::cos(th) : std::sin(th));
    });
  }
  throw ConfigError("unknown vector expression '" + term + "'");
}

inline Vector parse_single(const std::string& text, const ModelSpace& space) {
  switch (space.kind()) {
    case ModelSpace::Kind::Sequences: {
      if (text == "zero") return space.zero();
      const auto vals = parse_doubles(text);
      if (vals.size() > space.dimension()) throw ConfigError("sequence longer than the truncation");
      Vector x = space.zero();
      for (std::size_t i = 0; i < vals.size(); ++i) x[static_cast<Eigen::Index>(i)] = vals[i];
      return x;
    }
    case ModelSpace::Kind::GridFunctions: {
      Vector x = space.zero();
      std::size_t pos = 0;
      // terms joined by " + "
      while (true) {
        const auto next = text.find(" + ", pos);
        x += parse_grid_term(trim(text.substr(pos, next == std::string::npos ? std::string::npos : next - pos)), space);
        if (next == std::string::npos) break;
        pos = next + 3;
      }
      return x;
    }
    case ModelSpace::Kind::Product: {
      const auto parts = split(text, '|');
      if (parts.size() != space.factors().size()) throw ConfigError("product vector needs one '|'-separated part per factor");
      Vector x(static_cast<Eigen::Index>(space.dimension()));
      for (std::size_t i = 0; i < parts.size(); ++i)
        x.segment(static_cast<Eigen::Index>(space.factor_offset(i)), static_cast<Eigen::Index>(space.factor(i).dimension())) =
            parse_single(parts[i], space.factor(i));
      return x;
    }
  }
  throw ConfigError("unsupported space for vector expressions");
}

}  // namespace detail

/// Sequences: comma list (zero-padded). Grids: zero, const:c, bump:c,w[,amp],
/// poly:a0,a1,..., cos:k[,amp], sin:k[,amp], const3:x,y,z, summed with " + ".
/// Products: one expression per factor separated by '|'.
inline Vector parse_vector(const std::string& text, const ModelSpace& space) {
  return detail::parse_single(detail::trim(text), space);
}

// ---------------------------------------------------------------------------
// Samplers

/// same-side | centred-probe[:width] | mixed[:width] | constants | constants-ambient |
/// parabola-zero | parabola-tangent | parabola-ambient | fourier:N | circle-tangent |
/// circle-ambient | span:k | cube | sphere-loops
inline BundleSampler build_sampler(const std::string& id, SpacePtr space) {
  auto arg = [&](std::size_t prefix, double fallback) {
    return id.size() > prefix ? detail::parse_double(id.substr(prefix)) : fallback;
  };
  try {
    if (id == "same-side") return half_support_pairs(space);
    if (id.rfind("centred-probe", 0) == 0) return centred_bump_probes(space, arg(14, 0.2));
    if (id.rfind("mixed", 0) == 0) return half_support_mixed(space, arg(6, 0.2));
    if (id == "constants") return constant_pairs(space);
    if (id == "constants-ambient") return constant_ambient(space);
    if (id == "parabola-zero") return parabola_zero_section(space);
    if (id == "parabola-tangent") return parabola_tangent(space);
    if (id == "parabola-ambient") return parabola_ambient(space);
    if (id.rfind("fourier:", 0) == 0) return fourier_pairs(space, static_cast<int>(detail::parse_long(id.substr(8))));
    if (id == "circle-tangent") return circle_loop_tangent(space);
    if (id == "circle-ambient") return circle_loop_ambient(space);
    if (id.rfind("span:", 0) == 0) return span_pairs(space, static_cast<std::size_t>(detail::parse_long(id.substr(5))));
    if (id == "cube") return cube_pairs(space);
    if (id == "sphere-loops") return sphere_loop_pairs(space);
  } catch (const std::logic_error& e) {
    throw ConfigError("cannot build sampler '" + id + "': " + e.what());
  }
  throw ConfigError("unknown sampler '" + id + "'");
}

/// Initial-data sampler matching a set id (translations use the untranslated set's sampler).
inline std::string default_sampler_id(const std::string& set_id, const std::string& spray_id) {
  if (set_id.rfind("translate:", 0) == 0) {
    const auto rest = set_id.substr(10);
    return default_sampler_id(rest.substr(0, rest.rfind(':')), spray_id);
  }
  if (set_id == "half-support") return spray_id == "flat" ? "same-side" : "mixed";
  if (set_id == "constants") return "constants";
  if (set_id == "parabola") return "parabola-zero";
  if (set_id.rfind("fourier:", 0) == 0) return set_id;
  if (set_id == "circle-loops") return "circle-tangent";
  if (set_id.rfind("strata:", 0) == 0) return "span:" + set_id.substr(7);
  throw ConfigError("no default sampler for set '" + set_id + "'; set [run] sampler");
}

inline std::string default_ambient_id(const std::string& set_id) {
  if (set_id == "constants") return "constants-ambient";
  if (set_id == "parabola") return "parabola-ambient";
  if (set_id == "circle-loops") return "circle-ambient";
  throw ConfigError("no ambient sampler for set '" + set_id + "'; set [run] ambient");
}

/// Schedule "t0,ratio,K".
inline QuotientSchedule parse_schedule(const std::string& text, QuotientSchedule base = {}) {
  const auto v = detail::parse_doubles(text);
  if (v.size() != 3) throw ConfigError("schedule must be t0,ratio,K");
  base.t0 = v[0];
  base.ratio = v[1];
  if (v[2] != std::floor(v[2])) throw ConfigError("schedule K must be an integer");
  base.steps = static_cast<int>(v[2]);
  try {
    base.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid schedule: ") + e.what());
  }
  return base;
}

}  // namespace spraylab
