// spraylab command-line driver.
//
// Exit codes: 0 expected verdicts matched (or no expectation given),
// 1 verdict mismatch, 2 configuration or construction error.

#include "spraylab/spraylab.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace spraylab;

namespace {

struct Globals {
  std::string config_path;
  std::uint64_t seed = RunContext{}.seed;
  std::string out;
  std::string schedule;
  std::optional<double> tol;
  unsigned threads = 0;
  bool timing = false;
};

/// Options shared by the per-command parsers; empty strings fall back to the config file.
struct Inputs {
  std::string set, spray, sampler, ambient, bundle, map;
  std::string x, v, s, f, e;
  std::optional<double> t_lo, t_hi, h;
  std::optional<long> count;
  std::string expect;
};

struct Session {
  Config cfg;
  RunContext ctx;
  fs::path out;

  std::string pick(const std::string& flag, const std::string& key, const std::string& fallback = {}) const {
    if (!flag.empty()) return flag;
    const auto v = cfg.get(key, fallback);
    if (v.empty()) throw ConfigError("missing value for '" + key + "' (flag or config)");
    return v;
  }

  InvarianceOptions invariance(const Inputs& in) const {
    InvarianceOptions o = ctx.invariance;
    o.schedule = ctx.schedule;
    o.tspan = {in.t_lo.value_or(cfg.get_double("run.t_lo", o.tspan.first)), in.t_hi.value_or(cfg.get_double("run.t_hi", o.tspan.second))};
    o.h = in.h.value_or(cfg.get_double("run.h", o.h));
    return o;
  }

  std::size_t count(const Inputs& in, const std::string& key, long fallback) const {
    const long n = in.count.value_or(cfg.get_long(key, fallback));
    if (n < 0) throw ConfigError("sample count must be non-negative");
    return static_cast<std::size_t>(n);
  }

  int finish(const std::string& command, const std::string& verdict, Json body, const std::string& expect) const {
    Json j = {{"command", command}, {"verdict", verdict}, {"seed", ctx.seed}};
    if (!expect.empty()) j["expected"] = expect;
    Json cfg_echo = Json::object();
    for (const auto& [k, v] : cfg.echo()) cfg_echo[k] = v;
    j["config"] = std::move(cfg_echo);
    j["report"] = std::move(body);
    const fs::path path = out / (command + ".json");
    write_json(path, j);
    std::cout << command << ": " << verdict;
    if (!expect.empty()) std::cout << " (expected " << expect << ")";
    std::cout << "\nreport: " << path.string() << "\n";
    if (!expect.empty() && expect != verdict) return 1;
    return 0;
  }
};

void add_common(CLI::App* cmd, Inputs& in, bool set, bool spray) {
  if (set) cmd->add_option("--set", in.set, "set id (overrides [set] id)");
  if (spray) cmd->add_option("--spray", in.spray, "spray id (overrides [spray] id)");
  cmd->add_option("--expect", in.expect, "expected verdict; mismatch exits with 1");
}

void add_span(CLI::App* cmd, Inputs& in) {
  cmd->add_option("--t-lo", in.t_lo, "lower end of the time span");
  cmd->add_option("--t-hi", in.t_hi, "upper end of the time span");
  cmd->add_option("--step", in.h, "integration step");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spraylab: cone membership, geodesics and invariance checks for sprays on truncated spaces"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "key=value configuration file");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--out", g.out, "output directory (default: $SPRAYLAB_OUT or ./spraylab-out)");
  app.add_option("--schedule", g.schedule, "quotient schedule t0,ratio,K");
  app.add_option("--tol", g.tol, "invariance tolerance for trajectory distances");
  app.add_option("--threads", g.threads, "worker threads (0: hardware concurrency)");
  app.add_flag("--timing", g.timing, "include wall time in reports");

  Inputs in;
  std::string example_id;
  std::string method = "auto", csv_name = "trajectory", times_text = "-1,-0.5,0,0.5,1";
  bool cross_validate = false, profiles = false;
  std::size_t stride = 1;
  std::optional<double> reparam_width;

  auto* reproduce = app.add_subcommand("reproduce", "run a registered example (or all)");
  reproduce->add_option("id", example_id, "example id or 'all'")->required();

  auto* cone = app.add_subcommand("check-cone", "adjacent or second-order cone membership");
  add_common(cone, in, true, false);
  cone->add_option("--s", in.s, "base point expression");
  cone->add_option("--f", in.f, "direction expression");
  cone->add_option("--e", in.e, "second-order acceleration expression");

  auto* adm = app.add_subcommand("check-admissible", "admissibility of (x, v) for a set and spray");
  add_common(adm, in, true, true);
  adm->add_option("--x", in.x, "base point expression");
  adm->add_option("--v", in.v, "velocity expression");

  auto* integ = app.add_subcommand("integrate", "integrate a geodesic and write it as CSV");
  add_common(integ, in, false, true);
  add_span(integ, in);
  integ->add_option("--x", in.x, "initial point expression");
  integ->add_option("--v", in.v, "initial velocity expression");
  integ->add_option("--method", method, "auto | rk4 | closed-form");
  integ->add_flag("--cross-validate", cross_validate, "compare RK4 with the closed form");
  integ->add_option("--stride", stride, "keep every n-th sample");
  integ->add_option("--csv", csv_name, "CSV file stem");

  auto* inv = app.add_subcommand("verify-invariance", "integrate sampled initial data and measure distance to the set");
  add_common(inv, in, true, true);
  add_span(inv, in);
  inv->add_option("--sampler", in.sampler, "initial-data sampler id");
  inv->add_option("--trials", in.count, "number of trials");
  inv->add_flag("--profiles", profiles, "include distance profiles in the report");

  auto* tg = app.add_subcommand("check-totally-geodesic", "compare admissible vectors with tangent vectors");
  add_common(tg, in, true, true);
  tg->add_option("--sampler", in.sampler, "tangent sampler id");
  tg->add_option("--ambient", in.ambient, "ambient sampler id");
  tg->add_option("--samples", in.count, "samples per sampler");

  auto* conv = app.add_subcommand("check-convexity", "distance of connecting geodesics to the set");
  add_common(conv, in, true, true);
  conv->add_option("--sampler", in.sampler, "sampler whose base points form the pairs");
  conv->add_option("--pairs", in.count, "number of pairs");

  auto* tan = app.add_subcommand("check-tangency", "bundle tangency against trajectory verdicts");
  add_common(tan, in, true, true);
  add_span(tan, in);
  tan->add_option("--bundle", in.bundle, "same-side | base-in | zero-section | product | tangent-bundle");
  tan->add_option("--sampler", in.sampler, "sampler id");
  tan->add_option("--samples", in.count, "number of samples");

  auto* flow = app.add_subcommand("check-flow", "admissibility of geodesic-flow images");
  add_common(flow, in, true, true);
  flow->add_option("--sampler", in.sampler, "sampler id");
  flow->add_option("--times", times_text, "comma-separated flow times");
  flow->add_option("--samples", in.count, "number of samples");

  auto* orbit = app.add_subcommand("check-orbit", "automorphism check and invariance of the transformed set");
  add_common(orbit, in, true, true);
  add_span(orbit, in);
  orbit->add_option("--map", in.map, "id | translate:<a> | scale:<c> | sinh");
  orbit->add_option("--sampler", in.sampler, "sampler id");
  orbit->add_option("--trials", in.count, "number of trials");

  auto* strata = app.add_subcommand("check-strata", "closure invariance and exits for sequence strata");
  add_common(strata, in, false, true);
  add_span(strata, in);
  strata->add_option("--trials", in.count, "trials per stratum");

  auto* push = app.add_subcommand("pushforward", "push a spray along an automorphism and compare");
  add_common(push, in, false, true);
  push->add_option("--map", in.map, "id | translate:<a> | scale:<c> | sinh");
  push->add_option("--samples", in.count, "number of samples");

  auto* spray_cmd = app.add_subcommand("check-spray", "homogeneity and projective reparametrization checks");
  add_common(spray_cmd, in, false, true);
  add_span(spray_cmd, in);
  spray_cmd->add_option("--samples", in.count, "number of samples");
  spray_cmd->add_option("--reparam", reparam_width, "compare with the transform by P = -2 alpha of this bump width");
  spray_cmd->add_option("--x", in.x, "initial point for the reparametrization check");
  spray_cmd->add_option("--v", in.v, "initial velocity for the reparametrization check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    Session ss;
    if (!g.config_path.empty()) ss.cfg = Config::load(g.config_path);
    ss.ctx.seed = g.seed;
    ss.ctx.timing = g.timing;
    ss.ctx.invariance.threads = g.threads;
    if (!g.schedule.empty()) ss.ctx.schedule = parse_schedule(g.schedule);
    if (g.tol) {
      if (!(*g.tol >= 0.0)) throw ConfigError("--tol must be non-negative");
      ss.ctx.invariance.invariance_tol = *g.tol;
    }
    if (!g.out.empty())
      ss.out = g.out;
    else if (const char* env = std::getenv("SPRAYLAB_OUT"); env && *env)
      ss.out = env;
    else
      ss.out = "spraylab-out";
    ss.ctx.out_dir = ss.out;
    Rng rng(g.seed);
    const auto& cfg = ss.cfg;

    if (*reproduce) {
      const Registry reg = default_registry();
      if (example_id == "all") return run_all(reg, ss.ctx, std::cout).exit_code;
      const ExampleSpec* spec = find_example(reg, example_id);
      if (!spec) throw ConfigError("unknown example id '" + example_id + "'");
      Registry one{*spec};
      return run_all(one, ss.ctx, std::cout).exit_code;
    }

    auto space = build_space(cfg);

    if (*cone) {
      const SetOracle s = build_set(ss.pick(in.set, "set.id"), space);
      const Vector base = parse_vector(ss.pick(in.s, "probe.s", "zero"), *space);
      const Vector f = parse_vector(ss.pick(in.f, "probe.f"), *space);
      const std::string e_text = in.e.empty() ? cfg.get("probe.e", "") : in.e;
      const auto cv = e_text.empty() ? adjacent_member(s, base, f, ss.ctx.schedule)
                                     : second_order_member(s, base, f, parse_vector(e_text, *space), ss.ctx.schedule);
      return ss.finish("check-cone", to_string(cv.verdict), to_json(cv), in.expect);
    }

    if (*adm) {
      const SetOracle s = build_set(ss.pick(in.set, "set.id"), space);
      const Spray sp = build_spray(ss.pick(in.spray, "spray.id"), space);
      const auto cv = admissible(sp, s, parse_vector(ss.pick(in.x, "probe.x"), *space),
                                 parse_vector(ss.pick(in.v, "probe.v"), *space), ss.ctx.schedule);
      return ss.finish("check-admissible", to_string(cv.verdict), to_json(cv), in.expect);
    }

    if (*integ) {
      const Spray sp = build_spray(ss.pick(in.spray, "spray.id"), space);
      IntegrationOptions opt;
      if (method == "auto")
        opt.method = Method::Auto;
      else if (method == "rk4")
        opt.method = Method::RK4;
      else if (method == "closed-form")
        opt.method = Method::ClosedForm;
      else
        throw ConfigError("unknown method '" + method + "'");
      opt.cross_validate = cross_validate;
      opt.output_stride = stride;
      const auto o = ss.invariance(in);
      const auto traj = integrate_geodesic(sp, parse_vector(ss.pick(in.x, "probe.x"), *space),
                                           parse_vector(ss.pick(in.v, "probe.v"), *space), o.tspan, o.h, opt);
      const fs::path csv = ss.out / (csv_name + ".csv");
      write_trajectory_csv(csv, traj);
      Json body = trajectory_summary(traj);
      body["csv"] = csv.string();
      return ss.finish("integrate", "ok", std::move(body), in.expect);
    }

    if (*inv) {
      const std::string set_id = ss.pick(in.set, "set.id");
      const std::string spray_id = ss.pick(in.spray, "spray.id");
      const SetOracle s = build_set(set_id, space);
      const Spray sp = build_spray(spray_id, space);
      const auto sampler = build_sampler(in.sampler.empty() ? cfg.get("run.sampler", default_sampler_id(set_id, spray_id)) : in.sampler, space);
      const auto rep = verify_invariance(sp, s, sampler, ss.count(in, "run.trials", 100), rng, ss.invariance(in));
      Json body = to_json(rep, profiles);
      if (rep.counterexample) {
        const fs::path csv = ss.out / "counterexample.csv";
        write_trajectory_csv(csv, *rep.counterexample);
        body["counterexample_csv"] = csv.string();
      }
      return ss.finish("verify-invariance", to_string(rep.overall), std::move(body), in.expect);
    }

    if (*tg) {
      const std::string set_id = ss.pick(in.set, "set.id");
      const std::string spray_id = ss.pick(in.spray, "spray.id");
      const SetOracle s = build_set(set_id, space);
      const Spray sp = build_spray(spray_id, space);
      const auto tangent = build_sampler(in.sampler.empty() ? cfg.get("run.sampler", default_sampler_id(set_id, spray_id)) : in.sampler, space);
      const auto ambient = build_sampler(in.ambient.empty() ? cfg.get("run.ambient", default_ambient_id(set_id)) : in.ambient, space);
      const auto rep = check_totally_geodesic(sp, s, tangent, ambient, ss.count(in, "run.samples", 20), rng, ss.ctx.schedule, g.threads);
      return ss.finish("check-totally-geodesic", to_string(rep.verdict), to_json(rep), in.expect);
    }

    if (*conv) {
      const std::string set_id = ss.pick(in.set, "set.id");
      const std::string spray_id = ss.pick(in.spray, "spray.id");
      const SetOracle s = build_set(set_id, space);
      const Spray sp = build_spray(spray_id, space);
      const auto sampler = build_sampler(in.sampler.empty() ? cfg.get("run.sampler", default_sampler_id(set_id, spray_id)) : in.sampler, space);
      std::vector<std::pair<Vector, Vector>> pairs;
      const std::size_t n = ss.count(in, "run.pairs", 20);
      for (std::size_t i = 0; i < n; ++i) {
        Vector p = sampler(rng).first;
        Vector q = sampler(rng).first;
        pairs.emplace_back(std::move(p), std::move(q));
      }
      const auto rep = check_geodesic_convexity(sp, s, pairs, ss.ctx.invariance.invariance_tol);
      return ss.finish("check-convexity", rep.pass ? "pass" : "fail", to_json(rep), in.expect);
    }

    if (*tan) {
      const std::string set_id = ss.pick(in.set, "set.id");
      const std::string spray_id = ss.pick(in.spray, "spray.id");
      const SetOracle s = build_set(set_id, space);
      const Spray sp = build_spray(spray_id, space);
      const SetOracle bundle = build_bundle_set(in.bundle.empty() ? cfg.get("run.bundle", default_bundle_kind(set_id, spray_id)) : in.bundle, s);
      const auto sampler = build_sampler(in.sampler.empty() ? cfg.get("run.sampler", default_sampler_id(set_id, spray_id)) : in.sampler, space);
      const auto rep = check_tangency_reformulation(sp, bundle, s, sampler, ss.count(in, "run.samples", 20), rng, ss.invariance(in));
      return ss.finish("check-tangency", rep.pass ? "pass" : "fail", to_json(rep), in.expect);
    }

    if (*flow) {
      const std::string set_id = ss.pick(in.set, "set.id");
      const std::string spray_id = ss.pick(in.spray, "spray.id");
      const SetOracle s = build_set(set_id, space);
      const Spray sp = build_spray(spray_id, space);
      const auto sampler = build_sampler(in.sampler.empty() ? cfg.get("run.sampler", default_sampler_id(set_id, spray_id)) : in.sampler, space);
      const auto times = detail::parse_doubles(cfg.get("run.times", times_text));
      const auto o = ss.invariance(in);
      const auto rep = check_flow_invariance(sp, s, sampler, ss.count(in, "run.samples", 10), rng, times, o.h, ss.ctx.schedule);
      return ss.finish("check-flow", rep.pass ? "pass" : "fail", to_json(rep), in.expect);
    }

    if (*orbit) {
      const std::string set_id = ss.pick(in.set, "set.id");
      const std::string spray_id = ss.pick(in.spray, "spray.id");
      const SetOracle s = build_set(set_id, space);
      const Spray sp = build_spray(spray_id, space);
      const Automorphism phi = build_automorphism(ss.pick(in.map, "map.id"), *space);
      const auto sampler = build_sampler(in.sampler.empty() ? cfg.get("run.sampler", default_sampler_id(set_id, spray_id)) : in.sampler, space);
      const auto rep = check_orbit_invariance(sp, phi, s, sampler, cube_pairs(space), ss.count(in, "run.trials", 30), rng, ss.invariance(in));
      return ss.finish("check-orbit", rep.pass ? "pass" : "fail", to_json(rep), in.expect);
    }

    if (*strata) {
      const Spray sp = build_spray(ss.pick(in.spray, "spray.id"), space);
      if (space->kind() != ModelSpace::Kind::Sequences) throw ConfigError("check-strata needs a sequence space");
      const auto rep = check_stratification(finite_sequence_strata(space), sp, ss.count(in, "run.trials", 10), rng, ss.invariance(in));
      return ss.finish("check-strata", rep.pass ? "pass" : "fail", to_json(rep), in.expect);
    }

    if (*push) {
      const Spray sp = build_spray(ss.pick(in.spray, "spray.id"), space);
      const Automorphism phi = build_automorphism(ss.pick(in.map, "map.id"), *space);
      const std::size_t n = ss.count(in, "run.samples", 100);
      const auto sampler = space->kind() == ModelSpace::Kind::GridFunctions && space->grid().codomain_dim == 3
                               ? sphere_loop_pairs(space)
                               : cube_pairs(space);
      const auto rep = check_automorphism(sp, phi, sampler.draw, n, rng);
      const Spray pushed = pushforward_spray(sp, phi);
      const auto hom = check_homogeneity(pushed, sampler.draw, n, rng);
      const Spray back = pushforward_spray(pushed, phi.inverse_of());
      double round_trip = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto [x, v] = sampler(rng);
        round_trip = std::max(round_trip, (back.accel(x, v) - sp.accel(x, v)).lpNorm<Eigen::Infinity>());
      }
      const std::string verdict = rep.max_discrepancy <= 1e-10 ? "automorphism" : "not-automorphism";
      return ss.finish("pushforward", verdict,
                       {{"map", phi.label},
                        {"spray", sp.label()},
                        {"automorphism", to_json(rep)},
                        {"pushed_homogeneity", to_json(hom)},
                        {"round_trip_discrepancy", real(round_trip)}},
                       in.expect);
    }

    if (*spray_cmd) {
      const Spray sp = build_spray(ss.pick(in.spray, "spray.id"), space);
      const auto sampler = space->kind() == ModelSpace::Kind::GridFunctions && space->grid().codomain_dim == 3
                               ? sphere_loop_pairs(space)
                               : cube_pairs(space);
      const auto hom = check_homogeneity(sp, sampler.draw, ss.count(in, "run.samples", 1000), rng);
      Json body = {{"spray", sp.label()}, {"homogeneity", to_json(hom)}};
      bool ok = hom.max_relative_violation <= 1e-10 && hom.max_zero_velocity_accel == 0.0;
      if (!reparam_width && cfg.has("run.reparam")) reparam_width = cfg.get_double("run.reparam", 0.0);
      if (reparam_width) {
        const auto factor = bump_projective_factor(*space, reparam_width.value());
        const Spray b = projective_transform(sp, factor);
        const auto o = ss.invariance(in);
        const auto rr = reparametrize_check(sp, b, factor, parse_vector(ss.pick(in.x, "probe.x"), *space),
                                            parse_vector(ss.pick(in.v, "probe.v"), *space), o.tspan, o.h);
        body["reparametrization"] = to_json(rr);
        ok = ok && rr.max_metric_discrepancy <= 1e-6;
      }
      return ss.finish("check-spray", ok ? "pass" : "fail", std::move(body), in.expect);
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
