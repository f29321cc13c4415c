#pragma once

// Registry of reproducible worked examples. Each entry declares its
// configuration and the verdicts it must produce; run_example compares.

#include "spraylab/config.hpp"
#include "spraylab/report.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

namespace spraylab {

struct RunContext {
  std::uint64_t seed = 20241017;
  InvarianceOptions invariance;
  QuotientSchedule schedule;
  std::filesystem::path out_dir;  // empty: no files written
  bool timing = false;            // include wall time in reports
};

struct CheckOutcome {
  std::string name;
  std::string verdict;
  std::string expected;
  bool matched = false;
  Json details;
};

struct RunReport {
  std::string id;
  std::vector<CheckOutcome> checks;
  bool matched = true;
  Json config;
  std::vector<std::string> artifacts;
  double wall_seconds = 0.0;
};

class ExampleRun;

struct ExampleSpec {
  std::string id;
  std::string claim;
  std::string config;  // key=value text, INI sections allowed
  std::vector<std::pair<std::string, std::string>> expected;  // check name -> verdict
  std::function<void(ExampleRun&)> run;
};

/// Per-run state handed to an example body.
class ExampleRun {
 public:
  ExampleRun(const ExampleSpec& spec, const RunContext& ctx)
      : spec_(spec), ctx_(ctx), config_(Config::from_string(spec.config)), rng_(mix_seed(ctx.seed, spec.id)) {}

  const Config& config() const { return config_; }
  const RunContext& context() const { return ctx_; }
  Rng& rng() { return rng_; }

  InvarianceOptions invariance() const {
    InvarianceOptions o = ctx_.invariance;
    o.schedule = ctx_.schedule;
    o.tspan = {config_.get_double("run.t_lo", o.tspan.first), config_.get_double("run.t_hi", o.tspan.second)};
    o.h = config_.get_double("run.h", o.h);
    return o;
  }

  void record(const std::string& name, const std::string& verdict, Json details = Json::object()) {
    results_.push_back({name, verdict, {}, false, std::move(details)});
  }

  void artifact(const std::string& name, const Trajectory& traj) {
    if (ctx_.out_dir.empty()) return;
    const auto path = ctx_.out_dir / (spec_.id + "_" + name + ".csv");
    write_trajectory_csv(path, traj);
    artifacts_.push_back(path.string());
  }

  std::vector<CheckOutcome>& results() { return results_; }
  std::vector<std::string>& artifacts() { return artifacts_; }

  /// FNV-1a of the id folded into the seed, so examples draw independent streams.
  static std::uint64_t mix_seed(std::uint64_t seed, const std::string& id) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : id) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return seed ^ h;
  }

 private:
  const ExampleSpec& spec_;
  const RunContext& ctx_;
  Config config_;
  Rng rng_;
  std::vector<CheckOutcome> results_;
  std::vector<std::string> artifacts_;
};

using Registry = std::vector<ExampleSpec>;

inline const ExampleSpec* find_example(const Registry& reg, const std::string& id) {
  for (const auto& e : reg)
    if (e.id == id) return &e;
  return nullptr;
}

inline RunReport run_example(const Registry& reg, const std::string& id, const RunContext& ctx) {
  const ExampleSpec* spec = find_example(reg, id);
  if (!spec) throw ConfigError("unknown example id '" + id + "'");
  const auto start = std::chrono::steady_clock::now();
  ExampleRun run(*spec, ctx);
  spec->run(run);

  RunReport rep;
  rep.id = id;
  for (const auto& [name, expected] : spec->expected) {
    CheckOutcome out{name, "missing", expected, false, Json::object()};
    for (auto& r : run.results())
      if (r.name == name) {
        out.verdict = r.verdict;
        out.details = std::move(r.details);
      }
    out.matched = out.verdict == expected;
    rep.matched = rep.matched && out.matched;
    rep.checks.push_back(std::move(out));
  }
  Json cfg = Json::object();
  for (const auto& [k, v] : run.config().echo()) cfg[k] = v;
  cfg["seed"] = ctx.seed;
  cfg["schedule"] = to_json(ctx.schedule);
  cfg["invariance_tol"] = ctx.invariance.invariance_tol;
  cfg["violation_threshold"] = ctx.invariance.violation_threshold;
  rep.config = std::move(cfg);
  rep.artifacts = run.artifacts();
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

inline Json to_json(const RunReport& r, const ExampleSpec& spec, bool timing) {
  Json checks = Json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"check", c.name},
                      {"verdict", c.verdict},
                      {"expected", c.expected},
                      {"status", c.matched ? "PASS" : "FAIL"},
                      {"details", c.details}});
  Json j = {{"example", r.id}, {"claim", spec.claim}, {"status", r.matched ? "PASS" : "FAIL"}, {"checks", std::move(checks)},
            {"config", r.config}, {"artifacts", r.artifacts}};
  if (timing) j["wall_seconds"] = r.wall_seconds;
  return j;
}

struct RunAllSummary {
  std::size_t examples = 0, failed = 0;
  int exit_code = 0;
};

/// Runs every entry, prints a table and writes one JSON report per example when out_dir is set.
inline RunAllSummary run_all(const Registry& reg, const RunContext& ctx, std::ostream& os) {
  RunAllSummary s;
  os << std::left << std::setw(16) << "example" << std::setw(24) << "check" << std::setw(24) << "verdict" << std::setw(24)
     << "expected"
     << "status\n";
  for (const auto& spec : reg) {
    const RunReport rep = run_example(reg, spec.id, ctx);
    for (const auto& c : rep.checks)
      os << std::setw(16) << spec.id << std::setw(24) << c.name << std::setw(24) << c.verdict << std::setw(24) << c.expected
         << (c.matched ? "PASS" : "FAIL") << "\n";
    if (!ctx.out_dir.empty()) write_json(ctx.out_dir / (spec.id + ".json"), to_json(rep, spec, ctx.timing));
    ++s.examples;
    if (!rep.matched) ++s.failed;
  }
  s.exit_code = s.failed == 0 ? 0 : 1;
  return s;
}

// ---------------------------------------------------------------------------
// The examples

namespace examples {

inline const char* pass(bool ok) { return ok ? "pass" : "fail"; }

inline void adjacent_cone(ExampleRun& run) {
  auto space = build_space(run.config());
  const SetOracle s = build_set(run.config().get("set.id", "orthant"), space);
  const auto sched = run.context().schedule;
  std::size_t mismatches = 0;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    Vector f = random_cube(*space, run.rng());
    if (k % 2 == 0) f = f.cwiseAbs();
    const auto cv = adjacent_member(s, space->zero(), f, sched);
    for (std::size_t n = 0; n < space->dimension(); ++n)
      worst = std::max(worst, std::abs(cv.estimate(n) - std::max(0.0, -f[static_cast<Eigen::Index>(n)])));
    const Verdict want = f.minCoeff() >= 0.0 ? Verdict::Member : Verdict::NonMember;
    if (cv.verdict != want) ++mismatches;
  }
  run.record("closed-form-limits", pass(mismatches == 0 && worst <= 1e-6),
             {{"directions", 100}, {"verdict_mismatches", mismatches}, {"max_limit_error", worst}});
  Vector v = space->zero();
  v[0] = 1.0;
  v[1] = -1.0;
  const auto adm = admissible(flat_spray(space), s, space->zero(), v, sched);
  run.record("opposite-velocity", to_string(adm.verdict), to_json(adm, false));
}

inline void ex1_flat(ExampleRun& run) {
  auto space = build_space(run.config());
  const SetOracle s = build_set(run.config().get("set.id", ""), space);
  const Spray spray = build_spray(run.config().get("spray.id", ""), space);
  const auto opt = run.invariance();
  const auto sampler = half_support_pairs(space);
  const auto inv = verify_invariance(spray, s, sampler, 100, run.rng(), opt);
  run.record("invariance", to_string(inv.overall), to_json(inv));
  run.record("admissibility-coherence", pass(inv.coherent));
  const auto tan = check_tangency_reformulation(spray, half_support_bundle(space), s, sampler, 20, run.rng(), opt);
  run.record("tangency", pass(tan.pass), to_json(tan));
  const auto flow = check_flow_invariance(spray, s, sampler, 10, run.rng(), {-1.0, -0.5, 0.0, 0.5, 1.0}, opt.h, opt.schedule);
  run.record("flow", pass(flow.pass), {{"members", flow.members}, {"checks", flow.records.size()}});
}

inline void ex1_perturbed(ExampleRun& run) {
  auto space = build_space(run.config());
  const SetOracle s = build_set(run.config().get("set.id", ""), space);
  const Spray spray = build_spray(run.config().get("spray.id", ""), space);
  const double width = run.config().get_double("probe.width", 0.2);
  const auto opt = run.invariance();
  const auto inv = verify_invariance(spray, s, centred_bump_probes(space, width), 10, run.rng(), opt);
  run.record("invariance", to_string(inv.overall), to_json(inv));
  run.record("admissibility-coherence", pass(inv.coherent));
  if (inv.counterexample) run.artifact("counterexample", *inv.counterexample);

  const Vector f = one_sided_bumps(*space, Side::Positive, run.rng());
  const Vector v = centred_bump(*space, width);
  const auto traj = integrate_geodesic(spray, f, v, {0.0, 1.0}, 1e-3, {Method::RK4, false, 1});
  const double d01 = s.max_distance(traj.at_time(0.1).x);
  run.record("departure-at-0.1", pass(d01 > 1e-3), {{"distance", d01}});
  double gap = 0.0;
  for (std::size_t i = 0; i < traj.times.size(); ++i)
    gap = std::max(gap, (traj.states[i].x - spray.closed_form(traj.times[i], f, v)->x).lpNorm<Eigen::Infinity>());
  run.record("rk4-vs-closed-form", pass(gap <= 1e-8), {{"max_error", gap}});
  const Spray flat = flat_spray(space);
  const auto base = verify_invariance(flat, s, half_support_pairs(space), 20, run.rng(), opt);
  run.record("flat-counterpart", to_string(base.overall), {{"max_distance", base.max_distance}});
}

inline void ex2_parabola(ExampleRun& run) {
  auto space = build_space(run.config());
  const SetOracle s = build_set(run.config().get("set.id", ""), space);
  const Spray spray = build_spray(run.config().get("spray.id", ""), space);
  const auto opt = run.invariance();
  const auto tg = check_totally_geodesic(spray, s, parabola_tangent(space), parabola_ambient(space), 20, run.rng(), opt.schedule);
  run.record("totally-geodesic", to_string(tg.verdict), to_json(tg));
  const auto inv = verify_invariance(spray, s, parabola_zero_section(space), 20, run.rng(), opt);
  run.record("invariance", to_string(inv.overall), to_json(inv));
  const ModelSpace& g = space->factor(0);
  const Vector h = g.sample([](double x) { return 0.5 * x; });
  const Vector u = Vector::Ones(static_cast<Eigen::Index>(g.dimension()));
  const auto cv = admissible(spray, s, ModelSpace::join(h, h.cwiseProduct(h)), ModelSpace::join(u, 2.0 * h.cwiseProduct(u)),
                             opt.schedule);
  run.record("unit-tangent", to_string(cv.verdict), {{"limit_estimate_m0", real(cv.estimate(0))}});
  const Vector zero = space->zero();
  const Vector one = ModelSpace::join(Vector::Ones(static_cast<Eigen::Index>(g.dimension())),
                                      Vector::Ones(static_cast<Eigen::Index>(g.dimension())));
  const auto cx = check_geodesic_convexity(spray, s, {{zero, one}}, opt.invariance_tol, 1);
  run.record("segment-midpoint", pass(cx.pass), to_json(cx));
}

inline void crit_constants(ExampleRun& run) {
  auto space = build_space(run.config());
  const SetOracle s = build_set(run.config().get("set.id", ""), space);
  const Spray spray = build_spray(run.config().get("spray.id", ""), space);
  const auto opt = run.invariance();
  const auto tg = check_totally_geodesic(spray, s, constant_pairs(space), constant_ambient(space), 20, run.rng(), opt.schedule);
  run.record("totally-geodesic", to_string(tg.verdict), to_json(tg));
  const auto cx = check_geodesic_convexity(spray, s, constant_pairs(space), 20, run.rng(), 0.0);
  run.record("convexity", pass(cx.pass && cx.max_distance == 0.0), to_json(cx));
  const auto inv = verify_invariance(spray, s, constant_pairs(space), 20, run.rng(), opt);
  run.record("invariance", to_string(inv.overall), {{"max_distance", inv.max_distance}});
}

inline void ex9_translation(ExampleRun& run) {
  auto space = build_space(run.config());
  const SetOracle s = build_set(run.config().get("set.id", ""), space);
  const Spray spray = build_spray(run.config().get("spray.id", ""), space);
  const Automorphism phi = build_automorphism(run.config().get("map.id", ""), *space);
  const auto opt = run.invariance();
  const auto orbit = check_orbit_invariance(spray, phi, s, half_support_pairs(space), cube_pairs(space), 30, run.rng(), opt);
  run.record("orbit", pass(orbit.pass), to_json(orbit));
  run.record("flat-automorphism", orbit.automorphism.max_discrepancy == 0.0 ? "automorphism" : "not-automorphism",
             to_json(orbit.automorphism));
  const Spray bump = build_spray(run.config().get("spray.contrast", "bump:0.5"), space);
  const auto ab = check_automorphism(bump, phi, cube_pairs(space).draw, 100, run.rng());
  run.record("bump-automorphism", ab.max_discrepancy > orbit.automorphism_tol ? "not-automorphism" : "automorphism",
             to_json(ab));
}

inline void nonneg_fourier(ExampleRun& run) {
  auto space = build_space(run.config());
  const std::string set_id = run.config().get("set.id", "");
  const SetOracle s = build_set(set_id, space);
  const Spray spray = build_spray(run.config().get("spray.id", ""), space);
  const auto opt = run.invariance();
  const auto sampler = build_sampler(set_id, space);
  const auto inv = verify_invariance(spray, s, sampler, 50, run.rng(), opt);
  run.record("invariance", to_string(inv.overall), to_json(inv));
  const auto tan = check_tangency_reformulation(spray, product_of(s, s), s, sampler, 20, run.rng(), opt);
  run.record("tangency", pass(tan.pass), to_json(tan));
}

inline void hi_loops(ExampleRun& run) {
  auto space = build_space(run.config());
  const SetOracle s = build_set(run.config().get("set.id", ""), space);
  const Spray spray = build_spray(run.config().get("spray.id", ""), space);
  const auto opt = run.invariance();
  const auto tg = check_totally_geodesic(spray, s, circle_loop_tangent(space), circle_loop_ambient(space), 20, run.rng(),
                                         opt.schedule);
  run.record("totally-geodesic", to_string(tg.verdict), to_json(tg));
  const auto inv = verify_invariance(spray, s, circle_loop_tangent(space), 20, run.rng(), opt);
  run.record("invariance", to_string(inv.overall), to_json(inv));
  const auto tan = check_tangency_reformulation(spray, circle_loops_tangent_bundle(space), s, circle_loop_tangent(space), 20,
                                                run.rng(), opt);
  run.record("tangency", pass(tan.pass), to_json(tan));
  const auto flow = check_flow_invariance(spray, s, circle_loop_tangent(space), 5, run.rng(), {-1.0, 0.5, 2.0}, opt.h,
                                          opt.schedule);
  run.record("flow", pass(flow.pass), {{"members", flow.members}, {"checks", flow.records.size()}});
}

inline void stra_strata(ExampleRun& run) {
  auto space = build_space(run.config());
  const Spray spray = build_spray(run.config().get("spray.id", ""), space);
  const auto opt = run.invariance();
  const auto strata = finite_sequence_strata(space);
  const auto rep = check_stratification(strata, spray, 10, run.rng(), opt);
  run.record("strata", pass(rep.pass), to_json(rep));
  Vector x = space->zero(), v = space->zero();
  x[0] = 1.0;
  x[1] = 1.0;
  v[1] = 1.0;
  const auto traj = integrate_geodesic(spray, x, v, opt.tspan, opt.h);
  const auto ev = stratum_exits(traj, 1);
  const bool single = ev.count == 1 && std::abs(ev.times.front() + 1.0) <= 1e-9;
  run.record("exit-time", pass(single), {{"events", ev.count}, {"times", reals(ev.times)}});
}

}  // namespace examples

inline Registry default_registry() {
  return {
      {"adjacent-cone",
       "orthant: the adjacent cone at 0 is the orthant itself, with limit max(0, -f_n) per coordinate",
       "[space]\nkind = sequences\nN = 16\n[set]\nid = orthant\n",
       {{"closed-form-limits", "pass"}, {"opposite-velocity", "non-member"}},
       examples::adjacent_cone},
      {"ex1-flat",
       "functions supported on one half-line: invariant under the flat spray",
       "[space]\nkind = grid\nhalf_width = 2\nstep = 0.01\n[set]\nid = half-support\n[spray]\nid = flat\n[run]\nt_lo = -2\nt_hi = 2\n",
       {{"invariance", "invariant"}, {"admissibility-coherence", "pass"}, {"tangency", "pass"}, {"flow", "pass"}},
       examples::ex1_flat},
      {"ex1-perturbed",
       "bump-perturbed spray, projectively equivalent to the flat one: a centred bump velocity leaves the set",
       "[space]\nkind = grid\nhalf_width = 2\nstep = 0.01\n[set]\nid = half-support\n[spray]\nid = bump:0.5\n[probe]\nwidth = "
       "0.2\n[run]\nt_lo = -2\nt_hi = 2\n",
       {{"invariance", "violated"},
        {"admissibility-coherence", "pass"},
        {"departure-at-0.1", "pass"},
        {"rk4-vs-closed-form", "pass"},
        {"flat-counterpart", "invariant"}},
       examples::ex1_perturbed},
      {"ex2-parabola",
       "graph of h -> h^2: invariant for zero-velocity data but not totally geodesic",
       "[space]\nkind = product\nhalf_width = 2\nstep = 0.01\n[set]\nid = parabola\n[spray]\nid = flat\n[run]\nt_lo = -2\nt_hi = 2\n",
       {{"totally-geodesic", "not-totally-geodesic"},
        {"invariance", "invariant"},
        {"unit-tangent", "non-member"},
        {"segment-midpoint", "fail"}},
       examples::ex2_parabola},
      {"crit-constants",
       "constant functions: a totally geodesic, geodesically convex submanifold",
       "[space]\nkind = grid\nhalf_width = 2\nstep = 0.01\n[set]\nid = constants\n[spray]\nid = flat\n[run]\nt_lo = -2\nt_hi = 2\n",
       {{"totally-geodesic", "totally-geodesic"}, {"convexity", "pass"}, {"invariance", "invariant"}},
       examples::crit_constants},
      {"ex9-translation",
       "translation is a flat-spray automorphism, so the translated set is invariant",
       "[space]\nkind = grid\nhalf_width = 2\nstep = 0.01\n[set]\nid = half-support\n[spray]\nid = flat\ncontrast = bump:0.5\n[map]\nid "
       "= translate:0.5\n[run]\nt_lo = -2\nt_hi = 2\n",
       {{"orbit", "pass"}, {"flat-automorphism", "automorphism"}, {"bump-automorphism", "not-automorphism"}},
       examples::ex9_translation},
      {"nonneg-fourier",
       "trigonometric polynomials of bounded degree: a linear subspace invariant under the flat spray",
       "[space]\nkind = circle\npoints = 64\n[set]\nid = fourier:3\n[spray]\nid = flat\n[run]\nt_lo = -2\nt_hi = 2\n",
       {{"invariance", "invariant"}, {"tangency", "pass"}},
       examples::nonneg_fourier},
      {"hi-loops",
       "constant loops on a great circle: totally geodesic for the pointwise sphere spray",
       "[space]\nkind = circle\npoints = 32\ncodomain_dim = 3\n[set]\nid = circle-loops\n[spray]\nid = sphere\n[run]\nt_lo = "
       "-2\nt_hi = 2\n",
       {{"totally-geodesic", "totally-geodesic"}, {"invariance", "invariant"}, {"tangency", "pass"}, {"flow", "pass"}},
       examples::hi_loops},
      {"stra-strata",
       "finite sequences stratified by last nonzero index: closures invariant, exits isolated",
       "[space]\nkind = sequences\nN = 8\n[spray]\nid = flat\n[run]\nt_lo = -2\nt_hi = 2\n",
       {{"strata", "pass"}, {"exit-time", "pass"}},
       examples::stra_strata},
  };
}

}  // namespace spraylab
