#pragma once

// Batch experiments: integrate geodesics from sampled initial data and
// measure their distance to the set, plus the total-geodesy, convexity,
// tangency, flow, orbit and stratification checks built on top.

#include "spraylab/cone.hpp"
#include "spraylab/parallel.hpp"
#include "spraylab/samplers.hpp"
#include "spraylab/set_oracle.hpp"
#include "spraylab/spray.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace spraylab {

struct InvarianceOptions {
  std::pair<double, double> tspan{-2.0, 2.0};
  double h = 1e-3;
  /// A trajectory counts as in-set while its max seminorm distance stays below this.
  double invariance_tol = 1e-7;
  /// Departure threshold; it must be exceeded with growth over growth_samples samples.
  double violation_threshold = 1e-4;
  std::size_t growth_samples = 3;
  std::size_t profile_samples = 400;
  bool spot_check = true;
  QuotientSchedule schedule;
  Method method = Method::Auto;
  unsigned threads = 0;
};

enum class InvarianceVerdict { Invariant, Violated, Inconclusive };

inline const char* to_string(InvarianceVerdict v) {
  switch (v) {
    case InvarianceVerdict::Invariant:
      return "invariant";
    case InvarianceVerdict::Violated:
      return "violated";
    case InvarianceVerdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

/// Outcome of an admissibility re-test at a point of a trajectory.
struct SpotCheck {
  double t = 0.0;
  std::string outcome;  // member | non-member | inconclusive | base-outside
};

struct TrialRecord {
  Vector x0, v0;
  bool base_in_set = false;
  std::optional<Verdict> admissibility;  // numeric verdict of the initial data
  double max_distance = std::numeric_limits<double>::quiet_NaN();
  bool blow_up = false;
  double blow_up_time = std::numeric_limits<double>::quiet_NaN();
  bool violated = false;
  double violation_onset = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> boundary_lo, boundary_hi;
  Method method = Method::RK4;
  std::vector<double> profile_t, profile_d;
  std::vector<SpotCheck> spot_checks;
  /// In-set: no spot check is non-member. Violated: some check after onset fails.
  bool coherent = true;

  bool in_set(double tol) const { return !blow_up && max_distance <= tol; }
};

struct InvarianceReport {
  std::string set_id, spray_label, sampler;
  InvarianceOptions options;
  std::vector<TrialRecord> trials;
  InvarianceVerdict overall = InvarianceVerdict::Inconclusive;
  double max_distance = 0.0;
  std::optional<Trajectory> counterexample;
  std::optional<std::size_t> counterexample_trial;
  bool coherent = true;
};

namespace detail {

inline std::string outcome(Verdict v) { return to_string(v); }

/// Sample indices of the distance profile: the origin, both ends and an even stride.
inline std::vector<std::size_t> profile_indices(const Trajectory& traj, std::size_t target) {
  const std::size_t n = traj.times.size();
  const std::size_t stride = std::max<std::size_t>(1, n / std::max<std::size_t>(1, target));
  const std::size_t origin = traj.origin_index();
  std::vector<std::size_t> idx;
  for (std::size_t i = origin % stride; i < n; i += stride) idx.push_back(i);
  if (idx.empty() || idx.front() != 0) idx.insert(idx.begin(), 0);
  if (idx.back() != n - 1) idx.push_back(n - 1);
  return idx;
}

struct TrialRun {
  TrialRecord record;
  std::optional<Trajectory> path;
};

inline SpotCheck spot_check(const Spray& spray, const SetOracle& oracle, const GeodesicState& s, double t,
                            const QuotientSchedule& sched) {
  if (!oracle.contains(s.x)) return {t, "base-outside"};
  try {
    return {t, outcome(admissible(spray, oracle, s.x, s.v, sched).verdict)};
  } catch (const std::invalid_argument&) {
    return {t, "base-outside"};
  }
}

inline TrialRun run_trial(const Spray& spray, const SetOracle& oracle, const Vector& x0, const Vector& v0,
                          const InvarianceOptions& opt, bool keep_path) {
  TrialRun run;
  TrialRecord& r = run.record;
  r.x0 = x0;
  r.v0 = v0;
  r.base_in_set = oracle.contains(x0);
  if (r.base_in_set) {
    try {
      r.admissibility = admissible(spray, oracle, x0, v0, opt.schedule).verdict;
    } catch (const std::invalid_argument&) {
      r.admissibility.reset();
    }
  }
  Trajectory traj;
  try {
    traj = integrate_geodesic(spray, x0, v0, opt.tspan, opt.h, {opt.method, false, 1});
  } catch (const BlowUpError& e) {
    r.blow_up = true;
    r.blow_up_time = e.time;
    return run;
  }
  r.method = traj.method;
  r.boundary_lo = traj.boundary_lo;
  r.boundary_hi = traj.boundary_hi;

  const auto idx = profile_indices(traj, opt.profile_samples);
  std::size_t origin_pos = 0;
  r.max_distance = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const double d = oracle.max_distance(traj.states[idx[k]].x);
    r.profile_t.push_back(traj.times[idx[k]]);
    r.profile_d.push_back(d);
    r.max_distance = std::max(r.max_distance, d);
    if (traj.times[idx[k]] == 0.0) origin_pos = k;
  }

  // onset search outward from t = 0 on each branch
  const std::size_t need = std::max<std::size_t>(1, opt.growth_samples);
  std::optional<std::size_t> onset;  // position in profile
  int onset_dir = 0;
  for (int dir : {1, -1}) {
    std::vector<std::size_t> order;
    if (dir > 0) {
      for (std::size_t k = origin_pos; k < idx.size(); ++k) order.push_back(k);
    } else {
      for (std::size_t k = origin_pos + 1; k-- > 0;) order.push_back(k);
    }
    for (std::size_t a = 0; a + need <= order.size(); ++a) {
      bool ok = true;
      for (std::size_t b = 0; b < need && ok; ++b) {
        const double d = r.profile_d[order[a + b]];
        ok = d > opt.violation_threshold && (b == 0 || d >= r.profile_d[order[a + b - 1]]);
      }
      if (ok) {
        const std::size_t pos = order[a];
        if (!onset || std::abs(r.profile_t[pos]) < std::abs(r.profile_t[*onset])) {
          onset = pos;
          onset_dir = dir;
        }
        break;
      }
    }
  }
  if (onset) {
    r.violated = true;
    r.violation_onset = r.profile_t[*onset];
  }

  if (opt.spot_check) {
    if (r.in_set(opt.invariance_tol)) {
      const SetOracle relaxed = oracle.with_tolerance(std::max(oracle.tolerance(), opt.invariance_tol));
      const double lo = traj.times.front(), hi = traj.times.back();
      for (double frac : {0.25, 0.5, 0.75}) {
        const double t = lo + frac * (hi - lo);
        const auto& s = traj.at_time(t);
        auto chk = spot_check(spray, relaxed, s, t, opt.schedule);
        if (chk.outcome == "non-member") r.coherent = false;
        r.spot_checks.push_back(std::move(chk));
      }
    } else if (r.violated) {
      const double t0 = r.violation_onset;
      const double t_end = onset_dir > 0 ? traj.times.back() : traj.times.front();
      bool failed = false;
      for (double t : {t0, 0.5 * (t0 + t_end), t_end}) {
        auto chk = spot_check(spray, oracle, traj.at_time(t), t, opt.schedule);
        failed = failed || chk.outcome == "base-outside" || chk.outcome == "non-member";
        r.spot_checks.push_back(std::move(chk));
      }
      r.coherent = failed;
    }
  }
  if (keep_path && r.violated) {
    Trajectory sub;
    sub.method = traj.method;
    sub.step = traj.step;
    sub.boundary_lo = traj.boundary_lo;
    sub.boundary_hi = traj.boundary_hi;
    for (auto i : idx) {
      sub.times.push_back(traj.times[i]);
      sub.states.push_back(traj.states[i]);
    }
    run.path = std::move(sub);
  }
  return run;
}

template <class Sampler>
std::vector<std::pair<Vector, Vector>> draw_all(const Sampler& sampler, std::size_t count, Rng& rng) {
  std::vector<std::pair<Vector, Vector>> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sampler(rng));
  return out;
}

}  // namespace detail

/// Runs one trial per given initial datum.
inline InvarianceReport verify_invariance_on(const Spray& spray, const SetOracle& oracle,
                                             const std::vector<std::pair<Vector, Vector>>& data,
                                             const InvarianceOptions& opt = {}, std::string sampler_name = {}) {
  if (oracle.space().dimension() != spray.space().dimension())
    throw std::invalid_argument("set and spray live on different spaces");
  opt.schedule.validate();
  InvarianceReport rep;
  rep.set_id = oracle.id();
  rep.spray_label = spray.label();
  rep.sampler = std::move(sampler_name);
  rep.options = opt;
  std::vector<detail::TrialRun> runs(data.size());
  parallel_for(data.size(), opt.threads,
               [&](std::size_t i) { runs[i] = detail::run_trial(spray, oracle, data[i].first, data[i].second, opt, true); });

  bool any_violated = false, all_in = !runs.empty();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    auto& r = runs[i].record;
    if (r.violated) {
      any_violated = true;
      if (!rep.counterexample) {
        rep.counterexample = std::move(runs[i].path);
        rep.counterexample_trial = i;
      }
    }
    all_in = all_in && r.in_set(opt.invariance_tol);
    if (!r.blow_up) rep.max_distance = std::max(rep.max_distance, r.max_distance);
    rep.coherent = rep.coherent && r.coherent;
    rep.trials.push_back(std::move(r));
  }
  rep.overall = any_violated ? InvarianceVerdict::Violated
                             : (all_in ? InvarianceVerdict::Invariant : InvarianceVerdict::Inconclusive);
  return rep;
}

/// Samples are drawn sequentially from rng before the trials run in parallel.
inline InvarianceReport verify_invariance(const Spray& spray, const SetOracle& oracle, const BundleSampler& sampler,
                                          std::size_t trials, Rng& rng, const InvarianceOptions& opt = {}) {
  return verify_invariance_on(spray, oracle, detail::draw_all(sampler, trials, rng), opt, sampler.description);
}

// ---------------------------------------------------------------------------
// Total geodesy

enum class GeodesyVerdict { TotallyGeodesic, NotTotallyGeodesic, Inconclusive };

inline const char* to_string(GeodesyVerdict v) {
  switch (v) {
    case GeodesyVerdict::TotallyGeodesic:
      return "totally-geodesic";
    case GeodesyVerdict::NotTotallyGeodesic:
      return "not-totally-geodesic";
    case GeodesyVerdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

struct GeodesyFailure {
  std::string kind;  // tangent-not-admissible | admissible-not-tangent
  std::size_t sample = 0;
  double estimate = 0.0;
};

struct TotallyGeodesicReport {
  std::string set_id, spray_label;
  std::size_t tangent_samples = 0, ambient_samples = 0;
  std::size_t tangent_not_admissible = 0, admissible_not_tangent = 0, inconclusive = 0;
  std::vector<GeodesyFailure> failures;  // first few
  GeodesyVerdict verdict = GeodesyVerdict::Inconclusive;
};

/// Two-sided comparison of the admissible set with the tangent bundle on samples.
inline TotallyGeodesicReport check_totally_geodesic(const Spray& spray, const SetOracle& oracle,
                                                    const BundleSampler& tangent_sampler,
                                                    const BundleSampler& ambient_sampler, std::size_t count, Rng& rng,
                                                    const QuotientSchedule& sched = {}, unsigned threads = 0) {
  if (!oracle.has_tangent_predicate())
    throw std::invalid_argument("set '" + oracle.id() + "' has no tangent predicate");
  const auto tangent = detail::draw_all(tangent_sampler, count, rng);
  const auto ambient = detail::draw_all(ambient_sampler, count, rng);
  std::vector<std::pair<Vector, Vector>> all = tangent;
  all.insert(all.end(), ambient.begin(), ambient.end());

  struct Row {
    bool tangent;
    Verdict verdict;
    double estimate;
  };
  std::vector<Row> rows(all.size());
  parallel_for(all.size(), threads, [&](std::size_t i) {
    const auto& [x, v] = all[i];
    const auto cv = admissible(spray, oracle, x, v, sched);
    rows[i] = {oracle.is_tangent(x, v), cv.verdict, cv.max_estimate()};
  });

  TotallyGeodesicReport rep;
  rep.set_id = oracle.id();
  rep.spray_label = spray.label();
  rep.tangent_samples = tangent.size();
  rep.ambient_samples = ambient.size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    if (r.verdict == Verdict::Inconclusive) {
      ++rep.inconclusive;
      continue;
    }
    std::string kind;
    if (r.tangent && r.verdict == Verdict::NonMember) {
      ++rep.tangent_not_admissible;
      kind = "tangent-not-admissible";
    } else if (!r.tangent && r.verdict == Verdict::Member) {
      ++rep.admissible_not_tangent;
      kind = "admissible-not-tangent";
    }
    if (!kind.empty() && rep.failures.size() < 5) rep.failures.push_back({kind, i, r.estimate});
  }
  if (rep.tangent_not_admissible + rep.admissible_not_tangent > 0)
    rep.verdict = GeodesyVerdict::NotTotallyGeodesic;
  else
    rep.verdict = rep.inconclusive == 0 ? GeodesyVerdict::TotallyGeodesic : GeodesyVerdict::Inconclusive;
  return rep;
}

// ---------------------------------------------------------------------------
// Geodesic convexity

struct ConvexityReport {
  std::size_t pairs = 0, skipped = 0;
  double max_distance = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Max distance to S of the connecting geodesics between the given pairs, at
/// interior times k / (interior + 1).
inline ConvexityReport check_geodesic_convexity(const Spray& spray, const SetOracle& oracle,
                                                const std::vector<std::pair<Vector, Vector>>& pairs,
                                                double tolerance = 1e-7, std::size_t interior = 9, double h = 1e-3) {
  if (!spray.has_two_point())
    throw std::invalid_argument("spray '" + spray.label() + "' has no two-point geodesic solver");
  ConvexityReport rep;
  rep.tolerance = tolerance;
  for (const auto& [p, q] : pairs) {
    if ((p.array() == q.array()).all()) {
      ++rep.skipped;
      continue;
    }
    const Vector v = spray.two_point(p, q);
    for (std::size_t k = 1; k <= interior; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(interior + 1);
      rep.max_distance = std::max(rep.max_distance, oracle.max_distance(geodesic_flow(spray, p, v, t, h).x));
    }
    ++rep.pairs;
  }
  rep.pass = rep.max_distance <= tolerance;
  return rep;
}

inline ConvexityReport check_geodesic_convexity(const Spray& spray, const SetOracle& oracle,
                                                const BundleSampler& pair_sampler, std::size_t count, Rng& rng,
                                                double tolerance = 1e-7) {
  return check_geodesic_convexity(spray, oracle, detail::draw_all(pair_sampler, count, rng), tolerance);
}

// ---------------------------------------------------------------------------
// Tangency reformulation

struct TangencyRow {
  Verdict tangency = Verdict::Inconclusive;
  InvarianceVerdict invariance = InvarianceVerdict::Inconclusive;
  double tangency_estimate = 0.0;
  double max_distance = 0.0;
  bool agree = false;
};

struct TangencyReport {
  std::string bundle_set_id, set_id, spray_label;
  std::vector<TangencyRow> rows;
  /// counts[tangency][invariance] with indices from the enum order.
  std::array<std::array<std::size_t, 3>, 3> matrix{};
  std::size_t agreements = 0;
  std::vector<std::size_t> discrepancies;
  bool pass = false;
};

/// Compares Nagumo tangency on the bundle with the trajectory verdict of each sample.
inline TangencyReport check_tangency_reformulation(const Spray& spray, const SetOracle& bundle_set,
                                                   const SetOracle& oracle, const BundleSampler& sampler,
                                                   std::size_t count, Rng& rng, const InvarianceOptions& opt = {}) {
  const auto data = detail::draw_all(sampler, count, rng);
  TangencyReport rep;
  rep.bundle_set_id = bundle_set.id();
  rep.set_id = oracle.id();
  rep.spray_label = spray.label();
  rep.rows.resize(data.size());
  InvarianceOptions trial_opt = opt;
  trial_opt.spot_check = false;
  parallel_for(data.size(), opt.threads, [&](std::size_t i) {
    const auto& [x, v] = data[i];
    TangencyRow& row = rep.rows[i];
    const auto cv = first_order_tangent_on_bundle(spray, bundle_set, x, v, opt.schedule);
    row.tangency = cv.verdict;
    row.tangency_estimate = cv.max_estimate();
    const auto run = detail::run_trial(spray, oracle, x, v, trial_opt, false);
    row.max_distance = run.record.max_distance;
    row.invariance = run.record.violated ? InvarianceVerdict::Violated
                                         : (run.record.in_set(opt.invariance_tol) ? InvarianceVerdict::Invariant
                                                                                 : InvarianceVerdict::Inconclusive);
    row.agree = (row.tangency == Verdict::Member && row.invariance == InvarianceVerdict::Invariant) ||
                (row.tangency == Verdict::NonMember && row.invariance == InvarianceVerdict::Violated);
  });
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& row = rep.rows[i];
    ++rep.matrix[static_cast<std::size_t>(row.tangency)][static_cast<std::size_t>(row.invariance)];
    if (row.agree)
      ++rep.agreements;
    else
      rep.discrepancies.push_back(i);
  }
  rep.pass = !rep.rows.empty() && rep.discrepancies.empty();
  return rep;
}

// ---------------------------------------------------------------------------
// Geodesic flow

struct FlowRecord {
  std::size_t sample = 0;
  double t = 0.0;
  std::string outcome;  // member | non-member | inconclusive | base-outside | outside-domain
};

struct FlowReport {
  std::vector<FlowRecord> records;
  std::size_t members = 0;
  bool pass = false;
};

/// Admissibility of Phi_t(x, v) for each sample and each listed time.
inline FlowReport check_flow_invariance(const Spray& spray, const SetOracle& oracle,
                                        const std::vector<std::pair<Vector, Vector>>& data,
                                        const std::vector<double>& times, double h = 1e-3,
                                        const QuotientSchedule& sched = {}) {
  FlowReport rep;
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double t : times) {
      FlowRecord rec{i, t, {}};
      try {
        const auto s = geodesic_flow(spray, data[i].first, data[i].second, t, h);
        rec.outcome = detail::spot_check(spray, oracle, s, t, sched).outcome;
      } catch (const DomainError&) {
        rec.outcome = "outside-domain";
      }
      if (rec.outcome == "member") ++rep.members;
      rep.records.push_back(std::move(rec));
    }
  }
  rep.pass = !rep.records.empty() && rep.members == rep.records.size();
  return rep;
}

inline FlowReport check_flow_invariance(const Spray& spray, const SetOracle& oracle, const BundleSampler& sampler,
                                        std::size_t count, Rng& rng, const std::vector<double>& times,
                                        double h = 1e-3, const QuotientSchedule& sched = {}) {
  return check_flow_invariance(spray, oracle, detail::draw_all(sampler, count, rng), times, h, sched);
}

// ---------------------------------------------------------------------------
// Orbits under automorphisms

struct OrbitReport {
  AutomorphismReport automorphism;
  double automorphism_tol = 1e-10;
  std::string transformed_set_id;
  InvarianceReport invariance;
  double pushforward_discrepancy = 0.0;  // |phi(g(T)) - g~(T)| over checked samples
  std::size_t pushforward_samples = 0;
  bool pass = false;
};

/// Checks phi_* S = S, then the invariance of phi(S) from pushed-forward data,
/// and that phi o g is a geodesic of the pushed spray.
inline OrbitReport check_orbit_invariance(const Spray& spray, const Automorphism& phi, const SetOracle& oracle,
                                          const BundleSampler& sampler, const BundleSampler& ambient,
                                          std::size_t count, Rng& rng, const InvarianceOptions& opt = {}) {
  OrbitReport rep;
  rep.automorphism = check_automorphism(spray, phi, ambient.draw, 100, rng);

  std::optional<SetOracle> moved;
  if (phi.translation_shift && *phi.translation_shift == 0)
    moved = oracle;
  else if (phi.translation_shift)
    moved = translate_set(oracle, static_cast<double>(*phi.translation_shift) * oracle.space().grid().step);
  else
    throw std::invalid_argument("set transforms are implemented for translations only");
  rep.transformed_set_id = moved->id();

  auto data = detail::draw_all(sampler, count, rng);
  for (auto& [x, v] : data) {
    Vector px = phi.forward(x);
    v = phi.dforward(x, v);
    x = std::move(px);
  }
  rep.invariance = verify_invariance_on(spray, *moved, data, opt, "pushed-forward " + sampler.description);

  const Spray pushed = pushforward_spray(spray, phi);
  const std::size_t checks = std::min<std::size_t>(data.size(), 10);
  const double T = opt.tspan.second > 0.0 ? std::min(opt.tspan.second, 1.0) : 0.5;
  for (std::size_t i = 0; i < checks; ++i) {
    const Vector x = phi.inverse(data[i].first);
    const Vector v = phi.dinverse(data[i].first, data[i].second);
    const auto g = geodesic_flow(spray, x, v, T, opt.h);
    const auto traj = integrate_geodesic(pushed, data[i].first, data[i].second, {0.0, T}, opt.h, {Method::RK4, false, 1});
    rep.pushforward_discrepancy =
        std::max(rep.pushforward_discrepancy, (phi.forward(g.x) - traj.states.back().x).lpNorm<Eigen::Infinity>());
    ++rep.pushforward_samples;
  }
  rep.pass = rep.automorphism.max_discrepancy <= rep.automorphism_tol &&
             rep.invariance.overall == InvarianceVerdict::Invariant && rep.pushforward_discrepancy <= 1e-8;
  return rep;
}

// ---------------------------------------------------------------------------
// Stratification

struct StratumReport {
  std::size_t index = 0;
  std::size_t trials = 0;
  double max_closure_distance = 0.0;
  std::size_t max_exit_events = 0;
  std::size_t total_exit_events = 0;
  bool coherent = true;
};

struct StratificationReport {
  std::vector<StratumReport> strata;
  std::size_t frontier_checks = 0, frontier_failures = 0;
  std::size_t nesting_checks = 0, nesting_failures = 0;
  double closure_tol = 0.0;
  bool pass = false;
};

struct ExitEvents {
  std::size_t count = 0;
  std::vector<double> times;
};

/// Times where coordinate `coord` reaches 0 along the trajectory (the state
/// drops to a lower stratum); a touch or a sign change counts once.
inline ExitEvents stratum_exits(const Trajectory& traj, std::size_t coord) {
  ExitEvents ev;
  const auto c = static_cast<Eigen::Index>(coord);
  auto sign = [](double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); };
  int prev = 0;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const double x = traj.states[i].x[c];
    const int s = sign(x);
    if (s == 0 && (i == 0 || prev != 0)) {
      ev.times.push_back(traj.times[i]);
    } else if (i > 0 && s != 0 && prev != 0 && s != prev) {
      const double xa = traj.states[i - 1].x[c];
      const double ta = traj.times[i - 1], tb = traj.times[i];
      ev.times.push_back(ta + (tb - ta) * xa / (xa - x));
    }
    prev = s;
  }
  ev.count = ev.times.size();
  return ev;
}

/// Per stratum S_k: geodesics from x in S_k with v in H_k stay in H_k; exits
/// from S_k are counted. Also samples the frontier and nesting conditions.
inline StratificationReport check_stratification(const Stratification& strata, const Spray& spray,
                                                 std::size_t trials_per_stratum, Rng& rng,
                                                 const InvarianceOptions& opt = {}, std::size_t frontier_samples = 20) {
  StratificationReport rep;
  rep.closure_tol = opt.invariance_tol;
  const auto space = strata.strata.front().closure.space_ptr();
  for (const auto& st : strata.strata) {
    StratumReport sr;
    sr.index = st.index;
    const auto data = detail::draw_all(span_pairs(space, st.index), trials_per_stratum, rng);
    std::vector<detail::TrialRun> runs(data.size());
    std::vector<ExitEvents> events(data.size());
    parallel_for(data.size(), opt.threads, [&](std::size_t i) {
      runs[i] = detail::run_trial(spray, st.closure, data[i].first, data[i].second, opt, false);
      const auto traj = integrate_geodesic(spray, data[i].first, data[i].second, opt.tspan, opt.h, {opt.method, false, 1});
      events[i] = stratum_exits(traj, st.index - 1);
    });
    for (std::size_t i = 0; i < runs.size(); ++i) {
      sr.max_closure_distance = std::max(sr.max_closure_distance, runs[i].record.max_distance);
      sr.coherent = sr.coherent && runs[i].record.coherent;
      sr.max_exit_events = std::max(sr.max_exit_events, events[i].count);
      sr.total_exit_events += events[i].count;
    }
    sr.trials = runs.size();
    rep.strata.push_back(sr);
  }
  const std::size_t n = strata.strata.size();
  for (std::size_t j = 1; j <= n; ++j) {
    for (std::size_t s = 0; s < frontier_samples; ++s) {
      const Vector x = random_in_span(*space, j, rng, 0.1);
      for (std::size_t i = 1; i <= n; ++i) {
        const auto& hi = strata.strata[i - 1].closure;
        ++rep.frontier_checks;
        const bool inside = hi.contains(x);
        // S_j lies in the closure of S_i for j <= i and stays away from H_i for j > i
        if (inside != (j <= i)) ++rep.frontier_failures;
      }
      if (j < n) {
        ++rep.nesting_checks;
        if (!strata.strata[j].closure.contains(x)) ++rep.nesting_failures;
      }
      if (!strata.strata[j - 1].stratum.contains(x)) ++rep.frontier_failures;
    }
  }
  bool ok = rep.frontier_failures == 0 && rep.nesting_failures == 0;
  for (const auto& sr : rep.strata) ok = ok && sr.max_closure_distance <= opt.invariance_tol && sr.coherent && sr.max_exit_events <= 1;
  rep.pass = ok;
  return rep;
}

}  // namespace spraylab
