#pragma once

// JSON reports and trajectory CSV files.

#include "spraylab/cone.hpp"
#include "spraylab/invariance.hpp"
#include "spraylab/spray.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace spraylab {

using Json = nlohmann::ordered_json;

/// Finite values as numbers; infinities as "inf"/"-inf"; NaN as null.
inline Json real(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

inline Json reals(const std::vector<double>& xs) {
  Json a = Json::array();
  for (double x : xs) a.push_back(real(x));
  return a;
}

inline Json to_json(const QuotientSchedule& s) {
  return {{"t0", s.t0},
          {"ratio", s.ratio},
          {"steps", s.steps},
          {"member_threshold", s.member_threshold},
          {"nonmember_threshold", s.nonmember_threshold},
          {"distance_floor", s.distance_floor}};
}

inline Json to_json(const ConeVerdict& v, bool traces = true) {
  Json j = {{"verdict", to_string(v.verdict)},
            {"order", v.power},
            {"set", v.set_id},
            {"scope", "relative to the configured seminorm family"},
            {"schedule", to_json(v.schedule)}};
  Json per = Json::array();
  for (std::size_t n = 0; n < v.traces.size(); ++n) {
    const auto& tr = v.traces[n];
    Json t = {{"seminorm", n}, {"verdict", to_string(tr.verdict)}, {"limit_estimate", real(tr.estimate)}, {"divergent", tr.divergent}};
    if (traces) {
      Json pts = Json::array();
      for (std::size_t k = 0; k < tr.t.size(); ++k) pts.push_back(Json::array({tr.t[k], real(tr.q[k])}));
      t["trace"] = std::move(pts);
    }
    per.push_back(std::move(t));
  }
  j["seminorms"] = std::move(per);
  return j;
}

inline Json to_json(const InvarianceReport& r, bool profiles = false) {
  Json j = {{"set", r.set_id},
            {"spray", r.spray_label},
            {"sampler", r.sampler},
            {"verdict", to_string(r.overall)},
            {"max_distance", real(r.max_distance)},
            {"admissibility_coherent", r.coherent},
            {"options",
             {{"t_lo", r.options.tspan.first},
              {"t_hi", r.options.tspan.second},
              {"h", r.options.h},
              {"invariance_tol", r.options.invariance_tol},
              {"violation_threshold", r.options.violation_threshold},
              {"growth_samples", r.options.growth_samples}}}};
  Json trials = Json::array();
  for (std::size_t i = 0; i < r.trials.size(); ++i) {
    const auto& t = r.trials[i];
    Json row = {{"trial", i},
                {"base_in_set", t.base_in_set},
                {"admissibility", t.admissibility ? Json(to_string(*t.admissibility)) : Json(nullptr)},
                {"max_distance", real(t.max_distance)},
                {"blow_up", t.blow_up},
                {"violated", t.violated},
                {"violation_onset", real(t.violation_onset)},
                {"method", to_string(t.method)},
                {"coherent", t.coherent}};
    if (t.blow_up) row["blow_up_time"] = real(t.blow_up_time);
    if (t.boundary_lo) row["domain_boundary_lo"] = real(*t.boundary_lo);
    if (t.boundary_hi) row["domain_boundary_hi"] = real(*t.boundary_hi);
    Json checks = Json::array();
    for (const auto& c : t.spot_checks) checks.push_back({{"t", c.t}, {"outcome", c.outcome}});
    row["spot_checks"] = std::move(checks);
    if (profiles) {
      row["profile_t"] = reals(t.profile_t);
      row["profile_d"] = reals(t.profile_d);
    }
    trials.push_back(std::move(row));
  }
  j["trials"] = std::move(trials);
  if (r.counterexample_trial) j["counterexample_trial"] = *r.counterexample_trial;
  return j;
}

inline Json to_json(const TotallyGeodesicReport& r) {
  Json fails = Json::array();
  for (const auto& f : r.failures) fails.push_back({{"kind", f.kind}, {"sample", f.sample}, {"limit_estimate", real(f.estimate)}});
  return {{"set", r.set_id},
          {"spray", r.spray_label},
          {"verdict", to_string(r.verdict)},
          {"tangent_samples", r.tangent_samples},
          {"ambient_samples", r.ambient_samples},
          {"tangent_not_admissible", r.tangent_not_admissible},
          {"admissible_not_tangent", r.admissible_not_tangent},
          {"inconclusive", r.inconclusive},
          {"failures", std::move(fails)}};
}

inline Json to_json(const ConvexityReport& r) {
  return {{"verdict", r.pass ? "pass" : "fail"},
          {"pairs", r.pairs},
          {"skipped", r.skipped},
          {"max_distance", real(r.max_distance)},
          {"tolerance", r.tolerance}};
}

inline Json to_json(const TangencyReport& r) {
  Json matrix = Json::object();
  const Verdict vs[] = {Verdict::Member, Verdict::NonMember, Verdict::Inconclusive};
  const InvarianceVerdict is[] = {InvarianceVerdict::Invariant, InvarianceVerdict::Violated, InvarianceVerdict::Inconclusive};
  for (auto v : vs)
    for (auto i : is)
      matrix[std::string(to_string(v)) + "/" + to_string(i)] = r.matrix[static_cast<std::size_t>(v)][static_cast<std::size_t>(i)];
  Json disc = Json::array();
  for (auto i : r.discrepancies) {
    const auto& row = r.rows[i];
    disc.push_back({{"sample", i},
                    {"tangency", to_string(row.tangency)},
                    {"invariance", to_string(row.invariance)},
                    {"max_distance", real(row.max_distance)}});
  }
  return {{"verdict", r.pass ? "pass" : "fail"},
          {"bundle_set", r.bundle_set_id},
          {"set", r.set_id},
          {"spray", r.spray_label},
          {"samples", r.rows.size()},
          {"agreements", r.agreements},
          {"matrix", std::move(matrix)},
          {"discrepancies", std::move(disc)}};
}

inline Json to_json(const FlowReport& r) {
  Json recs = Json::array();
  for (const auto& f : r.records) recs.push_back({{"sample", f.sample}, {"t", f.t}, {"outcome", f.outcome}});
  return {{"verdict", r.pass ? "pass" : "fail"}, {"members", r.members}, {"checks", r.records.size()}, {"records", std::move(recs)}};
}

inline Json to_json(const AutomorphismReport& r) {
  return {{"samples", r.samples},
          {"max_discrepancy", real(r.max_discrepancy)},
          {"max_relative_discrepancy", real(r.max_relative_discrepancy)}};
}

inline Json to_json(const OrbitReport& r) {
  return {{"verdict", r.pass ? "pass" : "fail"},
          {"automorphism", to_json(r.automorphism)},
          {"automorphism_tol", r.automorphism_tol},
          {"transformed_set", r.transformed_set_id},
          {"pushforward_discrepancy", real(r.pushforward_discrepancy)},
          {"pushforward_samples", r.pushforward_samples},
          {"invariance", to_json(r.invariance)}};
}

inline Json to_json(const StratificationReport& r) {
  Json strata = Json::array();
  for (const auto& s : r.strata)
    strata.push_back({{"stratum", s.index},
                      {"trials", s.trials},
                      {"max_closure_distance", real(s.max_closure_distance)},
                      {"max_exit_events", s.max_exit_events},
                      {"total_exit_events", s.total_exit_events},
                      {"admissibility_coherent", s.coherent}});
  return {{"verdict", r.pass ? "pass" : "fail"},
          {"frontier_checks", r.frontier_checks},
          {"frontier_failures", r.frontier_failures},
          {"nesting_checks", r.nesting_checks},
          {"nesting_failures", r.nesting_failures},
          {"strata", std::move(strata)}};
}

inline Json to_json(const HomogeneityReport& r) {
  return {{"samples", r.samples},
          {"max_relative_violation", real(r.max_relative_violation)},
          {"max_zero_velocity_accel", real(r.max_zero_velocity_accel)}};
}

inline Json to_json(const ReparametrizationReport& r) {
  return {{"samples", r.samples},
          {"max_metric_discrepancy", real(r.max_metric_discrepancy)},
          {"max_seminorm_discrepancy", real(r.max_seminorm_discrepancy)},
          {"parameter_at_t_hi", real(r.final_parameter_hi)},
          {"parameter_at_t_lo", real(r.final_parameter_lo)}};
}

inline Json trajectory_summary(const Trajectory& t) {
  Json j = {{"method", to_string(t.method)},
            {"step", t.step},
            {"samples", t.times.size()},
            {"t_lo", t.times.empty() ? 0.0 : t.times.front()},
            {"t_hi", t.times.empty() ? 0.0 : t.times.back()},
            {"rk4_vs_closed_form", real(t.rk4_vs_closed)}};
  if (t.boundary_lo) j["domain_boundary_lo"] = real(*t.boundary_lo);
  if (t.boundary_hi) j["domain_boundary_hi"] = real(*t.boundary_hi);
  return j;
}

// ---------------------------------------------------------------------------
// Files

inline std::string format_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Header t,x_0..x_{d-1},v_0..v_{d-1}; 17 significant digits.
inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const std::size_t d = traj.states.empty() ? 0 : static_cast<std::size_t>(traj.states.front().x.size());
  out << "t";
  for (std::size_t i = 0; i < d; ++i) out << ",x_" << i;
  for (std::size_t i = 0; i < d; ++i) out << ",v_" << i;
  out << "\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    out << format_real(traj.times[k]);
    for (std::size_t i = 0; i < d; ++i) out << ',' << format_real(traj.states[k].x[static_cast<Eigen::Index>(i)]);
    for (std::size_t i = 0; i < d; ++i) out << ',' << format_real(traj.states[k].v[static_cast<Eigen::Index>(i)]);
    out << "\n";
  }
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace spraylab
