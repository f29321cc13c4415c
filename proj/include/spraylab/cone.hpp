#pragma once

// Adjacent and second-order adjacent cone membership, decided from the
// quotients t^-1 d(s + t f, S) and t^-2 d(s + t f + t^2 e / 2, S) over a
// geometric schedule t_k = t0 * ratio^k.

#include "spraylab/set_oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace spraylab {

/// Raised when an operation is called outside its domain (e.g. base point not in S).
struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct QuotientSchedule {
  double t0 = 1e-1;
  double ratio = 0.5;
  int steps = 14;
  double member_threshold = 1e-6;
  double nonmember_threshold = 1e-3;
  /// Distances at or below this are treated as exact zeros (roundoff of the oracle).
  double distance_floor = 1e-13;
  /// Inconclusive verdicts are retried with 4 more steps, at most this often.
  int max_refinements = 1;

  void validate() const {
    if (!(t0 > 0.0) || !std::isfinite(t0)) throw std::invalid_argument("schedule t0 must be positive");
    if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("schedule ratio must lie in (0, 1)");
    if (steps < 4) throw std::invalid_argument("schedule needs at least 4 steps");
    if (!(member_threshold < nonmember_threshold)) throw std::invalid_argument("member threshold must be below non-member threshold");
    if (distance_floor < 0.0) throw std::invalid_argument("distance floor must be non-negative");
  }

  std::vector<double> times() const {
    std::vector<double> t(static_cast<std::size_t>(steps));
    double cur = t0;
    for (auto& x : t) {
      x = cur;
      cur *= ratio;
    }
    return t;
  }
};

enum class Verdict { Member, NonMember, Inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Member:
      return "member";
    case Verdict::NonMember:
      return "non-member";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

struct SeminormTrace {
  std::vector<double> t;
  std::vector<double> q;
  double estimate = 0.0;  // extrapolated limit, +inf when divergent
  bool divergent = false;
  Verdict verdict = Verdict::Inconclusive;
};

struct ConeVerdict {
  Verdict verdict = Verdict::Inconclusive;
  std::vector<SeminormTrace> traces;
  int power = 1;               // 1: adjacent cone, 2: second-order cone
  QuotientSchedule schedule;   // as finally used (after refinement)
  std::string set_id;

  double estimate(std::size_t n) const { return traces.at(n).estimate; }
  double max_estimate() const {
    double m = 0.0;
    for (const auto& tr : traces) m = std::max(m, tr.estimate);
    return m;
  }
};

namespace detail {

inline SeminormTrace classify(std::vector<double> t, std::vector<double> q, const QuotientSchedule& s) {
  SeminormTrace tr;
  const std::size_t k = q.size();
  const double last = q[k - 1];
  double tail_min = last;
  bool monotone = true;
  int doublings = 0;
  int best_run = 0;
  for (std::size_t i = k - 4; i + 1 < k; ++i) {
    tail_min = std::min(tail_min, q[i]);
    if (q[i + 1] > 1.1 * q[i] + 1e-3 * s.member_threshold) monotone = false;
    if (q[i] > 0.0 && q[i + 1] >= 2.0 * q[i]) {
      ++doublings;
      best_run = std::max(best_run, doublings);
    } else {
      doublings = 0;
    }
  }
  tr.divergent = best_run >= 2 && last > s.member_threshold;
  if (tr.divergent || tail_min >= s.nonmember_threshold) {
    tr.verdict = Verdict::NonMember;
  } else if (last <= s.member_threshold && monotone) {
    tr.verdict = Verdict::Member;
  } else {
    tr.verdict = Verdict::Inconclusive;
  }
  if (tr.divergent) {
    tr.estimate = std::numeric_limits<double>::infinity();
  } else {
    // Richardson extrapolants; keep the one closest to its predecessor, since
    // roundoff in d / t^p grows as t shrinks
    const double r = s.ratio;
    auto rich = [&](std::size_t i) { return (q[i] - r * q[i - 1]) / (1.0 - r); };
    double est = rich(k - 1);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 2; i < k; ++i) {
      const double diff = std::abs(rich(i) - rich(i - 1));
      if (diff <= best) {
        best = diff;
        est = rich(i);
      }
    }
    tr.estimate = std::max(0.0, est);
  }
  tr.t = std::move(t);
  tr.q = std::move(q);
  return tr;
}

template <class Path>
ConeVerdict quotient_verdict(const SetOracle& oracle, Path path, int power, QuotientSchedule sched) {
  sched.validate();
  for (int attempt = 0;; ++attempt) {
    const auto times = sched.times();
    const std::size_t count = oracle.space().seminorm_count();
    std::vector<std::vector<double>> q(count, std::vector<double>(times.size()));
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double t = times[k];
      const auto d = oracle.distances(path(t));
      const double scale = power == 1 ? t : t * t;
      for (std::size_t n = 0; n < count; ++n) q[n][k] = d[n] <= sched.distance_floor ? 0.0 : d[n] / scale;
    }
    ConeVerdict out;
    out.power = power;
    out.schedule = sched;
    out.set_id = oracle.id();
    bool all_member = true, any_non = false;
    for (std::size_t n = 0; n < count; ++n) {
      out.traces.push_back(classify(times, std::move(q[n]), sched));
      all_member = all_member && out.traces.back().verdict == Verdict::Member;
      any_non = any_non || out.traces.back().verdict == Verdict::NonMember;
    }
    out.verdict = any_non ? Verdict::NonMember : (all_member ? Verdict::Member : Verdict::Inconclusive);
    if (out.verdict != Verdict::Inconclusive || attempt >= sched.max_refinements) return out;
    sched.steps += 4;
  }
}

inline void require_in_set(const SetOracle& oracle, const Vector& s, const char* what) {
  if (!oracle.contains(s)) throw PreconditionError(std::string(what) + " is not in set '" + oracle.id() + "'");
}

}  // namespace detail

/// Is f in the adjacent cone of S at s?
inline ConeVerdict adjacent_member(const SetOracle& oracle, const Vector& s, const Vector& f,
                                   const QuotientSchedule& sched = {}) {
  oracle.space().check(f);
  detail::require_in_set(oracle, s, "base point");
  return detail::quotient_verdict(oracle, [&](double t) -> Vector { return s + t * f; }, 1, sched);
}

/// Is e in the second-order adjacent cone of S at s with associated direction f?
inline ConeVerdict second_order_member(const SetOracle& oracle, const Vector& s, const Vector& f, const Vector& e,
                                       const QuotientSchedule& sched = {}) {
  oracle.space().check(e);
  const auto first = adjacent_member(oracle, s, f, sched);
  if (first.verdict == Verdict::NonMember)
    throw PreconditionError("associated direction is not adjacent-tangent to '" + oracle.id() + "'");
  return detail::quotient_verdict(oracle, [&](double t) -> Vector { return s + t * f + 0.5 * t * t * e; }, 2, sched);
}

/// Second-order test of (x, v) with e = accel(x, v) and associated direction v.
/// A velocity that is not adjacent-tangent yields a divergent quotient and so
/// NonMember rather than an error.
template <class SprayT>
ConeVerdict admissible(const SprayT& spray, const SetOracle& oracle, const Vector& x, const Vector& v,
                       const QuotientSchedule& sched = {}) {
  spray.validate_point(x);
  oracle.space().check(v);
  detail::require_in_set(oracle, x, "base point");
  const Vector e = spray.accel(x, v);
  return detail::quotient_verdict(oracle, [&](double t) -> Vector { return x + t * v + 0.5 * t * t * e; }, 2, sched);
}

/// Nagumo tangency on the bundle: t^-1 d((x, v) + t (v, accel(x, v)), A).
/// A point off A is not rejected; its quotient diverges and reads NonMember.
template <class SprayT>
ConeVerdict first_order_tangent_on_bundle(const SprayT& spray, const SetOracle& bundle_set, const Vector& x,
                                          const Vector& v, const QuotientSchedule& sched = {}) {
  spray.validate_point(x);
  const Vector point = ModelSpace::join(x, v);
  const Vector direction = ModelSpace::join(v, spray.accel(x, v));
  bundle_set.space().check(point);
  return detail::quotient_verdict(bundle_set, [&](double t) -> Vector { return point + t * direction; }, 1, sched);
}

}  // namespace spraylab
