#pragma once

// Sprays in one global chart: the acceleration field (x, v) -> S2(x, v),
// geodesic integration, projective transforms and automorphism pushforward.

#include "spraylab/model_space.hpp"
#include "spraylab/random.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spraylab {

struct GeodesicState {
  Vector x;
  Vector v;
};

using PairSampler = std::function<std::pair<Vector, Vector>(Rng&)>;

/// Non-finite state met during integration.
struct BlowUpError : std::runtime_error {
  double time;
  BlowUpError(const std::string& what, double t) : std::runtime_error(what), time(t) {}
};

/// A requested time lies outside the maximal domain of a geodesic.
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Spray {
 public:
  using AccelFn = std::function<Vector(const Vector& x, const Vector& v)>;
  /// nullopt when the closed form does not apply to the given initial data.
  using ClosedFormFn = std::function<std::optional<GeodesicState>(double t, const Vector& x0, const Vector& v0)>;
  using DomainFn = std::function<std::pair<double, double>(const Vector& x0, const Vector& v0)>;
  using ValidateFn = std::function<void(const Vector& x)>;
  /// Initial velocity of the geodesic from p reaching q at t = 1.
  using TwoPointFn = std::function<Vector(const Vector& p, const Vector& q)>;

  struct Parts {
    std::string label;
    SpacePtr space;
    AccelFn accel;
    ClosedFormFn closed_form;
    DomainFn domain;
    ValidateFn validate;
    TwoPointFn two_point;
  };

  explicit Spray(Parts parts) : p_(std::move(parts)) {
    if (!p_.space) throw std::invalid_argument("spray needs a space");
    if (!p_.accel) throw std::invalid_argument("spray needs an acceleration field");
  }

  const std::string& label() const { return p_.label; }
  const ModelSpace& space() const { return *p_.space; }
  const SpacePtr& space_ptr() const { return p_.space; }
  const Parts& parts() const { return p_; }

  Vector accel(const Vector& x, const Vector& v) const { return p_.accel(x, v); }

  void validate_point(const Vector& x) const {
    p_.space->check(x);
    if (p_.validate) p_.validate(x);
  }

  bool has_closed_form() const { return static_cast<bool>(p_.closed_form); }
  std::optional<GeodesicState> closed_form(double t, const Vector& x0, const Vector& v0) const {
    if (!p_.closed_form) return std::nullopt;
    return p_.closed_form(t, x0, v0);
  }

  /// Open maximal interval of the geodesic through (x0, v0), if known.
  std::pair<double, double> domain(const Vector& x0, const Vector& v0) const {
    if (!p_.domain) return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    return p_.domain(x0, v0);
  }

  bool has_two_point() const { return static_cast<bool>(p_.two_point); }
  Vector two_point(const Vector& p, const Vector& q) const {
    if (!p_.two_point) throw std::logic_error("spray '" + p_.label + "' has no two-point geodesic solver");
    return p_.two_point(p, q);
  }

 private:
  Parts p_;
};

// ---------------------------------------------------------------------------
// Library sprays

inline Spray flat_spray(SpacePtr space) {
  Spray::Parts p;
  p.label = "flat";
  p.space = space;
  p.accel = [](const Vector& x, const Vector&) -> Vector { return Vector::Zero(x.size()); };
  p.closed_form = [](double t, const Vector& x0, const Vector& v0) -> std::optional<GeodesicState> {
    return GeodesicState{x0 + t * v0, v0};
  };
  p.two_point = [](const Vector& a, const Vector& b) -> Vector { return b - a; };
  return Spray(std::move(p));
}

/// Symmetric smooth bump supported in (-width/2, width/2) with peak value 1.
inline double smooth_bump(double x, double width) {
  const double s = 2.0 * x / width;
  if (std::abs(s) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

/// Trapezoid weights w_i = h * chi(x_i) so that alpha(v) = sum_i w_i v_i.
inline Vector bump_weights(const ModelSpace& space, double width) {
  const Grid& g = space.grid();
  if (g.codomain_dim != 1) throw std::invalid_argument("bump functional needs a scalar grid");
  if (!(width >= 2.0 * g.step)) throw std::invalid_argument("bump width must be at least two grid steps");
  Vector w(static_cast<Eigen::Index>(g.points));
  for (std::size_t i = 0; i < g.points; ++i) {
    double q = g.step;
    if (!g.periodic && (i == 0 || i + 1 == g.points)) q *= 0.5;
    w[static_cast<Eigen::Index>(i)] = q * smooth_bump(g.coordinate(i), width);
  }
  return w;
}

/// P(x, v) = -2 alpha(v): the factor taking the flat spray to the bump-perturbed one.
struct ProjectiveFactor {
  std::string label;
  std::function<double(const Vector& x, const Vector& v)> value;
};

inline ProjectiveFactor zero_projective_factor() {
  return {"0", [](const Vector&, const Vector&) { return 0.0; }};
}

inline ProjectiveFactor bump_projective_factor(const ModelSpace& space, double width, double coefficient = -2.0) {
  auto w = std::make_shared<const Vector>(bump_weights(space, width));
  std::ostringstream os;
  os << coefficient << "*alpha[" << width << "]";
  return {os.str(), [w, coefficient](const Vector&, const Vector& v) { return coefficient * w->dot(v); }};
}

/// accel(f, v) = -2 alpha(v) v; geodesics x(t) = f + v log(1 + 2 u t) / (2 u), u = alpha(v).
inline Spray bump_perturbed_spray(SpacePtr space, double width) {
  auto w = std::make_shared<const Vector>(bump_weights(*space, width));
  std::ostringstream label;
  label << "bump:" << width;
  Spray::Parts p;
  p.label = label.str();
  p.space = space;
  p.accel = [w](const Vector&, const Vector& v) -> Vector { return (-2.0 * w->dot(v)) * v; };
  p.closed_form = [w](double t, const Vector& x0, const Vector& v0) -> std::optional<GeodesicState> {
    const double u = w->dot(v0);
    if (u == 0.0) return GeodesicState{x0 + t * v0, v0};
    const double arg = 2.0 * u * t;
    if (!(arg > -1.0)) throw DomainError("time outside the geodesic's maximal domain");
    return GeodesicState{x0 + (std::log1p(arg) / (2.0 * u)) * v0, v0 / (1.0 + arg)};
  };
  p.domain = [w](const Vector&, const Vector& v0) {
    const double u = w->dot(v0);
    const double inf = std::numeric_limits<double>::infinity();
    if (u > 0.0) return std::pair{-1.0 / (2.0 * u), inf};
    if (u < 0.0) return std::pair{-inf, -1.0 / (2.0 * u)};
    return std::pair{-inf, inf};
  };
  return Spray(std::move(p));
}

inline double bump_functional(const ModelSpace& space, double width, const Vector& v) {
  return bump_weights(space, width).dot(v);
}

namespace detail {

inline std::size_t loop_points(const ModelSpace& space) {
  const Grid& g = space.grid();
  if (g.codomain_dim != 3) throw std::invalid_argument("sphere spray needs an R^3-valued grid");
  return g.points;
}

}  // namespace detail

/// Unit-sphere geodesic spray applied at every grid point: accel = -<v, v> x.
inline Spray sphere_pointwise_spray(SpacePtr space, double sphere_tol = 1e-8) {
  const std::size_t pts = detail::loop_points(*space);
  auto seg = [](const Vector& x, std::size_t i) { return x.segment<3>(static_cast<Eigen::Index>(3 * i)); };
  Spray::Parts p;
  p.label = "sphere";
  p.space = space;
  p.accel = [pts, seg](const Vector& x, const Vector& v) -> Vector {
    Vector out(x.size());
    for (std::size_t i = 0; i < pts; ++i)
      out.segment<3>(static_cast<Eigen::Index>(3 * i)) = -seg(v, i).squaredNorm() * seg(x, i);
    return out;
  };
  p.validate = [pts, seg, sphere_tol](const Vector& x) {
    for (std::size_t i = 0; i < pts; ++i)
      if (std::abs(seg(x, i).norm() - 1.0) > sphere_tol) throw std::invalid_argument("base point is off the unit sphere");
  };
  p.closed_form = [pts, seg, sphere_tol](double t, const Vector& x0, const Vector& v0) -> std::optional<GeodesicState> {
    GeodesicState s{Vector(x0.size()), Vector(v0.size())};
    for (std::size_t i = 0; i < pts; ++i) {
      const Eigen::Vector3d x = seg(x0, i);
      const Eigen::Vector3d v = seg(v0, i);
      if (std::abs(x.norm() - 1.0) > sphere_tol || std::abs(x.dot(v)) > sphere_tol * std::max(1.0, v.norm()))
        return std::nullopt;
      const double w = v.norm();
      const auto at = static_cast<Eigen::Index>(3 * i);
      if (w == 0.0) {
        s.x.segment<3>(at) = x;
        s.v.segment<3>(at) = v;
        continue;
      }
      const double c = std::cos(w * t), sn = std::sin(w * t);
      s.x.segment<3>(at) = c * x + sn * v / w;
      s.v.segment<3>(at) = -w * sn * x + c * v;
    }
    return s;
  };
  p.two_point = [pts, seg](const Vector& a, const Vector& b) -> Vector {
    Vector out(a.size());
    for (std::size_t i = 0; i < pts; ++i) {
      const Eigen::Vector3d x = seg(a, i);
      const Eigen::Vector3d y = seg(b, i);
      const Eigen::Vector3d perp = y - x.dot(y) * x;
      const double angle = std::atan2(perp.norm(), x.dot(y));
      if (std::abs(angle - std::numbers::pi) < 1e-9) throw std::invalid_argument("antipodal points have no unique geodesic");
      out.segment<3>(static_cast<Eigen::Index>(3 * i)) =
          perp.norm() > 0.0 ? Eigen::Vector3d(angle * perp / perp.norm()) : Eigen::Vector3d::Zero();
    }
    return out;
  };
  return Spray(std::move(p));
}

/// accel + P(x, v) v. Closed forms do not survive the transform.
inline Spray projective_transform(const Spray& spray, const ProjectiveFactor& factor) {
  Spray::Parts p;
  p.label = spray.label() + "+(" + factor.label + ")v";
  p.space = spray.space_ptr();
  p.validate = spray.parts().validate;
  p.accel = [spray, factor](const Vector& x, const Vector& v) -> Vector {
    return spray.accel(x, v) + factor.value(x, v) * v;
  };
  return Spray(std::move(p));
}

// ---------------------------------------------------------------------------
// Homogeneity

struct HomogeneityReport {
  std::size_t samples = 0;
  double max_relative_violation = 0.0;
  double max_zero_velocity_accel = 0.0;  // |accel(x, 0)|
};

inline HomogeneityReport check_homogeneity(const Spray& spray, const PairSampler& sampler, std::size_t count, Rng& rng,
                                           const std::vector<double>& scales = {-2.0, -1.0, 0.5, 3.0}) {
  HomogeneityReport r;
  for (std::size_t k = 0; k < count; ++k) {
    const auto [x, v] = sampler(rng);
    const Vector a = spray.accel(x, v);
    for (double s : scales) {
      const Vector lhs = spray.accel(x, s * v);
      const Vector rhs = s * s * a;
      const double scale = std::max(lhs.lpNorm<Eigen::Infinity>(), rhs.lpNorm<Eigen::Infinity>());
      const double diff = (lhs - rhs).lpNorm<Eigen::Infinity>();
      if (diff > 0.0) r.max_relative_violation = std::max(r.max_relative_violation, diff / scale);
    }
    r.max_zero_velocity_accel =
        std::max(r.max_zero_velocity_accel, spray.accel(x, Vector::Zero(v.size())).lpNorm<Eigen::Infinity>());
    ++r.samples;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Integration

enum class Method { Auto, RK4, ClosedForm };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::Auto:
      return "auto";
    case Method::RK4:
      return "rk4";
    case Method::ClosedForm:
      return "closed-form";
  }
  return "?";
}

struct IntegrationOptions {
  Method method = Method::Auto;
  bool cross_validate = false;
  std::size_t output_stride = 1;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<GeodesicState> states;
  Method method = Method::RK4;
  double step = 0.0;
  /// Domain boundary of the geodesic if it cut the requested span.
  std::optional<double> boundary_lo, boundary_hi;
  /// max |RK4 - closed form| over samples when cross-validated, NaN otherwise.
  double rk4_vs_closed = std::numeric_limits<double>::quiet_NaN();

  const GeodesicState& at_time(double t) const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < times.size(); ++i)
      if (std::abs(times[i] - t) < std::abs(times[best] - t)) best = i;
    return states[best];
  }
  std::size_t origin_index() const {
    for (std::size_t i = 0; i < times.size(); ++i)
      if (times[i] == 0.0) return i;
    return 0;
  }
};

namespace detail {

inline void rk4_step(const Spray& spray, GeodesicState& s, double h) {
  const Vector& x = s.x;
  const Vector& v = s.v;
  const Vector k1x = v, k1v = spray.accel(x, v);
  const Vector x2 = x + 0.5 * h * k1x, v2 = v + 0.5 * h * k1v;
  const Vector k2x = v2, k2v = spray.accel(x2, v2);
  const Vector x3 = x + 0.5 * h * k2x, v3 = v + 0.5 * h * k2v;
  const Vector k3x = v3, k3v = spray.accel(x3, v3);
  const Vector x4 = x + h * k3x, v4 = v + h * k3v;
  const Vector k4x = v4, k4v = spray.accel(x4, v4);
  s.x = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
  s.v = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
}

/// Sample times from 0 toward `end` in steps of h, the last step possibly partial.
inline std::vector<double> branch_times(double end, double h) {
  std::vector<double> t;
  const double dir = end >= 0.0 ? 1.0 : -1.0;
  const double len = std::abs(end);
  const auto whole = static_cast<long>(std::floor(len / h + 1e-9));
  for (long k = 1; k <= whole; ++k) t.push_back(dir * h * static_cast<double>(k));
  if (len - h * static_cast<double>(whole) > 1e-9 * h) t.push_back(end);
  return t;
}

inline std::vector<GeodesicState> rk4_branch(const Spray& spray, const GeodesicState& start,
                                             const std::vector<double>& times) {
  std::vector<GeodesicState> out;
  GeodesicState s = start;
  double t = 0.0;
  for (double target : times) {
    rk4_step(spray, s, target - t);
    t = target;
    if (!s.x.allFinite() || !s.v.allFinite()) {
      std::ostringstream os;
      os << "non-finite geodesic state at t = " << t;
      throw BlowUpError(os.str(), t);
    }
    out.push_back(s);
  }
  return out;
}

inline double state_gap(const GeodesicState& a, const GeodesicState& b) {
  return std::max((a.x - b.x).lpNorm<Eigen::Infinity>(), (a.v - b.v).lpNorm<Eigen::Infinity>());
}

}  // namespace detail

/// Integrates x' = v, v' = accel(x, v) over tspan (which must contain 0),
/// outward from t = 0 in both directions.
inline Trajectory integrate_geodesic(const Spray& spray, const Vector& x0, const Vector& v0,
                                     std::pair<double, double> tspan, double h, IntegrationOptions opt = {}) {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("step must be positive");
  if (!(tspan.first <= 0.0 && tspan.second >= 0.0)) throw std::invalid_argument("time span must contain 0");
  if (opt.output_stride == 0) throw std::invalid_argument("output stride must be positive");
  spray.validate_point(x0);
  spray.space().check(v0);

  Trajectory traj;
  traj.step = h;
  const auto [dlo, dhi] = spray.domain(x0, v0);
  double lo = tspan.first, hi = tspan.second;
  // stop one step short of a finite domain boundary
  if (std::isfinite(dlo) && lo <= dlo + h) {
    traj.boundary_lo = dlo;
    lo = std::min(0.0, h * std::ceil((dlo + h) / h));
  }
  if (std::isfinite(dhi) && hi >= dhi - h) {
    traj.boundary_hi = dhi;
    hi = std::max(0.0, h * std::floor((dhi - h) / h));
  }
  const auto fwd_t = detail::branch_times(hi, h);
  const auto bwd_t = detail::branch_times(lo, h);
  const GeodesicState start{x0, v0};

  bool closed = false;
  if (opt.method != Method::RK4 && spray.has_closed_form()) closed = spray.closed_form(0.0, x0, v0).has_value();
  if (opt.method == Method::ClosedForm && !closed)
    throw std::invalid_argument("closed form unavailable for spray '" + spray.label() + "' and this initial data");
  traj.method = closed ? Method::ClosedForm : Method::RK4;

  auto branch = [&](const std::vector<double>& ts) {
    if (!closed) return detail::rk4_branch(spray, start, ts);
    std::vector<GeodesicState> out;
    for (double t : ts) out.push_back(*spray.closed_form(t, x0, v0));
    return out;
  };
  auto fwd = branch(fwd_t);
  auto bwd = branch(bwd_t);

  if (opt.cross_validate && closed) {
    double gap = 0.0;
    const auto rf = detail::rk4_branch(spray, start, fwd_t);
    const auto rb = detail::rk4_branch(spray, start, bwd_t);
    for (std::size_t i = 0; i < rf.size(); ++i) gap = std::max(gap, detail::state_gap(rf[i], fwd[i]));
    for (std::size_t i = 0; i < rb.size(); ++i) gap = std::max(gap, detail::state_gap(rb[i], bwd[i]));
    traj.rk4_vs_closed = gap;
  }

  auto keep = [&](std::size_t i, std::size_t n) { return i % opt.output_stride == 0 || i + 1 == n; };
  for (std::size_t i = bwd.size(); i-- > 0;)
    if (keep(i + 1, bwd.size() + 1)) {
      traj.times.push_back(bwd_t[i]);
      traj.states.push_back(std::move(bwd[i]));
    }
  traj.times.push_back(0.0);
  traj.states.push_back(start);
  for (std::size_t i = 0; i < fwd.size(); ++i)
    if (keep(i + 1, fwd.size() + 1)) {
      traj.times.push_back(fwd_t[i]);
      traj.states.push_back(std::move(fwd[i]));
    }
  return traj;
}

/// Endpoint (x(t), x'(t)) of the geodesic through (x, v).
inline GeodesicState geodesic_flow(const Spray& spray, const Vector& x, const Vector& v, double t, double h = 1e-3) {
  if (t == 0.0) return {x, v};
  spray.validate_point(x);
  if (spray.has_closed_form())
    if (auto s = spray.closed_form(t, x, v)) return *s;
  const auto [lo, hi] = spray.domain(x, v);
  if (!(t > lo && t < hi)) throw DomainError("flow time outside the geodesic's maximal domain");
  return detail::rk4_branch(spray, {x, v}, detail::branch_times(t, h)).back();
}

// ---------------------------------------------------------------------------
// Projective reparametrization

struct ReparametrizationReport {
  double max_metric_discrepancy = 0.0;
  double max_seminorm_discrepancy = 0.0;
  std::size_t samples = 0;
  double final_parameter_hi = 0.0;  // tau at the upper end of the span
  double final_parameter_lo = 0.0;
};

/// For B = A + P v: along the A-geodesic g, solve tau'' = -P(g, g') tau',
/// tau(0) = 0, tau'(0) = 1, and compare g_B(tau(t)) with g(t).
inline ReparametrizationReport reparametrize_check(const Spray& a, const Spray& b, const ProjectiveFactor& factor,
                                                   const Vector& x0, const Vector& v0, std::pair<double, double> tspan,
                                                   double h = 1e-3) {
  a.validate_point(x0);
  a.space().check(v0);
  const ModelSpace& space = a.space();
  const auto [blo, bhi] = b.domain(x0, v0);

  struct Aug {
    GeodesicState g;
    double tau, dtau;
  };
  auto rhs = [&](const Aug& s) {
    Aug d{{s.g.v, a.accel(s.g.x, s.g.v)}, s.dtau, -factor.value(s.g.x, s.g.v) * s.dtau};
    return d;
  };
  auto axpy = [](const Aug& s, double c, const Aug& d) {
    return Aug{{s.g.x + c * d.g.x, s.g.v + c * d.g.v}, s.tau + c * d.tau, s.dtau + c * d.dtau};
  };
  auto step = [&](Aug& s, double dt) {
    const Aug k1 = rhs(s);
    const Aug k2 = rhs(axpy(s, 0.5 * dt, k1));
    const Aug k3 = rhs(axpy(s, 0.5 * dt, k2));
    const Aug k4 = rhs(axpy(s, dt, k3));
    s.g.x += (dt / 6.0) * (k1.g.x + 2.0 * k2.g.x + 2.0 * k3.g.x + k4.g.x);
    s.g.v += (dt / 6.0) * (k1.g.v + 2.0 * k2.g.v + 2.0 * k3.g.v + k4.g.v);
    s.tau += (dt / 6.0) * (k1.tau + 2.0 * k2.tau + 2.0 * k3.tau + k4.tau);
    s.dtau += (dt / 6.0) * (k1.dtau + 2.0 * k2.dtau + 2.0 * k3.dtau + k4.dtau);
  };
  auto b_at = [&](double tau) -> Vector {
    if (!(tau > blo && tau < bhi)) throw DomainError("reparametrized time leaves the second spray's geodesic domain");
    if (auto s = b.closed_form(tau, x0, v0)) return s->x;
    return geodesic_flow(b, x0, v0, tau, h).x;
  };

  ReparametrizationReport r;
  auto record = [&](const Aug& s) {
    const Vector xb = b_at(s.tau);
    r.max_metric_discrepancy = std::max(r.max_metric_discrepancy, space.metric(s.g.x, xb));
    r.max_seminorm_discrepancy = std::max(r.max_seminorm_discrepancy, space.max_seminorm(s.g.x - xb));
    ++r.samples;
  };
  const Aug start{{x0, v0}, 0.0, 1.0};
  record(start);
  for (const bool upper : {true, false}) {
    Aug s = start;
    double t = 0.0;
    for (double target : detail::branch_times(upper ? tspan.second : tspan.first, h)) {
      step(s, target - t);
      t = target;
      record(s);
    }
    (upper ? r.final_parameter_hi : r.final_parameter_lo) = s.tau;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Automorphisms

struct Automorphism {
  using Map = std::function<Vector(const Vector&)>;
  using Diff = std::function<Vector(const Vector& x, const Vector& u)>;
  using Diff2 = std::function<Vector(const Vector& x, const Vector& u, const Vector& w)>;

  std::string label;
  Map forward, inverse;
  Diff dforward, dinverse;
  Diff2 d2forward, d2inverse;
  /// Grid offset when the map is a cyclic translation.
  std::optional<long> translation_shift;

  bool has_derivatives() const { return forward && inverse && dforward && dinverse && d2forward; }

  Automorphism inverse_of() const {
    Automorphism r;
    r.label = "(" + label + ")^-1";
    r.forward = inverse;
    r.inverse = forward;
    r.dforward = dinverse;
    r.dinverse = dforward;
    r.d2forward = d2inverse;
    r.d2inverse = d2forward;
    if (translation_shift) r.translation_shift = -*translation_shift;
    return r;
  }
};

inline Automorphism identity_map() {
  Automorphism a;
  a.label = "id";
  a.forward = a.inverse = [](const Vector& x) { return x; };
  a.dforward = a.dinverse = [](const Vector&, const Vector& u) { return u; };
  a.d2forward = a.d2inverse = [](const Vector& x, const Vector&, const Vector&) -> Vector { return Vector::Zero(x.size()); };
  a.translation_shift = 0;
  return a;
}

/// phi_a(f)(x) = f(x - a), cyclic on the grid; a must be a multiple of the step.
inline Automorphism grid_translation(const Grid& g, double a) {
  const long k = [&] {
    const double q = a / g.step;
    const double r = std::round(q);
    if (std::abs(q - r) > 1e-9 * std::max(1.0, std::abs(q))) throw std::invalid_argument("shift is not a multiple of the grid step");
    return static_cast<long>(r);
  }();
  auto shift = [g](const Vector& x, long by) {
    const auto n = static_cast<long>(g.points);
    const auto d = static_cast<Eigen::Index>(g.codomain_dim);
    Vector out(x.size());
    for (long i = 0; i < n; ++i) out.segment(i * d, d) = x.segment((((i - by) % n) + n) % n * d, d);
    return out;
  };
  Automorphism m;
  std::ostringstream os;
  os << "translate:" << a;
  m.label = os.str();
  m.forward = [shift, k](const Vector& x) { return shift(x, k); };
  m.inverse = [shift, k](const Vector& x) { return shift(x, -k); };
  m.dforward = [shift, k](const Vector&, const Vector& u) { return shift(u, k); };
  m.dinverse = [shift, k](const Vector&, const Vector& u) { return shift(u, -k); };
  m.d2forward = m.d2inverse = [](const Vector& x, const Vector&, const Vector&) -> Vector { return Vector::Zero(x.size()); };
  m.translation_shift = k;
  return m;
}

inline Automorphism scaling_map(double c) {
  if (c == 0.0 || !std::isfinite(c)) throw std::invalid_argument("scaling factor must be finite and nonzero");
  Automorphism m;
  std::ostringstream os;
  os << "scale:" << c;
  m.label = os.str();
  m.forward = [c](const Vector& x) -> Vector { return c * x; };
  m.inverse = [c](const Vector& x) -> Vector { return x / c; };
  m.dforward = [c](const Vector&, const Vector& u) -> Vector { return c * u; };
  m.dinverse = [c](const Vector&, const Vector& u) -> Vector { return u / c; };
  m.d2forward = m.d2inverse = [](const Vector& x, const Vector&, const Vector&) -> Vector { return Vector::Zero(x.size()); };
  return m;
}

/// Componentwise sinh, a nonlinear chart change.
inline Automorphism sinh_map() {
  Automorphism m;
  m.label = "sinh";
  m.forward = [](const Vector& x) -> Vector { return x.array().sinh().matrix(); };
  m.inverse = [](const Vector& y) -> Vector { return y.array().unaryExpr([](double s) { return std::asinh(s); }).matrix(); };
  m.dforward = [](const Vector& x, const Vector& u) -> Vector { return (x.array().cosh() * u.array()).matrix(); };
  m.dinverse = [](const Vector& y, const Vector& u) -> Vector {
    return (u.array() / (1.0 + y.array().square()).sqrt()).matrix();
  };
  m.d2forward = [](const Vector& x, const Vector& u, const Vector& w) -> Vector {
    return (x.array().sinh() * u.array() * w.array()).matrix();
  };
  m.d2inverse = [](const Vector& y, const Vector& u, const Vector& w) -> Vector {
    return (-y.array() * u.array() * w.array() / (1.0 + y.array().square()).pow(1.5)).matrix();
  };
  return m;
}

/// phi_* S: Z(x, y) = d2phi(p)(w, w) + dphi(p)(accel(p, w)), p = phi^-1(x), w = dphi^-1(x)(y).
inline Spray pushforward_spray(const Spray& spray, const Automorphism& phi) {
  if (!phi.has_derivatives()) throw std::invalid_argument("automorphism '" + phi.label + "' lacks derivative data");
  Spray::Parts p;
  p.label = phi.label + "_*(" + spray.label() + ")";
  p.space = spray.space_ptr();
  p.accel = [spray, phi](const Vector& x, const Vector& y) -> Vector {
    const Vector q = phi.inverse(x);
    const Vector w = phi.dinverse(x, y);
    return phi.d2forward(q, w, w) + phi.dforward(q, spray.accel(q, w));
  };
  if (spray.parts().validate) p.validate = [spray, phi](const Vector& x) { spray.validate_point(phi.inverse(x)); };
  if (spray.has_closed_form()) {
    p.closed_form = [spray, phi](double t, const Vector& x0, const Vector& v0) -> std::optional<GeodesicState> {
      const Vector q0 = phi.inverse(x0);
      const auto s = spray.closed_form(t, q0, phi.dinverse(x0, v0));
      if (!s) return std::nullopt;
      return GeodesicState{phi.forward(s->x), phi.dforward(s->x, s->v)};
    };
  }
  if (spray.parts().domain)
    p.domain = [spray, phi](const Vector& x0, const Vector& v0) { return spray.domain(phi.inverse(x0), phi.dinverse(x0, v0)); };
  if (spray.has_two_point()) {
    p.two_point = [spray, phi](const Vector& a, const Vector& b) -> Vector {
      const Vector pa = phi.inverse(a);
      return phi.dforward(pa, spray.two_point(pa, phi.inverse(b)));
    };
  }
  return Spray(std::move(p));
}

struct AutomorphismReport {
  std::size_t samples = 0;
  double max_discrepancy = 0.0;           // sup-norm of pushed accel minus accel
  double max_relative_discrepancy = 0.0;
};

/// Does phi_* S = S on samples?
inline AutomorphismReport check_automorphism(const Spray& spray, const Automorphism& phi, const PairSampler& sampler,
                                             std::size_t count, Rng& rng) {
  const Spray pushed = pushforward_spray(spray, phi);
  AutomorphismReport r;
  for (std::size_t k = 0; k < count; ++k) {
    const auto [x, v] = sampler(rng);
    const Vector a = spray.accel(x, v);
    const double diff = (pushed.accel(x, v) - a).lpNorm<Eigen::Infinity>();
    r.max_discrepancy = std::max(r.max_discrepancy, diff);
    if (diff > 0.0) r.max_relative_discrepancy = std::max(r.max_relative_discrepancy, diff / std::max(a.lpNorm<Eigen::Infinity>(), 1e-300));
    ++r.samples;
  }
  return r;
}

}  // namespace spraylab
