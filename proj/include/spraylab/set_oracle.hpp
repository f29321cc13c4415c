#pragma once

// Subsets of a model space represented by oracles: membership, per-seminorm
// pseudo-distance d_n(x, S), optional nearest point and tangent predicate.
// Also the library of example sets and bundle sets used by the checks.

#include "spraylab/model_space.hpp"

#include <Eigen/QR>

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace spraylab {

inline constexpr double kDefaultTolerance = 1e-9;

enum class Exactness { Exact, UpperBound };

inline const char* to_string(Exactness e) { return e == Exactness::Exact ? "exact" : "upper-bound"; }

class SetOracle {
 public:
  using DistancesFn = std::function<std::vector<double>(const Vector&)>;
  using ProjectFn = std::function<Vector(const Vector&)>;
  using TangentFn = std::function<bool(const Vector& x, const Vector& v, double tol)>;
  using MembershipFn = std::function<bool(const Vector&, double tol)>;

  struct Parts {
    std::string id;
    SpacePtr space;
    Exactness exactness = Exactness::Exact;
    DistancesFn distances;
    ProjectFn project;         // optional
    TangentFn tangent;         // optional, only for submanifolds
    MembershipFn membership;   // optional; defaults to max_n d_n(x) <= tol
    double tolerance = kDefaultTolerance;
  };

  explicit SetOracle(Parts parts) : p_(std::move(parts)) {
    if (!p_.space) throw std::invalid_argument("set oracle needs a space");
    if (!p_.distances) throw std::invalid_argument("set oracle needs a distance function");
  }

  const std::string& id() const { return p_.id; }
  const ModelSpace& space() const { return *p_.space; }
  const SpacePtr& space_ptr() const { return p_.space; }
  Exactness exactness() const { return p_.exactness; }
  double tolerance() const { return p_.tolerance; }

  SetOracle with_tolerance(double tol) const {
    auto parts = p_;
    parts.tolerance = tol;
    return SetOracle(std::move(parts));
  }

  std::vector<double> distances(const Vector& x) const {
    p_.space->check(x);
    return p_.distances(x);
  }

  double distance(std::size_t n, const Vector& x) const {
    if (n >= p_.space->seminorm_count()) throw std::out_of_range("seminorm index out of range");
    return distances(x)[n];
  }

  double max_distance(const Vector& x) const {
    const auto d = distances(x);
    return *std::max_element(d.begin(), d.end());
  }

  bool contains(const Vector& x, double tol) const {
    p_.space->check(x);
    if (p_.membership) return p_.membership(x, tol);
    return max_distance(x) <= tol;
  }
  bool contains(const Vector& x) const { return contains(x, p_.tolerance); }

  bool has_projection() const { return static_cast<bool>(p_.project); }
  std::optional<Vector> project(const Vector& x) const {
    if (!p_.project) return std::nullopt;
    p_.space->check(x);
    return p_.project(x);
  }

  bool has_tangent_predicate() const { return static_cast<bool>(p_.tangent); }
  bool is_tangent(const Vector& x, const Vector& v, double tol) const {
    if (!p_.tangent) throw std::logic_error("set '" + p_.id + "' has no tangent predicate");
    p_.space->check(x);
    p_.space->check(v);
    return p_.tangent(x, v, tol);
  }
  bool is_tangent(const Vector& x, const Vector& v) const { return is_tangent(x, v, p_.tolerance); }

  const Parts& parts() const { return p_; }

 private:
  Parts p_;
};

// ---------------------------------------------------------------------------
// Grid helpers

enum class Side { Negative, Zero, Positive };

inline Side side_of(const Grid& g, std::size_t i) {
  const double x = g.coordinate(i);
  if (x < -0.5 * g.step) return Side::Negative;
  if (x > 0.5 * g.step) return Side::Positive;
  return Side::Zero;
}

/// (phi_a f)(x) = f(x - a) for a = shift * h, cyclic on the grid.
inline Vector cyclic_shift(const Grid& g, const Vector& x, long shift) {
  const auto n = static_cast<long>(g.points);
  const auto d = static_cast<Eigen::Index>(g.codomain_dim);
  Vector out(x.size());
  for (long i = 0; i < n; ++i) {
    const long src = ((i - shift) % n + n) % n;
    out.segment(i * d, d) = x.segment(src * d, d);
  }
  return out;
}

/// Grid offset for a real shift; throws unless a is an integer multiple of h.
inline long grid_shift(const Grid& g, double a) {
  const double k = a / g.step;
  const double r = std::round(k);
  if (std::abs(k - r) > 1e-9 * std::max(1.0, std::abs(k)))
    throw std::invalid_argument("shift is not a multiple of the grid step");
  return static_cast<long>(r);
}

// ---------------------------------------------------------------------------
// Generic constructions

inline SetOracle whole_space(SpacePtr space) {
  const std::size_t count = space->seminorm_count();
  SetOracle::Parts p;
  p.id = "whole";
  p.space = space;
  p.distances = [count](const Vector&) { return std::vector<double>(count, 0.0); };
  p.project = [](const Vector& x) { return x; };
  p.tangent = [](const Vector&, const Vector&, double) { return true; };
  return SetOracle(std::move(p));
}

inline SetOracle zero_set(SpacePtr space) {
  SetOracle::Parts p;
  p.id = "zero";
  p.space = space;
  p.distances = [space](const Vector& x) { return space->seminorms(x); };
  p.project = [space](const Vector&) { return space->zero(); };
  p.tangent = [space](const Vector&, const Vector& v, double tol) { return space->max_seminorm(v) <= tol; };
  return SetOracle(std::move(p));
}

/// Union of sets on a common space: d_n = min over pieces.
inline SetOracle union_of(std::string id, std::vector<SetOracle> pieces) {
  if (pieces.empty()) throw std::invalid_argument("union needs at least one piece");
  auto space = pieces.front().space_ptr();
  Exactness ex = Exactness::Exact;
  for (const auto& piece : pieces) {
    if (piece.space().dimension() != space->dimension()) throw std::invalid_argument("union pieces live on different spaces");
    if (piece.exactness() == Exactness::UpperBound) ex = Exactness::UpperBound;
  }
  auto shared = std::make_shared<const std::vector<SetOracle>>(std::move(pieces));
  SetOracle::Parts p;
  p.id = std::move(id);
  p.space = space;
  p.exactness = ex;
  p.distances = [shared](const Vector& x) {
    std::vector<double> best;
    for (const auto& piece : *shared) {
      const auto d = piece.distances(x);
      if (best.empty()) {
        best = d;
      } else {
        for (std::size_t n = 0; n < d.size(); ++n) best[n] = std::min(best[n], d[n]);
      }
    }
    return best;
  };
  p.membership = [shared](const Vector& x, double tol) {
    for (const auto& piece : *shared)
      if (piece.contains(x, tol)) return true;
    return false;
  };
  bool all_project = true;
  for (const auto& piece : *shared) all_project = all_project && piece.has_projection();
  if (all_project) {
    p.project = [shared](const Vector& x) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < shared->size(); ++i) {
        const double d = (*shared)[i].max_distance(x);
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      return *(*shared)[best].project(x);
    };
  }
  return SetOracle(std::move(p));
}

/// A x B on the product space of the two factor spaces:
/// d_n((x, v), A x B) = max(d_n(x, A), d_n(v, B)).
inline SetOracle product_of(const SetOracle& a, const SetOracle& b, std::string id = {}) {
  auto space = make_space(ModelSpace::product({a.space(), b.space()}));
  const std::size_t count = space->seminorm_count();
  SetOracle::Parts p;
  p.id = id.empty() ? a.id() + " x " + b.id() : std::move(id);
  p.space = space;
  p.exactness = (a.exactness() == Exactness::Exact && b.exactness() == Exactness::Exact) ? Exactness::Exact
                                                                                          : Exactness::UpperBound;
  p.distances = [a, b, space, count](const Vector& x) {
    const auto da = a.distances(space->factor_slice(x, 0));
    const auto db = b.distances(space->factor_slice(x, 1));
    std::vector<double> out(count, 0.0);
    for (std::size_t n = 0; n < da.size(); ++n) out[n] = std::max(out[n], da[n]);
    for (std::size_t n = 0; n < db.size(); ++n) out[n] = std::max(out[n], db[n]);
    return out;
  };
  p.membership = [a, b, space](const Vector& x, double tol) {
    return a.contains(space->factor_slice(x, 0), tol) && b.contains(space->factor_slice(x, 1), tol);
  };
  if (a.has_projection() && b.has_projection()) {
    p.project = [a, b, space](const Vector& x) {
      return ModelSpace::join(*a.project(space->factor_slice(x, 0)), *b.project(space->factor_slice(x, 1)));
    };
  }
  return SetOracle(std::move(p));
}

/// Bundle set {(x, v) : x in S}, the fibre left unconstrained.
inline SetOracle base_in_set_bundle(const SetOracle& s) {
  return product_of(s, whole_space(s.space_ptr()), "base-in(" + s.id() + ")");
}

/// Bundle set {(x, 0) : x in S}.
inline SetOracle zero_section_bundle(const SetOracle& s) {
  return product_of(s, zero_set(s.space_ptr()), "zero-section(" + s.id() + ")");
}

// ---------------------------------------------------------------------------
// Example sets

/// Functions vanishing at grid points strictly on one side of 0:
/// S+ (side = Positive) vanishes at x < 0, S- at x > 0. The n-th distance is
/// the sup of |D^m f| over the forbidden grid points inside the n-th window.
inline SetOracle half_line_support(SpacePtr space, Side side) {
  const Grid& g = space->grid();
  if (side == Side::Zero) throw std::invalid_argument("half-line support needs a side");
  const Side forbidden = side == Side::Positive ? Side::Negative : Side::Positive;
  std::vector<char> mask(g.points, 0);
  for (std::size_t i = 0; i < g.points; ++i) mask[i] = side_of(g, i) == forbidden ? 1 : 0;
  const std::size_t d = g.codomain_dim;
  // the projection also clears allowed points the difference stencils reach from the forbidden side
  std::vector<char> cleared = mask;
  for (int k = 0; k < space->max_order(); ++k) {
    std::vector<char> next = cleared;
    const auto n = static_cast<long>(g.points);
    for (long i = 0; i < n; ++i) {
      if (!cleared[static_cast<std::size_t>(i)]) continue;
      for (long j : {i - 1, i + 1}) {
        if (g.periodic) j = (j % n + n) % n;
        if (j >= 0 && j < n) next[static_cast<std::size_t>(j)] = 1;
      }
    }
    cleared = std::move(next);
  }
  auto forbidden_part = [cleared, d](const Vector& x) {
    Vector r = Vector::Zero(x.size());
    for (std::size_t i = 0; i < cleared.size(); ++i)
      if (cleared[i]) r.segment(static_cast<Eigen::Index>(i * d), static_cast<Eigen::Index>(d)) =
                       x.segment(static_cast<Eigen::Index>(i * d), static_cast<Eigen::Index>(d));
    return r;
  };
  auto distances = [space, mask, d](const Vector& x) {
    const auto derivs = space->derivatives(x);
    const auto& sems = space->grid_seminorms();
    std::vector<double> out(sems.size(), 0.0);
    for (std::size_t n = 0; n < sems.size(); ++n) {
      const Vector& values = derivs[static_cast<std::size_t>(sems[n].order)];
      const auto [lo, hi] = space->seminorm_window(n);
      for (std::size_t i = lo; i <= hi; ++i)
        if (mask[i])
          out[n] = std::max(out[n], values.segment(static_cast<Eigen::Index>(i * d), static_cast<Eigen::Index>(d)).norm());
    }
    return out;
  };
  SetOracle::Parts p;
  p.id = side == Side::Positive ? "support+" : "support-";
  p.space = space;
  p.distances = distances;
  p.project = [forbidden_part](const Vector& x) -> Vector { return x - forbidden_part(x); };
  p.tangent = [distances](const Vector&, const Vector& v, double tol) {
    const auto dv = distances(v);
    return *std::max_element(dv.begin(), dv.end()) <= tol;
  };
  return SetOracle(std::move(p));
}

/// S = S+ u S-: functions supported in [0, inf) or in (-inf, 0].
inline SetOracle half_support_union(SpacePtr space) {
  const Grid& g = space->grid();
  bool neg = false, pos = false;
  for (std::size_t i = 0; i < g.points; ++i) {
    neg = neg || side_of(g, i) == Side::Negative;
    pos = pos || side_of(g, i) == Side::Positive;
  }
  if (!neg || !pos) throw std::invalid_argument("grid must contain points of both signs");
  return union_of("half-support", {half_line_support(space, Side::Positive), half_line_support(space, Side::Negative)});
}

/// Bundle set for the flat spray over S+ u S-: base point and velocity
/// supported on the same side.
inline SetOracle half_support_bundle(SpacePtr space) {
  auto plus = half_line_support(space, Side::Positive);
  auto minus = half_line_support(space, Side::Negative);
  return union_of("half-support-bundle", {product_of(plus, plus), product_of(minus, minus)});
}

/// {x : x_i >= 0 for all i} in a sequence space.
inline SetOracle nonneg_orthant(SpacePtr space) {
  if (space->kind() != ModelSpace::Kind::Sequences) throw std::invalid_argument("orthant needs a sequence space");
  SetOracle::Parts p;
  p.id = "orthant";
  p.space = space;
  p.distances = [space](const Vector& x) {
    const auto& coords = space->sequence_coordinates();
    std::vector<double> out(coords.size());
    for (std::size_t n = 0; n < coords.size(); ++n)
      out[n] = std::max(0.0, -x[static_cast<Eigen::Index>(coords[n])]);
    return out;
  };
  p.project = [](const Vector& x) -> Vector { return x.cwiseMax(0.0); };
  return SetOracle(std::move(p));
}

/// Constant scalar functions.
inline SetOracle constant_functions(SpacePtr space) {
  const Grid& g = space->grid();
  if (g.codomain_dim != 1) throw std::invalid_argument("constant functions need a scalar grid");
  const auto& sems = space->grid_seminorms();
  std::vector<std::pair<std::size_t, std::size_t>> windows;
  std::pair<std::size_t, std::size_t> widest{0, g.points - 1};
  double widest_j = -1.0;
  for (std::size_t n = 0; n < sems.size(); ++n) {
    windows.push_back(space->seminorm_window(n));
    if (sems[n].order == 0 && sems[n].window > widest_j) {
      widest_j = sems[n].window;
      widest = windows.back();
    }
  }
  auto range = [](const Vector& x, std::pair<std::size_t, std::size_t> w) {
    const auto seg = x.segment(static_cast<Eigen::Index>(w.first), static_cast<Eigen::Index>(w.second - w.first + 1));
    return std::pair{seg.minCoeff(), seg.maxCoeff()};
  };
  SetOracle::Parts p;
  p.id = "constants";
  p.space = space;
  p.distances = [space, sems, windows, range](const Vector& x) {
    auto out = space->seminorms(x);
    for (std::size_t n = 0; n < sems.size(); ++n) {
      if (sems[n].order != 0) continue;
      const auto [lo, hi] = range(x, windows[n]);
      out[n] = 0.5 * (hi - lo);
    }
    return out;
  };
  p.project = [widest, range](const Vector& x) -> Vector {
    const auto [lo, hi] = range(x, widest);
    return Vector::Constant(x.size(), 0.5 * (lo + hi));
  };
  p.tangent = [](const Vector&, const Vector& v, double tol) { return v.maxCoeff() - v.minCoeff() <= tol; };
  return SetOracle(std::move(p));
}

/// Graph {(h, h^2)} inside a product of two scalar grids. Distance uses the
/// section surrogate h = a, i.e. the seminorm of (0, b - a^2).
inline SetOracle parabola_graph(SpacePtr space) {
  if (space->kind() != ModelSpace::Kind::Product || space->factors().size() != 2)
    throw std::invalid_argument("parabola graph needs a product of two grid spaces");
  const ModelSpace& second = space->factor(1);
  if (space->factor(0).grid().codomain_dim != 1 || second.grid().codomain_dim != 1 ||
      space->factor(0).dimension() != second.dimension())
    throw std::invalid_argument("parabola graph needs two matching scalar grids");
  const std::size_t count = space->seminorm_count();
  auto residual = [space](const Vector& x) -> Vector {
    const Vector a = space->factor_slice(x, 0);
    const Vector b = space->factor_slice(x, 1);
    return b - a.cwiseProduct(a);
  };
  SetOracle::Parts p;
  p.id = "parabola";
  p.space = space;
  p.exactness = Exactness::UpperBound;
  p.distances = [space, residual, count](const Vector& x) {
    auto d = space->factor(1).seminorms(residual(x));
    d.resize(count, 0.0);
    return d;
  };
  p.project = [space](const Vector& x) -> Vector {
    const Vector a = space->factor_slice(x, 0);
    return ModelSpace::join(a, a.cwiseProduct(a));
  };
  p.tangent = [space](const Vector& x, const Vector& v, double tol) {
    const Vector a = space->factor_slice(x, 0);
    const Vector u = space->factor_slice(v, 0);
    const Vector w = space->factor_slice(v, 1);
    return space->factor(1).max_seminorm(w - 2.0 * a.cwiseProduct(u)) <= tol;
  };
  return SetOracle(std::move(p));
}

/// Trigonometric polynomials of degree <= N on a periodic scalar grid; the
/// projection is the least-squares fit onto the 2N + 1 basis functions.
inline SetOracle fourier_subspace(SpacePtr space, int degree) {
  const Grid& g = space->grid();
  if (!g.periodic || g.codomain_dim != 1) throw std::invalid_argument("fourier subspace needs a periodic scalar grid");
  if (degree < 0) throw std::invalid_argument("fourier degree must be non-negative");
  const auto n = static_cast<Eigen::Index>(g.points);
  const Eigen::Index k = 2 * degree + 1;
  if (n < k) throw std::invalid_argument("grid too coarse for the fourier degree");
  // angle theta = pi * x / L maps the grid onto one period
  Eigen::MatrixXd basis(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double theta = std::numbers::pi * g.coordinate(static_cast<std::size_t>(i)) / g.half_width;
    basis(i, 0) = 1.0;
    for (int j = 1; j <= degree; ++j) {
      basis(i, 2 * j - 1) = std::cos(j * theta);
      basis(i, 2 * j) = std::sin(j * theta);
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  auto q = std::make_shared<const Eigen::MatrixXd>(qr.householderQ() * Eigen::MatrixXd::Identity(n, k));
  auto project = [q](const Vector& x) -> Vector { return (*q) * (q->transpose() * x); };
  SetOracle::Parts p;
  p.id = "fourier:" + std::to_string(degree);
  p.space = space;
  p.distances = [space, project](const Vector& x) { return space->seminorms(x - project(x)); };
  p.project = project;
  p.tangent = [space, project](const Vector&, const Vector& v, double tol) {
    return space->max_seminorm(v - project(v)) <= tol;
  };
  return SetOracle(std::move(p));
}

/// H_k = span(e_1..e_k) in a truncated sequence space.
inline SetOracle finite_span(SpacePtr space, std::size_t k) {
  if (space->kind() != ModelSpace::Kind::Sequences) throw std::invalid_argument("finite span needs a sequence space");
  if (k > space->dimension()) throw std::invalid_argument("span index exceeds truncation");
  auto tail = [k](const Vector& x) -> Vector {
    Vector r = x;
    r.head(static_cast<Eigen::Index>(k)).setZero();
    return r;
  };
  SetOracle::Parts p;
  p.id = "H" + std::to_string(k);
  p.space = space;
  p.distances = [space, tail](const Vector& x) { return space->seminorms(tail(x)); };
  p.project = [tail](const Vector& x) -> Vector { return x - tail(x); };
  p.tangent = [space, tail](const Vector&, const Vector& v, double tol) { return space->max_seminorm(tail(v)) <= tol; };
  return SetOracle(std::move(p));
}

struct Stratum {
  std::size_t index;   // k, 1-based
  SetOracle closure;   // H_k
  SetOracle stratum;   // S_k = H_k \ H_{k-1}
};

struct Stratification {
  std::vector<Stratum> strata;
};

/// Finite sequences stratified by the last nonzero coordinate.
inline Stratification finite_sequence_strata(SpacePtr space) {
  Stratification out;
  for (std::size_t k = 1; k <= space->dimension(); ++k) {
    SetOracle closure = finite_span(space, k);
    auto parts = closure.parts();
    parts.id = "S" + std::to_string(k);
    const auto last = static_cast<Eigen::Index>(k - 1);
    parts.membership = [closure, last](const Vector& x, double tol) {
      return closure.contains(x, tol) && std::abs(x[last]) > tol;
    };
    parts.tangent = nullptr;
    out.strata.push_back({k, closure, SetOracle(std::move(parts))});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Loops into R^3

namespace detail {

inline Eigen::Vector3d loop_point(const Vector& x, std::size_t i) { return x.segment<3>(static_cast<Eigen::Index>(3 * i)); }

inline Eigen::Vector3d loop_mean(const Vector& x, std::size_t points) {
  Eigen::Vector3d m = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < points; ++i) m += loop_point(x, i);
  return m / static_cast<double>(points);
}

inline Vector constant_loop(const Eigen::Vector3d& p, std::size_t points) {
  Vector out(static_cast<Eigen::Index>(3 * points));
  for (std::size_t i = 0; i < points; ++i) out.segment<3>(static_cast<Eigen::Index>(3 * i)) = p;
  return out;
}

/// Nearest point of the great circle with unit normal n to the plane-projected mean.
inline Eigen::Vector3d circle_anchor(const Vector& x, std::size_t points, const Eigen::Vector3d& normal) {
  Eigen::Vector3d m = loop_mean(x, points);
  m -= m.dot(normal) * normal;
  if (m.norm() < 1e-12) {
    // degenerate mean: fall back to a fixed point of the circle
    Eigen::Vector3d e = normal.unitOrthogonal();
    return e;
  }
  return m.normalized();
}

}  // namespace detail

/// Constant loops valued in the great circle C = S^2 n {<y, normal> = 0}.
inline SetOracle great_circle_constant_loops(SpacePtr space, Eigen::Vector3d normal = Eigen::Vector3d::UnitZ()) {
  const Grid& g = space->grid();
  if (g.codomain_dim != 3) throw std::invalid_argument("circle loops need an R^3-valued grid");
  normal.normalize();
  const std::size_t pts = g.points;
  auto project = [pts, normal](const Vector& x) {
    return detail::constant_loop(detail::circle_anchor(x, pts, normal), pts);
  };
  SetOracle::Parts p;
  p.id = "circle-loops";
  p.space = space;
  p.exactness = Exactness::UpperBound;
  p.distances = [space, project](const Vector& x) { return space->seminorms(x - project(x)); };
  p.project = project;
  p.membership = [space, project, pts, normal](const Vector& x, double tol) {
    for (std::size_t i = 0; i < pts; ++i) {
      const Eigen::Vector3d y = detail::loop_point(x, i);
      if (std::abs(y.norm() - 1.0) > tol || std::abs(y.dot(normal)) > tol) return false;
    }
    return space->max_seminorm(x - project(x)) <= tol;
  };
  p.tangent = [pts, normal](const Vector& x, const Vector& v, double tol) {
    const Eigen::Vector3d p0 = detail::loop_point(x, 0);
    const Eigen::Vector3d v0 = detail::loop_point(v, 0);
    for (std::size_t i = 1; i < pts; ++i)
      if ((detail::loop_point(v, i) - v0).norm() > tol) return false;
    return std::abs(v0.dot(p0)) <= tol && std::abs(v0.dot(normal)) <= tol;
  };
  return SetOracle(std::move(p));
}

/// Tangent bundle of the constant-loop set: base point a constant loop p on C,
/// velocity a constant vector tangent to C at p.
inline SetOracle circle_loops_tangent_bundle(SpacePtr space, Eigen::Vector3d normal = Eigen::Vector3d::UnitZ()) {
  normal.normalize();
  const SetOracle base = great_circle_constant_loops(space, normal);
  auto bundle = make_space(ModelSpace::product({*space, *space}));
  const std::size_t pts = space->grid().points;
  auto project = [bundle, pts, normal](const Vector& xv) {
    const Vector x = bundle->factor_slice(xv, 0);
    const Vector v = bundle->factor_slice(xv, 1);
    const Eigen::Vector3d p = detail::circle_anchor(x, pts, normal);
    const Eigen::Vector3d tangent = normal.cross(p);
    const Eigen::Vector3d u = detail::loop_mean(v, pts).dot(tangent) * tangent;
    return ModelSpace::join(detail::constant_loop(p, pts), detail::constant_loop(u, pts));
  };
  SetOracle::Parts p;
  p.id = "T(circle-loops)";
  p.space = bundle;
  p.exactness = Exactness::UpperBound;
  p.distances = [bundle, project](const Vector& xv) { return bundle->seminorms(xv - project(xv)); };
  p.project = project;
  p.membership = [bundle, base, project](const Vector& xv, double tol) {
    return base.contains(bundle->factor_slice(xv, 0), tol) && bundle->max_seminorm(xv - project(xv)) <= tol;
  };
  return SetOracle(std::move(p));
}

/// phi_a(S) for the cyclic grid translation phi_a(f)(x) = f(x - a):
/// queries are pulled back by phi_a^{-1} before delegating.
inline SetOracle translate_set(const SetOracle& s, double a) {
  const Grid& g = s.space().grid();
  const long k = grid_shift(g, a);
  std::ostringstream id;
  id << "translate:" << s.id() << ":" << a;
  auto back = [g, k](const Vector& x) { return cyclic_shift(g, x, -k); };
  auto fwd = [g, k](const Vector& x) { return cyclic_shift(g, x, k); };
  SetOracle::Parts p;
  p.id = id.str();
  p.space = s.space_ptr();
  p.exactness = s.exactness();
  p.tolerance = s.tolerance();
  p.distances = [s, back](const Vector& x) { return s.distances(back(x)); };
  p.membership = [s, back](const Vector& x, double tol) { return s.contains(back(x), tol); };
  if (s.has_projection()) p.project = [s, back, fwd](const Vector& x) { return fwd(*s.project(back(x))); };
  if (s.has_tangent_predicate())
    p.tangent = [s, back](const Vector& x, const Vector& v, double tol) { return s.is_tangent(back(x), back(v), tol); };
  return SetOracle(std::move(p));
}

}  // namespace spraylab
