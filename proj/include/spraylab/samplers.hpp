#pragma once

// Random initial data for the example sets. Coefficients are uniform in
// [-1, 1] over each set's natural parameters.

#include "spraylab/cone.hpp"
#include "spraylab/random.hpp"
#include "spraylab/set_oracle.hpp"
#include "spraylab/spray.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

namespace spraylab {

enum class SamplerMode { Analytic, Numeric };

struct BundleSampler {
  std::string description;
  SamplerMode mode = SamplerMode::Analytic;
  PairSampler draw;

  std::pair<Vector, Vector> operator()(Rng& rng) const { return draw(rng); }
};

struct SamplerExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Point generators

/// Sum of three bumps of width 0.5 centred at 0.25, 0.75, 1.25 (mirrored for
/// the negative side), so the support stays on one side of 0.
inline Vector one_sided_bumps(const ModelSpace& space, Side side, Rng& rng) {
  const double sign = side == Side::Negative ? -1.0 : 1.0;
  double c[3];
  for (double& k : c) k = uniform(rng, -1.0, 1.0);
  return space.sample([&](double x) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += c[i] * smooth_bump(x - sign * (0.25 + 0.5 * i), 0.5);
    return s;
  });
}

/// Bump of the given width centred at 0 (support on both sides).
inline Vector centred_bump(const ModelSpace& space, double width, double amplitude = 1.0) {
  return space.sample([&](double x) { return amplitude * smooth_bump(x, width); });
}

/// a0 + a1 sin(x) + a2 cos(x) on a scalar grid.
inline Vector smooth_random(const ModelSpace& space, Rng& rng) {
  const double a0 = uniform(rng, -1.0, 1.0), a1 = uniform(rng, -1.0, 1.0), a2 = uniform(rng, -1.0, 1.0);
  return space.sample([&](double x) { return a0 + a1 * std::sin(x) + a2 * std::cos(x); });
}

inline Vector random_constant(const ModelSpace& space, Rng& rng) {
  return Vector::Constant(static_cast<Eigen::Index>(space.dimension()), uniform(rng, -1.0, 1.0));
}

/// Trigonometric polynomial of degree <= N in theta = pi x / L.
inline Vector random_trig(const ModelSpace& space, int degree, Rng& rng) {
  std::vector<double> c(static_cast<std::size_t>(2 * degree + 1));
  for (double& k : c) k = uniform(rng, -1.0, 1.0);
  const double L = space.grid().half_width;
  return space.sample([&](double x) {
    const double th = std::numbers::pi * x / L;
    double s = c[0];
    for (int j = 1; j <= degree; ++j)
      s += c[static_cast<std::size_t>(2 * j - 1)] * std::cos(j * th) + c[static_cast<std::size_t>(2 * j)] * std::sin(j * th);
    return s;
  });
}

inline Vector random_cube(const ModelSpace& space, Rng& rng) {
  Vector x(static_cast<Eigen::Index>(space.dimension()));
  for (auto& v : x) v = uniform(rng, -1.0, 1.0);
  return x;
}

/// Sequence with coordinates 1..k uniform and the rest zero; |x_k| >= floor.
inline Vector random_in_span(const ModelSpace& space, std::size_t k, Rng& rng, double floor = 0.0) {
  Vector x = space.zero();
  for (std::size_t i = 0; i < k; ++i) x[static_cast<Eigen::Index>(i)] = uniform(rng, -1.0, 1.0);
  if (k > 0 && floor > 0.0) {
    auto& last = x[static_cast<Eigen::Index>(k - 1)];
    last = (last < 0.0 ? -1.0 : 1.0) * (floor + (1.0 - floor) * std::abs(last));
  }
  return x;
}

inline Vector constant_loop(const ModelSpace& space, const Eigen::Vector3d& p) {
  return detail::constant_loop(p, space.grid().points);
}

/// Constant loop at angle phi on the great circle with normal e_z, and the
/// constant tangent omega * (e_z x p).
inline std::pair<Vector, Vector> circle_loop_data(const ModelSpace& space, double phi, double omega) {
  const Eigen::Vector3d p(std::cos(phi), std::sin(phi), 0.0);
  const Eigen::Vector3d t = Eigen::Vector3d::UnitZ().cross(p);
  return {constant_loop(space, p), constant_loop(space, omega * t)};
}

// ---------------------------------------------------------------------------
// Bundle samplers

inline BundleSampler half_support_pairs(SpacePtr space) {
  return {"same-side bump pairs (f, v) in S+ x S+ or S- x S-", SamplerMode::Analytic, [space](Rng& rng) {
            const Side side = coin(rng) ? Side::Positive : Side::Negative;
            Vector f = one_sided_bumps(*space, side, rng);
            Vector v = one_sided_bumps(*space, side, rng);
            return std::pair{std::move(f), std::move(v)};
          }};
}

/// f in S+ and v = amplitude * chi_width centred at 0.
inline BundleSampler centred_bump_probes(SpacePtr space, double width, double amplitude = 1.0) {
  return {"f in S+ with centred bump velocity", SamplerMode::Analytic, [space, width, amplitude](Rng& rng) {
            return std::pair{one_sided_bumps(*space, Side::Positive, rng), centred_bump(*space, width, amplitude)};
          }};
}

/// Alternates same-side pairs and centred-bump probes.
inline BundleSampler half_support_mixed(SpacePtr space, double width) {
  auto same = half_support_pairs(space);
  auto probe = centred_bump_probes(space, width);
  return {"same-side pairs and centred-bump probes", SamplerMode::Analytic, [same, probe](Rng& rng) {
            return coin(rng) ? same(rng) : probe(rng);
          }};
}

inline BundleSampler constant_pairs(SpacePtr space) {
  return {"constant base and constant velocity", SamplerMode::Analytic, [space](Rng& rng) {
            Vector c = random_constant(*space, rng);
            Vector d = random_constant(*space, rng);
            return std::pair{std::move(c), std::move(d)};
          }};
}

/// Constant base; velocity constant or a smooth non-constant function.
inline BundleSampler constant_ambient(SpacePtr space) {
  return {"constant base, constant or smooth velocity", SamplerMode::Analytic, [space](Rng& rng) {
            Vector c = random_constant(*space, rng);
            Vector v = coin(rng) ? random_constant(*space, rng) : smooth_random(*space, rng);
            return std::pair{std::move(c), std::move(v)};
          }};
}

namespace detail {

inline std::pair<Vector, Vector> parabola_point(const ModelSpace& space, Rng& rng) {
  const ModelSpace& g = space.factor(0);
  Vector h = smooth_random(g, rng);
  return {h, h.cwiseProduct(h)};
}

}  // namespace detail

inline BundleSampler parabola_zero_section(SpacePtr space) {
  return {"(h, h^2) with zero velocity", SamplerMode::Analytic, [space](Rng& rng) {
            const auto [h, h2] = detail::parabola_point(*space, rng);
            return std::pair{ModelSpace::join(h, h2), space->zero()};
          }};
}

inline BundleSampler parabola_tangent(SpacePtr space) {
  return {"(h, h^2) with tangent (u, 2hu)", SamplerMode::Analytic, [space](Rng& rng) {
            const auto [h, h2] = detail::parabola_point(*space, rng);
            const Vector u = smooth_random(space->factor(0), rng);
            return std::pair{ModelSpace::join(h, h2), ModelSpace::join(u, 2.0 * h.cwiseProduct(u))};
          }};
}

inline BundleSampler parabola_ambient(SpacePtr space) {
  auto tangent = parabola_tangent(space);
  auto zero = parabola_zero_section(space);
  return {"(h, h^2) with tangent, zero or random velocity", SamplerMode::Analytic, [space, tangent, zero](Rng& rng) {
            switch (uniform_index(rng, 3)) {
              case 0:
                return tangent(rng);
              case 1:
                return zero(rng);
              default: {
                auto [x, v] = zero(rng);
                const Vector a = smooth_random(space->factor(0), rng);
                const Vector b = smooth_random(space->factor(0), rng);
                return std::pair{std::move(x), ModelSpace::join(a, b)};
              }
            }
          }};
}

inline BundleSampler fourier_pairs(SpacePtr space, int degree) {
  return {"trigonometric base and velocity of degree <= N", SamplerMode::Analytic, [space, degree](Rng& rng) {
            Vector x = random_trig(*space, degree, rng);
            Vector v = random_trig(*space, degree, rng);
            return std::pair{std::move(x), std::move(v)};
          }};
}

inline BundleSampler circle_loop_tangent(SpacePtr space) {
  return {"constant loop on the equator with constant tangent velocity", SamplerMode::Analytic, [space](Rng& rng) {
            const double phi = uniform(rng, -std::numbers::pi, std::numbers::pi);
            const double omega = uniform(rng, -1.0, 1.0);
            return circle_loop_data(*space, phi, omega);
          }};
}

/// Constant loop on the equator; velocity tangent, normal to the plane, or non-constant.
inline BundleSampler circle_loop_ambient(SpacePtr space) {
  auto tangent = circle_loop_tangent(space);
  return {"constant equatorial loop with tangent, normal or varying velocity", SamplerMode::Analytic,
          [space, tangent](Rng& rng) {
            auto [x, v] = tangent(rng);
            switch (uniform_index(rng, 3)) {
              case 0:
                break;
              case 1:
                v = constant_loop(*space, Eigen::Vector3d(0.0, 0.0, uniform(rng, 0.2, 1.0)));
                break;
              default: {
                const Grid& g = space->grid();
                const double a = uniform(rng, 0.2, 1.0);
                for (std::size_t i = 0; i < g.points; ++i)
                  v[static_cast<Eigen::Index>(3 * i + 2)] = a * std::cos(g.coordinate(i));
                break;
              }
            }
            return std::pair{std::move(x), std::move(v)};
          }};
}

inline BundleSampler span_pairs(SpacePtr space, std::size_t k) {
  return {"base and velocity in span(e_1..e_k)", SamplerMode::Analytic, [space, k](Rng& rng) {
            Vector x = random_in_span(*space, k, rng, 0.1);
            Vector v = random_in_span(*space, k, rng);
            return std::pair{std::move(x), std::move(v)};
          }};
}

/// Uniform cube for both components (ambient data for homogeneity checks).
inline BundleSampler cube_pairs(SpacePtr space) {
  return {"uniform cube pairs", SamplerMode::Analytic, [space](Rng& rng) {
            Vector x = random_cube(*space, rng);
            Vector v = random_cube(*space, rng);
            return std::pair{std::move(x), std::move(v)};
          }};
}

/// Loops with every sample on the unit sphere, arbitrary velocity.
inline BundleSampler sphere_loop_pairs(SpacePtr space) {
  return {"unit-sphere loops with cube velocity", SamplerMode::Analytic, [space](Rng& rng) {
            Vector x = random_cube(*space, rng);
            for (std::size_t i = 0; i < space->grid().points; ++i) {
              auto seg = x.segment<3>(static_cast<Eigen::Index>(3 * i));
              if (seg.norm() < 1e-3) seg = Eigen::Vector3d::UnitX();
              seg.normalize();
            }
            Vector v = random_cube(*space, rng);
            return std::pair{std::move(x), std::move(v)};
          }};
}

/// Unit-sphere loops with pointwise tangent velocity (initial data of sphere geodesics).
inline BundleSampler sphere_tangent_pairs(SpacePtr space) {
  const BundleSampler base = sphere_loop_pairs(space);
  return {"unit-sphere loops with tangent velocity", SamplerMode::Analytic, [space, base](Rng& rng) {
            auto [x, v] = base(rng);
            for (std::size_t i = 0; i < space->grid().points; ++i) {
              const auto at = static_cast<Eigen::Index>(3 * i);
              const Eigen::Vector3d p = x.segment<3>(at);
              v.segment<3>(at) -= p.dot(v.segment<3>(at)) * p;
            }
            return std::pair{std::move(x), std::move(v)};
          }};
}

/// Keeps proposals whose admissibility verdict is Member.
inline BundleSampler numeric_admissible(const Spray& spray, const SetOracle& oracle, BundleSampler proposal,
                                        QuotientSchedule sched = {}, std::size_t max_attempts = 1000) {
  return {"numerically admissible: " + proposal.description, SamplerMode::Numeric,
          [spray, oracle, proposal, sched, max_attempts](Rng& rng) {
            for (std::size_t i = 0; i < max_attempts; ++i) {
              auto [x, v] = proposal(rng);
              if (!oracle.contains(x)) continue;
              if (admissible(spray, oracle, x, v, sched).verdict == Verdict::Member) return std::pair{x, v};
            }
            throw SamplerExhausted("no admissible proposal in " + std::to_string(max_attempts) + " attempts");
          }};
}

}  // namespace spraylab
