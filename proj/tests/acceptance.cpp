// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "spraylab/spraylab.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>

using namespace spraylab;

namespace {

SpacePtr scalar_grid() { return make_space(ModelSpace::grid_functions(Grid::uniform(2.0, 0.01))); }

SpacePtr parabola_space() {
  auto g = ModelSpace::grid_functions(Grid::uniform(2.0, 0.01));
  return make_space(ModelSpace::product({g, g}));
}

SpacePtr loop_space() { return make_space(ModelSpace::grid_functions(Grid::circle(32, 3))); }

double sup(const Vector& x) { return x.lpNorm<Eigen::Infinity>(); }

/// x(t) = f + v log(1 + 2 u t) / (2 u) with u = alpha(v), from u' = -2 u^2.
Vector bump_geodesic(const Vector& f, const Vector& v, double u, double t) { return f + (std::log1p(2.0 * u * t) / (2.0 * u)) * v; }

/// Constant loop on the equator through (1, 0, 0) with speed omega, at time t.
Vector equator_geodesic(const ModelSpace& space, double omega, double t) {
  return constant_loop(space, Eigen::Vector3d(std::cos(omega * t), std::sin(omega * t), 0.0));
}

struct Result {
  bool ok = false;
  std::string detail;
};

struct Shared {
  std::optional<InvarianceReport> half_support, bump, parabola, loops;
  std::optional<StratificationReport> strata;
};

Shared shared;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

Result orthant_cone() {
  auto space = make_space(ModelSpace::sequences(16));
  const auto s = nonneg_orthant(space);
  Rng rng(101);
  double worst = 0.0;
  std::size_t verdict_mismatch = 0, members = 0;
  for (int k = 0; k < 100; ++k) {
    Vector f = random_cube(*space, rng);
    if (k % 2 == 1) f = f.cwiseAbs();
    const auto cv = adjacent_member(s, space->zero(), f);
    for (std::size_t n = 0; n < 16; ++n)
      worst = std::max(worst, std::abs(cv.estimate(n) - std::max(0.0, -f[static_cast<Eigen::Index>(n)])));
    const bool member = f.minCoeff() >= 0.0;
    members += member;
    if ((cv.verdict == Verdict::Member) != member || cv.verdict == Verdict::Inconclusive) ++verdict_mismatch;
  }
  return {worst <= 1e-6 && verdict_mismatch == 0,
          "max |estimate - max(0,-f_n)| = " + fmt(worst) + ", verdict mismatches " + std::to_string(verdict_mismatch) + " (" +
              std::to_string(members) + " members)"};
}

Result flat_half_support() {
  auto space = scalar_grid();
  Rng rng(102);
  shared.half_support = verify_invariance(flat_spray(space), half_support_union(space), half_support_pairs(space), 100, rng);
  const auto& r = *shared.half_support;
  return {r.overall == InvarianceVerdict::Invariant && r.max_distance <= 1e-9 && r.trials.size() == 100,
          std::string(to_string(r.overall)) + ", max distance " + fmt(r.max_distance)};
}

Result projective_sensitivity() {
  auto space = scalar_grid();
  Rng rng(103);
  const auto s = half_support_union(space);
  const Spray bump = bump_perturbed_spray(space, 0.5);
  shared.bump = verify_invariance(bump, s, centred_bump_probes(space, 0.2), 10, rng);
  const Vector f = one_sided_bumps(*space, Side::Positive, rng);
  const Vector v = centred_bump(*space, 0.2);
  const double u = bump_functional(*space, 0.5, v);
  const auto traj = integrate_geodesic(bump, f, v, {0.0, 1.0}, 1e-3, {Method::RK4, false, 1});
  double gap = 0.0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) gap = std::max(gap, sup(traj.states[i].x - bump_geodesic(f, v, u, traj.times[i])));
  const double d01 = s.max_distance(traj.at_time(0.1).x);
  return {shared.bump->overall == InvarianceVerdict::Violated && d01 > 1e-3 && gap <= 1e-8,
          std::string(to_string(shared.bump->overall)) + ", distance at 0.1 = " + fmt(d01) + ", RK4 vs closed form " + fmt(gap)};
}

Result parabola() {
  auto space = parabola_space();
  const auto s = parabola_graph(space);
  const Spray flat = flat_spray(space);
  Rng rng(104);
  std::size_t zero_members = 0;
  const auto zero_section = parabola_zero_section(space);
  for (int k = 0; k < 50; ++k) {
    const auto [x, v] = zero_section(rng);
    zero_members += admissible(flat, s, x, v).verdict == Verdict::Member;
  }
  const ModelSpace& g = space->factor(0);
  const Vector h = g.sample([](double x) { return 0.5 * x; });
  const Vector one = Vector::Ones(static_cast<Eigen::Index>(g.dimension()));
  const auto cv = admissible(flat, s, ModelSpace::join(h, h.cwiseProduct(h)), ModelSpace::join(one, 2.0 * h));
  const auto tg = check_totally_geodesic(flat, s, parabola_tangent(space), parabola_ambient(space), 20, rng);
  shared.parabola = verify_invariance(flat, s, zero_section, 20, rng);
  const bool ok = zero_members == 50 && cv.verdict == Verdict::NonMember && std::abs(cv.estimate(0) - 1.0) <= 1e-3 &&
                  tg.verdict == GeodesyVerdict::NotTotallyGeodesic && shared.parabola->overall == InvarianceVerdict::Invariant;
  return {ok, std::to_string(zero_members) + "/50 zero-section members, unit tangent " + to_string(cv.verdict) + " estimate " +
                  fmt(cv.estimate(0)) + ", " + to_string(tg.verdict) + ", " + to_string(shared.parabola->overall)};
}

Result constants() {
  auto space = scalar_grid();
  const auto s = constant_functions(space);
  const Spray flat = flat_spray(space);
  Rng rng(105);
  const auto tg = check_totally_geodesic(flat, s, constant_pairs(space), constant_ambient(space), 20, rng);
  const auto cx = check_geodesic_convexity(flat, s, constant_pairs(space), 20, rng, 0.0);
  return {tg.verdict == GeodesyVerdict::TotallyGeodesic && cx.pass && cx.max_distance == 0.0,
          std::string(to_string(tg.verdict)) + ", convexity max distance " + fmt(cx.max_distance)};
}

Result homogeneity() {
  auto grid = scalar_grid();
  auto loops = loop_space();
  Rng rng(106);
  struct Case {
    Spray spray;
    PairSampler sampler;
  };
  const std::vector<Case> cases{
      {flat_spray(grid), cube_pairs(grid).draw},
      {bump_perturbed_spray(grid, 0.5), cube_pairs(grid).draw},
      {sphere_pointwise_spray(loops), sphere_tangent_pairs(loops).draw},
      {projective_transform(flat_spray(grid), bump_projective_factor(*grid, 0.5, 3.0)), cube_pairs(grid).draw},
  };
  double worst = 0.0;
  std::size_t samples = 0;
  for (const auto& c : cases) {
    const auto r = check_homogeneity(c.spray, c.sampler, 1000, rng);
    worst = std::max(worst, r.max_relative_violation);
    samples += r.samples;
  }
  return {worst <= 1e-10 && samples == 4000, std::to_string(samples) + " samples, max relative error " + fmt(worst)};
}

Result sphere_loops() {
  auto space = loop_space();
  const Spray sphere = sphere_pointwise_spray(space);
  const double omega = 1.3;
  const auto [p, v] = circle_loop_data(*space, 0.0, omega);
  const auto traj = integrate_geodesic(sphere, p, v, {-2.0, 2.0}, 1e-3, {Method::RK4, false, 1});
  double norm_dev = 0.0, gap = 0.0, off_plane = 0.0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const Vector& x = traj.states[i].x;
    for (Eigen::Index j = 0; j < x.size() / 3; ++j) {
      norm_dev = std::max(norm_dev, std::abs(x.segment(3 * j, 3).norm() - 1.0));
      off_plane = std::max(off_plane, std::abs(x[3 * j + 2]));
    }
    gap = std::max(gap, sup(x - equator_geodesic(*space, omega, traj.times[i])));
  }
  Rng rng(107);
  const auto s = great_circle_constant_loops(space);
  const auto tg = check_totally_geodesic(sphere, s, circle_loop_tangent(space), circle_loop_ambient(space), 20, rng);
  shared.loops = verify_invariance(sphere, s, circle_loop_tangent(space), 20, rng);
  return {norm_dev <= 1e-6 && off_plane == 0.0 && gap <= 1e-8 && tg.verdict == GeodesyVerdict::TotallyGeodesic,
          "| |gamma| - 1 | " + fmt(norm_dev) + ", closed-form gap " + fmt(gap) + ", " + to_string(tg.verdict)};
}

Result strata() {
  auto space = make_space(ModelSpace::sequences(8));
  Rng rng(108);
  shared.strata = check_stratification(finite_sequence_strata(space), flat_spray(space), 10, rng);
  const auto& r = *shared.strata;
  double closure = 0.0;
  std::size_t exits = 0;
  for (const auto& s : r.strata) {
    closure = std::max(closure, s.max_closure_distance);
    exits = std::max(exits, s.max_exit_events);
  }
  return {r.pass && closure == 0.0 && r.frontier_failures == 0 && exits <= 1,
          "closure distance " + fmt(closure) + ", frontier failures " + std::to_string(r.frontier_failures) +
              ", max exits per trajectory " + std::to_string(exits)};
}

Result orbit() {
  auto space = scalar_grid();
  Rng rng(109);
  const Automorphism phi = build_automorphism("translate:0.5", *space);
  const auto rep = check_orbit_invariance(flat_spray(space), phi, half_support_union(space), half_support_pairs(space),
                                          cube_pairs(space), 30, rng);
  const auto bump = check_automorphism(bump_perturbed_spray(space, 0.5), phi, cube_pairs(space).draw, 100, rng);
  return {rep.pass && rep.automorphism.max_discrepancy == 0.0 && rep.invariance.overall == InvarianceVerdict::Invariant &&
              bump.max_discrepancy > 0.0,
          "flat discrepancy " + fmt(rep.automorphism.max_discrepancy) + ", translated set " + to_string(rep.invariance.overall) +
              ", bump discrepancy " + fmt(bump.max_discrepancy)};
}

Result tangency() {
  Rng rng(110);
  auto grid = scalar_grid();
  auto para = parabola_space();
  auto circle = make_space(ModelSpace::grid_functions(Grid::circle(64)));
  auto loops = loop_space();
  const auto half = half_support_union(grid);
  const auto parabola = parabola_graph(para);
  const auto fourier = fourier_subspace(circle, 3);
  struct Case {
    std::string name;
    Spray spray;
    SetOracle bundle, set;
    BundleSampler sampler;
  };
  const std::vector<Case> cases{
      {"half-support/flat", flat_spray(grid), half_support_bundle(grid), half, half_support_pairs(grid)},
      {"half-support/bump", bump_perturbed_spray(grid, 0.5), base_in_set_bundle(half), half, half_support_mixed(grid, 0.2)},
      {"parabola/flat", flat_spray(para), zero_section_bundle(parabola), parabola, parabola_zero_section(para)},
      {"fourier/flat", flat_spray(circle), product_of(fourier, fourier), fourier, fourier_pairs(circle, 3)},
      {"circle-loops/sphere", sphere_pointwise_spray(loops), circle_loops_tangent_bundle(loops),
       great_circle_constant_loops(loops), circle_loop_tangent(loops)},
  };
  std::size_t rows = 0, agree = 0;
  std::ostringstream os;
  for (const auto& c : cases) {
    const auto r = check_tangency_reformulation(c.spray, c.bundle, c.set, c.sampler, 20, rng);
    rows += r.rows.size();
    agree += r.agreements;
    if (r.agreements != r.rows.size()) os << " " << c.name << " disagrees";
  }
  return {rows == 100 && agree == rows, std::to_string(agree) + "/" + std::to_string(rows) + " agree" + os.str()};
}

Result admissibility_coherence() {
  if (!shared.half_support || !shared.bump || !shared.parabola || !shared.loops || !shared.strata)
    return {false, "earlier criteria did not run"};
  std::size_t in_set = 0, nonmember = 0;
  for (const auto* rep : {&*shared.half_support, &*shared.parabola, &*shared.loops})
    for (const auto& t : rep->trials) {
      if (!t.in_set(1e-7)) continue;
      ++in_set;
      for (const auto& c : t.spot_checks) nonmember += c.outcome == "non-member";
    }
  bool strata_coherent = true;
  for (const auto& s : shared.strata->strata) strata_coherent = strata_coherent && s.coherent;
  std::size_t violated = 0, failing_after_onset = 0;
  for (const auto& t : shared.bump->trials) {
    if (!t.violated) continue;
    ++violated;
    bool failed = false;
    for (const auto& c : t.spot_checks)
      failed = failed || (c.t >= t.violation_onset && (c.outcome == "non-member" || c.outcome == "base-outside"));
    failing_after_onset += failed;
  }
  return {nonmember == 0 && strata_coherent && violated > 0 && failing_after_onset == violated,
          std::to_string(in_set) + " in-set trajectories, " + std::to_string(nonmember) + " non-member re-checks; " +
              std::to_string(failing_after_onset) + "/" + std::to_string(violated) + " violated trajectories fail after onset"};
}

Result integrator_order() {
  auto grid = scalar_grid();
  auto loops = loop_space();
  const Spray bump = bump_perturbed_spray(grid, 0.5);
  const Spray sphere = sphere_pointwise_spray(loops);
  Rng rng(112);
  const Vector f = one_sided_bumps(*grid, Side::Positive, rng);
  const Vector chi = centred_bump(*grid, 0.2);
  const Vector v = (0.5 / bump_functional(*grid, 0.5, chi)) * chi;
  const double omega = 1.3;
  const auto [p, w] = circle_loop_data(*loops, 0.0, omega);
  auto bump_error = [&](double h) {
    const auto traj = integrate_geodesic(bump, f, v, {0.0, 1.0}, h, {Method::RK4, false, 1});
    return sup(traj.states.back().x - bump_geodesic(f, v, 0.5, 1.0));
  };
  auto sphere_error = [&](double h) {
    const auto traj = integrate_geodesic(sphere, p, w, {0.0, 2.0}, h, {Method::RK4, false, 1});
    return sup(traj.states.back().x - equator_geodesic(*loops, omega, 2.0));
  };
  const double rb = bump_error(0.1) / bump_error(0.05);
  const double rs = sphere_error(0.1) / sphere_error(0.05);
  return {rb >= 12.0 && rs >= 12.0, "error ratio bump " + fmt(rb) + ", sphere " + fmt(rs)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria{
      {"orthant adjacent cone closed form", orthant_cone},
      {"flat spray keeps half-support set", flat_half_support},
      {"bump spray leaves half-support set", projective_sensitivity},
      {"parabola invariant, not totally geodesic", parabola},
      {"constants totally geodesic and convex", constants},
      {"sprays homogeneous of degree two", homogeneity},
      {"constant equator loops totally geodesic", sphere_loops},
      {"finite sequence strata", strata},
      {"translation orbit invariant", orbit},
      {"bundle tangency matches invariance", tangency},
      {"admissibility along trajectories", admissibility_coherence},
      {"RK4 fourth order", integrator_order},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Result r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2zu %-42s %s (%.1fs)\n", r.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), r.detail.c_str(), secs);
    failed += !r.ok;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
