#include "spraylab/invariance.hpp"
#include "spraylab/samplers.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace spraylab;

namespace {

SpacePtr scalar_grid() { return make_space(ModelSpace::grid_functions(Grid::uniform(2.0, 0.01))); }
SpacePtr periodic_grid() { return make_space(ModelSpace::grid_functions(Grid::uniform(2.0, 0.01, 1, true))); }
SpacePtr loop_space() { return make_space(ModelSpace::grid_functions(Grid::circle(32, 3))); }

SpacePtr parabola_space() {
  auto g = ModelSpace::grid_functions(Grid::uniform(2.0, 0.01));
  return make_space(ModelSpace::product({g, g}));
}

}  // namespace

TEST(Invariance, FlatHalfSupport) {
  auto space = scalar_grid();
  Rng rng(1);
  const auto rep = verify_invariance(flat_spray(space), half_support_union(space), half_support_pairs(space), 100, rng);
  EXPECT_EQ(rep.overall, InvarianceVerdict::Invariant);
  EXPECT_LE(rep.max_distance, 1e-9);
  EXPECT_TRUE(rep.coherent);
  EXPECT_EQ(rep.trials.size(), 100u);
  EXPECT_FALSE(rep.counterexample);
}

TEST(Invariance, BumpSprayLeavesHalfSupport) {
  auto space = scalar_grid();
  Rng rng(2);
  const auto s = half_support_union(space);
  const Spray bump = bump_perturbed_spray(space, 0.5);
  const auto rep = verify_invariance(bump, s, centred_bump_probes(space, 0.2), 5, rng);
  EXPECT_EQ(rep.overall, InvarianceVerdict::Violated);
  EXPECT_TRUE(rep.coherent);
  ASSERT_TRUE(rep.counterexample);
  for (const auto& t : rep.trials) {
    EXPECT_TRUE(t.violated);
    EXPECT_GT(t.violation_onset, 0.0);
  }
  const Vector f = one_sided_bumps(*space, Side::Positive, rng);
  const auto traj = integrate_geodesic(bump, f, centred_bump(*space, 0.2), {0.0, 0.2}, 1e-3);
  EXPECT_GT(s.max_distance(traj.at_time(0.1).x), 0.0);
  EXPECT_GT(s.max_distance(traj.at_time(1e-3).x), 0.0);
}

TEST(Invariance, ViolatedTrialsFailAdmissibilityAfterOnset) {
  auto space = scalar_grid();
  Rng rng(3);
  const auto rep = verify_invariance(bump_perturbed_spray(space, 0.5), half_support_union(space), centred_bump_probes(space, 0.2), 3,
                                     rng);
  for (const auto& t : rep.trials) {
    bool failed = false;
    for (const auto& c : t.spot_checks)
      if (c.t >= t.violation_onset && (c.outcome == "non-member" || c.outcome == "base-outside")) failed = true;
    EXPECT_TRUE(failed);
  }
}

TEST(Invariance, InSetTrialsNeverSpotCheckNonMember) {
  auto space = scalar_grid();
  Rng rng(4);
  const auto rep = verify_invariance(flat_spray(space), half_support_union(space), half_support_pairs(space), 10, rng);
  for (const auto& t : rep.trials) {
    EXPECT_EQ(t.spot_checks.size(), 3u);
    for (const auto& c : t.spot_checks) EXPECT_NE(c.outcome, "non-member");
  }
}

TEST(Invariance, StrataClosuresExactly) {
  auto space = make_space(ModelSpace::sequences(8));
  Rng rng(5);
  for (std::size_t k : {1u, 3u, 8u}) {
    const auto rep = verify_invariance(flat_spray(space), finite_span(space, k), span_pairs(space, k), 10, rng);
    EXPECT_EQ(rep.overall, InvarianceVerdict::Invariant);
    EXPECT_EQ(rep.max_distance, 0.0);
  }
}

TEST(Invariance, DeterministicAcrossThreadCounts) {
  auto space = scalar_grid();
  InvarianceOptions one, many;
  one.threads = 1;
  many.threads = 4;
  Rng a(6), b(6);
  const auto r1 = verify_invariance(bump_perturbed_spray(space, 0.5), half_support_union(space), half_support_mixed(space, 0.2), 8, a, one);
  const auto r2 = verify_invariance(bump_perturbed_spray(space, 0.5), half_support_union(space), half_support_mixed(space, 0.2), 8, b, many);
  ASSERT_EQ(r1.trials.size(), r2.trials.size());
  for (std::size_t i = 0; i < r1.trials.size(); ++i) {
    EXPECT_EQ(r1.trials[i].max_distance, r2.trials[i].max_distance);
    EXPECT_EQ(r1.trials[i].violated, r2.trials[i].violated);
  }
  EXPECT_EQ(r1.overall, r2.overall);
}

TEST(Invariance, MismatchedSpacesRejected) {
  Rng rng(7);
  auto a = scalar_grid();
  auto b = make_space(ModelSpace::sequences(3));
  EXPECT_THROW(verify_invariance(flat_spray(a), nonneg_orthant(b), cube_pairs(b), 1, rng), std::invalid_argument);
}

TEST(TotallyGeodesic, Constants) {
  auto space = scalar_grid();
  Rng rng(8);
  const auto rep = check_totally_geodesic(flat_spray(space), constant_functions(space), constant_pairs(space), constant_ambient(space), 20, rng);
  EXPECT_EQ(rep.verdict, GeodesyVerdict::TotallyGeodesic);
  EXPECT_EQ(rep.tangent_not_admissible + rep.admissible_not_tangent, 0u);
  const auto inv = verify_invariance(flat_spray(space), constant_functions(space), constant_pairs(space), 20, rng);
  EXPECT_EQ(inv.overall, InvarianceVerdict::Invariant);
}

TEST(TotallyGeodesic, ParabolaIsNot) {
  auto space = parabola_space();
  Rng rng(9);
  const auto rep = check_totally_geodesic(flat_spray(space), parabola_graph(space), parabola_tangent(space), parabola_ambient(space), 20, rng);
  EXPECT_EQ(rep.verdict, GeodesyVerdict::NotTotallyGeodesic);
  EXPECT_GT(rep.tangent_not_admissible, 0u);
}

TEST(TotallyGeodesic, CircleLoopsOnSphere) {
  auto space = loop_space();
  Rng rng(10);
  const Spray sphere = sphere_pointwise_spray(space);
  const auto s = great_circle_constant_loops(space);
  const auto rep = check_totally_geodesic(sphere, s, circle_loop_tangent(space), circle_loop_ambient(space), 20, rng);
  EXPECT_EQ(rep.verdict, GeodesyVerdict::TotallyGeodesic);
  const auto inv = verify_invariance(sphere, s, circle_loop_tangent(space), 10, rng);
  EXPECT_EQ(inv.overall, InvarianceVerdict::Invariant);
}

TEST(TotallyGeodesic, NeedsTangentPredicate) {
  auto space = make_space(ModelSpace::sequences(3));
  Rng rng(11);
  EXPECT_THROW(check_totally_geodesic(flat_spray(space), nonneg_orthant(space), cube_pairs(space), cube_pairs(space), 2, rng),
               std::logic_error);
}

TEST(Convexity, ConstantSegmentsStayConstant) {
  auto space = scalar_grid();
  Rng rng(12);
  const auto rep = check_geodesic_convexity(flat_spray(space), constant_functions(space), constant_pairs(space), 20, rng, 0.0);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.max_distance, 0.0);
  EXPECT_EQ(rep.pairs, 20u);
}

TEST(Convexity, ParabolaMidpoint) {
  auto space = parabola_space();
  const ModelSpace& g = space->factor(0);
  const Vector one = Vector::Ones(static_cast<Eigen::Index>(g.dimension()));
  const auto rep = check_geodesic_convexity(flat_spray(space), parabola_graph(space), {{space->zero(), ModelSpace::join(one, one)}}, 1e-7, 1);
  EXPECT_DOUBLE_EQ(rep.max_distance, 0.25);
  EXPECT_FALSE(rep.pass);
}

TEST(Convexity, DegeneratePairSkippedAndMissingSolver) {
  auto space = scalar_grid();
  const Vector c = Vector::Constant(static_cast<Eigen::Index>(space->dimension()), 0.5);
  const auto rep = check_geodesic_convexity(flat_spray(space), constant_functions(space), {{c, c}});
  EXPECT_EQ(rep.skipped, 1u);
  EXPECT_EQ(rep.pairs, 0u);
  EXPECT_THROW(check_geodesic_convexity(bump_perturbed_spray(space, 0.5), constant_functions(space), {{c, c}}), std::invalid_argument);
}

TEST(Convexity, GreatCircleArcs) {
  auto space = loop_space();
  const auto [p, v1] = circle_loop_data(*space, 0.3, 0.0);
  const auto [q, v2] = circle_loop_data(*space, 1.9, 0.0);
  const auto rep = check_geodesic_convexity(sphere_pointwise_spray(space), great_circle_constant_loops(space), {{p, q}});
  EXPECT_LE(rep.max_distance, 1e-12);
}

TEST(Tangency, FlatHalfSupportAgrees) {
  auto space = scalar_grid();
  Rng rng(13);
  const auto rep = check_tangency_reformulation(flat_spray(space), half_support_bundle(space), half_support_union(space),
                                                half_support_pairs(space), 10, rng);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.matrix[0][0], 10u);
}

TEST(Tangency, BumpTwoSidedProbesAgreeOnViolation) {
  auto space = scalar_grid();
  Rng rng(14);
  const auto rep = check_tangency_reformulation(bump_perturbed_spray(space, 0.5), half_support_bundle(space), half_support_union(space),
                                                centred_bump_probes(space, 0.2), 4, rng);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.matrix[1][1], 4u);
}

TEST(Tangency, ZeroVelocityIsMember) {
  auto space = scalar_grid();
  Rng rng(15);
  const Vector f = one_sided_bumps(*space, Side::Negative, rng);
  const auto cv = first_order_tangent_on_bundle(bump_perturbed_spray(space, 0.5), half_support_bundle(space), f, space->zero());
  EXPECT_EQ(cv.verdict, Verdict::Member);
}

TEST(Flow, FlatHalfSupport) {
  auto space = scalar_grid();
  Rng rng(16);
  const auto rep = check_flow_invariance(flat_spray(space), half_support_union(space), half_support_pairs(space), 5, rng,
                                         {-1.0, -0.5, 0.0, 0.5, 1.0});
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.members, 25u);
}

TEST(Flow, CircleLoopHalfTurn) {
  auto space = loop_space();
  const double w = 1.7;
  const auto rep = check_flow_invariance(sphere_pointwise_spray(space), great_circle_constant_loops(space),
                                         {circle_loop_data(*space, 0.4, w)}, {std::numbers::pi / w, 0.0});
  EXPECT_TRUE(rep.pass);
}

TEST(Flow, OutsideDomainReported) {
  auto space = scalar_grid();
  const Vector v = (0.5 / bump_functional(*space, 0.5, centred_bump(*space, 0.2))) * centred_bump(*space, 0.2);
  const auto rep = check_flow_invariance(bump_perturbed_spray(space, 0.5), whole_space(space), {{space->zero(), v}}, {-1.5});
  ASSERT_EQ(rep.records.size(), 1u);
  EXPECT_EQ(rep.records[0].outcome, "outside-domain");
  EXPECT_FALSE(rep.pass);
}

TEST(Orbit, TranslatedHalfSupport) {
  auto space = periodic_grid();
  Rng rng(17);
  InvarianceOptions opt;
  opt.tspan = {-1.0, 1.0};
  const auto rep = check_orbit_invariance(flat_spray(space), grid_translation(space->grid(), 0.5), half_support_union(space),
                                          half_support_pairs(space), cube_pairs(space), 10, rng, opt);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.automorphism.max_discrepancy, 0.0);
  EXPECT_EQ(rep.invariance.overall, InvarianceVerdict::Invariant);
  EXPECT_LE(rep.pushforward_discrepancy, 1e-8);
}

TEST(Orbit, IdentityReducesToInvariance) {
  auto space = periodic_grid();
  InvarianceOptions opt;
  opt.tspan = {-1.0, 1.0};
  Rng a(18), b(18);
  const auto rep = check_orbit_invariance(flat_spray(space), grid_translation(space->grid(), 0.0), half_support_union(space),
                                          half_support_pairs(space), cube_pairs(space), 5, a, opt);
  check_automorphism(flat_spray(space), identity_map(), cube_pairs(space).draw, 100, b);
  const auto direct = verify_invariance(flat_spray(space), half_support_union(space), half_support_pairs(space), 5, b, opt);
  EXPECT_EQ(rep.invariance.overall, direct.overall);
  EXPECT_EQ(rep.invariance.max_distance, direct.max_distance);
}

TEST(Orbit, NonTranslationRejected) {
  auto space = periodic_grid();
  Rng rng(19);
  EXPECT_THROW(check_orbit_invariance(flat_spray(space), scaling_map(2.0), half_support_union(space), half_support_pairs(space),
                                      cube_pairs(space), 2, rng),
               std::invalid_argument);
}

TEST(Strata, StratificationPasses) {
  auto space = make_space(ModelSpace::sequences(6));
  Rng rng(20);
  InvarianceOptions opt;
  opt.tspan = {-1.0, 1.0};
  const auto rep = check_stratification(finite_sequence_strata(space), flat_spray(space), 5, rng, opt);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.frontier_failures, 0u);
  EXPECT_EQ(rep.nesting_failures, 0u);
  for (const auto& s : rep.strata) {
    EXPECT_EQ(s.max_closure_distance, 0.0);
    EXPECT_LE(s.max_exit_events, 1u);
  }
}

TEST(Strata, SingleExitAtMinusOne) {
  auto space = make_space(ModelSpace::sequences(4));
  Vector x = space->zero(), v = space->zero();
  x[0] = 1.0;
  x[1] = 1.0;
  v[1] = 1.0;
  const auto traj = integrate_geodesic(flat_spray(space), x, v, {-2.0, 2.0}, 1e-3);
  const auto ev = stratum_exits(traj, 1);
  ASSERT_EQ(ev.count, 1u);
  EXPECT_NEAR(ev.times[0], -1.0, 1e-9);
  EXPECT_LE(finite_span(space, 2).max_distance(traj.states.front().x), 0.0);
}

TEST(Strata, RestingPointStays) {
  auto space = make_space(ModelSpace::sequences(4));
  Vector x = space->zero();
  x[0] = -0.4;
  const auto traj = integrate_geodesic(flat_spray(space), x, space->zero(), {-2.0, 2.0}, 1e-2);
  EXPECT_EQ(stratum_exits(traj, 0).count, 0u);
  const auto strata = finite_sequence_strata(space);
  for (const auto& st : traj.states) EXPECT_TRUE(strata.strata[0].stratum.contains(st.x));
}
