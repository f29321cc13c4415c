#include "spraylab/samplers.hpp"
#include "spraylab/set_oracle.hpp"

#include <gtest/gtest.h>

using namespace spraylab;

namespace {

SpacePtr scalar_grid(double L = 2.0, double h = 0.01) { return make_space(ModelSpace::grid_functions(Grid::uniform(L, h))); }

Vector seq(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST(HalfSupport, OneSidedBumpIsInside) {
  auto space = scalar_grid();
  const auto s = half_support_union(space);
  const Vector f = space->sample([](double x) { return smooth_bump(x - 0.75, 0.5); });
  EXPECT_TRUE(s.contains(f));
  for (double d : s.distances(f)) EXPECT_EQ(d, 0.0);
}

TEST(HalfSupport, CentredBumpDistanceIsSupOverOneHalf) {
  auto space = make_space(ModelSpace::grid_functions(Grid::uniform(2.0, 0.01), {{1.0, 0}}));
  const auto s = half_support_union(space);
  const Vector f = centred_bump(*space, 0.5);
  double want = 0.0;
  for (std::size_t i = 0; i < space->grid().points; ++i)
    if (space->grid().coordinate(i) < -0.005) want = std::max(want, std::abs(f[static_cast<Eigen::Index>(i)]));
  EXPECT_GT(want, 0.0);
  EXPECT_DOUBLE_EQ(s.distance(0, f), want);
  EXPECT_FALSE(s.contains(f));
}

TEST(HalfSupport, ZeroIsInside) {
  auto space = scalar_grid();
  EXPECT_TRUE(half_support_union(space).contains(space->zero()));
}

TEST(HalfSupport, ProjectionLandsInSetAndBoundsDistance) {
  auto space = scalar_grid(2.0, 0.02);
  const auto s = half_support_union(space);
  Rng rng(1);
  for (int k = 0; k < 50; ++k) {
    const Vector f = smooth_random(*space, rng);
    const Vector p = *s.project(f);
    EXPECT_TRUE(s.contains(p));
    const auto d = s.distances(f);
    const auto& sems = space->grid_seminorms();
    for (std::size_t n = 0; n < sems.size(); ++n) {
      if (sems[n].order == 0) {
        EXPECT_LE(d[n], space->seminorm(n, f - p) + 1e-12);
      }
    }
  }
}

TEST(Orthant, CoordinateDistance) {
  auto space = make_space(ModelSpace::sequences(4));
  const auto s = nonneg_orthant(space);
  EXPECT_EQ(s.distance(1, seq({1, -2, 3, 0})), 2.0);
  for (double d : s.distances(seq({0, 1, 2, 3}))) EXPECT_EQ(d, 0.0);
}

TEST(Orthant, ProjectClamps) {
  auto space = make_space(ModelSpace::sequences(2));
  EXPECT_EQ(*nonneg_orthant(space).project(seq({-1, 4})), seq({0, 4}));
}

TEST(Orthant, ProjectionAttainsDistance) {
  auto space = make_space(ModelSpace::sequences(6));
  const auto s = nonneg_orthant(space);
  Rng rng(2);
  for (int k = 0; k < 100; ++k) {
    const Vector x = random_cube(*space, rng);
    const auto d = s.distances(x);
    const auto r = space->seminorms(x - *s.project(x));
    for (std::size_t n = 0; n < d.size(); ++n) EXPECT_EQ(d[n], r[n]);
  }
}

TEST(Orthant, MissingTangentPredicate) {
  auto space = make_space(ModelSpace::sequences(2));
  EXPECT_THROW(nonneg_orthant(space).is_tangent(space->zero(), space->zero()), std::logic_error);
  EXPECT_THROW(nonneg_orthant(scalar_grid()), std::invalid_argument);
}

TEST(Constants, ConstantIsInside) {
  auto space = scalar_grid();
  const Vector c = Vector::Constant(static_cast<Eigen::Index>(space->dimension()), 3.7);
  EXPECT_TRUE(constant_functions(space).contains(c));
}

TEST(Constants, IdentityFunctionDistances) {
  auto space = make_space(ModelSpace::grid_functions(Grid::uniform(2.0, 0.01), {{1.0, 0}, {1.0, 1}}));
  const auto s = constant_functions(space);
  const Vector f = space->sample([](double x) { return x; });
  EXPECT_NEAR(s.distance(0, f), 1.0, 1e-12);
  EXPECT_NEAR(s.distance(1, f), 1.0, 1e-12);
}

TEST(Constants, TangentMeansConstantVelocity) {
  auto space = scalar_grid();
  const auto s = constant_functions(space);
  const Vector c = Vector::Constant(static_cast<Eigen::Index>(space->dimension()), 0.3);
  EXPECT_TRUE(s.is_tangent(c, c));
  EXPECT_FALSE(s.is_tangent(c, space->sample([](double x) { return x; })));
}

TEST(Parabola, OnGraphAndOffGraph) {
  auto g = ModelSpace::grid_functions(Grid::uniform(2.0, 0.01));
  auto space = make_space(ModelSpace::product({g, g}));
  const auto s = parabola_graph(space);
  const Vector h = g.sample([](double x) { return std::sin(x); });
  EXPECT_EQ(s.max_distance(ModelSpace::join(h, h.cwiseProduct(h))), 0.0);
  const Vector zero = g.zero();
  const Vector one = Vector::Ones(static_cast<Eigen::Index>(g.dimension()));
  EXPECT_DOUBLE_EQ(s.distance(0, ModelSpace::join(zero, one)), 1.0);
  EXPECT_EQ(s.exactness(), Exactness::UpperBound);
}

TEST(Parabola, FlatProbeResidualIsQuadratic) {
  auto g = ModelSpace::grid_functions(Grid::uniform(2.0, 0.01), {{1.0, 0}});
  auto space = make_space(ModelSpace::product({g, g}));
  const auto s = parabola_graph(space);
  const Vector h = g.sample([](double x) { return 0.5 * x; });
  const Vector u = g.sample([](double x) { return std::cos(x); });
  double sup_u2 = 0.0;
  for (std::size_t i = 0; i < g.grid().points; ++i)
    if (std::abs(g.grid().coordinate(i)) <= 1.0 + 1e-9) sup_u2 = std::max(sup_u2, u[static_cast<Eigen::Index>(i)] * u[static_cast<Eigen::Index>(i)]);
  for (double t : {0.1, 0.01}) {
    const Vector a = h + t * u;
    const Vector b = h.cwiseProduct(h) + 2.0 * t * h.cwiseProduct(u);
    EXPECT_NEAR(s.distance(0, ModelSpace::join(a, b)), t * t * sup_u2, 1e-15);
  }
}

TEST(Fourier, InSpanAndOutOfSpan) {
  auto space = make_space(ModelSpace::grid_functions(Grid::circle(64), {{std::numbers::pi, 0}}));
  const auto s = fourier_subspace(space, 3);
  EXPECT_LE(s.max_distance(space->sample([](double x) { return std::cos(2.0 * x); })), 1e-8);
  EXPECT_NEAR(s.distance(0, space->sample([](double x) { return std::cos(5.0 * x); })), 1.0, 0.05);
  EXPECT_EQ(s.max_distance(space->zero()), 0.0);
}

TEST(Fourier, ProjectionAttainsDistanceAndIsIdempotent) {
  auto space = make_space(ModelSpace::grid_functions(Grid::circle(64)));
  const auto s = fourier_subspace(space, 2);
  Rng rng(3);
  for (int k = 0; k < 20; ++k) {
    const Vector f = random_trig(*space, 5, rng);
    const Vector p = *s.project(f);
    EXPECT_LE((*s.project(p) - p).lpNorm<Eigen::Infinity>(), 1e-12);
    const auto d = s.distances(f);
    const auto r = space->seminorms(f - p);
    for (std::size_t n = 0; n < d.size(); ++n) EXPECT_NEAR(d[n], r[n], 1e-12);
  }
}

TEST(Fourier, RequiresPeriodicGrid) { EXPECT_THROW(fourier_subspace(scalar_grid(), 3), std::invalid_argument); }

TEST(Strata, MembershipAndTailDistance) {
  auto space = make_space(ModelSpace::sequences(4));
  const auto strata = finite_sequence_strata(space);
  const Vector x = seq({1, 2, 0, 0});
  EXPECT_TRUE(strata.strata[1].closure.contains(x));
  EXPECT_TRUE(strata.strata[1].stratum.contains(x));
  EXPECT_FALSE(strata.strata[2].stratum.contains(x));
  EXPECT_EQ(strata.strata[0].closure.distance(1, x), 2.0);
}

TEST(Strata, ZeroLiesInEveryClosureAndNoStratum) {
  auto space = make_space(ModelSpace::sequences(4));
  for (const auto& st : finite_sequence_strata(space).strata) {
    EXPECT_TRUE(st.closure.contains(space->zero()));
    EXPECT_FALSE(st.stratum.contains(space->zero()));
  }
}

TEST(Strata, ProjectionAttainsDistance) {
  auto space = make_space(ModelSpace::sequences(5));
  const auto h2 = finite_span(space, 2);
  Rng rng(4);
  for (int k = 0; k < 50; ++k) {
    const Vector x = random_cube(*space, rng);
    const auto d = h2.distances(x);
    const auto r = space->seminorms(x - *h2.project(x));
    for (std::size_t n = 0; n < d.size(); ++n) EXPECT_EQ(d[n], r[n]);
  }
}

TEST(CircleLoops, ConstantOnEquatorIsInside) {
  auto space = make_space(ModelSpace::grid_functions(Grid::circle(16, 3)));
  const auto s = great_circle_constant_loops(space);
  const Vector f = detail::constant_loop(Eigen::Vector3d(1, 0, 0), 16);
  EXPECT_TRUE(s.contains(f));
  EXPECT_EQ(s.max_distance(f), 0.0);
}

TEST(CircleLoops, PoleIsFar) {
  auto space = make_space(ModelSpace::grid_functions(Grid::circle(16, 3), {{std::numbers::pi, 0}}));
  const auto s = great_circle_constant_loops(space);
  EXPECT_GE(s.distance(0, detail::constant_loop(Eigen::Vector3d(0, 0, 1), 16)), 1.0);
}

TEST(CircleLoops, WindingLoopIsNotConstant) {
  auto space = make_space(ModelSpace::grid_functions(Grid::circle(16, 3), {{std::numbers::pi, 0}}));
  const auto s = great_circle_constant_loops(space);
  Vector f = space->zero();
  for (std::size_t i = 0; i < 16; ++i) {
    const double th = space->grid().coordinate(i);
    f.segment<3>(static_cast<Eigen::Index>(3 * i)) = Eigen::Vector3d(std::cos(th), std::sin(th), 0);
  }
  EXPECT_FALSE(s.contains(f));
  EXPECT_GT(s.max_distance(f), 0.9);
}

TEST(Translate, ZeroShiftIsIdentity) {
  auto space = scalar_grid(2.0, 0.02);
  const auto s = half_support_union(space);
  const auto t = translate_set(s, 0.0);
  Rng rng(5);
  for (int k = 0; k < 100; ++k) {
    const Vector f = coin(rng) ? one_sided_bumps(*space, coin(rng) ? Side::Positive : Side::Negative, rng)
                               : centred_bump(*space, 0.5, uniform(rng, -1.0, 1.0));
    EXPECT_EQ(s.contains(f), t.contains(f));
    EXPECT_EQ(s.distances(f), t.distances(f));
  }
}

TEST(Translate, ShiftedSupport) {
  auto space = scalar_grid(2.0, 0.01);
  const auto s = half_support_union(space);
  const auto t = translate_set(s, 0.5);
  const Vector f = space->sample([](double x) { return smooth_bump(x - 0.75, 0.5); });
  const Vector shifted = space->sample([](double x) { return smooth_bump(x - 1.25, 0.5); });
  EXPECT_TRUE(t.contains(shifted));
  const Vector straddle = space->sample([](double x) { return smooth_bump(x - 0.5, 0.5); });
  EXPECT_TRUE(s.contains(straddle));
  EXPECT_FALSE(t.contains(straddle));
  EXPECT_TRUE(t.contains(cyclic_shift(space->grid(), f, grid_shift(space->grid(), 0.5))));
}

TEST(Translate, DistancesAreEquivariant) {
  auto space = make_space(ModelSpace::grid_functions(Grid::uniform(2.0, 0.02, 1, true)));
  const auto s = half_support_union(space);
  const auto t = translate_set(s, 0.5);
  const long k = grid_shift(space->grid(), 0.5);
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    const Vector f = smooth_random(*space, rng);
    EXPECT_EQ(s.distances(f), t.distances(cyclic_shift(space->grid(), f, k)));
  }
  EXPECT_THROW(translate_set(s, 0.013), std::invalid_argument);
}

TEST(Union, NearestPieceAndMembership) {
  auto space = make_space(ModelSpace::sequences(2));
  const auto u = union_of("axes", {finite_span(space, 1), nonneg_orthant(space)});
  EXPECT_TRUE(u.contains(seq({-3, 0})));
  EXPECT_TRUE(u.contains(seq({2, 2})));
  EXPECT_FALSE(u.contains(seq({-1, -1})));
  EXPECT_EQ(u.distance(1, seq({-1, -1})), 1.0);
}

TEST(Product, MaxOfComponentDistances) {
  auto space = make_space(ModelSpace::sequences(2));
  const auto p = product_of(nonneg_orthant(space), nonneg_orthant(space));
  EXPECT_EQ(p.distance(0, seq({-1, 0, -3, 0})), 3.0);
  EXPECT_TRUE(p.contains(seq({1, 0, 0, 2})));
}
