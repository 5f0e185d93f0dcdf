#include <gtest/gtest.h>

#include "krmcf/grid.hpp"

using namespace krmcf;

TEST(PeriodicGrid, TorusNodes) {
  PeriodicGrid g = PeriodicGrid::torus(16);
  EXPECT_EQ(g.nx, 16);
  EXPECT_EQ(g.ny, 16);
  EXPECT_DOUBLE_EQ(g.hx, kTwoPi / 16);
  EXPECT_DOUBLE_EQ(g.x(3), 3 * g.hx);
  EXPECT_EQ(g.size(), 256u);
}

TEST(PeriodicGrid, SphereStaggeredNodes) {
  PeriodicGrid g = PeriodicGrid::sphere_rotsym(32);
  EXPECT_EQ(g.ny, 1);
  EXPECT_DOUBLE_EQ(g.hx, kPi / 32);
  // no node on either pole
  EXPECT_DOUBLE_EQ(g.x(0), 0.5 * g.hx);
  EXPECT_DOUBLE_EQ(g.x(31), kPi - 0.5 * g.hx);
}

TEST(PeriodicGrid, RejectsBadSizes) {
  EXPECT_THROW(PeriodicGrid::torus(7), ValidationError);
  EXPECT_THROW(PeriodicGrid::torus(6), ValidationError);
  EXPECT_THROW(PeriodicGrid::sphere_rotsym(9), ValidationError);
  EXPECT_NO_THROW(PeriodicGrid::torus(8));
}

namespace {

double torus_stencil_error(int n) {
  PeriodicGrid g = PeriodicGrid::torus(n);
  TorusStencil st(g);
  Field f(g);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      f.at(i, j) = std::sin(g.x(i)) * std::cos(2 * g.y(j));
  double worst = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double x = g.x(i), y = g.y(j);
      double ex_dx = std::cos(x) * std::cos(2 * y);
      double ex_dy = -2 * std::sin(x) * std::sin(2 * y);
      double ex_dxy = -2 * std::cos(x) * std::sin(2 * y);
      double ex_lap = -5 * std::sin(x) * std::cos(2 * y);
      worst = std::max({worst, std::abs(st.dx(f, i, j) - ex_dx),
                        std::abs(st.dy(f, i, j) - ex_dy),
                        std::abs(st.dxy(f, i, j) - ex_dxy),
                        std::abs(st.lap0(f, i, j) - ex_lap)});
    }
  return worst;
}

}  // namespace

TEST(TorusStencil, SecondOrderOnTrigField) {
  double e32 = torus_stencil_error(32);
  double e64 = torus_stencil_error(64);
  EXPECT_LT(e64, 0.05);
  double order = std::log2(e32 / e64);
  EXPECT_GT(order, 1.9);
  EXPECT_LT(order, 2.1);
}

TEST(SphereStencil, ParityGhosts) {
  PeriodicGrid g = PeriodicGrid::sphere_rotsym(8);
  SphereStencil st(g);
  Field f(g);
  for (int i = 0; i < 8; ++i) f[i] = double(i + 1);
  EXPECT_DOUBLE_EQ(st.ghost(f, -1, Parity::Even), f[0]);
  EXPECT_DOUBLE_EQ(st.ghost(f, -2, Parity::Even), f[1]);
  EXPECT_DOUBLE_EQ(st.ghost(f, -1, Parity::Odd), -f[0]);
  EXPECT_DOUBLE_EQ(st.ghost(f, 8, Parity::Even), f[7]);
  EXPECT_DOUBLE_EQ(st.ghost(f, 9, Parity::Odd), -f[6]);
  EXPECT_DOUBLE_EQ(st.ghost(f, 3, Parity::Odd), f[3]);
}

namespace {

double sphere_derivative_error(int n) {
  PeriodicGrid g = PeriodicGrid::sphere_rotsym(n);
  SphereStencil st(g);
  Field f(g);
  // cos(theta) is even across both poles
  for (int i = 0; i < n; ++i) f[i] = std::cos(g.x(i));
  double worst = 0;
  for (int i = 0; i < n; ++i) {
    worst = std::max(worst, std::abs(st.d(f, i) + std::sin(g.x(i))));
    worst = std::max(worst, std::abs(st.d2(f, i) + std::cos(g.x(i))));
  }
  return worst;
}

}  // namespace

TEST(SphereStencil, SecondOrderAcrossPoles) {
  double e32 = sphere_derivative_error(32);
  double e64 = sphere_derivative_error(64);
  double order = std::log2(e32 / e64);
  EXPECT_GT(order, 1.9);
  EXPECT_LT(order, 2.1);
}

TEST(SphereStencil, FluxDivergenceConserves) {
  // sum of w * div over the grid telescopes to the (zero) pole fluxes
  int n = 24;
  PeriodicGrid g = PeriodicGrid::sphere_rotsym(n);
  SphereStencil st(g);
  Field M(g), c(g), w(g), out(g);
  for (int i = 0; i < n; ++i) {
    double th = g.x(i);
    M[i] = 1.0 + 0.3 * std::cos(th);
    c[i] = std::cos(2 * th);
    w[i] = std::sin(th);
  }
  st.flux_divergence(M, c, w, out);
  double total = 0;
  for (int i = 0; i < n; ++i) total += w[i] * out[i];
  EXPECT_NEAR(total, 0.0, 1e-13);
}

TEST(Interpolation, TorusExactAtNodesAndAccurate) {
  PeriodicGrid g = PeriodicGrid::torus(32);
  Field f(g);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      f.at(i, j) = std::sin(g.x(i) + 2 * g.y(j));
  EXPECT_DOUBLE_EQ(interp_torus(f, g, g.x(5), g.y(9)), f.at(5, 9));
  // off-node, including across the periodic seam
  double worst = 0;
  for (double x : {0.37, 3.1, 6.2})
    for (double y : {0.11, 2.9, 6.27})
      worst = std::max(worst,
                       std::abs(interp_torus(f, g, x, y) - std::sin(x + 2 * y)));
  EXPECT_LT(worst, 5e-3);
}

TEST(Interpolation, SphereAccurateNearPoles) {
  PeriodicGrid g = PeriodicGrid::sphere_rotsym(64);
  Field f(g);
  for (int i = 0; i < g.nx; ++i) f[i] = std::cos(g.x(i));
  double worst = 0;
  for (double th : {0.01, 0.5 * g.hx, 1.7, kPi - 0.02})
    worst = std::max(worst, std::abs(interp_sphere(f, g, th) - std::cos(th)));
  EXPECT_LT(worst, 1e-5);
}

TEST(Field, Helpers) {
  Field f(3, 2, 1.0);
  f.at(2, 1) = -4.0;
  EXPECT_DOUBLE_EQ(f.max_abs(), 4.0);
  EXPECT_DOUBLE_EQ(f.min(), -4.0);
  EXPECT_DOUBLE_EQ(f.max(), 1.0);
  EXPECT_TRUE(f.finite());
  f[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(f.finite());
}
