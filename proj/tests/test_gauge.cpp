#include <doctest.h>

#include <cmath>
#include <random>

#include "curvspin/gauge.hpp"

using namespace curvspin;

namespace {

constexpr double kPi = 3.14159265358979323846;

SurfacePatch torus(double rho, double R) {
  SurfaceParams p;
  p.rho = rho;
  p.R = R;
  return make_surface(SurfaceKind::Torus, p);
}

SurfacePatch sphere(double r) {
  SurfaceParams p;
  p.radius = r;
  return make_surface(SurfaceKind::Sphere, p);
}

}  // namespace

TEST_CASE("pseudo-field B = K/2 and sphere magnitude in tesla") {
  const auto s = sphere(1.0);
  const auto f = pseudo_field_at(s, {1.0, 2.0});
  CHECK(f.B == doctest::Approx(0.5));
  PhysicalScale nm;
  nm.length_m = 1e-9;
  CHECK(f.B_tesla(nm) == doctest::Approx(328.0).epsilon(0.01));
}

TEST_CASE("sigma_3 part of the SOI field strength equals curl w = -K/2") {
  const auto t = torus(1.0, 2.2);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 25; ++i) {
    const Point2 q{-kPi + 2 * kPi * u(rng), 2 * kPi * 2.2 * u(rng)};
    const auto c = curl_matches_w(t, q);
    CHECK(c.residual < 1e-8);
    CHECK(c.sigma3_part == doctest::Approx(c.minus_half_K).epsilon(1e-8).scale(1.0));
  }
  // Plane: everything vanishes.
  const auto plane = make_surface(SurfaceKind::Plane);
  const auto c = curl_matches_w(plane, {1.0, 2.0});
  CHECK(std::abs(c.sigma3_part) < 1e-12);
  CHECK(std::abs(c.curl_w) < 1e-12);
}

TEST_CASE("flux: sphere 2, torus 0, open surfaces rejected") {
  for (double r : {0.5, 1.0, 3.0}) {
    const auto f = flux(sphere(r));
    CHECK(f.phi_over_phi0 == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(f.genus == 0);
  }
  const auto ft = flux(torus(0.4, 1.5));
  CHECK(std::abs(ft.phi_over_phi0) < 1e-10);
  CHECK(ft.genus == 1);
  CHECK_THROWS_AS(flux(make_surface(SurfaceKind::Cylinder)), NotClosedSurface);
  CHECK_THROWS_AS(flux(make_surface(SurfaceKind::Plane)), NotClosedSurface);
}

TEST_CASE("flux quadrature converges on a bumpy closed surface") {
  // Torus with a varying tube radius; periodic trapezoid converges spectrally.
  SurfaceParams p;
  p.x_expr = "(3 + (1 + 0.2*cos(q2))*cos(q1))*cos(q2)";
  p.y_expr = "(3 + (1 + 0.2*cos(q2))*cos(q1))*sin(q2)";
  p.z_expr = "-(1 + 0.2*cos(q2))*sin(q1)";
  p.lo = {0.0, 0.0};
  p.hi = {2 * kPi, 2 * kPi};
  p.periodic = {true, true};
  const auto s = make_surface(SurfaceKind::Generic, p);
  FluxOptions coarse, fine;
  coarse.n1 = coarse.n2 = 16;
  fine.n1 = fine.n2 = 48;
  const double e_coarse = std::abs(flux(s, coarse).phi_over_phi0);
  const double e_fine = std::abs(flux(s, fine).phi_over_phi0);
  CHECK(e_fine < 1e-6);
  CHECK(e_fine <= e_coarse + 1e-12);
}

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  std::vector<double> x, w;
  gauss_legendre(7, x, w);
  double s0 = 0, s12 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s0 += w[i];
    s12 += w[i] * std::pow(x[i], 12);
  }
  CHECK(s0 == doctest::Approx(2.0));
  CHECK(s12 == doctest::Approx(2.0 / 13.0));
}

TEST_CASE("gauge transform shifts w by the gradient and checks winding") {
  const auto t = torus(1.0, 3.0);
  const std::vector<Point2> pts = {{0.3, 1.0}, {-1.2, 5.0}};
  const auto w = sample_w(t, pts);
  const PhaseFunction theta = [](Point2 q) { return 0.4 * std::sin(q.q1) + q.q2 / 3.0; };  // winds once in s
  const auto w2 = gauge_transform(t, w, theta);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(w2.w[i](0) == doctest::Approx(w.w[i](0) - 0.4 * std::cos(pts[i].q1)));
    CHECK(w2.w[i](1) == doctest::Approx(w.w[i](1) - 1.0 / 3.0));
  }
  const PhaseFunction bad = [](Point2 q) { return 0.5 * q.q1; };
  CHECK_THROWS_AS(gauge_transform(t, w, bad), WindingMismatch);
}

TEST_CASE("pseudo-electric field only for isotropic curvature") {
  const auto s = sphere(1.0);
  PhysicalScale nm;
  const auto e = pseudo_electric_field(s, {1.0, 1.0}, nm);
  REQUIRE(e.has_value());
  CHECK(std::abs(*e) == doctest::Approx(2 * 510998.95 / 1e-9).epsilon(2e-3));
  CHECK_FALSE(pseudo_electric_field(make_surface(SurfaceKind::Cylinder), {1.0, 1.0}, nm).has_value());
}

TEST_CASE("SOI radius estimate") {
  CHECK(soi_radius(3e-11, 0.041) * 1e9 == doctest::Approx(30.8).epsilon(0.01));
  CHECK(soi_radius(4e-11, 0.041) * 1e9 == doctest::Approx(23.1).epsilon(0.01));
  CHECK_THROWS_AS(soi_radius(0.0, 0.041), std::domain_error);
  CHECK_THROWS_AS(soi_radius(3e-11, -1.0), std::domain_error);
}
