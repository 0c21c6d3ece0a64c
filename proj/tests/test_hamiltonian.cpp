#include <doctest.h>

#include <cmath>
#include <sstream>

#include "curvspin/hamiltonian.hpp"
#include "curvspin/spectral.hpp"

using namespace curvspin;

namespace {

constexpr double kPi = 3.14159265358979323846;

SurfacePatch torus(double rho, double R) {
  SurfaceParams p;
  p.rho = rho;
  p.R = R;
  return make_surface(SurfaceKind::Torus, p);
}

Eigen::VectorXd lowest(const HermitianOperator& h, int k) {
  return eigensolve(h, k).values;
}

double frob(const SparseMatrixC& m) { return m.norm(); }

}  // namespace

TEST_CASE("grid construction and validation") {
  const auto cyl = make_surface(SurfaceKind::Cylinder);
  const Grid g = make_grid(cyl, 32, 1, Boundary::Periodic, Boundary::Frozen);
  CHECK(g.dimension() == 64);
  CHECK(g.h1 == doctest::Approx(2 * kPi / 32));
  CHECK(g.q2[0] == doctest::Approx(5.0));
  const Grid w = make_grid(cyl, 16, 9, Boundary::Periodic, Boundary::HardWall);
  CHECK(w.h2 == doctest::Approx(1.0));
  CHECK(w.q2.front() == doctest::Approx(1.0));
  CHECK_THROWS(make_grid(cyl, 4, 16));
  // The sphere's polar direction is not periodic.
  CHECK_THROWS(make_grid(make_surface(SurfaceKind::Sphere), 16, 16, Boundary::Periodic,
                         Boundary::Periodic));
}

TEST_CASE("flat periodic box reproduces the discrete free spectrum") {
  SurfaceParams p;
  p.length = p.length2 = 2 * kPi;
  const auto plane = make_surface(SurfaceKind::Plane, p);
  const Grid g = make_grid(plane, 16, 16);
  const auto h = assemble_Heff(plane, g);
  const auto v = lowest(h, 12);
  const double e1 = (1.0 - std::cos(g.h1)) / (g.h1 * g.h1);
  CHECK(std::abs(v(0)) < 1e-10);
  CHECK(std::abs(v(1)) < 1e-10);
  for (int i = 2; i < 10; ++i) CHECK(v(i) == doctest::Approx(e1).epsilon(1e-10));
  // Spin-orbit part vanishes identically on a flat surface.
  CHECK(frob(assemble_Hso(plane, g).matrix) < 1e-12);
}

TEST_CASE("cylinder theta problem: fourfold levels with the connection, n^2/2 without") {
  const auto cyl = make_surface(SurfaceKind::Cylinder);
  const Grid g = make_grid(cyl, 128, 1, Boundary::Periodic, Boundary::Frozen);
  const auto heff = lowest(assemble_Heff(cyl, g), 16);
  const double expected[] = {0.0, 1.0, 3.0, 6.0};
  for (int i = 0; i < 16; ++i)
    CHECK(heff(i) == doctest::Approx(expected[i / 4]).epsilon(1e-2).scale(1.0));
  const auto cl = degeneracy_clusters(heff, 1e-8);
  REQUIRE(cl.size() >= 3);
  CHECK(cl[0].multiplicity == 4);
  CHECK(cl[1].multiplicity == 4);

  const auto h0 = lowest(assemble_H0(cyl, g), 10);
  CHECK(std::abs(h0(0)) < 1e-12);
  CHECK(std::abs(h0(1)) < 1e-12);
  for (int i = 2; i < 6; ++i) CHECK(h0(i) == doctest::Approx(0.5).epsilon(1e-3));
  for (int i = 6; i < 10; ++i) CHECK(h0(i) == doctest::Approx(2.0).epsilon(2e-3));
}

TEST_CASE("operators are Hermitian and time-reversal symmetric") {
  const auto t = torus(1.0, 2.5);
  const Grid g = make_grid(t, 10, 12);
  for (const auto& h : {assemble_H0(t, g), assemble_Hso(t, g), assemble_Heff(t, g)}) {
    CHECK(hermiticity_defect(h) <= 1e-12 * h.max_abs());
    CHECK(time_reversal_defect(h) <= 1e-12 * h.max_abs());
  }
  AssemblyOptions centered;
  centered.spin_orbit = SpinOrbitScheme::Centered;
  const auto hc = assemble_Hso(t, g, centered);
  CHECK(time_reversal_defect(hc) <= 1e-12 * hc.max_abs());
  CHECK(hc.terms.spin_orbit_scheme == SpinOrbitScheme::Centered);
}

TEST_CASE("gauge rotation acts covariantly") {
  const auto t = torus(1.0, 2.0);
  const Grid g = make_grid(t, 10, 12);
  AssemblyOptions rotated;
  rotated.gauge = [](Point2 q) { return 0.7 * std::cos(q.q1) + q.q2 / 2.0 + 0.3; };
  const SparseMatrixC G = gauge_rotation(g, rotated.gauge);
  const SparseMatrixC Gd = G.adjoint();
  for (int which = 0; which < 2; ++which) {
    const auto h = which == 0 ? assemble_H0(t, g) : assemble_Heff(t, g);
    const auto hr = which == 0 ? assemble_H0(t, g, rotated) : assemble_Heff(t, g, rotated);
    const SparseMatrixC expect = G * h.matrix * Gd;
    const SparseMatrixC diff = hr.matrix - expect;
    CHECK(frob(diff) <= 1e-10 * frob(h.matrix));
  }
  AssemblyOptions bad;
  bad.gauge = [](Point2 q) { return 0.25 * q.q1; };
  CHECK_THROWS_AS(assemble_H0(t, g, bad), WindingMismatch);
}

TEST_CASE("centered spin-orbit scheme converges to the link scheme") {
  const auto cyl = make_surface(SurfaceKind::Cylinder);
  AssemblyOptions centered;
  centered.spin_orbit = SpinOrbitScheme::Centered;
  double prev = 1e9;
  for (int n : {32, 64, 128}) {
    const Grid g = make_grid(cyl, n, 1, Boundary::Periodic, Boundary::Frozen);
    const SparseMatrixC h = assemble_H0(cyl, g).matrix + assemble_Hso(cyl, g, centered).matrix;
    const auto v = eigensolve(h, 8).values;
    // level at 1 (index 4..7)
    double err = 0;
    for (int i = 4; i < 8; ++i) err = std::max(err, std::abs(v(i) - 1.0));
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 5e-3);
}

TEST_CASE("scalar potential options") {
  const auto cyl = make_surface(SurfaceKind::Cylinder);
  const Grid g = make_grid(cyl, 32, 1, Boundary::Periodic, Boundary::Frozen);
  AssemblyOptions none, dacosta;
  none.scalar = ScalarPotential::None;
  dacosta.scalar = ScalarPotential::DaCosta;
  // Cylinder: K = 0, M = 1/2.
  const SparseMatrixC d1 = assemble_H0(cyl, g, dacosta).matrix - assemble_H0(cyl, g, none).matrix;
  CHECK(std::abs(d1.coeff(0, 0).real() + 0.125) < 1e-12);
  const SparseMatrixC d2 = assemble_H0(cyl, g).matrix - assemble_H0(cyl, g, none).matrix;
  CHECK(std::abs(d2.coeff(0, 0)) < 1e-12);
  CHECK(scalar_potential_from_string("da-costa") == ScalarPotential::DaCosta);
  CHECK_THROWS(scalar_potential_from_string("nope"));
}

TEST_CASE("apply and coordinate export") {
  const auto t = torus(1.0, 3.0);
  const Grid g = make_grid(t, 8, 8);
  const auto h = assemble_Heff(t, g);
  const VectorC x = VectorC::Random(g.dimension());
  const VectorC y = VectorC::Random(g.dimension());
  const cplx a(0.3, -1.1);
  const VectorC xy = x + a * y;
  const VectorC lhs = curvspin::apply(h, xy);
  const VectorC rhs = curvspin::apply(h, x) + a * curvspin::apply(h, y);
  CHECK((lhs - rhs).norm() < 1e-12 * lhs.norm());
  const VectorC wrong = VectorC::Zero(g.dimension() + 2);
  CHECK_THROWS_AS(curvspin::apply(h, wrong), DimensionMismatch);

  std::ostringstream os;
  write_coo(os, h.matrix);
  std::istringstream is(os.str());
  long lines = 0;
  std::string line;
  while (std::getline(is, line))
    if (!line.empty() && line[0] != '#') ++lines;
  CHECK(lines == h.matrix.nonZeros());
}

TEST_CASE("singular parametrization is rejected") {
  const auto s = make_surface(SurfaceKind::Sphere);
  // Frozen polar angle on the pole.
  const Grid g = make_grid(s, 1, 16, Boundary::Frozen, Boundary::Periodic, 0.0);
  CHECK_THROWS_AS(assemble_H0(s, g), SingularGeometry);
}
