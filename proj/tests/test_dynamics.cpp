#include <doctest.h>

#include <cmath>

#include "curvspin/dynamics.hpp"

using namespace curvspin;

namespace {

constexpr double kPi = 3.14159265358979323846;

BentCylinderSetup small_setup() {
  BentCylinderSetup s;
  s.n_theta = 31;
  s.n_s = 96;
  return s;
}

}  // namespace

TEST_CASE("bent cylinder window validation") {
  BentCylinderSetup s;
  CHECK_NOTHROW(s.validate());
  s.R = 0.5;
  CHECK_THROWS_AS(s.validate(), InvalidParameter);
  s = BentCylinderSetup{};
  s.theta_c = kPi / 2;  // sin theta not small
  CHECK_THROWS_AS(s.validate(), InvalidWindow);
  s = BentCylinderSetup{};
  s.n_theta = 4;
  CHECK_THROWS(s.validate());
}

TEST_CASE("Gaussian packet: normalized, definite spin, carries k_s") {
  const auto setup = small_setup();
  const auto ops = bent_cylinder_operators(setup);
  WavepacketSpec spec;
  spec.s_center = 4.0;
  spec.s_width = 0.6;
  spec.theta_width = 0.04;
  spec.k_s = 3.0;
  spec.spin = -1;
  const VectorC psi = gaussian_wavepacket(ops.grid, spec);
  CHECK(psi.norm() == doctest::Approx(1.0));
  CHECK(expectation(sigma3_operator(ops.grid.dimension()), psi) == doctest::Approx(-1.0));
  const double h = ops.grid.h2;
  CHECK(expectation(ops.p_s, psi) == doctest::Approx(std::sin(3.0 * h) / h).epsilon(1e-2));
  CHECK(expectation(ops.theta, psi) == doctest::Approx(0.0).scale(1.0));

  std::string warning;
  spec.k_s = 2.0;
  (void)gaussian_wavepacket(ops.grid, spec, 1.0, &warning);
  CHECK_FALSE(warning.empty());

  spec.theta_width = 0.001;
  CHECK_THROWS_AS(gaussian_wavepacket(ops.grid, spec), PacketTooNarrow);
}

TEST_CASE("zero Hamiltonian leaves the state unchanged") {
  const auto setup = small_setup();
  const auto grid = bent_cylinder_grid(setup);
  WavepacketSpec spec;
  spec.s_center = 4.0;
  const VectorC psi = gaussian_wavepacket(grid, spec);
  SparseMatrixC zero(grid.dimension(), grid.dimension());
  EvolveOptions o;
  o.dt = 0.1;
  o.steps = 10;
  const auto r = evolve(zero, psi, o);
  CHECK((r.final_state - psi).norm() < 1e-14);
  CHECK(r.steps_taken == 10);
}

TEST_CASE("Crank-Nicolson conserves norm and energy") {
  const auto setup = small_setup();
  const auto ops = bent_cylinder_operators(setup);
  const SparseMatrixC H = ops.H0.matrix + ops.Hso.matrix;
  WavepacketSpec spec;
  spec.s_center = 4.0;
  spec.k_s = 8.0;
  const VectorC psi = gaussian_wavepacket(ops.grid, spec);
  EvolveOptions o;
  o.dt = 1e-3;
  o.steps = 40;
  o.record_every = 10;
  const auto r = evolve(H, psi, o, ops.theta, ops.p_s);
  CHECK(r.trajectory.size() >= 4);
  CHECK(std::abs(r.final_state.norm() - 1.0) < 1e-12);
  CHECK(expectation(H, r.final_state) == doctest::Approx(expectation(H, psi)).epsilon(1e-10));
}

TEST_CASE("velocity and force operators are Hermitian") {
  const auto setup = small_setup();
  const auto ops = bent_cylinder_operators(setup);
  const auto f = force_operators(ops.H0.matrix, ops.Hso.matrix, ops.theta, setup.rho);
  CHECK(hermiticity_defect(f.theta_dot) < 1e-10);
  CHECK(hermiticity_defect(f.F_pm) < 1e-8);
  CHECK(hermiticity_defect(f.F_so) < 1e-8);
}

TEST_CASE("analytic force: sign, straightening limit, pm and so equal") {
  BentCylinderSetup s;
  const auto a = analytic_force(s, 8.0, 0.0);
  CHECK(a.theta_ddot > 0.0);
  CHECK(a.F_total == doctest::Approx(2 * a.F_each));
  CHECK(a.F_compact == doctest::Approx(2 * a.lorentz));
  CHECK(a.lorentz == doctest::Approx(a.B * 8.0));
  // theta_c = pi: inner side of the bend, force reverses.
  CHECK(analytic_force(s, 8.0, kPi).theta_ddot < 0.0);
  // The two forms differ by R / (R + rho cos theta), so they merge as R grows.
  double prev = 1.0;
  for (double R : {1e2, 1e3, 1e4}) {
    s.R = R;
    const auto b = analytic_force(s, 8.0, 0.0);
    const double rel = std::abs(b.F_each - b.lorentz) / b.lorentz;
    CHECK(rel < prev);
    CHECK(rel == doctest::Approx(s.rho / (R + s.rho)).epsilon(1e-6));
    prev = rel;
    // F ~ 1/R
    CHECK(b.F_each * R == doctest::Approx(8.0 / 2.0).epsilon(3.0 / R));
  }
}

TEST_CASE("numerical forces match the closed form on a coarse grid") {
  const auto setup = small_setup();
  WavepacketSpec p;
  p.s_center = 4.0;
  p.s_width = 0.5;
  p.theta_width = setup.theta0 / 3;
  const auto rep = force_equality_report(setup, p);
  CHECK(rep.up.rel_pm_so < 0.02);
  CHECK(rep.up.rel_pm_lorentz < 0.1);
  CHECK(rep.up.F_pm * rep.down.F_pm < 0.0);  // opposite for opposite spin
}

TEST_CASE("wall mass is small for a centred packet") {
  const auto grid = bent_cylinder_grid(small_setup());
  WavepacketSpec p;
  p.s_center = 4.0;
  p.theta_width = 0.1 / 3;
  const VectorC psi = gaussian_wavepacket(grid, p);
  CHECK(wall_mass(grid, psi) < 0.05);
  CHECK(wall_mass(grid, psi, 0.5) == doctest::Approx(1.0).epsilon(1e-6));
}
