#include "curvspin/dynamics.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <array>
#include <cmath>

namespace curvspin {

namespace {

constexpr double kPi = 3.14159265358979323846;

using Triplets = std::vector<Eigen::Triplet<cplx>>;

void add_block(Triplets& t, int p, int q, const Mat2c& b) {
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      if (b(r, c) != cplx(0.0)) t.emplace_back(2 * p + r, 2 * q + c, b(r, c));
}

SparseMatrixC build(int dim, const Triplets& t) {
  SparseMatrixC m(dim, dim);
  m.setFromTriplets(t.begin(), t.end());
  m.prune(cplx(0.0), 0.0);
  return m;
}

double max_abs(const SparseMatrixC& m) {
  double r = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrixC::InnerIterator it(m, k); it; ++it) r = std::max(r, std::abs(it.value()));
  return r;
}

void require_same(const SparseMatrixC& a, const SparseMatrixC& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch(std::string("operator dimensions differ in ") + what);
}

}  // namespace

void BentCylinderSetup::validate() const {
  if (!(rho > 0.0)) throw InvalidParameter("bent cylinder needs rho > 0");
  if (!(R > rho)) throw InvalidParameter("bent cylinder needs R > rho");
  if (!(theta0 > 0.0)) throw InvalidWindow("theta0 must be positive");
  if (theta0 >= kPi) throw InvalidWindow("theta window wraps the period (theta0 >= pi)");
  const double lo = theta_lo(), hi = theta_hi();
  double smax = std::max(std::abs(std::sin(lo)), std::abs(std::sin(hi)));
  for (int k = -4; k <= 4; ++k) {
    const double crest = kPi / 2 + k * kPi;
    if (crest > lo && crest < hi) smax = 1.0;
  }
  if (smax >= 0.2)
    throw InvalidWindow("theta window reaches |sin theta| = " + std::to_string(smax) +
                        " (must stay below 0.2)");
  if (!(s_length > 0.0)) throw InvalidParameter("s_length must be positive");
  if (n_theta < 8 || n_s < 8) throw InvalidParameter("bent cylinder grid needs >= 8 nodes per direction");
}

SurfacePatch bent_cylinder_patch(const BentCylinderSetup& setup) {
  setup.validate();
  SurfaceParams p;
  p.rho = setup.rho;
  p.R = setup.R;
  return make_surface(SurfaceKind::Torus, p)
      .with_domain({setup.theta_lo(), 0.0}, {setup.theta_hi(), setup.s_length},
                   {false, setup.s_periodic});
}

Grid bent_cylinder_grid(const BentCylinderSetup& setup) {
  return make_grid(bent_cylinder_patch(setup), setup.n_theta, setup.n_s, Boundary::HardWall,
                   setup.s_periodic ? Boundary::Periodic : Boundary::HardWall);
}

BentCylinderOperators bent_cylinder_operators(const BentCylinderSetup& setup) {
  BentCylinderOperators ops;
  ops.grid = bent_cylinder_grid(setup);
  const Grid& g = ops.grid;
  const double rho = setup.rho, R = setup.R;
  const double ht = g.h1, hs = g.h2;
  const int dim = g.dimension();
  const cplx i(0.0, 1.0);
  const Mat2c id = Mat2c::Identity();
  const Mat2c& s1 = pauli::sigma(0);
  const Mat2c& s2 = pauli::sigma(1);

  auto h = [&](double th) { return (R + rho * std::cos(th)) / R; };
  auto sqrtg = [&](double th) { return rho * h(th); };
  // Coordinate Pauli matrices sigma_theta = rho sigma_1, sigma_s = h sigma_2.
  auto sig_theta = [&](double) { return Mat2c(rho * s1); };
  auto sig_s = [&](double th) { return Mat2c(h(th) * s2); };
  // H_so = (i/2) [Q^s d_s + Q^theta d_theta] (hbar = m = 1).
  auto q_s = [&](double th) {
    const double P = R + rho * std::cos(th);
    return Mat2c(R / (rho * P) * std::cos(th) / P * sig_theta(th));
  };
  auto q_theta = [&](double th) {
    const double P = R + rho * std::cos(th);
    return Mat2c(-R / (rho * P) / rho * sig_s(th));
  };

  Triplets t0, tso, tth, tps;
  for (int a = 0; a < g.n1; ++a) {
    const double th = g.q1[static_cast<std::size_t>(a)];
    const double P = R + rho * std::cos(th);
    const double kin_s = 0.5 * (R * R) / (P * P) / (hs * hs);
    Mat2c link = Mat2c::Zero();  // exp(-i sigma_3 sin(theta) hs / 2R)
    link(0, 0) = std::exp(cplx(0.0, -std::sin(th) * hs / (2.0 * R)));
    link(1, 1) = std::conj(link(0, 0));
    const double hm = h(th - 0.5 * ht), hp = h(th + 0.5 * ht);
    const double theta_diag = 0.5 / (rho * rho * ht * ht) * (hm + hp) / h(th);
    for (int b = 0; b < g.n2; ++b) {
      const int p = g.node(a, b);
      // theta kinetic, -(1/2 rho^2)(1/h) d_theta (h d_theta), flat measure
      add_block(t0, p, p, (theta_diag + 2.0 * kin_s + std::cos(th) / (4.0 * rho * P)) * id);
      if (a + 1 < g.n1) {
        const double thn = g.q1[static_cast<std::size_t>(a + 1)];
        const int q = g.node(a + 1, b);
        const double off = -0.5 / (rho * rho * ht * ht) * hp / std::sqrt(h(th) * h(thn));
        add_block(t0, p, q, off * id);
        add_block(t0, q, p, off * id);
        // SOI theta derivative, symmetric centred form with g^{1/4} rescaling
        const Mat2c blk = (0.5 * i) / (4.0 * ht) * std::pow(sqrtg(th) * sqrtg(thn), -0.5) *
                          (sqrtg(th) * q_theta(th) + sqrtg(thn) * q_theta(thn));
        add_block(tso, p, q, blk);
        add_block(tso, q, p, blk.adjoint());
      }
      // s kinetic with the sigma_3 sin(theta)/2R gauge term as a link phase
      const bool wrap = b + 1 == g.n2;
      if (!wrap || setup.s_periodic) {
        const int q = g.node(a, wrap ? 0 : b + 1);
        add_block(t0, p, q, -kin_s * link);
        add_block(t0, q, p, -kin_s * link.adjoint());
        const Mat2c blk = (0.5 * i) / (2.0 * hs) * q_s(th);
        add_block(tso, p, q, blk);
        add_block(tso, q, p, blk.adjoint());
        add_block(tps, p, q, cplx(0.0, -1.0 / (2.0 * hs)) * id);
        add_block(tps, q, p, cplx(0.0, 1.0 / (2.0 * hs)) * id);
      }
      add_block(tth, p, p, th * id);
    }
  }
  ops.H0.matrix = build(dim, t0);
  ops.H0.grid = g;
  ops.H0.terms.kinetic = ops.H0.terms.gauge_phases = ops.H0.terms.scalar = true;
  ops.Hso.matrix = build(dim, tso);
  ops.Hso.grid = g;
  ops.Hso.terms.spin_orbit = true;
  ops.Hso.terms.spin_orbit_scheme = SpinOrbitScheme::Centered;
  ops.theta = build(dim, tth);
  ops.p_s = build(dim, tps);
  for (const auto* m : {&ops.H0.matrix, &ops.Hso.matrix})
    if (hermiticity_defect(*m) > 1e-12 * std::max(1.0, max_abs(*m)))
      throw std::logic_error("bent-cylinder operator is not Hermitian");
  return ops;
}

ForceOperators force_operators(const SparseMatrixC& H0, const SparseMatrixC& Hso,
                               const SparseMatrixC& theta, double rho) {
  require_same(H0, Hso, "force_operators (H0 vs Hso)");
  require_same(H0, theta, "force_operators (H0 vs theta)");
  const cplx mi(0.0, -1.0);
  const SparseMatrixC H = H0 + Hso;
  ForceOperators f;
  f.theta_dot = mi * SparseMatrixC(theta * H - H * theta);
  f.F_pm = (mi * rho * rho) * SparseMatrixC(f.theta_dot * H0 - H0 * f.theta_dot);
  f.F_so = (mi * rho * rho) * SparseMatrixC(f.theta_dot * Hso - Hso * f.theta_dot);
  return f;
}

AnalyticForce analytic_force(const BentCylinderSetup& setup, double p_s, double theta) {
  const double rho = setup.rho, R = setup.R;
  const double P = R + rho * std::cos(theta);
  AnalyticForce a;
  a.theta_ddot = p_s * R * std::cos(theta) / (2.0 * rho * rho * P * P);
  a.F_each = rho * rho * a.theta_ddot;
  a.F_total = 2.0 * a.F_each;
  a.B = std::cos(theta) / (2.0 * rho * P);
  a.lorentz = a.B * p_s;
  a.F_compact = 2.0 * a.lorentz;
  return a;
}

VectorC gaussian_wavepacket(const Grid& grid, const WavepacketSpec& spec, double rho,
                            std::string* warning) {
  if (spec.spin != 1 && spec.spin != -1) throw InvalidParameter("spin must be +1 or -1");
  if (grid.bc1 != Boundary::Frozen && spec.theta_width < 4.0 * grid.h1)
    throw PacketTooNarrow("packet width in q1 is below 4 grid spacings");
  if (grid.bc2 != Boundary::Frozen && spec.s_width < 4.0 * grid.h2)
    throw PacketTooNarrow("packet width in q2 is below 4 grid spacings");
  if (warning) {
    warning->clear();
    if (spec.k_s != 0.0 && 2.0 * kPi / std::abs(spec.k_s) >= rho)
      *warning = "wavelength 2pi/k_s = " + std::to_string(2.0 * kPi / std::abs(spec.k_s)) +
                 " is not below rho";
  }
  VectorC psi = VectorC::Zero(grid.dimension());
  const int comp = spec.spin == 1 ? 0 : 1;
  for (int a = 0; a < grid.n1; ++a)
    for (int b = 0; b < grid.n2; ++b) {
      const Point2 q = grid.point(a, b);
      double x1 = 0.0, x2 = 0.0;
      if (grid.bc1 != Boundary::Frozen) x1 = (q.q1 - spec.theta_center) / (2.0 * spec.theta_width);
      if (grid.bc2 != Boundary::Frozen) x2 = (q.q2 - spec.s_center) / (2.0 * spec.s_width);
      psi(2 * grid.node(a, b) + comp) =
          std::exp(-(x1 * x1 + x2 * x2)) * std::exp(cplx(0.0, spec.k_s * q.q2));
    }
  return psi / psi.norm();
}

double expectation(const SparseMatrixC& op, const VectorC& psi) {
  if (op.cols() != psi.size()) throw DimensionMismatch("expectation: dimension mismatch");
  return psi.dot(op * psi).real() / psi.squaredNorm();
}

SparseMatrixC sigma3_operator(int dimension) {
  SparseMatrixC m(dimension, dimension);
  m.reserve(Eigen::VectorXi::Constant(dimension, 1));
  for (int k = 0; k < dimension; ++k) m.insert(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
  m.makeCompressed();
  return m;
}

EvolveResult evolve(const SparseMatrixC& H, const VectorC& psi0, const EvolveOptions& options,
                    const SparseMatrixC& theta, const SparseMatrixC& p_s) {
  if (H.rows() != psi0.size()) throw DimensionMismatch("evolve: field and operator differ in size");
  if (!(options.dt > 0.0) || options.steps < 0) throw InvalidParameter("evolve needs dt > 0, steps >= 0");
  const int dim = static_cast<int>(H.rows());
  Eigen::SparseMatrix<cplx> eye(dim, dim);
  eye.setIdentity();
  const Eigen::SparseMatrix<cplx> Hc = H;
  const cplx half(0.0, 0.5 * options.dt);
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
  lu.compute(eye + half * Hc);
  if (lu.info() != Eigen::Success) throw SolveFailure("Crank-Nicolson factorization failed");
  const SparseMatrixC s3 = sigma3_operator(dim);

  EvolveResult res;
  VectorC psi = psi0;
  auto record = [&](double t) {
    TrajectorySample s;
    s.t = t;
    s.norm = psi.norm();
    s.sigma3 = expectation(s3, psi);
    if (theta.size() > 0) s.mean_theta = expectation(theta, psi);
    if (p_s.size() > 0) s.mean_ps = expectation(p_s, psi);
    res.trajectory.push_back(s);
  };
  record(0.0);
  const int every = std::max(options.record_every, 1);
  for (int n = 1; n <= options.steps; ++n) {
    const VectorC rhs = psi - half * (H * psi);
    psi = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !psi.allFinite())
      throw SolveFailure("Crank-Nicolson solve failed at step " + std::to_string(n));
    res.steps_taken = n;
    const double t = n * options.dt;
    const bool stop = options.stop && options.stop(psi, t);
    if (n % every == 0 || stop || n == options.steps) record(t);
    if (stop) {
      res.stopped_early = true;
      break;
    }
  }
  res.final_state = psi;
  return res;
}

ForceReport force_equality_report(const BentCylinderSetup& setup, const BentCylinderOperators& ops,
                                  const ForceOperators& forces, const WavepacketSpec& packet) {
  ForceReport rep;
  rep.setup = setup;
  for (int spin : {1, -1}) {
    WavepacketSpec spec = packet;
    spec.spin = spin;
    const VectorC psi = gaussian_wavepacket(ops.grid, spec, setup.rho);
    ForceSpecies f;
    f.spin = spin;
    f.mean_theta = expectation(ops.theta, psi);
    f.mean_ps = expectation(ops.p_s, psi);
    f.F_pm = expectation(forces.F_pm, psi);
    f.F_so = expectation(forces.F_so, psi);
    f.analytic = analytic_force(setup, f.mean_ps, f.mean_theta);
    f.expected_each = spin * f.analytic.lorentz;
    f.rel_pm_so = std::abs(f.F_pm - f.F_so) / std::abs(f.F_pm);
    f.rel_pm_lorentz = std::abs(f.F_pm - f.expected_each) / std::abs(f.expected_each);
    f.rel_so_lorentz = std::abs(f.F_so - f.expected_each) / std::abs(f.expected_each);
    f.rel_total_compact = std::abs(f.F_pm + f.F_so - 2.0 * f.expected_each) / std::abs(2.0 * f.expected_each);
    (spin == 1 ? rep.up : rep.down) = f;
  }
  return rep;
}

ForceReport force_equality_report(const BentCylinderSetup& setup, const WavepacketSpec& packet) {
  const BentCylinderOperators ops = bent_cylinder_operators(setup);
  const ForceOperators forces = force_operators(ops.H0.matrix, ops.Hso.matrix, ops.theta, setup.rho);
  return force_equality_report(setup, ops, forces, packet);
}


double wall_mass(const Grid& grid, const VectorC& psi, double band) {
  if (grid.bc1 != Boundary::HardWall) return 0.0;
  const double lo = grid.q1.front() - grid.h1, hi = grid.q1.back() + grid.h1;
  const double w = band * (hi - lo);
  double mass = 0.0;
  for (int a = 0; a < grid.n1; ++a) {
    const double q = grid.q1[static_cast<std::size_t>(a)];
    if (q - lo > w && hi - q > w) continue;
    for (int b = 0; b < grid.n2; ++b) {
      const int p = grid.node(a, b);
      mass += std::norm(psi(2 * p)) + std::norm(psi(2 * p + 1));
    }
  }
  return mass / psi.squaredNorm();
}

SpinHallRun spin_hall_run(const BentCylinderSetup& setup, const WavepacketSpec& packet, double dt,
                          double travel_widths) {
  const BentCylinderOperators ops = bent_cylinder_operators(setup);
  const SparseMatrixC H = ops.H0.matrix + ops.Hso.matrix;
  const double speed = std::abs(packet.k_s);
  if (speed == 0.0) throw InvalidParameter("spin Hall run needs k_s != 0");
  const int steps = static_cast<int>(std::ceil(travel_widths * packet.s_width / (speed * dt)));
  SpinHallRun run;
  std::array<EvolveResult, 2> res;
  for (int k = 0; k < 2; ++k) {
    WavepacketSpec spec = packet;
    spec.spin = k == 0 ? 1 : -1;
    const VectorC psi0 = gaussian_wavepacket(ops.grid, spec, setup.rho);
    const double limit = std::max(10.0 * wall_mass(ops.grid, psi0), 1e-3);
    EvolveOptions eo;
    eo.dt = dt;
    eo.steps = steps;
    eo.stop = [&](const VectorC& psi, double) { return wall_mass(ops.grid, psi) > limit; };
    res[static_cast<std::size_t>(k)] = evolve(H, psi0, eo, ops.theta, ops.p_s);
  }
  const std::size_t n = std::min(res[0].trajectory.size(), res[1].trajectory.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& u = res[0].trajectory[i];
    const auto& d = res[1].trajectory[i];
    run.t.push_back(u.t);
    run.theta_up.push_back(u.mean_theta);
    run.theta_down.push_back(d.mean_theta);
    run.ps_up.push_back(u.mean_ps);
    run.ps_down.push_back(d.mean_ps);
    run.sigma3_up.push_back(u.sigma3);
    run.sigma3_down.push_back(d.sigma3);
    run.mean_deflection_up += u.mean_theta - setup.theta_c;
    run.mean_deflection_down += d.mean_theta - setup.theta_c;
    run.norm_drift = std::max({run.norm_drift, std::abs(u.norm - 1.0), std::abs(d.norm - 1.0)});
  }
  if (n > 0) {
    run.mean_deflection_up /= static_cast<double>(n);
    run.mean_deflection_down /= static_cast<double>(n);
  }
  run.steps = static_cast<int>(n) - 1;
  run.stopped_at_wall = res[0].stopped_early || res[1].stopped_early;
  return run;
}

}  // namespace curvspin
