#pragma once

#include <functional>
#include <string>
#include <vector>

#include "curvspin/hamiltonian.hpp"

namespace curvspin {

class InvalidWindow : public InvalidParameter {
 public:
  using InvalidParameter::InvalidParameter;
};

/// Strip theta in [theta_c - theta0, theta_c + theta0] of a bent cylinder
/// (torus with tube radius rho and axis radius R), s = arclength of the axis.
struct BentCylinderSetup {
  double rho = 1.0;
  double R = 20.0;
  double theta_c = 0.0;
  double theta0 = 0.1;
  double s_length = 8.0;
  int n_theta = 47;
  int n_s = 384;
  bool s_periodic = true;

  /// Throws InvalidWindow / InvalidParameter.
  void validate() const;
  double theta_lo() const { return theta_c - theta0; }
  double theta_hi() const { return theta_c + theta0; }
};

/// Torus patch restricted to the setup's window (theta hard walls, s periodic
/// or hard wall), so the general assembler can be run on the same grid.
SurfacePatch bent_cylinder_patch(const BentCylinderSetup& setup);
Grid bent_cylinder_grid(const BentCylinderSetup& setup);

struct BentCylinderOperators {
  Grid grid;
  HermitianOperator H0;
  HermitianOperator Hso;
  SparseMatrixC theta;  ///< multiplication by theta
  SparseMatrixC p_s;    ///< -i d_s, centred differences
};

/// Operators written out from the closed-form bent-cylinder expressions.
/// The SOI first-derivative terms use the symmetric (anticommutator) centred
/// form so the matrix is Hermitian.
BentCylinderOperators bent_cylinder_operators(const BentCylinderSetup& setup);

struct ForceOperators {
  SparseMatrixC theta_dot;  ///< -i [theta, H0 + Hso]
  SparseMatrixC F_pm;       ///< rho^2 (-i)[theta_dot, H0]
  SparseMatrixC F_so;       ///< rho^2 (-i)[theta_dot, Hso]
};

ForceOperators force_operators(const SparseMatrixC& H0, const SparseMatrixC& Hso,
                               const SparseMatrixC& theta, double rho);

/// Closed-form forces for spin sigma3 = +1 (flip the sign for -1).
struct AnalyticForce {
  double theta_ddot = 0.0;   ///< p_s R cos(theta) / (2 rho^2 (R + rho cos theta)^2), each of pm and so
  double F_each = 0.0;       ///< rho^2 * theta_ddot
  double B = 0.0;            ///< cos(theta) / (2 rho (R + rho cos theta)), natural units
  double lorentz = 0.0;      ///< e B v_s (single mechanism, sigma3 = +1)
  double F_total = 0.0;      ///< 2 F_each
  double F_compact = 0.0;    ///< 2 e B v_s
};

AnalyticForce analytic_force(const BentCylinderSetup& setup, double p_s, double theta);

struct WavepacketSpec {
  double theta_center = 0.0;
  double s_center = 0.0;
  double theta_width = 0.03;
  double s_width = 0.5;
  double k_s = 8.0;
  int spin = +1;  ///< sigma3 eigenvalue
};

class PacketTooNarrow : public InvalidParameter {
 public:
  using InvalidParameter::InvalidParameter;
};

/// Normalized Gaussian spinor exp(-(dq/2w)^2 + i k_s s) with definite sigma3
/// on the (flat-measure) grid. Widths must cover >= 4 grid spacings. `warning`
/// receives a message when 2 pi / k_s >= rho.
VectorC gaussian_wavepacket(const Grid& grid, const WavepacketSpec& spec, double rho = 1.0,
                            std::string* warning = nullptr);

double expectation(const SparseMatrixC& op, const VectorC& psi);
SparseMatrixC sigma3_operator(int dimension);

struct TrajectorySample {
  double t = 0.0;
  double mean_theta = 0.0;
  double sigma3 = 0.0;
  double mean_ps = 0.0;
  double norm = 0.0;
};

struct EvolveOptions {
  double dt = 1e-3;
  int steps = 100;
  int record_every = 1;
  /// Return true to stop early (e.g. packet reached a wall).
  std::function<bool(const VectorC&, double)> stop;
};

struct EvolveResult {
  std::vector<TrajectorySample> trajectory;
  VectorC final_state;
  int steps_taken = 0;
  bool stopped_early = false;
};

class SolveFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Crank-Nicolson (implicit midpoint) steps with one sparse LU factorization.
/// Unconditionally stable and norm preserving; accuracy needs dt E << 1 for
/// the energies that matter. Observables use whichever of theta/p_s are given
/// (empty matrices report 0).
EvolveResult evolve(const SparseMatrixC& H, const VectorC& psi0, const EvolveOptions& options,
                    const SparseMatrixC& theta = {}, const SparseMatrixC& p_s = {});

struct ForceSpecies {
  int spin = 1;
  double mean_theta = 0.0;
  double mean_ps = 0.0;
  double F_pm = 0.0;
  double F_so = 0.0;
  AnalyticForce analytic;       ///< at (mean p_s, mean theta), sigma3 = +1
  double expected_each = 0.0;   ///< spin * e B v_s
  double rel_pm_so = 0.0;       ///< |F_pm - F_so| / |F_pm|
  double rel_pm_lorentz = 0.0;  ///< |F_pm - expected_each| / |expected_each|
  double rel_so_lorentz = 0.0;
  double rel_total_compact = 0.0;  ///< |F_pm + F_so - 2 spin e B v_s| / |2 e B v_s|
};

struct ForceReport {
  BentCylinderSetup setup;
  ForceSpecies up, down;
};

ForceReport force_equality_report(const BentCylinderSetup& setup, const WavepacketSpec& packet);
ForceReport force_equality_report(const BentCylinderSetup& setup, const BentCylinderOperators& ops,
                                  const ForceOperators& forces, const WavepacketSpec& packet);

/// Probability within `band` (fraction of the range) of either hard wall in q1.
double wall_mass(const Grid& grid, const VectorC& psi, double band = 0.1);

/// Spin-up and spin-down packets evolved under H0 + Hso on the same grid.
/// The measured window ends after the packet has moved `travel_widths` s-widths
/// (at v_s = k_s) or when the wall-band mass exceeds
/// max(10 x its initial value, 1e-3), whichever comes first.
struct SpinHallRun {
  std::vector<double> t, theta_up, theta_down, ps_up, ps_down, sigma3_up, sigma3_down;
  double mean_deflection_up = 0.0;    ///< time average of <theta> - theta_c
  double mean_deflection_down = 0.0;
  double norm_drift = 0.0;            ///< max | |psi| - 1 | over both runs
  int steps = 0;
  bool stopped_at_wall = false;
};

SpinHallRun spin_hall_run(const BentCylinderSetup& setup, const WavepacketSpec& packet, double dt,
                          double travel_widths = 10.0);

}  // namespace curvspin
