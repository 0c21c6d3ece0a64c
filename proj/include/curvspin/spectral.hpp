#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "curvspin/hamiltonian.hpp"

namespace curvspin {

enum class Which { Lowest, NearestTarget };

struct EigensolveOptions {
  Which which = Which::Lowest;
  double target = 0.0;
  bool vectors = false;
  int dense_limit = 4096;     ///< dense Hermitian solve up to this dimension
  int block = 8;              ///< Krylov block size (>= expected multiplicity)
  int max_restarts = 60;
  std::uint64_t seed = 20240611;
  double tolerance = 1e-10;   ///< residual contract relative to ||H||
};

struct Cluster {
  double value = 0.0;   ///< mean of the members
  int multiplicity = 0;
  int first = 0;        ///< index of the first member
};

struct SpectrumResult {
  Eigen::VectorXd values;        ///< ascending
  Eigen::MatrixXcd vectors;      ///< columns, empty unless requested
  std::vector<double> residuals; ///< ||H v - lambda v|| per pair
  std::vector<Cluster> clusters;
  double operator_norm = 0.0;    ///< max row sum bound on ||H||
  std::string method;
  int iterations = 0;
  double max_residual() const;
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_residual(achieved) {}
  double achieved_residual;
};

SpectrumResult eigensolve(const SparseMatrixC& m, int k, const EigensolveOptions& options = {});
SpectrumResult eigensolve(const HermitianOperator& op, int k, const EigensolveOptions& options = {});

/// Greedy clustering on consecutive gaps. tol <= 0 selects 1e-8 x (max - min).
std::vector<Cluster> degeneracy_clusters(const std::vector<double>& sorted_values, double tol = 0.0);
std::vector<Cluster> degeneracy_clusters(const Eigen::VectorXd& sorted_values, double tol = 0.0);

/// Transverse level |n, s> of a straight cylinder. With the spin connection
/// E = (n^2 + s n)/(2 rho^2) and j = n + s/2; without it E = n^2/(2 rho^2).
/// Energies in natural units hbar = m = 1.
struct CylinderLevel {
  int n = 0;
  int s = 1;
  double j = 0.0;
  double energy = 0.0;
};

std::vector<CylinderLevel> cylinder_analytic_spectrum(double rho, int n_max, bool with_connection);

struct ConductanceCurve {
  std::vector<double> energy;
  std::vector<int> channels;          ///< N(E) = #{thresholds < E}
  std::vector<double> g_over_e2h;     ///< G / (e^2/h) = N
  std::vector<double> thresholds;     ///< ascending, all thresholds counted
  bool with_connection = true;
};

/// Thresholds from cylinder_analytic_spectrum with n_max large enough for max(E).
ConductanceCurve conductance_curve(double rho, const std::vector<double>& energies,
                                   bool with_connection);

/// Same channel counting with externally supplied thresholds (e.g. a numeric
/// transverse spectrum).
ConductanceCurve conductance_curve(const std::vector<double>& thresholds,
                                   const std::vector<double>& energies, bool with_connection);

}  // namespace curvspin
