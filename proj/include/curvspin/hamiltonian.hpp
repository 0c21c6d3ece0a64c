#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "curvspin/frame.hpp"
#include "curvspin/gauge.hpp"

namespace curvspin {

using SparseMatrixC = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
using VectorC = Eigen::VectorXcd;

/// Per-direction boundary handling. Frozen keeps a single node and drops the
/// derivative along that direction (used for the cylinder's theta-only problem).
enum class Boundary { Periodic, HardWall, Frozen };

std::string to_string(Boundary b);

/// Uniform tensor grid over a patch. Periodic: h = span/n, nodes lo + i h.
/// Hard wall: h = span/(n+1), nodes lo + (i+1) h, field zero at lo and hi.
struct Grid {
  int n1 = 0, n2 = 0;
  double h1 = 1.0, h2 = 1.0;
  Boundary bc1 = Boundary::Periodic, bc2 = Boundary::Periodic;
  std::vector<double> q1, q2;

  int nodes() const { return n1 * n2; }
  int dimension() const { return 2 * n1 * n2; }
  int node(int i, int j) const { return i * n2 + j; }
  Point2 point(int i, int j) const { return {q1[static_cast<std::size_t>(i)], q2[static_cast<std::size_t>(j)]}; }
  int count(int a) const { return a == 0 ? n1 : n2; }
  double spacing(int a) const { return a == 0 ? h1 : h2; }
  Boundary boundary(int a) const { return a == 0 ? bc1 : bc2; }
};

/// n >= 8 in every non-frozen direction. `frozen_at` fixes the coordinate of a
/// frozen direction (defaults to the middle of the range).
Grid make_grid(const SurfacePatch& patch, int n1, int n2, Boundary bc1, Boundary bc2,
               double frozen_at1 = std::numeric_limits<double>::quiet_NaN(),
               double frozen_at2 = std::numeric_limits<double>::quiet_NaN());

/// Boundaries follow the patch: periodic where periodic, hard wall otherwise.
Grid make_grid(const SurfacePatch& patch, int n1, int n2);

enum class ScalarPotential { QuarterK, DaCosta, None };
enum class SpinOrbitScheme { Link, Centered };

std::string to_string(ScalarPotential s);
ScalarPotential scalar_potential_from_string(const std::string& s);

struct AssemblyOptions {
  ScalarPotential scalar = ScalarPotential::QuarterK;
  SpinOrbitScheme spin_orbit = SpinOrbitScheme::Link;
  bool gauge_phases = true;   ///< sigma_3 w link phases in H0
  PhaseFunction gauge;        ///< optional gauge rotation exp(i sigma_3 theta(q))
  FrameOptions frame;
};

struct OperatorTerms {
  bool kinetic = false;
  bool scalar = false;
  bool gauge_phases = false;
  bool spin_orbit = false;
  ScalarPotential scalar_kind = ScalarPotential::QuarterK;
  SpinOrbitScheme spin_orbit_scheme = SpinOrbitScheme::Link;
  std::string describe() const;
};

/// Sparse Hermitian matrix on the flat (g^{1/4}-rescaled) inner product.
/// Unknowns are ordered node-major with the two spin components innermost.
struct HermitianOperator {
  SparseMatrixC matrix;
  Grid grid;
  OperatorTerms terms;

  int dimension() const { return static_cast<int>(matrix.rows()); }
  double max_abs() const;
};

class SingularGeometry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

HermitianOperator assemble_H0(const SurfacePatch& patch, const Grid& grid,
                              const AssemblyOptions& options = {});
HermitianOperator assemble_Hso(const SurfacePatch& patch, const Grid& grid,
                               const AssemblyOptions& options = {});
HermitianOperator assemble_Heff(const SurfacePatch& patch, const Grid& grid,
                                const AssemblyOptions& options = {});

/// max |H - H^dagger| (absolute).
double hermiticity_defect(const SparseMatrixC& m);
double hermiticity_defect(const HermitianOperator& op);

/// max |T H T^-1 - H| with T = i sigma_y C acting on every node.
double time_reversal_defect(const SparseMatrixC& m);
double time_reversal_defect(const HermitianOperator& op);

VectorC apply(const HermitianOperator& op, const VectorC& field);
VectorC apply(const SparseMatrixC& m, const VectorC& field);

/// Coordinate list, one "row col re im" line per stored entry.
void write_coo(std::ostream& out, const SparseMatrixC& m);

/// Dense gauge rotation diag(exp(i sigma_3 theta_p)) on the grid.
SparseMatrixC gauge_rotation(const Grid& grid, const PhaseFunction& theta);

}  // namespace curvspin
