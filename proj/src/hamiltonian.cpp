#include "curvspin/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace curvspin {

std::string to_string(Boundary b) {
  switch (b) {
    case Boundary::Periodic: return "periodic";
    case Boundary::HardWall: return "hard-wall";
    case Boundary::Frozen: return "frozen";
  }
  return "?";
}

std::string to_string(ScalarPotential s) {
  switch (s) {
    case ScalarPotential::QuarterK: return "quarter-k";
    case ScalarPotential::DaCosta: return "da-costa";
    case ScalarPotential::None: return "none";
  }
  return "?";
}

ScalarPotential scalar_potential_from_string(const std::string& s) {
  if (s == "quarter-k") return ScalarPotential::QuarterK;
  if (s == "da-costa" || s == "dacosta") return ScalarPotential::DaCosta;
  if (s == "none") return ScalarPotential::None;
  throw InvalidParameter("unknown scalar potential '" + s + "' (quarter-k, da-costa, none)");
}

std::string OperatorTerms::describe() const {
  std::ostringstream os;
  bool first = true;
  auto add = [&](bool on, const std::string& name) {
    if (!on) return;
    os << (first ? "" : "+") << name;
    first = false;
  };
  add(kinetic, "kinetic");
  add(gauge_phases, "gauge-phases");
  add(scalar, "scalar(" + to_string(scalar_kind) + ")");
  add(spin_orbit, spin_orbit_scheme == SpinOrbitScheme::Link ? "so(link)" : "so(centered)");
  return first ? "zero" : os.str();
}

namespace {

void fill_axis(const SurfacePatch& patch, int a, int n, Boundary bc, double frozen_at,
               std::vector<double>& q, double& h) {
  q.clear();
  if (bc == Boundary::Frozen) {
    if (n != 1) throw InvalidParameter("frozen direction needs exactly one node");
    h = 1.0;
    q.push_back(std::isnan(frozen_at) ? patch.lo(a) + 0.5 * patch.span(a) : frozen_at);
    return;
  }
  if (n < 8) throw InvalidParameter("grid needs at least 8 nodes per direction, got " +
                                    std::to_string(n));
  if (bc == Boundary::Periodic) {
    if (!patch.periodic(a))
      throw InvalidParameter("periodic boundary on non-periodic coordinate q" +
                             std::to_string(a + 1));
    h = patch.span(a) / n;
    for (int i = 0; i < n; ++i) q.push_back(patch.lo(a) + i * h);
  } else {
    h = patch.span(a) / (n + 1);
    for (int i = 0; i < n; ++i) q.push_back(patch.lo(a) + (i + 1) * h);
  }
}

}  // namespace

Grid make_grid(const SurfacePatch& patch, int n1, int n2, Boundary bc1, Boundary bc2,
               double frozen_at1, double frozen_at2) {
  Grid g;
  g.n1 = n1;
  g.n2 = n2;
  g.bc1 = bc1;
  g.bc2 = bc2;
  fill_axis(patch, 0, n1, bc1, frozen_at1, g.q1, g.h1);
  fill_axis(patch, 1, n2, bc2, frozen_at2, g.q2, g.h2);
  return g;
}

Grid make_grid(const SurfacePatch& patch, int n1, int n2) {
  return make_grid(patch, n1, n2, patch.periodic(0) ? Boundary::Periodic : Boundary::HardWall,
                   patch.periodic(1) ? Boundary::Periodic : Boundary::HardWall);
}

double HermitianOperator::max_abs() const {
  double m = 0.0;
  for (int k = 0; k < matrix.outerSize(); ++k)
    for (SparseMatrixC::InnerIterator it(matrix, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<cplx>>;

void add_block(Triplets& t, int p, int q, const Mat2c& b) {
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      if (b(r, c) != cplx(0.0)) t.emplace_back(2 * p + r, 2 * q + c, b(r, c));
}

SparseMatrixC from_triplets(int dim, const Triplets& t) {
  SparseMatrixC m(dim, dim);
  m.setFromTriplets(t.begin(), t.end());
  m.prune(cplx(0.0), 0.0);
  return m;
}

// exp(i X) for Hermitian 2x2 X.
Mat2c expi(const Mat2c& x) {
  const auto c = pauli::decompose(x);
  const Eigen::Vector3d v(c[1].real(), c[2].real(), c[3].real());
  const double r = v.norm();
  const double sinc = r < 1e-8 ? 1.0 - r * r / 6.0 : std::sin(r) / r;
  Mat2c u = std::cos(r) * Mat2c::Identity();
  const cplx i(0.0, 1.0);
  for (int k = 0; k < 3; ++k) u += i * sinc * v(k) * pauli::sigma(k);
  return std::exp(i * c[0].real()) * u;
}

Mat2c phase3(double theta) {
  Mat2c g = Mat2c::Zero();
  g(0, 0) = std::exp(cplx(0.0, theta));
  g(1, 1) = std::exp(cplx(0.0, -theta));
  return g;
}

class Assembler {
 public:
  Assembler(const SurfacePatch& patch, const Grid& grid, const AssemblyOptions& opt)
      : patch_(patch), grid_(grid), opt_(opt) {
    if (opt_.gauge) check_winding(patch_, opt_.gauge);
    nodes_.reserve(static_cast<std::size_t>(grid_.nodes()));
    for (int i = 0; i < grid_.n1; ++i)
      for (int j = 0; j < grid_.n2; ++j) nodes_.push_back(geometry(grid_.point(i, j)));
    if (opt_.gauge) {
      for (int i = 0; i < grid_.n1; ++i)
        for (int j = 0; j < grid_.n2; ++j) gauge_.push_back(phase3(opt_.gauge(grid_.point(i, j))));
    }
  }

  const FrameData& node(int p) const { return nodes_[static_cast<std::size_t>(p)]; }
  bool active(int a) const { return grid_.boundary(a) != Boundary::Frozen; }

  // Forward neighbour along a, or -1 at a hard wall.
  int forward(int i, int j, int a) const {
    int ii = i, jj = j;
    (a == 0 ? ii : jj) += 1;
    const int n = grid_.count(a);
    int& idx = a == 0 ? ii : jj;
    if (idx == n) {
      if (grid_.boundary(a) != Boundary::Periodic) return -1;
      idx = 0;
    }
    return grid_.node(ii, jj);
  }

  Point2 shifted(int i, int j, int a, double frac) const {
    Point2 q = grid_.point(i, j);
    (a == 0 ? q.q1 : q.q2) += frac * grid_.spacing(a);
    return q;
  }

  // Parallel transport from node (i,j) to its forward neighbour q along a.
  Mat2c link(const FrameData& mid, int p, int q, int a, bool with_w, bool with_so) const {
    const double h = grid_.spacing(a);
    Mat2c x = Mat2c::Zero();
    if (with_w) x += mid.w(a) * h * pauli::sigma(2);
    if (with_so) x += mid.A_so[static_cast<std::size_t>(a)] * h;
    Mat2c u = expi(x);
    if (!gauge_.empty())
      u = gauge_[static_cast<std::size_t>(p)] * u * gauge_[static_cast<std::size_t>(q)].adjoint();
    return u;
  }

  double edge_weight(const FrameData& mid, int a) const {
    const double other = grid_.spacing(1 - a);
    return 0.5 * mid.sqrtg * mid.ginv(a, a) * other / grid_.spacing(a);
  }

  // Quadratic-form Laplacian with link variables, before the measure rescaling.
  SparseMatrixC kinetic(bool with_w, bool with_so) const {
    const int dim = grid_.dimension();
    Triplets t;
    std::array<std::vector<Mat2c>, 2> links;
    for (int a = 0; a < 2; ++a) {
      if (!active(a)) continue;
      links[static_cast<std::size_t>(a)].assign(static_cast<std::size_t>(grid_.nodes()), Mat2c::Zero());
      for (int i = 0; i < grid_.n1; ++i)
        for (int j = 0; j < grid_.n2; ++j) {
          const int p = grid_.node(i, j);
          const int idx = a == 0 ? i : j;
          const int q = forward(i, j, a);
          const FrameData mid = geometry(shifted(i, j, a, 0.5));
          const double c = edge_weight(mid, a);
          add_block(t, p, p, c * Mat2c::Identity());
          if (q >= 0) {
            const Mat2c u = link(mid, p, q, a, with_w, with_so);
            links[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)] = u;
            add_block(t, q, q, c * Mat2c::Identity());
            add_block(t, p, q, -c * u);
            add_block(t, q, p, -c * u.adjoint());
          }
          if (idx == 0 && grid_.boundary(a) == Boundary::HardWall) {
            const FrameData low = geometry(shifted(i, j, a, -0.5));
            add_block(t, p, p, edge_weight(low, a) * Mat2c::Identity());
          }
        }
    }
    SparseMatrixC lap = from_triplets(dim, t);

    if (active(0) && active(1)) {
      double fmax = 0.0, scale = 0.0;
      std::vector<double> f(static_cast<std::size_t>(grid_.nodes()));
      for (int p = 0; p < grid_.nodes(); ++p) {
        f[static_cast<std::size_t>(p)] = node(p).sqrtg * node(p).ginv(0, 1);
        fmax = std::max(fmax, std::abs(f[static_cast<std::size_t>(p)]));
        scale = std::max(scale, node(p).sqrtg * node(p).ginv.diagonal().cwiseAbs().maxCoeff());
      }
      if (fmax > 1e-14 * scale) {
        std::array<SparseMatrixC, 2> d;
        for (int a = 0; a < 2; ++a) {
          Triplets td;
          const double inv2h = 1.0 / (2.0 * grid_.spacing(a));
          for (int i = 0; i < grid_.n1; ++i)
            for (int j = 0; j < grid_.n2; ++j) {
              const int p = grid_.node(i, j);
              const int q = forward(i, j, a);
              if (q < 0) continue;
              const Mat2c& u = links[static_cast<std::size_t>(a)][static_cast<std::size_t>(p)];
              add_block(td, p, q, inv2h * u);
              add_block(td, q, p, -inv2h * u.adjoint());
            }
          d[static_cast<std::size_t>(a)] = from_triplets(dim, td);
        }
        Triplets tf;
        for (int p = 0; p < grid_.nodes(); ++p)
          add_block(tf, p, p, f[static_cast<std::size_t>(p)] * Mat2c::Identity());
        const SparseMatrixC fm = from_triplets(dim, tf);
        const SparseMatrixC mixed =
            SparseMatrixC(d[0] * fm * d[1]) + SparseMatrixC(d[1] * fm * d[0]);
        lap += (-0.5 * grid_.h1 * grid_.h2) * mixed;
      }
    }

    // Flat measure: H = M^{-1/2} L M^{-1/2}, M = sqrt(g) h1 h2.
    Eigen::VectorXd s(dim);
    for (int p = 0; p < grid_.nodes(); ++p)
      s(2 * p) = s(2 * p + 1) = 1.0 / std::sqrt(node(p).sqrtg * grid_.h1 * grid_.h2);
    return SparseMatrixC(s.asDiagonal() * lap * s.asDiagonal());
  }

  SparseMatrixC diagonal(const std::function<double(const FrameData&)>& v) const {
    Triplets t;
    for (int p = 0; p < grid_.nodes(); ++p) add_block(t, p, p, v(node(p)) * Mat2c::Identity());
    return from_triplets(grid_.dimension(), t);
  }

  double scalar_value(const FrameData& f) const {
    switch (opt_.scalar) {
      case ScalarPotential::QuarterK: return 0.25 * f.K;
      case ScalarPotential::DaCosta: return -0.5 * (f.M * f.M - f.K);
      case ScalarPotential::None: return 0.0;
    }
    return 0.0;
  }

  // -(1/2) g^{ab} A_a A_b over the active directions (proportional to identity).
  double so_scalar(const FrameData& f) const {
    Mat2c acc = Mat2c::Zero();
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        if (active(a) && active(b))
          acc += f.ginv(a, b) * f.A_so[static_cast<std::size_t>(a)] * f.A_so[static_cast<std::size_t>(b)];
    return -0.5 * 0.5 * acc.trace().real();
  }

  // i/(2 sqrt g) (1/2){P^b, d_b} with P^b = S^{ab} sigma_a, in the rescaled frame.
  SparseMatrixC centered_so() const {
    Triplets t;
    const cplx i(0.0, 1.0);
    std::vector<std::array<Mat2c, 2>> pb(static_cast<std::size_t>(grid_.nodes()));
    for (int p = 0; p < grid_.nodes(); ++p) {
      const FrameData& f = node(p);
      for (int b = 0; b < 2; ++b)
        pb[static_cast<std::size_t>(p)][static_cast<std::size_t>(b)] =
            f.S(0, b) * f.sigma_coord[0] + f.S(1, b) * f.sigma_coord[1];
    }
    for (int b = 0; b < 2; ++b) {
      if (!active(b)) continue;
      const double h = grid_.spacing(b);
      for (int ii = 0; ii < grid_.n1; ++ii)
        for (int jj = 0; jj < grid_.n2; ++jj) {
          const int p = grid_.node(ii, jj);
          const int q = forward(ii, jj, b);
          if (q < 0) continue;
          const double sp = std::pow(node(p).sqrtg, -0.5), sq = std::pow(node(q).sqrtg, -0.5);
          Mat2c blk = (0.5 * i) * sp * sq / (4.0 * h) *
                      (pb[static_cast<std::size_t>(p)][static_cast<std::size_t>(b)] +
                       pb[static_cast<std::size_t>(q)][static_cast<std::size_t>(b)]);
          if (!gauge_.empty())
            blk = gauge_[static_cast<std::size_t>(p)] * blk * gauge_[static_cast<std::size_t>(q)].adjoint();
          add_block(t, p, q, blk);
          add_block(t, q, p, blk.adjoint());
        }
    }
    return from_triplets(grid_.dimension(), t);
  }

 private:
  FrameData geometry(Point2 q) const {
    FrameData f;
    try {
      f = frame_at(patch_, q, opt_.frame);
    } catch (const GeometryError& e) {
      throw SingularGeometry(std::string("singular geometry during assembly: ") + e.what());
    }
    if (!(f.sqrtg > 0.0) || !std::isfinite(f.K))
      throw SingularGeometry("singular geometry at (" + std::to_string(q.q1) + ", " +
                             std::to_string(q.q2) + ")");
    return f;
  }

  const SurfacePatch& patch_;
  const Grid& grid_;
  const AssemblyOptions& opt_;
  std::vector<FrameData> nodes_;
  std::vector<Mat2c> gauge_;
};

HermitianOperator finish(SparseMatrixC m, const Grid& grid, const OperatorTerms& terms) {
  // Symmetric stencils give exact Hermiticity up to rounding; average it away.
  SparseMatrixC herm = 0.5 * (m + SparseMatrixC(m.adjoint()));
  herm.prune(cplx(0.0), 0.0);
  HermitianOperator op{std::move(herm), grid, terms};
  const double before = hermiticity_defect(m);
  const double scale = std::max(op.max_abs(), 1e-300);
  if (before > 1e-12 * scale)
    throw std::logic_error("assembled operator is not Hermitian (defect " + std::to_string(before) +
                           ")");
  return op;
}

}  // namespace

HermitianOperator assemble_H0(const SurfacePatch& patch, const Grid& grid,
                              const AssemblyOptions& options) {
  const Assembler as(patch, grid, options);
  SparseMatrixC h = as.kinetic(options.gauge_phases, false);
  if (options.scalar != ScalarPotential::None)
    h += as.diagonal([&](const FrameData& f) { return as.scalar_value(f); });
  OperatorTerms terms;
  terms.kinetic = true;
  terms.gauge_phases = options.gauge_phases;
  terms.scalar = options.scalar != ScalarPotential::None;
  terms.scalar_kind = options.scalar;
  return finish(std::move(h), grid, terms);
}

HermitianOperator assemble_Heff(const SurfacePatch& patch, const Grid& grid,
                                const AssemblyOptions& options) {
  const Assembler as(patch, grid, options);
  SparseMatrixC h;
  if (options.spin_orbit == SpinOrbitScheme::Link) {
    h = as.kinetic(options.gauge_phases, true);
    h += as.diagonal([&](const FrameData& f) { return as.scalar_value(f) + as.so_scalar(f); });
  } else {
    h = as.kinetic(options.gauge_phases, false);
    h += as.diagonal([&](const FrameData& f) { return as.scalar_value(f); });
    h += as.centered_so();
  }
  OperatorTerms terms;
  terms.kinetic = true;
  terms.gauge_phases = options.gauge_phases;
  terms.scalar = options.scalar != ScalarPotential::None;
  terms.scalar_kind = options.scalar;
  terms.spin_orbit = true;
  terms.spin_orbit_scheme = options.spin_orbit;
  return finish(std::move(h), grid, terms);
}

HermitianOperator assemble_Hso(const SurfacePatch& patch, const Grid& grid,
                               const AssemblyOptions& options) {
  SparseMatrixC h;
  if (options.spin_orbit == SpinOrbitScheme::Link) {
    const Assembler as(patch, grid, options);
    h = as.kinetic(options.gauge_phases, true) - as.kinetic(options.gauge_phases, false);
    h += as.diagonal([&](const FrameData& f) { return as.so_scalar(f); });
  } else {
    const Assembler as(patch, grid, options);
    h = as.centered_so();
  }
  OperatorTerms terms;
  terms.spin_orbit = true;
  terms.spin_orbit_scheme = options.spin_orbit;
  return finish(std::move(h), grid, terms);
}

double hermiticity_defect(const SparseMatrixC& m) {
  const SparseMatrixC d = m - SparseMatrixC(m.adjoint());
  double r = 0.0;
  for (int k = 0; k < d.outerSize(); ++k)
    for (SparseMatrixC::InnerIterator it(d, k); it; ++it) r = std::max(r, std::abs(it.value()));
  return r;
}

double hermiticity_defect(const HermitianOperator& op) { return hermiticity_defect(op.matrix); }

double time_reversal_defect(const SparseMatrixC& m) {
  const int dim = static_cast<int>(m.rows());
  Triplets t;
  for (int p = 0; p < dim / 2; ++p) add_block(t, p, p, pauli::sigma(1));
  const SparseMatrixC y = from_triplets(dim, t);
  const SparseMatrixC trev = y * SparseMatrixC(m.conjugate()) * y;
  const SparseMatrixC d = trev - m;
  double r = 0.0;
  for (int k = 0; k < d.outerSize(); ++k)
    for (SparseMatrixC::InnerIterator it(d, k); it; ++it) r = std::max(r, std::abs(it.value()));
  return r;
}

double time_reversal_defect(const HermitianOperator& op) { return time_reversal_defect(op.matrix); }

VectorC apply(const SparseMatrixC& m, const VectorC& field) {
  if (field.size() != m.cols())
    throw DimensionMismatch("operator has dimension " + std::to_string(m.cols()) +
                            " but field has " + std::to_string(field.size()));
  return m * field;
}

VectorC apply(const HermitianOperator& op, const VectorC& field) { return apply(op.matrix, field); }

void write_coo(std::ostream& out, const SparseMatrixC& m) {
  out.precision(17);
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrixC::InnerIterator it(m, k); it; ++it)
      out << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' ' << it.value().imag()
          << '\n';
}

SparseMatrixC gauge_rotation(const Grid& grid, const PhaseFunction& theta) {
  Triplets t;
  for (int i = 0; i < grid.n1; ++i)
    for (int j = 0; j < grid.n2; ++j) add_block(t, grid.node(i, j), grid.node(i, j), phase3(theta(grid.point(i, j))));
  return from_triplets(grid.dimension(), t);
}

}  // namespace curvspin
