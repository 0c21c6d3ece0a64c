#include "curvspin/spectral.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace curvspin {

double SpectrumResult::max_residual() const {
  return residuals.empty() ? 0.0 : *std::max_element(residuals.begin(), residuals.end());
}

namespace {

double row_sum_norm(const SparseMatrixC& m) {
  double best = 0.0;
  for (int r = 0; r < m.outerSize(); ++r) {
    double s = 0.0;
    for (SparseMatrixC::InnerIterator it(m, r); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

double gershgorin_lower(const SparseMatrixC& m) {
  double lo = std::numeric_limits<double>::infinity();
  for (int r = 0; r < m.outerSize(); ++r) {
    double diag = 0.0, off = 0.0;
    for (SparseMatrixC::InnerIterator it(m, r); it; ++it) {
      if (it.col() == r) diag = it.value().real();
      else off += std::abs(it.value());
    }
    lo = std::min(lo, diag - off);
  }
  return lo;
}

// Indices of the k wanted values, returned in ascending order of value.
std::vector<int> select(const Eigen::VectorXd& vals, int k, const EigensolveOptions& o) {
  std::vector<int> idx(static_cast<std::size_t>(vals.size()));
  std::iota(idx.begin(), idx.end(), 0);
  if (o.which == Which::NearestTarget) {
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      return std::abs(vals(a) - o.target) < std::abs(vals(b) - o.target);
    });
  }
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return vals(a) < vals(b); });
  return idx;
}

// Orthonormalize the columns of w against basis(:, 0:cols) and each other
// (classical Gram-Schmidt, applied twice). Returns the kept columns.
Eigen::MatrixXcd orthonormalize(const Eigen::MatrixXcd& basis, int cols, Eigen::MatrixXcd w) {
  std::vector<Eigen::VectorXcd> kept;
  for (int c = 0; c < w.cols(); ++c) {
    Eigen::VectorXcd v = w.col(c);
    const double norm0 = v.norm();
    if (norm0 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      if (cols > 0) v -= basis.leftCols(cols) * (basis.leftCols(cols).adjoint() * v);
      for (const auto& k : kept) v -= k * k.dot(v);
    }
    const double n = v.norm();
    if (n < 1e-10 * norm0) continue;
    kept.push_back(v / n);
  }
  Eigen::MatrixXcd out(w.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = kept[c];
  return out;
}

SpectrumResult dense_solve(const SparseMatrixC& m, int k, const EigensolveOptions& o, double norm) {
  const Eigen::MatrixXcd d = Eigen::MatrixXcd(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(d);
  if (es.info() != Eigen::Success) throw NonConvergence("dense eigensolver failed", -1.0);
  const auto idx = select(es.eigenvalues(), k, o);
  SpectrumResult r;
  r.method = "dense";
  r.operator_norm = norm;
  r.values.resize(k);
  if (o.vectors) r.vectors.resize(m.rows(), k);
  for (int i = 0; i < k; ++i) {
    const int j = idx[static_cast<std::size_t>(i)];
    r.values(i) = es.eigenvalues()(j);
    const Eigen::VectorXcd v = es.eigenvectors().col(j);
    r.residuals.push_back((m * v - r.values(i) * v).norm());
    if (o.vectors) r.vectors.col(i) = v;
  }
  return r;
}

SpectrumResult krylov_solve(const SparseMatrixC& m, int k, const EigensolveOptions& o, double norm) {
  const int dim = static_cast<int>(m.rows());
  Eigen::SparseMatrix<cplx> shifted = m;  // column major for SparseLU
  double sigma = o.which == Which::Lowest ? gershgorin_lower(m) - 1e-6 * std::max(norm, 1.0)
                                          : o.target;
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
  Eigen::SparseMatrix<cplx> eye(dim, dim);
  eye.setIdentity();
  for (int attempt = 0; attempt < 4; ++attempt) {
    lu.compute(shifted - cplx(sigma) * eye);
    if (lu.info() == Eigen::Success) break;
    sigma -= 1e-8 * std::max(norm, 1.0) * std::pow(10.0, attempt);
    if (attempt == 3) throw NonConvergence("shift-invert factorization failed", -1.0);
  }

  const int block = std::max(o.block, 1);
  const int nb = std::min(dim, std::max(3 * k, k + 4 * block));
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXcd start(dim, block);
  for (int c = 0; c < block; ++c)
    for (int r = 0; r < dim; ++r) start(r, c) = cplx(normal(rng), normal(rng));

  SpectrumResult res;
  res.method = "block-krylov-shift-invert";
  res.operator_norm = norm;
  double worst = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < o.max_restarts; ++restart) {
    Eigen::MatrixXcd basis(dim, nb);
    int cols = 0;
    Eigen::MatrixXcd blockv = orthonormalize(basis, 0, start);
    while (cols < nb && blockv.cols() > 0) {
      const int take = std::min<int>(static_cast<int>(blockv.cols()), nb - cols);
      basis.middleCols(cols, take) = blockv.leftCols(take);
      const Eigen::MatrixXcd last = basis.middleCols(cols, take);
      cols += take;
      if (cols >= nb) break;
      Eigen::MatrixXcd next(dim, take);
      for (int c = 0; c < take; ++c) next.col(c) = lu.solve(Eigen::VectorXcd(last.col(c)));
      blockv = orthonormalize(basis, cols, next);
      if (blockv.cols() == 0) {  // invariant subspace: pad with random directions
        Eigen::MatrixXcd rnd(dim, block);
        for (int c = 0; c < block; ++c)
          for (int r = 0; r < dim; ++r) rnd(r, c) = cplx(normal(rng), normal(rng));
        blockv = orthonormalize(basis, cols, rnd);
      }
    }
    const Eigen::MatrixXcd v = basis.leftCols(cols);
    const Eigen::MatrixXcd hv = m * v;
    Eigen::MatrixXcd t = v.adjoint() * hv;
    t = 0.5 * (t + t.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(t);
    const int kk = std::min(k, cols);
    const auto idx = select(es.eigenvalues(), kk, o);
    res.values.resize(kk);
    res.residuals.assign(static_cast<std::size_t>(kk), 0.0);
    if (o.vectors) res.vectors.resize(dim, kk);
    worst = 0.0;
    for (int i = 0; i < kk; ++i) {
      const int j = idx[static_cast<std::size_t>(i)];
      const double lam = es.eigenvalues()(j);
      const Eigen::VectorXcd y = es.eigenvectors().col(j);
      const Eigen::VectorXcd x = v * y;
      const double r = (hv * y - lam * x).norm();
      res.values(i) = lam;
      res.residuals[static_cast<std::size_t>(i)] = r;
      if (o.vectors) res.vectors.col(i) = x;
      worst = std::max(worst, r);
    }
    res.iterations = restart + 1;
    if (kk == k && worst <= o.tolerance * norm) return res;
    // Restart from the best Ritz vectors (wanted ones first).
    std::vector<int> order(static_cast<std::size_t>(cols));
    std::iota(order.begin(), order.end(), 0);
    const auto& ev = es.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      const double da = o.which == Which::Lowest ? ev(a) : std::abs(ev(a) - o.target);
      const double db = o.which == Which::Lowest ? ev(b) : std::abs(ev(b) - o.target);
      return da < db;
    });
    const int keep = std::min(cols, k + block);
    start.resize(dim, keep);
    for (int c = 0; c < keep; ++c) start.col(c) = v * es.eigenvectors().col(order[static_cast<std::size_t>(c)]);
  }
  throw NonConvergence("block Krylov eigensolver did not reach residual " +
                           std::to_string(o.tolerance * norm) + " (achieved " +
                           std::to_string(worst) + ")",
                       worst);
}

}  // namespace

SpectrumResult eigensolve(const SparseMatrixC& m, int k, const EigensolveOptions& options) {
  if (m.rows() != m.cols()) throw DimensionMismatch("eigensolve needs a square operator");
  if (k <= 0 || k >= m.rows())
    throw std::invalid_argument("eigensolve requires 0 < k < dimension");
  const double norm = row_sum_norm(m);
  SpectrumResult r = m.rows() <= options.dense_limit ? dense_solve(m, k, options, norm)
                                                     : krylov_solve(m, k, options, norm);
  const double limit = options.tolerance * std::max(norm, 1e-300);
  if (r.max_residual() > limit)
    throw NonConvergence("eigenpair residual " + std::to_string(r.max_residual()) +
                             " above contract " + std::to_string(limit),
                         r.max_residual());
  r.clusters = degeneracy_clusters(r.values);
  return r;
}

SpectrumResult eigensolve(const HermitianOperator& op, int k, const EigensolveOptions& options) {
  return eigensolve(op.matrix, k, options);
}

std::vector<Cluster> degeneracy_clusters(const std::vector<double>& v, double tol) {
  std::vector<Cluster> out;
  if (v.empty()) return out;
  if (tol <= 0.0) tol = 1e-8 * (v.back() - v.front());
  double sum = v[0];
  Cluster cur{v[0], 1, 0};
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] - v[i - 1] > tol) {
      cur.value = sum / cur.multiplicity;
      out.push_back(cur);
      cur = Cluster{v[i], 1, static_cast<int>(i)};
      sum = v[i];
    } else {
      ++cur.multiplicity;
      sum += v[i];
    }
  }
  cur.value = sum / cur.multiplicity;
  out.push_back(cur);
  return out;
}

std::vector<Cluster> degeneracy_clusters(const Eigen::VectorXd& v, double tol) {
  return degeneracy_clusters(std::vector<double>(v.data(), v.data() + v.size()), tol);
}

std::vector<CylinderLevel> cylinder_analytic_spectrum(double rho, int n_max, bool with_connection) {
  if (!(rho > 0.0)) throw InvalidParameter("cylinder radius must be positive");
  if (n_max < 0) throw InvalidParameter("n_max must be non-negative");
  std::vector<CylinderLevel> levels;
  for (int n = -n_max; n <= n_max; ++n)
    for (int s : {1, -1}) {
      CylinderLevel l;
      l.n = n;
      l.s = s;
      l.j = n + 0.5 * s;
      const double nn = static_cast<double>(n) * n + (with_connection ? s * n : 0);
      l.energy = nn / (2.0 * rho * rho);
      levels.push_back(l);
    }
  std::stable_sort(levels.begin(), levels.end(),
                   [](const CylinderLevel& a, const CylinderLevel& b) { return a.energy < b.energy; });
  return levels;
}

ConductanceCurve conductance_curve(const std::vector<double>& thresholds,
                                   const std::vector<double>& energies, bool with_connection) {
  for (std::size_t i = 0; i < energies.size(); ++i) {
    if (energies[i] < 0.0) throw std::invalid_argument("conductance energies must be non-negative");
    if (i > 0 && energies[i] < energies[i - 1])
      throw std::invalid_argument("conductance energies must be ascending");
  }
  ConductanceCurve c;
  c.with_connection = with_connection;
  c.thresholds = thresholds;
  std::sort(c.thresholds.begin(), c.thresholds.end());
  c.energy = energies;
  for (double e : energies) {
    const auto n = std::lower_bound(c.thresholds.begin(), c.thresholds.end(), e) - c.thresholds.begin();
    c.channels.push_back(static_cast<int>(n));
    c.g_over_e2h.push_back(static_cast<double>(n));
  }
  return c;
}

ConductanceCurve conductance_curve(double rho, const std::vector<double>& energies,
                                   bool with_connection) {
  const double emax = energies.empty() ? 0.0 : *std::max_element(energies.begin(), energies.end());
  // Lowest level at |n| = N is (N^2 - N)/(2 rho^2); go past emax.
  const int n_max = static_cast<int>(std::ceil(std::sqrt(2.0 * rho * rho * std::max(emax, 0.0)))) + 2;
  std::vector<double> th;
  for (const auto& l : cylinder_analytic_spectrum(rho, n_max, with_connection)) th.push_back(l.energy);
  return conductance_curve(th, energies, with_connection);
}

}  // namespace curvspin
