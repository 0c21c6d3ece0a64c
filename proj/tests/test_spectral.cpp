#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "curvspin/spectral.hpp"

using namespace curvspin;

namespace {

SparseMatrixC diagonal(const std::vector<double>& d) {
  SparseMatrixC m(static_cast<int>(d.size()), static_cast<int>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) m.insert(static_cast<int>(i), static_cast<int>(i)) = d[i];
  m.makeCompressed();
  return m;
}

}  // namespace

TEST_CASE("diagonal matrix: exact eigenvalues and clusters") {
  const auto r = eigensolve(diagonal({1.0, 0.0, 0.0, 5.0}), 3, {Which::Lowest, 0.0, true});
  CHECK(r.values(0) == doctest::Approx(0.0));
  CHECK(r.values(2) == doctest::Approx(1.0));
  REQUIRE(r.clusters.size() == 2);
  CHECK(r.clusters[0].multiplicity == 2);
  CHECK(r.clusters[1].multiplicity == 1);
  CHECK(r.clusters[1].first == 2);
  CHECK(r.vectors.cols() == 3);
  CHECK(r.max_residual() < 1e-12);
}

TEST_CASE("eigensolve rejects a bad k") {
  const auto m = diagonal({0.0, 1.0, 2.0});
  CHECK_THROWS(eigensolve(m, 0));
  CHECK_THROWS(eigensolve(m, 3));
}

TEST_CASE("degeneracy clustering") {
  const auto c = degeneracy_clusters(std::vector<double>{0.0, 1e-12, 1.0, 1.0 + 1e-12, 1.0 + 2e-12, 3.0}, 1e-9);
  REQUIRE(c.size() == 3);
  CHECK(c[0].multiplicity == 2);
  CHECK(c[1].multiplicity == 3);
  CHECK(c[2].multiplicity == 1);
  CHECK(degeneracy_clusters(std::vector<double>{}).empty());
}

TEST_CASE("nearest-target selection") {
  EigensolveOptions o;
  o.which = Which::NearestTarget;
  o.target = 2.9;
  const auto r = eigensolve(diagonal({0.0, 1.0, 2.0, 3.0, 4.0}), 2, o);
  CHECK(r.values(0) == doctest::Approx(2.0));
  CHECK(r.values(1) == doctest::Approx(3.0));
}

TEST_CASE("Krylov path agrees with the dense path") {
  SurfaceParams p;
  p.rho = 1.0;
  p.R = 2.5;
  const auto t = make_surface(SurfaceKind::Torus, p);
  const Grid g = make_grid(t, 16, 20);
  const auto h = assemble_Heff(t, g);
  EigensolveOptions sparse;
  sparse.dense_limit = 100;
  const auto a = eigensolve(h, 6, sparse);
  const auto b = eigensolve(h, 6);
  CHECK(a.method != b.method);
  for (int i = 0; i < 6; ++i) CHECK(a.values(i) == doctest::Approx(b.values(i)).epsilon(1e-9));
  CHECK(a.max_residual() <= 1e-10 * a.operator_norm);

  sparse.seed = 7;
  const auto c = eigensolve(h, 6, sparse);
  for (int i = 0; i < 6; ++i) CHECK(c.values(i) == doctest::Approx(a.values(i)).epsilon(1e-9));
}

TEST_CASE("analytic cylinder levels") {
  const auto with = cylinder_analytic_spectrum(1.0, 3, true);
  std::vector<double> e;
  for (const auto& l : with) e.push_back(l.energy);
  std::sort(e.begin(), e.end());
  const auto cl = degeneracy_clusters(e, 1e-12);
  REQUIRE(cl.size() >= 3);
  CHECK(cl[0].value == doctest::Approx(0.0));
  CHECK(cl[0].multiplicity == 4);
  CHECK(cl[1].value == doctest::Approx(1.0));
  CHECK(cl[1].multiplicity == 4);
  CHECK(cl[2].value == doctest::Approx(3.0));

  const auto without = cylinder_analytic_spectrum(2.0, 2, false);
  for (const auto& l : without) CHECK(l.energy == doctest::Approx(l.n * l.n / 8.0));
  CHECK_THROWS(cylinder_analytic_spectrum(0.0, 3, true));
}

TEST_CASE("conductance staircase counts channels strictly below E") {
  const std::vector<double> E = {0.0, 0.5, 1.0, 1.5, 3.0, 3.5};
  const auto c = conductance_curve(1.0, E, true);
  // Levels 0 (x4), 1 (x4), 3 (x4)
  const std::vector<int> expect = {0, 4, 4, 8, 8, 12};
  CHECK(c.channels == expect);
  for (std::size_t i = 0; i < E.size(); ++i) CHECK(c.g_over_e2h[i] == doctest::Approx(expect[i]));

  const auto w = conductance_curve(1.0, {0.1, 0.6}, false);
  CHECK(w.channels == std::vector<int>{2, 6});

  CHECK_THROWS(conductance_curve(1.0, {1.0, 0.5}, true));
  CHECK_THROWS(conductance_curve(1.0, {-1.0}, true));
}
