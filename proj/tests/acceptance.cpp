// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "curvspin/dynamics.hpp"
#include "curvspin/expansions.hpp"
#include "curvspin/gauge.hpp"
#include "curvspin/spectral.hpp"

using namespace curvspin;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

SurfacePatch cylinder(double rho) {
  SurfaceParams p;
  p.rho = rho;
  return make_surface(SurfaceKind::Cylinder, p);
}

SurfacePatch sphere(double r) {
  SurfaceParams p;
  p.radius = r;
  return make_surface(SurfaceKind::Sphere, p);
}

SurfacePatch torus(double rho, double R) {
  SurfaceParams p;
  p.rho = rho;
  p.R = R;
  return make_surface(SurfaceKind::Torus, p);
}

Eigen::VectorXd cylinder_levels(int n, bool with_connection, int k) {
  const auto cyl = cylinder(1.0);
  const Grid g = make_grid(cyl, n, 1, Boundary::Periodic, Boundary::Frozen);
  const auto h = with_connection ? assemble_Heff(cyl, g) : assemble_H0(cyl, g);
  return eigensolve(h, k).values;
}

// Reference levels sorted, first k.
std::vector<double> reference_levels(bool with_connection, int k) {
  std::vector<double> e;
  for (const auto& l : cylinder_analytic_spectrum(1.0, 8, with_connection)) e.push_back(l.energy);
  std::sort(e.begin(), e.end());
  e.resize(static_cast<std::size_t>(k));
  return e;
}

double level_error(const Eigen::VectorXd& v, const std::vector<double>& ref, bool relative) {
  double err = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double d = std::abs(v(static_cast<int>(i)) - ref[i]);
    // the zero level has no relative scale; an absolute floor of 1 energy unit applies
    err = std::max(err, relative ? d / std::max(std::abs(ref[i]), 1.0) : d);
  }
  return err;
}

Outcome criterion_cylinder_spectrum() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ref = reference_levels(true, 16);
  const double err256 = level_error(cylinder_levels(256, true, 16), ref, true);
  const double runtime = seconds_since(t0);
  std::vector<double> ln_n, ln_e;
  for (int n : {64, 128, 256, 512}) {
    ln_n.push_back(std::log(static_cast<double>(n)));
    ln_e.push_back(std::log(level_error(cylinder_levels(n, true, 16), ref, false)));
  }
  // least squares slope of log error against log n, sign flipped
  const double mx = (ln_n[0] + ln_n[1] + ln_n[2] + ln_n[3]) / 4, my = (ln_e[0] + ln_e[1] + ln_e[2] + ln_e[3]) / 4;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 4; ++i) {
    sxy += (ln_n[i] - mx) * (ln_e[i] - my);
    sxx += (ln_n[i] - mx) * (ln_n[i] - mx);
  }
  const double slope = -sxy / sxx;
  Outcome o;
  o.pass = err256 < 1e-3 && std::abs(slope - 2.0) <= 0.2 && runtime < 10.0;
  o.detail = "max rel err (n=256) " + fmt("%.3e", err256) + ", slope " + fmt("%.3f", slope) +
             ", solve time " + fmt("%.2f s", runtime);
  return o;
}

Outcome criterion_degeneracy() {
  auto lowest_multiplicity = [](bool with) {
    const auto v = cylinder_levels(256, with, 12);
    const double spread = v(v.size() - 1) - v(0);
    return degeneracy_clusters(v, 1e-8 * spread).front().multiplicity;
  };
  const int with = lowest_multiplicity(true), without = lowest_multiplicity(false);
  return {with == 4 && without == 2,
          "lowest cluster multiplicity " + std::to_string(with) + " with connection, " +
              std::to_string(without) + " without"};
}

// Independent count: loop over (n, s) with |n| large enough and count E < e.
int brute_force_channels(double e, bool with) {
  int count = 0;
  for (int n = -50; n <= 50; ++n)
    for (int s : {1, -1}) {
      const double level = (n * n + (with ? s * n : 0)) / 2.0;
      if (level < e) ++count;
    }
  return count;
}

Outcome criterion_conductance() {
  std::vector<double> E;
  for (int i = 0; i <= 700; ++i) E.push_back(i * 0.01);
  const auto with = conductance_curve(1.0, E, true);
  const auto without = conductance_curve(1.0, E, false);
  int mismatches = 0;
  for (std::size_t i = 0; i < E.size(); ++i) {
    if (with.channels[i] != brute_force_channels(E[i], true)) ++mismatches;
    if (without.channels[i] != brute_force_channels(E[i], false)) ++mismatches;
    if (std::abs(with.g_over_e2h[i] - with.channels[i]) > 0 ||
        std::abs(without.g_over_e2h[i] - without.channels[i]) > 0)
      ++mismatches;
  }
  // Step locations.
  auto steps = [](const ConductanceCurve& c) {
    std::vector<double> at;
    for (std::size_t i = 1; i < c.energy.size(); ++i)
      if (c.channels[i] != c.channels[i - 1]) at.push_back(c.energy[i - 1]);
    return at;
  };
  const std::vector<double> sw = steps(with), so = steps(without);
  const std::vector<double> want_w = {0.0, 1.0, 3.0, 6.0}, want_o = {0.0, 0.5, 2.0, 4.5};
  auto same = [](const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (std::abs(a[i] - b[i]) > 1e-9) return false;
    return true;
  };
  const bool jump = with.channels[0] == 0 && with.channels[1] == 4;
  bool differ = true;
  for (double t : {0.5, 1.0, 2.0, 3.0, 4.5, 6.0})
    differ = differ && brute_force_channels(t + 1e-9, true) != brute_force_channels(t + 1e-9, false) &&
             conductance_curve(1.0, {t + 1e-9}, true).channels[0] !=
                 conductance_curve(1.0, {t + 1e-9}, false).channels[0];
  Outcome o;
  o.pass = mismatches == 0 && jump && same(sw, want_w) && same(so, want_o) && differ;
  o.detail = std::to_string(mismatches) + " channel mismatches over " + std::to_string(E.size()) +
             " energies; 0->" + std::to_string(with.channels[1]) + " at E=0+; steps " +
             (same(sw, want_w) ? "{0,1,3,6}" : "WRONG") + " / " + (same(so, want_o) ? "{0,0.5,2,4.5}" : "WRONG") +
             (differ ? "; curves differ at every threshold" : "; curves coincide somewhere");
  return o;
}

Outcome criterion_flux() {
  double worst_sphere = 0.0, worst_torus = 0.0;
  for (double r : {0.5, 1.0, 3.7})
    worst_sphere = std::max(worst_sphere, std::abs(flux(sphere(r)).phi_over_phi0 - 2.0) / 2.0);
  for (auto [rho, R] : {std::pair{1.0, 3.0}, std::pair{0.5, 2.0}, std::pair{0.3, 1.1}})
    worst_torus = std::max(worst_torus, std::abs(flux(torus(rho, R)).phi_over_phi0));
  return {worst_sphere < 1e-6 && worst_torus < 1e-8,
          "sphere max rel dev " + fmt("%.2e", worst_sphere) + " (3 radii), torus max |flux| " +
              fmt("%.2e", worst_torus) + " (3 shapes)"};
}

Outcome criterion_field_magnitude() {
  PhysicalScale nm;
  nm.length_m = 1e-9;
  const double b = pseudo_field_at(sphere(1.0), {1.0, 0.5}).B_tesla(nm);
  return {std::abs(b - 328.0) / 328.0 < 0.01, "B = " + fmt("%.2f T", b) + " for r = 1 nm"};
}

Outcome criterion_soi_radius() {
  const double r3 = soi_radius(3e-11, 0.041) * 1e9;
  const double r4 = soi_radius(4e-11, 0.041) * 1e9;
  const bool ok = std::abs(r3 - 31.0) / 31.0 < 0.02 && std::abs(r4 - 23.0) / 23.0 < 0.02;
  return {ok, fmt("%.2f nm", r4) + " .. " + fmt("%.2f nm", r3) + " (expected 23 .. 31 nm)"};
}

Outcome criterion_expansions() {
  const std::vector<double> q3 = {1e-2, 1e-3, 1e-4, 1e-5};
  std::vector<std::pair<SurfacePatch, Point2>> cases = {
      {sphere(1.0), {1.1, 0.4}}, {sphere(2.0), {2.3, 4.0}},
      {torus(1.0, 3.0), {0.7, 2.0}}, {torus(0.5, 2.0), {-2.0, 9.0}}};
  bool ok = true;
  double tetrad = 0.0, worst_margin = 1e9;
  for (const auto& [patch, q] : cases) {
    const auto rep = verify_thin_layer_expansions(patch, q, q3, false);
    ok = ok && rep.passed();
    tetrad = std::max(tetrad, rep.tetrad_residual[2]);  // q3 = 1e-4
    for (const auto& e : rep.entries)
      if (!e.identically_zero) worst_margin = std::min(worst_margin, e.slope - e.expected_order);
  }
  ok = ok && tetrad < 1e-8;
  return {ok, "4 points (2 sphere, 2 torus); worst slope minus order " + fmt("%.3f", worst_margin) +
                  " (slack " + fmt("%.1f", kSlopeSlack) + ")" +
                  ", tetrad residual at q3=1e-4 " + fmt("%.2e", tetrad)};
}

Outcome criterion_curl() {
  std::mt19937_64 rng(424242);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SurfaceParams pp;
  const std::vector<std::pair<std::string, SurfacePatch>> surfaces = {
      {"plane", make_surface(SurfaceKind::Plane, pp)},
      {"cylinder", cylinder(1.3)},
      {"sphere", sphere(0.8)},
      {"torus", torus(0.7, 2.1)}};
  double worst = 0.0;
  for (const auto& [name, s] : surfaces) {
    for (int i = 0; i < 100; ++i) {
      double a = s.lo(0) + s.span(0) * u(rng), b = s.lo(1) + s.span(1) * u(rng);
      if (name == "sphere") a = 0.05 + (kPi - 0.1) * u(rng);  // stay off the coordinate poles
      const auto c = curl_matches_w(s, {a, b});
      worst = std::max({worst, c.residual, std::abs(c.sigma3_part - c.minus_half_K)});
    }
  }
  return {worst < 1e-8, "max |curl_sigma3 - curl w|, |curl w + K/2| over 400 points: " + fmt("%.2e", worst)};
}

Outcome criterion_time_reversal() {
  SurfaceParams pp;
  const auto plane = make_surface(SurfaceKind::Plane, pp);
  const auto cyl = cylinder(1.0);
  const auto tor = torus(1.0, 2.5);
  const std::vector<std::pair<SurfacePatch, Grid>> cases = {
      {plane, make_grid(plane, 16, 16)},
      {cyl, make_grid(cyl, 24, 16)},
      {tor, make_grid(tor, 16, 20)}};
  double worst = 0.0;
  for (const auto& [patch, grid] : cases) {
    const auto h = assemble_H0(patch, grid);
    worst = std::max(worst, time_reversal_defect(h) / h.max_abs());
  }
  return {worst < 1e-12, "max ||[T,H0]|| / ||H0|| = " + fmt("%.2e", worst) + " (plane, cylinder, torus)"};
}

Outcome criterion_gauge() {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> nd(0.0, 0.5);
  const double c0 = nd(rng), c1 = nd(rng), c2 = nd(rng), c3 = nd(rng);
  const double R = 2.0;
  // winds once around the s direction, smooth random modulation elsewhere
  AssemblyOptions rot;
  rot.gauge = [=](Point2 q) {
    return c0 + c1 * std::cos(q.q1) + c2 * std::sin(q.q1 + q.q2 / R) + c3 * std::cos(2 * q.q2 / R) + q.q2 / R;
  };
  const auto tor = torus(1.0, R);
  const Grid g = make_grid(tor, 12, 16);
  const auto a = eigensolve(assemble_H0(tor, g), g.dimension() - 1).values;
  const auto b = eigensolve(assemble_H0(tor, g, rot), g.dimension() - 1).values;
  // energies in units hbar^2/(2 m rho^2) are twice the natural-unit values
  const double diff = 2.0 * (a - b).cwiseAbs().maxCoeff();
  return {diff < 1e-10, "max spectral shift " + fmt("%.2e", diff) + " over " + std::to_string(a.size()) + " levels"};
}

Outcome criterion_forces_and_spin_hall() {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = true;
  double defl_up[2] = {0, 0}, force_up[2] = {0, 0};
  for (int w = 0; w < 2; ++w) {
    BentCylinderSetup setup;  // rho 1, R 20, theta0 0.1
    setup.theta_c = w == 0 ? 0.0 : kPi;
    WavepacketSpec p;
    p.theta_center = setup.theta_c;
    p.s_center = setup.s_length / 2;
    p.k_s = 8.0;
    p.s_width = 0.5;
    p.theta_width = setup.theta0 / 3;
    const auto rep = force_equality_report(setup, p);
    const auto run = spin_hall_run(setup, p, 1e-3);
    const double up = run.mean_deflection_up, down = run.mean_deflection_down;
    const double asym = std::abs(up + down) / std::max(std::abs(up), std::abs(down));
    const double worst_lor = std::max({rep.up.rel_pm_lorentz, rep.up.rel_so_lorentz, rep.down.rel_pm_lorentz,
                                       rep.down.rel_so_lorentz, rep.up.rel_total_compact,
                                       rep.down.rel_total_compact});
    const double worst_eq = std::max(rep.up.rel_pm_so, rep.down.rel_pm_so);
    ok = ok && worst_eq < 0.05 && worst_lor < 0.10 && up * down < 0.0 && asym < 0.05;
    defl_up[w] = up;
    force_up[w] = rep.up.F_pm;
    detail += std::string(w == 0 ? "theta_c=0" : "; theta_c=pi") + ": |Fpm-Fso|/|Fpm| " + fmt("%.2e", worst_eq) +
              ", vs eBv " + fmt("%.3f", worst_lor) + ", dtheta up " + fmt("%+.3e", up) + " down " +
              fmt("%+.3e", down) + " asym " + fmt("%.3f", asym);
  }
  const bool flips = defl_up[0] * defl_up[1] < 0.0 && force_up[0] * force_up[1] < 0.0;
  const double runtime = seconds_since(t0);
  ok = ok && flips && runtime < 120.0;
  detail += std::string(flips ? "; sign pattern flips" : "; NO flip") + ", " + fmt("%.1f s", runtime);
  return {ok, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"cylinder spectrum", criterion_cylinder_spectrum},
      {"degeneracy restructuring", criterion_degeneracy},
      {"conductance steps", criterion_conductance},
      {"flux quantization", criterion_flux},
      {"pseudo-field magnitude", criterion_field_magnitude},
      {"SOI radius", criterion_soi_radius},
      {"expansion orders", criterion_expansions},
      {"curl identity", criterion_curl},
      {"time reversal", criterion_time_reversal},
      {"gauge covariance", criterion_gauge},
      {"force equality and spin Hall", criterion_forces_and_spin_hall}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
