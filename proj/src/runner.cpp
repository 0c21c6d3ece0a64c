#include "curvspin/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "curvspin/dynamics.hpp"
#include "curvspin/expansions.hpp"
#include "curvspin/gauge.hpp"
#include "curvspin/spectral.hpp"

namespace curvspin {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::map<std::string, std::set<std::string>>& allowed_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"", {"experiment", "kind", "seed", "out"}},
      {"surface", {"kind", "rho", "R", "radius", "length", "length2", "x", "y", "z", "lo1", "hi1",
                   "lo2", "hi2", "periodic1", "periodic2"}},
      {"grid", {"n1", "n2", "bc1", "bc2", "frozen1", "frozen2"}},
      {"hamiltonian", {"scalar", "spin_orbit", "with_connection"}},
      {"spectrum", {"k", "which", "target", "dense_limit", "block"}},
      {"conductance", {"e_max", "samples", "source"}},
      {"field-map", {"n1", "n2"}},
      {"geometry-report", {"n1", "n2"}},
      {"flux", {"n1", "n2", "pole_cap"}},
      {"expansions", {"q1", "q2", "q3_max", "q3_min", "count"}},
      {"bent", {"rho", "R", "theta_c", "theta0", "s_length", "n_theta", "n_s", "s_periodic"}},
      {"packet", {"k_s", "theta_width", "s_width", "s_center"}},
      {"evolve", {"dt", "travel_widths"}},
      {"scale", {"length_m", "mass_ratio"}},
      {"tolerance", {"degeneracy", "eigen_residual"}},
  };
  return keys;
}

struct Context {
  const Config& cfg;
  RunOptions opt;
  std::string experiment;
  std::uint64_t seed = 0;
  std::string hash;
  PhysicalScale scale;
  RunResult* result = nullptr;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(Context& ctx, const std::string& name, const std::string& units,
            const std::vector<std::string>& columns)
      : path_((fs::path(ctx.opt.out_dir) / name).string()), out_(path_) {
    if (!out_) throw std::runtime_error("cannot write " + path_);
    out_ << "# experiment=" << ctx.experiment << " config_hash=" << ctx.hash << " seed=" << ctx.seed
         << " units=" << units << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << "\n";
    ctx.result->artifacts.push_back(path_);
  }
  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << fmt(values[i]);
    out_ << "\n";
  }

 private:
  std::string path_;
  std::ofstream out_;
};

void write_json(Context& ctx, const std::string& name, json j) {
  j["experiment"] = ctx.experiment;
  j["config_hash"] = ctx.hash;
  j["seed"] = ctx.seed;
  const std::string path = (fs::path(ctx.opt.out_dir) / name).string();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
  ctx.result->artifacts.push_back(path);
}

SurfacePatch surface_from(const Config& c) {
  std::string kind = c.get_string("surface", "kind", c.get_string("", "kind", "cylinder"));
  SurfaceParams p;
  p.rho = c.get_double("surface", "rho", p.rho);
  p.R = c.get_double("surface", "R", p.R);
  p.radius = c.get_double("surface", "radius", p.radius);
  p.length = c.get_double("surface", "length", p.length);
  p.length2 = c.get_double("surface", "length2", p.length2);
  p.x_expr = c.get_string("surface", "x", "");
  p.y_expr = c.get_string("surface", "y", "");
  p.z_expr = c.get_string("surface", "z", "");
  p.lo = {c.get_double("surface", "lo1", 0.0), c.get_double("surface", "lo2", 0.0)};
  p.hi = {c.get_double("surface", "hi1", 1.0), c.get_double("surface", "hi2", 1.0)};
  p.periodic = {c.get_bool("surface", "periodic1", false), c.get_bool("surface", "periodic2", false)};
  SurfaceKind k;
  try {
    k = surface_kind_from_string(kind);
  } catch (const std::exception& e) {
    const auto* entry = c.find("surface", "kind") ? c.find("surface", "kind") : c.find("", "kind");
    throw ConfigError(e.what(), entry ? entry->line : 0, entry ? entry->column : 0,
                      c.has("surface", "kind") ? "surface.kind" : "kind");
  }
  return make_surface(k, p);
}

Boundary boundary_from(const Config& c, const std::string& key, Boundary fallback) {
  if (!c.has("grid", key)) return fallback;
  const std::string v = c.get_string("grid", key, "");
  if (v == "periodic") return Boundary::Periodic;
  if (v == "hard-wall" || v == "hardwall") return Boundary::HardWall;
  if (v == "frozen") return Boundary::Frozen;
  const auto* e = c.find("grid", key);
  throw ConfigError("key 'grid." + key + "' expects periodic, hard-wall or frozen, got '" + v + "'",
                    e->line, e->column, "grid." + key);
}

Grid grid_from(const Config& c, const SurfacePatch& patch) {
  const bool cyl = patch.kind() == SurfaceKind::Cylinder;
  // The cylinder's transverse problem: theta periodic, axial direction frozen.
  Boundary d1 = patch.periodic(0) ? Boundary::Periodic : Boundary::HardWall;
  Boundary d2 = cyl ? Boundary::Frozen : (patch.periodic(1) ? Boundary::Periodic : Boundary::HardWall);
  const Boundary b1 = boundary_from(c, "bc1", d1), b2 = boundary_from(c, "bc2", d2);
  const int n1 = c.get_int("grid", "n1", b1 == Boundary::Frozen ? 1 : (cyl ? 256 : 24));
  const int n2 = c.get_int("grid", "n2", b2 == Boundary::Frozen ? 1 : 24);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return make_grid(patch, n1, n2, b1, b2, c.get_double("grid", "frozen1", nan),
                   c.get_double("grid", "frozen2", nan));
}

AssemblyOptions assembly_from(const Config& c) {
  AssemblyOptions o;
  if (c.has("hamiltonian", "scalar")) {
    try {
      o.scalar = scalar_potential_from_string(c.get_string("hamiltonian", "scalar", "quarter-k"));
    } catch (const std::exception& e) {
      const auto* en = c.find("hamiltonian", "scalar");
      throw ConfigError(e.what(), en->line, en->column, "hamiltonian.scalar");
    }
  }
  const std::string so = c.get_string("hamiltonian", "spin_orbit", "link");
  if (so == "link") o.spin_orbit = SpinOrbitScheme::Link;
  else if (so == "centered") o.spin_orbit = SpinOrbitScheme::Centered;
  else {
    const auto* en = c.find("hamiltonian", "spin_orbit");
    throw ConfigError("key 'hamiltonian.spin_orbit' expects link or centered, got '" + so + "'",
                      en->line, en->column, "hamiltonian.spin_orbit");
  }
  return o;
}

BentCylinderSetup bent_from(const Config& c) {
  BentCylinderSetup s;
  s.rho = c.get_double("bent", "rho", c.get_double("surface", "rho", s.rho));
  s.R = c.get_double("bent", "R", s.R);
  s.theta_c = c.get_double("bent", "theta_c", s.theta_c);
  s.theta0 = c.get_double("bent", "theta0", s.theta0);
  s.s_length = c.get_double("bent", "s_length", s.s_length);
  s.n_theta = c.get_int("bent", "n_theta", s.n_theta);
  s.n_s = c.get_int("bent", "n_s", s.n_s);
  s.s_periodic = c.get_bool("bent", "s_periodic", s.s_periodic);
  s.validate();
  return s;
}

WavepacketSpec packet_from(const Config& c, const BentCylinderSetup& s) {
  WavepacketSpec w;
  w.theta_center = s.theta_c;
  w.k_s = c.get_double("packet", "k_s", 8.0);
  w.theta_width = c.get_double("packet", "theta_width", s.theta0 / 3.0);
  w.s_width = c.get_double("packet", "s_width", 0.5);
  w.s_center = c.get_double("packet", "s_center", 0.5 * s.s_length);
  return w;
}

std::vector<Point2> sample_points(const SurfacePatch& patch, int n1, int n2) {
  std::vector<Point2> pts;
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      // Cell centres keep clear of coordinate singularities on the boundary.
      pts.push_back({patch.lo(0) + (i + 0.5) * patch.span(0) / n1,
                     patch.lo(1) + (j + 0.5) * patch.span(1) / n2});
    }
  return pts;
}

json cluster_json(const std::vector<Cluster>& cl) {
  json a = json::array();
  for (const auto& c : cl) a.push_back({{"value", c.value}, {"multiplicity", c.multiplicity}, {"first", c.first}});
  return a;
}

}  // namespace

namespace {

std::string exp_geometry(Context& ctx) {
  const SurfacePatch patch = surface_from(ctx.cfg);
  const int n1 = ctx.cfg.get_int("geometry-report", "n1", 8), n2 = ctx.cfg.get_int("geometry-report", "n2", 8);
  CsvWriter csv(ctx, "geometry.csv", "lengths=L0 curvatures=1/L0^2",
                {"q1", "q2", "x", "y", "z", "sqrtg", "K", "M", "alpha11", "alpha12", "alpha21",
                 "alpha22", "w1", "w2"});
  double kmin = 1e300, kmax = -1e300, mmin = 1e300, mmax = -1e300;
  for (const auto& q : sample_points(patch, n1, n2)) {
    const FrameData f = frame_at(patch, q);
    csv.row({q.q1, q.q2, f.position.x(), f.position.y(), f.position.z(), f.sqrtg, f.K, f.M,
             f.alpha(0, 0), f.alpha(0, 1), f.alpha(1, 0), f.alpha(1, 1), f.w(0), f.w(1)});
    kmin = std::min(kmin, f.K);
    kmax = std::max(kmax, f.K);
    mmin = std::min(mmin, f.M);
    mmax = std::max(mmax, f.M);
  }
  write_json(ctx, "geometry.json",
             {{"kind", to_string(patch.kind())}, {"closed", patch.closed()},
              {"length_scale", patch.length_scale()}, {"K_min", kmin}, {"K_max", kmax},
              {"M_min", mmin}, {"M_max", mmax}, {"samples", n1 * n2}});
  return "geometry-report: " + to_string(patch.kind()) + " K in [" + fmt(kmin) + ", " + fmt(kmax) + "]";
}

std::string exp_field_map(Context& ctx) {
  const SurfacePatch patch = surface_from(ctx.cfg);
  const int n1 = ctx.cfg.get_int("field-map", "n1", 32), n2 = ctx.cfg.get_int("field-map", "n2", 32);
  const double bunit = ctx.opt.si ? ctx.scale.field_unit_tesla() : 1.0;
  CsvWriter csv(ctx, "field_map.csv",
                ctx.opt.si ? "B=tesla K=1/L0^2 w=1/L0" : "B=hbar/(e L0^2) K=1/L0^2 w=1/L0",
                {"q1", "q2", "K", "B", "w1", "w2", "curl_sigma3", "curl_w"});
  double bmax = 0.0, worst = 0.0;
  for (const auto& q : sample_points(patch, n1, n2)) {
    const GaugeFieldSample s = pseudo_field_at(patch, q);
    csv.row({q.q1, q.q2, s.K, s.B * bunit, s.w(0), s.w(1), s.curl_sigma3, s.curl_w});
    bmax = std::max(bmax, std::abs(s.B * bunit));
    worst = std::max(worst, std::abs(s.curl_sigma3 - s.curl_w));
  }
  write_json(ctx, "field_map.json",
             {{"kind", to_string(patch.kind())}, {"B_max", bmax},
              {"B_unit", ctx.opt.si ? "T" : "hbar/(e L0^2)"}, {"max_curl_mismatch", worst}});
  return "field-map: |B|max = " + fmt(bmax) + (ctx.opt.si ? " T" : "") + ", curl mismatch " + fmt(worst);
}

std::string exp_flux(Context& ctx) {
  const SurfacePatch patch = surface_from(ctx.cfg);
  FluxOptions o;
  o.n1 = ctx.cfg.get_int("flux", "n1", o.n1);
  o.n2 = ctx.cfg.get_int("flux", "n2", o.n2);
  o.pole_cap = ctx.cfg.get_double("flux", "pole_cap", o.pole_cap);
  const FluxResult r = flux(patch, o);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", r.phi_over_phi0);
  write_json(ctx, "flux.json",
             {{"kind", to_string(patch.kind())}, {"phi_over_phi0", r.phi_over_phi0},
              {"phi_over_phi0_text", buf}, {"error_estimate", r.error_estimate}, {"genus", r.genus}});
  return std::string("flux: phi/phi0 = ") + buf + " +- " + fmt(r.error_estimate) + " (genus " +
         std::to_string(r.genus) + ")";
}

std::string exp_spectrum(Context& ctx) {
  const Config& c = ctx.cfg;
  const SurfacePatch patch = surface_from(c);
  const Grid grid = grid_from(c, patch);
  AssemblyOptions ao = assembly_from(c);
  const bool with = c.get_bool("hamiltonian", "with_connection", true);
  HermitianOperator op;
  if (with) {
    op = assemble_Heff(patch, grid, ao);
  } else {
    ao.gauge_phases = false;
    op = assemble_H0(patch, grid, ao);
  }
  EigensolveOptions eo;
  eo.seed = ctx.seed;
  eo.dense_limit = c.get_int("spectrum", "dense_limit", eo.dense_limit);
  eo.block = c.get_int("spectrum", "block", eo.block);
  eo.tolerance = c.get_double("tolerance", "eigen_residual", eo.tolerance);
  const std::string which = c.get_string("spectrum", "which", "lowest");
  if (which == "nearest") {
    eo.which = Which::NearestTarget;
    eo.target = c.get_double("spectrum", "target", 0.0);
  } else if (which != "lowest") {
    const auto* e = c.find("spectrum", "which");
    throw ConfigError("key 'spectrum.which' expects lowest or nearest", e->line, e->column, "spectrum.which");
  }
  const int k = c.get_int("spectrum", "k", 16);
  const SpectrumResult r = eigensolve(op, k, eo);
  const auto clusters = degeneracy_clusters(r.values, c.get_double("tolerance", "degeneracy", 0.0));
  const double eunit = ctx.opt.si ? ctx.scale.energy_unit_ev() : 1.0;
  CsvWriter csv(ctx, "spectrum.csv", ctx.opt.si ? "energy=eV" : "energy=hbar^2/(m L0^2)",
                {"index", "energy", "cluster_id", "multiplicity"});
  for (std::size_t ci = 0; ci < clusters.size(); ++ci)
    for (int m = 0; m < clusters[ci].multiplicity; ++m) {
      const int idx = clusters[ci].first + m;
      csv.row({static_cast<double>(idx), r.values(idx) * eunit, static_cast<double>(ci),
               static_cast<double>(clusters[ci].multiplicity)});
    }
  json j = {{"kind", to_string(patch.kind())},
            {"with_connection", with},
            {"terms", op.terms.describe()},
            {"dimension", op.dimension()},
            {"grid", {{"n1", grid.n1}, {"n2", grid.n2}, {"bc1", to_string(grid.bc1)}, {"bc2", to_string(grid.bc2)}}},
            {"method", r.method},
            {"max_residual", r.max_residual()},
            {"operator_norm", r.operator_norm},
            {"energy_unit", ctx.opt.si ? "eV" : "hbar^2/(m L0^2)"},
            {"clusters", cluster_json(clusters)}};
  if (patch.kind() == SurfaceKind::Cylinder) {
    json th = json::array();
    for (const auto& l : cylinder_analytic_spectrum(patch.params().rho, 4, with))
      th.push_back({{"n", l.n}, {"s", l.s}, {"j", l.j}, {"energy", l.energy * eunit}});
    j["analytic_levels"] = th;
  }
  write_json(ctx, "spectrum.json", j);
  std::ostringstream s;
  s << "spectrum: " << k << " levels, " << clusters.size() << " clusters, ground "
    << fmt(r.values(0) * eunit) << " x" << clusters.front().multiplicity;
  return s.str();
}

std::string exp_conductance(Context& ctx) {
  const Config& c = ctx.cfg;
  const SurfacePatch patch = surface_from(c);
  if (patch.kind() != SurfaceKind::Cylinder)
    throw std::runtime_error("conductance experiment needs a cylinder surface");
  const double rho = patch.params().rho;
  const double emax = c.get_double("conductance", "e_max", 7.0 / (rho * rho));
  const int samples = c.get_int("conductance", "samples", 701);
  if (samples < 2) throw ConfigError("conductance.samples must be >= 2", c.find("conductance", "samples")->line, 0, "conductance.samples");
  std::vector<double> energies;
  for (int i = 0; i < samples; ++i) energies.push_back(emax * i / (samples - 1));
  const std::string source = c.get_string("conductance", "source", "analytic");
  const double eunit = ctx.opt.si ? ctx.scale.energy_unit_ev() : 1.0;
  json j = {{"kind", "cylinder"}, {"rho", rho}, {"source", source},
            {"energy_unit", ctx.opt.si ? "eV" : "hbar^2/(m rho^2) at rho = L0"}};
  std::string summary = "conductance:";
  for (bool with : {true, false}) {
    ConductanceCurve curve;
    if (source == "analytic") {
      curve = conductance_curve(rho, energies, with);
    } else if (source == "numeric") {
      const Grid grid = grid_from(c, patch);
      AssemblyOptions ao = assembly_from(c);
      ao.gauge_phases = with;
      const HermitianOperator op = with ? assemble_Heff(patch, grid, ao) : assemble_H0(patch, grid, ao);
      int k = 0;
      for (const auto& l : cylinder_analytic_spectrum(rho, static_cast<int>(std::ceil(std::sqrt(2 * rho * rho * emax))) + 2, with))
        if (l.energy < emax * 1.2) ++k;
      k = std::min(k + 8, op.dimension() - 1);
      EigensolveOptions eo;
      eo.seed = ctx.seed;
      const SpectrumResult r = eigensolve(op, k, eo);
      curve = conductance_curve(std::vector<double>(r.values.data(), r.values.data() + r.values.size()),
                                energies, with);
    } else {
      const auto* e = c.find("conductance", "source");
      throw ConfigError("key 'conductance.source' expects analytic or numeric", e->line, e->column, "conductance.source");
    }
    CsvWriter csv(ctx, with ? "conductance_with.csv" : "conductance_without.csv",
                  std::string(ctx.opt.si ? "E=eV" : "E=hbar^2/(m rho^2)") + " G=e^2/h",
                  {"E", "N", "G_over_e2h"});
    for (std::size_t i = 0; i < curve.energy.size(); ++i)
      csv.row({curve.energy[i] * eunit, static_cast<double>(curve.channels[i]), curve.g_over_e2h[i]});
    json steps = json::array();
    for (const auto& cl : degeneracy_clusters(curve.thresholds, 1e-9))
      if (cl.value < emax) steps.push_back({{"threshold", cl.value * eunit}, {"channels_added", cl.multiplicity}});
    j[with ? "with_connection" : "without_connection"] = {{"steps", steps}};
    summary += std::string(with ? " with" : "; without") + " first step " +
               std::to_string(steps.empty() ? 0 : steps[0]["channels_added"].get<int>()) + " channels";
  }
  write_json(ctx, "conductance.json", j);
  return summary;
}

json species_json(const ForceSpecies& f) {
  return {{"spin", f.spin},
          {"mean_theta", f.mean_theta},
          {"mean_ps", f.mean_ps},
          {"F_pm", f.F_pm},
          {"F_so", f.F_so},
          {"expected_each", f.expected_each},
          {"analytic_theta_ddot", f.analytic.theta_ddot * f.spin},
          {"analytic_F_total", f.analytic.F_total * f.spin},
          {"analytic_F_compact", f.analytic.F_compact * f.spin},
          {"B", f.analytic.B},
          {"rel_pm_so", f.rel_pm_so},
          {"rel_pm_lorentz", f.rel_pm_lorentz},
          {"rel_so_lorentz", f.rel_so_lorentz},
          {"rel_total_compact", f.rel_total_compact}};
}

json setup_json(const BentCylinderSetup& s) {
  return {{"rho", s.rho}, {"R", s.R}, {"theta_c", s.theta_c}, {"theta0", s.theta0},
          {"s_length", s.s_length}, {"n_theta", s.n_theta}, {"n_s", s.n_s}, {"s_periodic", s.s_periodic}};
}

std::string exp_forces(Context& ctx) {
  const BentCylinderSetup s = bent_from(ctx.cfg);
  const WavepacketSpec w = packet_from(ctx.cfg, s);
  const ForceReport r = force_equality_report(s, w);
  write_json(ctx, "forces.json",
             {{"setup", setup_json(s)}, {"units", "F = rho^2 theta_ddot, hbar = m = e = 1"},
              {"up", species_json(r.up)}, {"down", species_json(r.down)}});
  return "forces: F_pm = " + fmt(r.up.F_pm) + ", F_so = " + fmt(r.up.F_so) + " (spin up), e B v_s = " +
         fmt(r.up.expected_each);
}

std::string exp_evolve(Context& ctx) {
  const BentCylinderSetup s = bent_from(ctx.cfg);
  const WavepacketSpec w = packet_from(ctx.cfg, s);
  const double dt = ctx.cfg.get_double("evolve", "dt", 1e-3);
  const double widths = ctx.cfg.get_double("evolve", "travel_widths", 10.0);
  const SpinHallRun r = spin_hall_run(s, w, dt, widths);
  const double tunit = ctx.opt.si ? ctx.scale.time_unit_s() : 1.0;
  CsvWriter csv(ctx, "trajectory.csv", ctx.opt.si ? "t=s theta=rad p_s=hbar/L0" : "t=m L0^2/hbar theta=rad p_s=hbar/L0",
                {"t", "mean_theta_up", "mean_theta_down", "mean_ps", "sigma3_up", "sigma3_down"});
  for (std::size_t i = 0; i < r.t.size(); ++i)
    csv.row({r.t[i] * tunit, r.theta_up[i], r.theta_down[i], 0.5 * (r.ps_up[i] + r.ps_down[i]),
             r.sigma3_up[i], r.sigma3_down[i]});
  const double asym = std::abs(r.mean_deflection_up + r.mean_deflection_down) /
                      std::max(std::abs(r.mean_deflection_up), 1e-300);
  write_json(ctx, "evolve.json",
             {{"setup", setup_json(s)}, {"dt", dt}, {"steps", r.steps},
              {"stopped_at_wall", r.stopped_at_wall}, {"mean_deflection_up", r.mean_deflection_up},
              {"mean_deflection_down", r.mean_deflection_down}, {"asymmetry", asym},
              {"norm_drift", r.norm_drift}});
  return "evolve: mean deflection up " + fmt(r.mean_deflection_up) + ", down " + fmt(r.mean_deflection_down);
}

std::string exp_expansions(Context& ctx) {
  const SurfacePatch patch = surface_from(ctx.cfg);
  const Point2 q{ctx.cfg.get_double("expansions", "q1", patch.lo(0) + 0.37 * patch.span(0)),
                 ctx.cfg.get_double("expansions", "q2", patch.lo(1) + 0.29 * patch.span(1))};
  std::vector<double> seq = default_q3_sequence(patch, q);
  if (ctx.cfg.has("expansions", "q3_max")) {
    const double hi = ctx.cfg.get_double("expansions", "q3_max", 1e-2);
    const double lo = ctx.cfg.get_double("expansions", "q3_min", hi * 1e-3);
    const int n = ctx.cfg.get_int("expansions", "count", 4);
    seq.clear();
    for (int i = 0; i < n; ++i) seq.push_back(hi * std::pow(lo / hi, static_cast<double>(i) / (n - 1)));
  }
  const ExpansionReport r = verify_thin_layer_expansions(patch, q, seq, false);
  CsvWriter csv(ctx, "expansions.csv", "q3=L0", {"entry", "q3", "value"});
  json entries = json::array();
  for (std::size_t e = 0; e < r.entries.size(); ++e) {
    const auto& en = r.entries[e];
    for (std::size_t i = 0; i < en.q3.size(); ++i) csv.row({static_cast<double>(e), en.q3[i], en.values[i]});
    entries.push_back({{"id", e}, {"name", en.name}, {"expected_order", en.expected_order},
                       {"slope", std::isnan(en.slope) ? json(nullptr) : json(en.slope)},
                       {"identically_zero", en.identically_zero}, {"passed", en.passed}});
  }
  write_json(ctx, "expansions.json",
             {{"kind", to_string(patch.kind())}, {"point", {q.q1, q.q2}}, {"entries", entries},
              {"tetrad_residual", r.tetrad_residual}, {"tetrad_passed", r.tetrad_passed},
              {"passed", r.passed()}});
  return std::string("expansions: ") + (r.passed() ? "all orders as expected" : "ORDER MISMATCH");
}

}  // namespace

RunResult run(const Config& cfg, const RunOptions& options) {
  RunResult res;
  Context ctx{cfg, options, {}, 0, {}, {}, nullptr};
  ctx.result = &res;
  try {
    cfg.validate(allowed_keys());
    ctx.experiment = options.experiment ? *options.experiment : cfg.get_string("", "experiment", "spectrum");
    res.experiment = ctx.experiment;
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), ctx.experiment) == names.end()) {
      const auto* e = cfg.find("", "experiment");
      throw ConfigError("unknown experiment '" + ctx.experiment + "'", e ? e->line : 0,
                        e ? e->column : 0, "experiment");
    }
    if (options.seed) {
      ctx.seed = *options.seed;
    } else {
      const int s = cfg.get_int("", "seed", 1);
      if (s < 0) throw ConfigError("seed must be non-negative", cfg.find("", "seed")->line, cfg.find("", "seed")->column, "seed");
      ctx.seed = static_cast<std::uint64_t>(s);
    }
    if (ctx.opt.out_dir.empty()) ctx.opt.out_dir = cfg.get_string("", "out", "out");
    ctx.scale.length_m = cfg.get_double("scale", "length_m", ctx.scale.length_m);
    ctx.scale.mass_ratio = cfg.get_double("scale", "mass_ratio", ctx.scale.mass_ratio);
    if (!(ctx.scale.length_m > 0.0) || !(ctx.scale.mass_ratio > 0.0))
      throw ConfigError("scale.length_m and scale.mass_ratio must be positive", 0, 0, "scale");
    ctx.hash = hex64(fnv1a(cfg.canonical() + "experiment=" + ctx.experiment + "\nseed=" +
                           std::to_string(ctx.seed) + "\nsi=" + (options.si ? "1" : "0") + "\n"));
    fs::create_directories(ctx.opt.out_dir);
    const std::string& e = ctx.experiment;
    if (e == "geometry-report") res.summary = exp_geometry(ctx);
    else if (e == "field-map") res.summary = exp_field_map(ctx);
    else if (e == "flux") res.summary = exp_flux(ctx);
    else if (e == "spectrum") res.summary = exp_spectrum(ctx);
    else if (e == "conductance") res.summary = exp_conductance(ctx);
    else if (e == "forces") res.summary = exp_forces(ctx);
    else if (e == "evolve") res.summary = exp_evolve(ctx);
    else res.summary = exp_expansions(ctx);
    if (!options.quiet) std::cout << res.summary << std::endl;
    return res;
  } catch (const ConfigError& e) {
    res.exit_code = 2;
    res.error = {{"status", "error"}, {"kind", "config"}, {"message", e.what()},
                 {"key", e.key}, {"line", e.line}, {"column", e.column}};
  } catch (const std::exception& e) {
    res.exit_code = 3;
    res.error = {{"status", "error"}, {"kind", "experiment"}, {"experiment", ctx.experiment},
                 {"message", e.what()}};
  }
  std::cerr << res.error.dump() << std::endl;
  try {
    const std::string dir = ctx.opt.out_dir.empty() ? "out" : ctx.opt.out_dir;
    fs::create_directories(dir);
    std::ofstream(fs::path(dir) / "error.json") << res.error.dump(2) << "\n";
    res.artifacts.push_back((fs::path(dir) / "error.json").string());
  } catch (...) {
  }
  return res;
}

RunResult run_text(const std::string& text, const RunOptions& options) {
  try {
    return run(Config::parse(text), options);
  } catch (const ConfigError& e) {
    RunResult res;
    res.exit_code = 2;
    res.error = {{"status", "error"}, {"kind", "config"}, {"message", e.what()},
                 {"key", e.key}, {"line", e.line}, {"column", e.column}};
    std::cerr << res.error.dump() << std::endl;
    try {
      const std::string dir = options.out_dir.empty() ? "out" : options.out_dir;
      fs::create_directories(dir);
      std::ofstream(fs::path(dir) / "error.json") << res.error.dump(2) << "\n";
    } catch (...) {
    }
    return res;
  }
}

RunResult run_file(const std::string& path, const RunOptions& options) {
  std::ifstream f(path);
  if (!f) {
    RunResult res;
    res.exit_code = 2;
    res.error = {{"status", "error"}, {"kind", "config"}, {"message", "cannot open config file '" + path + "'"},
                 {"key", ""}, {"line", 0}, {"column", 0}};
    std::cerr << res.error.dump() << std::endl;
    return res;
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  return run_text(ss.str(), options);
}

namespace {

struct CsvData {
  std::string experiment;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

CsvData read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw CompareError("cannot open " + path);
  CsvData d;
  std::string line;
  bool have_cols = false;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto p = line.find("experiment=");
      if (p != std::string::npos) {
        const auto e = line.find(' ', p);
        d.experiment = line.substr(p + 11, e == std::string::npos ? std::string::npos : e - p - 11);
      }
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!have_cols) {
      d.columns = cells;
      have_cols = true;
      continue;
    }
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(std::strtod(c.c_str(), nullptr));
    d.rows.push_back(row);
  }
  return d;
}

double rel_diff(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

std::vector<double> step_positions(const CsvData& d) {
  std::vector<double> steps;
  const auto ie = std::find(d.columns.begin(), d.columns.end(), "E") - d.columns.begin();
  const auto in = std::find(d.columns.begin(), d.columns.end(), "N") - d.columns.begin();
  if (ie >= static_cast<long>(d.columns.size()) || in >= static_cast<long>(d.columns.size())) return steps;
  for (std::size_t i = 1; i < d.rows.size(); ++i)
    if (d.rows[i][static_cast<std::size_t>(in)] != d.rows[i - 1][static_cast<std::size_t>(in)])
      steps.push_back(d.rows[i][static_cast<std::size_t>(ie)]);
  return steps;
}

void flatten(const json& j, const std::string& prefix, std::map<std::string, json>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
  } else {
    out[prefix] = j;
  }
}

}  // namespace

CompareReport compare_artifacts(const std::string& a, const std::string& b, double tol) {
  const auto ext_a = fs::path(a).extension().string(), ext_b = fs::path(b).extension().string();
  if (ext_a != ext_b) throw CompareError("artifact types differ: " + ext_a + " vs " + ext_b);
  CompareReport rep;
  json failures = json::array();
  if (ext_a == ".csv") {
    const CsvData da = read_csv(a), db = read_csv(b);
    if (da.experiment != db.experiment)
      throw CompareError("experiment types differ: " + da.experiment + " vs " + db.experiment);
    if (da.columns != db.columns) throw CompareError("CSV columns differ");
    rep.experiment = da.experiment;
    if (da.rows.size() != db.rows.size()) {
      rep.passed = false;
      rep.details["row_count"] = {da.rows.size(), db.rows.size()};
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < std::min(da.rows.size(), db.rows.size()); ++i)
      for (std::size_t c = 0; c < da.columns.size() && c < da.rows[i].size() && c < db.rows[i].size(); ++c) {
        const double r = rel_diff(da.rows[i][c], db.rows[i][c]);
        worst = std::max(worst, r);
        if (r > tol) {
          rep.passed = false;
          if (failures.size() < 50)
            failures.push_back({{"row", i}, {"column", da.columns[c]}, {"a", da.rows[i][c]},
                                {"b", db.rows[i][c]}, {"rel", r}});
        }
      }
    rep.details["max_rel_diff"] = worst;
    const auto sa = step_positions(da), sb = step_positions(db);
    if (!sa.empty() || !sb.empty()) {
      json diffs = json::array();
      for (std::size_t i = 0; i < std::max(sa.size(), sb.size()); ++i)
        diffs.push_back({{"a", i < sa.size() ? json(sa[i]) : json(nullptr)},
                         {"b", i < sb.size() ? json(sb[i]) : json(nullptr)}});
      rep.details["step_positions"] = diffs;
    }
  } else if (ext_a == ".json") {
    std::ifstream fa(a), fb(b);
    if (!fa || !fb) throw CompareError("cannot open JSON artifacts");
    const json ja = json::parse(fa), jb = json::parse(fb);
    const std::string ea = ja.value("experiment", ""), eb = jb.value("experiment", "");
    if (ea != eb) throw CompareError("experiment types differ: " + ea + " vs " + eb);
    rep.experiment = ea;
    std::map<std::string, json> fa_, fb_;
    flatten(ja, "", fa_);
    flatten(jb, "", fb_);
    double worst = 0.0;
    std::set<std::string> keys;
    for (const auto& [k, v] : fa_) keys.insert(k);
    for (const auto& [k, v] : fb_) keys.insert(k);
    for (const auto& k : keys) {
      if (k == "config_hash" || k == "seed") continue;
      const auto ia = fa_.find(k), ib = fb_.find(k);
      if (ia == fa_.end() || ib == fb_.end()) {
        rep.passed = false;
        failures.push_back({{"field", k}, {"missing_in", ia == fa_.end() ? "a" : "b"}});
        continue;
      }
      if (ia->second.is_number() && ib->second.is_number()) {
        const double r = rel_diff(ia->second.get<double>(), ib->second.get<double>());
        worst = std::max(worst, r);
        if (r > tol) {
          rep.passed = false;
          failures.push_back({{"field", k}, {"a", ia->second}, {"b", ib->second}, {"rel", r}});
        }
      } else if (ia->second != ib->second) {
        rep.passed = false;
        failures.push_back({{"field", k}, {"a", ia->second}, {"b", ib->second}});
      }
    }
    rep.details["max_rel_diff"] = worst;
  } else {
    throw CompareError("unsupported artifact type '" + ext_a + "'");
  }
  rep.details["failures"] = failures;
  rep.details["passed"] = rep.passed;
  rep.details["experiment"] = rep.experiment;
  rep.details["tolerance"] = tol;
  return rep;
}

}  // namespace curvspin
