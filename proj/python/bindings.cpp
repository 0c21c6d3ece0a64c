#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "curvspin/dynamics.hpp"
#include "curvspin/gauge.hpp"
#include "curvspin/runner.hpp"
#include "curvspin/spectral.hpp"

namespace py = pybind11;
using namespace curvspin;

namespace {

SurfacePatch build_surface(const std::string& kind, const py::kwargs& kw) {
  SurfaceParams p;
  for (auto item : kw) {
    const auto key = item.first.cast<std::string>();
    if (key == "rho") p.rho = item.second.cast<double>();
    else if (key == "R") p.R = item.second.cast<double>();
    else if (key == "radius") p.radius = item.second.cast<double>();
    else if (key == "length") p.length = item.second.cast<double>();
    else if (key == "length2") p.length2 = item.second.cast<double>();
    else if (key == "x") p.x_expr = item.second.cast<std::string>();
    else if (key == "y") p.y_expr = item.second.cast<std::string>();
    else if (key == "z") p.z_expr = item.second.cast<std::string>();
    else if (key == "lo") p.lo = item.second.cast<std::array<double, 2>>();
    else if (key == "hi") p.hi = item.second.cast<std::array<double, 2>>();
    else if (key == "periodic") p.periodic = item.second.cast<std::array<bool, 2>>();
    else throw py::key_error("unknown surface parameter '" + key + "'");
  }
  return make_surface(surface_kind_from_string(kind), p);
}

py::dict field_dict(const GaugeFieldSample& f) {
  py::dict d;
  d["K"] = f.K;
  d["B"] = f.B;
  d["w"] = std::array<double, 2>{f.w(0), f.w(1)};
  d["curl_sigma3"] = f.curl_sigma3;
  d["curl_w"] = f.curl_w;
  return d;
}

// Sparse matrix as (rows, cols, values) arrays.
py::tuple coo(const SparseMatrixC& m) {
  std::vector<int> r, c;
  std::vector<std::complex<double>> v;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrixC::InnerIterator it(m, k); it; ++it) {
      r.push_back(static_cast<int>(it.row()));
      c.push_back(static_cast<int>(it.col()));
      v.push_back(it.value());
    }
  return py::make_tuple(r, c, v, m.rows());
}

}  // namespace

PYBIND11_MODULE(_curvspin, m) {
  m.doc() = "Spin-1/2 particle on a curved surface: geometry, gauge fields, spectra, dynamics";

  py::register_exception<InvalidParameter>(m, "InvalidParameter", PyExc_ValueError);
  py::register_exception<NotClosedSurface>(m, "NotClosedSurface", PyExc_ValueError);

  py::class_<SurfacePatch>(m, "Surface")
      .def(py::init(&build_surface), py::arg("kind"))
      .def_property_readonly("kind", [](const SurfacePatch& s) { return to_string(s.kind()); })
      .def_property_readonly("closed", &SurfacePatch::closed)
      .def("domain", [](const SurfacePatch& s) {
        return py::make_tuple(py::make_tuple(s.lo(0), s.hi(0)), py::make_tuple(s.lo(1), s.hi(1)));
      })
      .def("position", [](const SurfacePatch& s, double q1, double q2) {
        const Vec3 r = s.position({q1, q2});
        return std::array<double, 3>{r(0), r(1), r(2)};
      });

  m.def("pseudo_field", [](const SurfacePatch& s, double q1, double q2) {
    return field_dict(pseudo_field_at(s, {q1, q2}));
  });
  m.def("field_tesla", [](double B, double length_m) {
    PhysicalScale sc;
    sc.length_m = length_m;
    return B * sc.field_unit_tesla();
  }, py::arg("B"), py::arg("length_m") = 1e-9);
  m.def("flux", [](const SurfacePatch& s) {
    const auto f = flux(s);
    py::dict d;
    d["phi_over_phi0"] = f.phi_over_phi0;
    d["genus"] = f.genus;
    d["error_estimate"] = f.error_estimate;
    return d;
  });
  m.def("soi_radius", &soi_radius, py::arg("alpha_tilde_ev_m"), py::arg("mass_ratio"));

  m.def("heff", [](const SurfacePatch& s, int n1, int n2) {
    return coo(assemble_Heff(s, make_grid(s, n1, n2)).matrix);
  }, "H_eff on the default grid as (rows, cols, values, dimension)");
  m.def("cylinder_levels", [](double rho, int n, bool with_connection, int k) {
    SurfaceParams p;
    p.rho = rho;
    const auto cyl = make_surface(SurfaceKind::Cylinder, p);
    const Grid g = make_grid(cyl, n, 1, Boundary::Periodic, Boundary::Frozen);
    const auto h = with_connection ? assemble_Heff(cyl, g) : assemble_H0(cyl, g);
    return Eigen::VectorXd(eigensolve(h, k).values);
  }, py::arg("rho") = 1.0, py::arg("n") = 256, py::arg("with_connection") = true, py::arg("k") = 16);
  m.def("conductance", [](double rho, const std::vector<double>& energies, bool with_connection) {
    return conductance_curve(rho, energies, with_connection).channels;
  }, py::arg("rho"), py::arg("energies"), py::arg("with_connection") = true);

  m.def("analytic_force", [](double rho, double R, double p_s, double theta) {
    BentCylinderSetup s;
    s.rho = rho;
    s.R = R;
    const auto a = analytic_force(s, p_s, theta);
    py::dict d;
    d["theta_ddot"] = a.theta_ddot;
    d["F_each"] = a.F_each;
    d["B"] = a.B;
    d["lorentz"] = a.lorentz;
    return d;
  });

  m.def("run", [](const std::string& config_text, const std::string& out_dir) {
    RunOptions o;
    o.out_dir = out_dir;
    o.quiet = true;
    const auto r = run_text(config_text, o);
    py::dict d;
    d["exit_code"] = r.exit_code;
    d["experiment"] = r.experiment;
    d["artifacts"] = r.artifacts;
    d["summary"] = r.summary;
    return d;
  }, py::arg("config_text"), py::arg("out_dir"));
}
