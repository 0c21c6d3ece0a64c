#include "curvspin/gauge.hpp"

#include <cmath>

namespace curvspin {

namespace {

constexpr double kPi = 3.14159265358979323846;

Point2 shifted(Point2 q, int a, double d) {
  if (a == 0) q.q1 += d;
  else q.q2 += d;
  return q;
}

double curl_step(const SurfacePatch& patch, int a) {
  return patch.span(a) * (patch.has_analytic_derivatives() ? 2.5e-4 : 1e-2);
}

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) comp_ += (sum_ - t) + x;
    else comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0, comp_ = 0.0;
};

}  // namespace

GaugeFieldSample pseudo_field_at(const SurfacePatch& patch, Point2 q) {
  const FrameData fd = frame_at(patch, q);
  GaugeFieldSample s;
  s.point = q;
  s.K = fd.K;
  s.w = fd.w;
  s.B = 0.5 * fd.K;
  s.A_so = fd.A_so;

  std::array<Mat2c, 2> dA;  // dA[a] = d_a A_{other}
  std::array<double, 2> dw;
  for (int a = 0; a < 2; ++a) {
    const double h = curl_step(patch, a);
    const int other = 1 - a;
    const FrameData p2 = frame_at(patch, shifted(q, a, 2 * h));
    const FrameData p1 = frame_at(patch, shifted(q, a, h));
    const FrameData m1 = frame_at(patch, shifted(q, a, -h));
    const FrameData m2 = frame_at(patch, shifted(q, a, -2 * h));
    dA[a] = (-p2.A_so[other] + 8.0 * p1.A_so[other] - 8.0 * m1.A_so[other] + m2.A_so[other]) /
            (12.0 * h);
    dw[a] = (-p2.w(other) + 8.0 * p1.w(other) - 8.0 * m1.w(other) + m2.w(other)) / (12.0 * h);
  }
  const cplx i(0.0, 1.0);
  const Mat2c F = (dA[0] - dA[1] + i * (fd.A_so[0] * fd.A_so[1] - fd.A_so[1] * fd.A_so[0])) /
                  fd.sqrtg;
  const auto c = pauli::decompose(F);
  s.curl_sigma3 = c[3].real();
  const Vec2 frame_coeffs(c[1].real(), c[2].real());
  s.curl_tangential = fd.inv_vielbein.transpose() * frame_coeffs;  // F^a = c_i e_i^a
  s.curl_w = (dw[0] - dw[1]) / fd.sqrtg;
  return s;
}

CurlComparison curl_matches_w(const SurfacePatch& patch, Point2 q) {
  const GaugeFieldSample s = pseudo_field_at(patch, q);
  CurlComparison c;
  c.sigma3_part = s.curl_sigma3;
  c.curl_w = s.curl_w;
  c.minus_half_K = -0.5 * s.K;
  c.tangential = s.curl_tangential;
  c.residual = std::abs(s.curl_sigma3 - s.curl_w);
  return c;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < (n + 1) / 2; ++k) {
    double x = std::cos(kPi * (k + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = x;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int j = 2; j <= n; ++j) {
      const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[static_cast<std::size_t>(k)] = -x;
    nodes[static_cast<std::size_t>(n - 1 - k)] = x;
    weights[static_cast<std::size_t>(k)] = w;
    weights[static_cast<std::size_t>(n - 1 - k)] = w;
  }
}

namespace {

double integrate_curvature(const SurfacePatch& patch, int n1, int n2, double cap) {
  CompensatedSum sum;
  if (patch.kind() == SurfaceKind::Sphere) {
    std::vector<double> x, wts;
    gauss_legendre(n1, x, wts);
    const double a = cap, b = kPi - cap;
    const double h2 = patch.span(1) / n2;
    for (int i = 0; i < n1; ++i) {
      const double th = 0.5 * (b - a) * x[static_cast<std::size_t>(i)] + 0.5 * (a + b);
      const double wq = 0.5 * (b - a) * wts[static_cast<std::size_t>(i)];
      for (int j = 0; j < n2; ++j) {
        const FrameData fd = frame_at(patch, {th, patch.lo(1) + j * h2});
        sum.add(fd.K * fd.sqrtg * wq * h2);
      }
    }
    // Polar caps: K = 1/r^2 is constant, each cap has area 2 pi r^2 (1 - cos cap).
    sum.add(2.0 * 2.0 * kPi * (1.0 - std::cos(cap)));
    return sum.value();
  }
  const double h1 = patch.span(0) / n1, h2 = patch.span(1) / n2;
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      const FrameData fd = frame_at(patch, {patch.lo(0) + i * h1, patch.lo(1) + j * h2});
      sum.add(fd.K * fd.sqrtg * h1 * h2);
    }
  return sum.value();
}

}  // namespace

FluxResult flux(const SurfacePatch& patch, const FluxOptions& options) {
  if (!patch.closed())
    throw NotClosedSurface("flux requires a closed surface; " + to_string(patch.kind()) +
                           " patch is open");
  if (options.n1 < 4 || options.n2 < 4) throw std::invalid_argument("flux grid too coarse");
  const double full = integrate_curvature(patch, options.n1, options.n2, options.pole_cap);
  const double half = integrate_curvature(patch, options.n1 / 2, options.n2 / 2, options.pole_cap);
  FluxResult r;
  r.phi_over_phi0 = full / (2.0 * kPi);
  r.error_estimate = std::abs(full - half) / (2.0 * kPi);
  r.genus = static_cast<int>(std::lround(1.0 - 0.5 * r.phi_over_phi0));
  return r;
}

WField sample_w(const SurfacePatch& patch, const std::vector<Point2>& points) {
  WField f;
  f.points = points;
  f.w.reserve(points.size());
  for (const auto& p : points) f.w.push_back(frame_at(patch, p).w);
  return f;
}

void check_winding(const SurfacePatch& patch, const PhaseFunction& theta) {
  for (int a = 0; a < 2; ++a) {
    if (!patch.periodic(a)) continue;
    const int other = 1 - a;
    for (int k = 0; k < 5; ++k) {
      Point2 start;
      const double t = patch.lo(other) + patch.span(other) * (k + 0.5) / 5.0;
      if (a == 0) start = {patch.lo(0), t};
      else start = {t, patch.lo(1)};
      const double jump = theta(shifted(start, a, patch.span(a))) - theta(start);
      const double winding = jump / (2.0 * kPi);
      if (std::abs(winding - std::round(winding)) > 1e-8)
        throw WindingMismatch("phase jumps by " + std::to_string(jump) + " across periodic q" +
                              std::to_string(a + 1) + " (not a multiple of 2pi)");
    }
  }
}

WField gauge_transform(const SurfacePatch& patch, const WField& field, const PhaseFunction& theta) {
  check_winding(patch, theta);
  WField out = field;
  for (std::size_t k = 0; k < field.points.size(); ++k) {
    for (int a = 0; a < 2; ++a) {
      const double h = patch.span(a) * 1e-4;
      const Point2 p = field.points[k];
      const double d = (-theta(shifted(p, a, 2 * h)) + 8.0 * theta(shifted(p, a, h)) -
                        8.0 * theta(shifted(p, a, -h)) + theta(shifted(p, a, -2 * h))) /
                       (12.0 * h);
      out.w[k](a) -= d;
    }
  }
  return out;
}

std::optional<double> pseudo_electric_field(const SurfacePatch& patch, Point2 q,
                                            const PhysicalScale& scale, double tol) {
  const FrameData fd = frame_at(patch, q);
  const double norm = fd.alpha.norm();
  if (std::abs(fd.alpha(0, 0) - fd.alpha(1, 1)) > tol * norm) return std::nullopt;
  // 2 m c^2 alpha / e, with m c^2 / e in volts and alpha in 1/m.
  const double mc2_volts = scale.mass_kg() * codata::speed_of_light * codata::speed_of_light /
                           codata::elementary_charge;
  return 2.0 * mc2_volts * fd.alpha(0, 0) / scale.length_m;
}

double soi_radius(double alpha_tilde_ev_m, double mass_ratio) {
  if (!(alpha_tilde_ev_m > 0.0) || !(mass_ratio > 0.0))
    throw std::domain_error("soi_radius requires positive coupling and mass ratio");
  return kSoiRadiusNumerator / (mass_ratio * alpha_tilde_ev_m);
}

}  // namespace curvspin
