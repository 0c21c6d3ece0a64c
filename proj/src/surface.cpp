#include "curvspin/surface.hpp"

#include <cmath>

namespace curvspin {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw InvalidParameter(std::string(name) + " must be positive (got " + std::to_string(v) + ")");
}

}  // namespace

std::string to_string(SurfaceKind kind) {
  switch (kind) {
    case SurfaceKind::Plane: return "plane";
    case SurfaceKind::Cylinder: return "cylinder";
    case SurfaceKind::Sphere: return "sphere";
    case SurfaceKind::Torus: return "torus";
    case SurfaceKind::Generic: return "generic";
  }
  return "unknown";
}

SurfaceKind surface_kind_from_string(const std::string& name) {
  if (name == "plane") return SurfaceKind::Plane;
  if (name == "cylinder") return SurfaceKind::Cylinder;
  if (name == "sphere") return SurfaceKind::Sphere;
  if (name == "torus" || name == "bent-cylinder" || name == "bent_cylinder")
    return SurfaceKind::Torus;
  if (name == "generic") return SurfaceKind::Generic;
  throw InvalidParameter("unknown surface kind '" + name + "'");
}

SurfacePatch SurfacePatch::with_domain(std::array<double, 2> lo, std::array<double, 2> hi,
                                       std::array<bool, 2> periodic) const {
  for (int a = 0; a < 2; ++a)
    if (!(hi[a] > lo[a])) throw InvalidParameter("window needs hi > lo in q" + std::to_string(a + 1));
  SurfacePatch p = *this;
  p.lo_ = lo;
  p.hi_ = hi;
  p.periodic_ = periodic;
  return p;
}

bool SurfacePatch::closed() const {
  if (kind_ == SurfaceKind::Sphere) return true;
  if (kind_ == SurfaceKind::Plane) return false;  // flat box has no curvature flux to speak of
  return periodic_[0] && periodic_[1];
}

bool SurfacePatch::contains(Point2 q) const {
  const double tol = 1e-12;
  for (int a = 0; a < 2; ++a) {
    double v = a == 0 ? q.q1 : q.q2;
    if (periodic_[a]) continue;
    if (v < lo_[a] - tol * span(a) || v > hi_[a] + tol * span(a)) return false;
  }
  return true;
}

EmbeddingDerivatives SurfacePatch::derivatives(Point2 q) const {
  if (analytic_) return analytic_(q);
  return numeric_derivatives(q);
}

EmbeddingDerivatives SurfacePatch::numeric_derivatives(Point2 q) const {
  const std::array<double, 2> h{span(0) * 1e-3, span(1) * 1e-3};
  auto shifted = [&](Point2 p, int a, double d) {
    if (a == 0) p.q1 += d;
    else p.q2 += d;
    return p;
  };
  // 4th-order central first derivative of a vector-valued function.
  auto d_dir = [&](const std::function<Vec3(Point2)>& f, Point2 p, int a) -> Vec3 {
    return (-f(shifted(p, a, 2 * h[a])) + 8.0 * f(shifted(p, a, h[a])) -
            8.0 * f(shifted(p, a, -h[a])) + f(shifted(p, a, -2 * h[a]))) /
           (12.0 * h[a]);
  };
  std::function<Vec3(Point2)> f = embed_;
  std::function<Vec3(Point2)> f1 = [&](Point2 p) { return d_dir(f, p, 0); };
  std::function<Vec3(Point2)> f2 = [&](Point2 p) { return d_dir(f, p, 1); };

  EmbeddingDerivatives d;
  d.r = f(q);
  d.d1 = f1(q);
  d.d2 = f2(q);
  d.d11 = d_dir(f1, q, 0);
  d.d12 = 0.5 * (d_dir(f2, q, 0) + d_dir(f1, q, 1));
  d.d22 = d_dir(f2, q, 1);
  return d;
}

SurfacePatch make_surface(SurfaceKind kind, const SurfaceParams& params) {
  SurfacePatch p;
  p.kind_ = kind;
  p.params_ = params;
  switch (kind) {
    case SurfaceKind::Plane: {
      require_positive(params.length, "length");
      require_positive(params.length2, "length2");
      p.lo_ = {0.0, 0.0};
      p.hi_ = {params.length, params.length2};
      p.periodic_ = {true, true};
      p.length_scale_ = std::max(params.length, params.length2);
      p.embed_ = [](Point2 q) { return Vec3(q.q1, q.q2, 0.0); };
      p.analytic_ = [](Point2 q) {
        EmbeddingDerivatives d;
        d.r = Vec3(q.q1, q.q2, 0.0);
        d.d1 = Vec3::UnitX();
        d.d2 = Vec3::UnitY();
        d.d11 = d.d12 = d.d22 = Vec3::Zero();
        return d;
      };
      break;
    }
    case SurfaceKind::Cylinder: {
      require_positive(params.rho, "rho");
      require_positive(params.length, "length");
      const double rho = params.rho;
      p.lo_ = {0.0, 0.0};
      p.hi_ = {2 * kPi, params.length};
      p.periodic_ = {true, false};
      p.length_scale_ = rho;
      p.embed_ = [rho](Point2 q) {
        return Vec3(rho * std::cos(q.q1), rho * std::sin(q.q1), q.q2);
      };
      p.analytic_ = [rho](Point2 q) {
        const double c = std::cos(q.q1), s = std::sin(q.q1);
        EmbeddingDerivatives d;
        d.r = Vec3(rho * c, rho * s, q.q2);
        d.d1 = Vec3(-rho * s, rho * c, 0.0);
        d.d2 = Vec3::UnitZ();
        d.d11 = Vec3(-rho * c, -rho * s, 0.0);
        d.d12 = d.d22 = Vec3::Zero();
        return d;
      };
      break;
    }
    case SurfaceKind::Sphere: {
      require_positive(params.radius, "radius");
      const double a = params.radius;
      p.lo_ = {0.0, 0.0};
      p.hi_ = {kPi, 2 * kPi};
      p.periodic_ = {false, true};
      p.length_scale_ = a;
      p.embed_ = [a](Point2 q) {
        return Vec3(a * std::sin(q.q1) * std::cos(q.q2), a * std::sin(q.q1) * std::sin(q.q2),
                    a * std::cos(q.q1));
      };
      p.analytic_ = [a](Point2 q) {
        const double st = std::sin(q.q1), ct = std::cos(q.q1);
        const double sp = std::sin(q.q2), cp = std::cos(q.q2);
        EmbeddingDerivatives d;
        d.r = a * Vec3(st * cp, st * sp, ct);
        d.d1 = a * Vec3(ct * cp, ct * sp, -st);
        d.d2 = a * Vec3(-st * sp, st * cp, 0.0);
        d.d11 = a * Vec3(-st * cp, -st * sp, -ct);
        d.d12 = a * Vec3(-ct * sp, ct * cp, 0.0);
        d.d22 = a * Vec3(-st * cp, -st * sp, 0.0);
        return d;
      };
      break;
    }
    case SurfaceKind::Torus: {
      require_positive(params.rho, "rho");
      require_positive(params.R, "R");
      if (!(params.R > params.rho))
        throw InvalidParameter("torus requires R > rho (got R=" + std::to_string(params.R) +
                               ", rho=" + std::to_string(params.rho) + ")");
      const double rho = params.rho, R = params.R;
      // q1 = theta around the tube (theta = 0 on the outer equator), q2 = s,
      // arclength along the axis circle. The z sign makes d1 r x d2 r point outward.
      p.lo_ = {-kPi, 0.0};
      p.hi_ = {kPi, 2 * kPi * R};
      p.periodic_ = {true, true};
      p.length_scale_ = rho;
      p.embed_ = [rho, R](Point2 q) {
        const double P = R + rho * std::cos(q.q1), phi = q.q2 / R;
        return Vec3(P * std::cos(phi), P * std::sin(phi), -rho * std::sin(q.q1));
      };
      p.analytic_ = [rho, R](Point2 q) {
        const double ct = std::cos(q.q1), st = std::sin(q.q1);
        const double phi = q.q2 / R, cp = std::cos(phi), sp = std::sin(phi);
        const double P = R + rho * ct;
        EmbeddingDerivatives d;
        d.r = Vec3(P * cp, P * sp, -rho * st);
        d.d1 = Vec3(-rho * st * cp, -rho * st * sp, -rho * ct);
        d.d2 = (P / R) * Vec3(-sp, cp, 0.0);
        d.d11 = Vec3(-rho * ct * cp, -rho * ct * sp, rho * st);
        d.d12 = (rho * st / R) * Vec3(sp, -cp, 0.0);
        d.d22 = (P / (R * R)) * Vec3(-cp, -sp, 0.0);
        return d;
      };
      break;
    }
    case SurfaceKind::Generic: {
      for (int a = 0; a < 2; ++a)
        if (!(params.hi[a] > params.lo[a]))
          throw InvalidParameter("generic surface domain requires hi > lo in q" +
                                 std::to_string(a + 1));
      if (params.x_expr.empty() || params.y_expr.empty() || params.z_expr.empty())
        throw InvalidParameter("generic surface requires x, y and z expressions");
      std::vector<std::string> vars{"q1", "q2"};
      auto exprs = std::make_shared<const std::array<Expression, 3>>(std::array<Expression, 3>{
          Expression(params.x_expr, vars), Expression(params.y_expr, vars),
          Expression(params.z_expr, vars)});
      p.expressions_ = exprs;
      p.lo_ = params.lo;
      p.hi_ = params.hi;
      p.periodic_ = params.periodic;
      p.embed_ = [exprs](Point2 q) {
        std::vector<double> v{q.q1, q.q2};
        return Vec3((*exprs)[0].evaluate(v), (*exprs)[1].evaluate(v), (*exprs)[2].evaluate(v));
      };
      // Characteristic length: extent of the image sampled on a coarse grid.
      Eigen::AlignedBox3d box;
      for (int i = 0; i <= 8; ++i)
        for (int j = 0; j <= 8; ++j)
          box.extend(p.embed_({p.lo_[0] + p.span(0) * i / 8.0, p.lo_[1] + p.span(1) * j / 8.0}));
      p.length_scale_ = std::max(box.diagonal().norm() / 2.0, 1e-300);
      break;
    }
  }
  return p;
}

}  // namespace curvspin
