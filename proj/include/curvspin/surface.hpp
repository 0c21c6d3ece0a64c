#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

#include "curvspin/expression.hpp"

namespace curvspin {

using Vec3 = Eigen::Vector3d;

enum class SurfaceKind { Plane, Cylinder, Sphere, Torus, Generic };

std::string to_string(SurfaceKind kind);
SurfaceKind surface_kind_from_string(const std::string& name);

class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point2 {
  double q1 = 0.0;
  double q2 = 0.0;
};

/// Embedding r(q1,q2) and its first and second partial derivatives.
struct EmbeddingDerivatives {
  Vec3 r, d1, d2, d11, d12, d22;

  const Vec3& first(int a) const { return a == 0 ? d1 : d2; }
  const Vec3& second(int a, int b) const {
    if (a == 0 && b == 0) return d11;
    if (a == 1 && b == 1) return d22;
    return d12;
  }
};

struct SurfaceParams {
  double rho = 1.0;     ///< tube radius (cylinder, torus)
  double R = 3.0;       ///< axis curvature radius (torus)
  double radius = 1.0;  ///< sphere radius
  double length = 10.0; ///< axial length (cylinder), box side (plane)
  double length2 = 10.0;  ///< second box side (plane)
  // Generic surfaces only.
  std::string x_expr, y_expr, z_expr;
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};
  std::array<bool, 2> periodic{false, false};
};

/// A parametrized surface r(q1,q2). Immutable and safe to share across threads.
///
/// Built-in shapes carry closed-form derivatives; generic shapes use
/// 4th-order central differences with step 1e-3 times the coordinate range.
/// The unit normal is n = (d1 r x d2 r)/|d1 r x d2 r|.
class SurfacePatch {
 public:
  SurfaceKind kind() const { return kind_; }
  const SurfaceParams& params() const { return params_; }

  double lo(int a) const { return lo_[a]; }
  double hi(int a) const { return hi_[a]; }
  double span(int a) const { return hi_[a] - lo_[a]; }
  bool periodic(int a) const { return periodic_[a]; }
  bool closed() const;

  /// Characteristic length used for tolerances and regularity thresholds.
  double length_scale() const { return length_scale_; }

  Vec3 position(Point2 q) const { return embed_(q); }
  EmbeddingDerivatives derivatives(Point2 q) const;
  /// Always uses the finite-difference provider, even for built-ins.
  EmbeddingDerivatives numeric_derivatives(Point2 q) const;
  bool has_analytic_derivatives() const { return static_cast<bool>(analytic_); }

  bool contains(Point2 q) const;

  /// Same embedding on a sub-window (e.g. a theta strip of the torus).
  SurfacePatch with_domain(std::array<double, 2> lo, std::array<double, 2> hi,
                           std::array<bool, 2> periodic) const;

  friend SurfacePatch make_surface(SurfaceKind kind, const SurfaceParams& params);

 private:
  SurfaceKind kind_ = SurfaceKind::Plane;
  SurfaceParams params_;
  std::array<double, 2> lo_{}, hi_{};
  std::array<bool, 2> periodic_{};
  double length_scale_ = 1.0;
  std::function<Vec3(Point2)> embed_;
  std::function<EmbeddingDerivatives(Point2)> analytic_;
  std::shared_ptr<const std::array<Expression, 3>> expressions_;
};

/// Builds a patch; throws InvalidParameter naming the violated constraint.
SurfacePatch make_surface(SurfaceKind kind, const SurfaceParams& params = {});

}  // namespace curvspin
