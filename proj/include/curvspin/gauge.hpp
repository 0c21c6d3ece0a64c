#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "curvspin/constants.hpp"
#include "curvspin/frame.hpp"

namespace curvspin {

/// Geometry-induced gauge structures at one point (natural units).
struct GaugeFieldSample {
  Point2 point;
  double K = 0.0;
  Vec2 w;                 ///< abelian potential (frame order 1 then 2)
  double B = 0.0;         ///< pseudo-magnetic field, hbar K / 2e
  std::array<Mat2c, 2> A_so;
  /// Non-abelian curl (d_1 A_2 - d_2 A_1 + i[A_1, A_2]) / sqrt g decomposed as
  /// sigma3_part * sigma_3 + F^a sigma_a.
  double curl_sigma3 = 0.0;
  Vec2 curl_tangential;   ///< F^a, reported only
  double curl_w = 0.0;    ///< (d_1 w_2 - d_2 w_1) / sqrt g, numeric

  double B_tesla(const PhysicalScale& scale) const { return B * scale.field_unit_tesla(); }
};

GaugeFieldSample pseudo_field_at(const SurfacePatch& patch, Point2 q);

struct CurlComparison {
  double residual = 0.0;      ///< |sigma_3 part of curl A_so - curl w|
  double sigma3_part = 0.0;
  double curl_w = 0.0;
  double minus_half_K = 0.0;
  Vec2 tangential;
};

CurlComparison curl_matches_w(const SurfacePatch& patch, Point2 q);

class NotClosedSurface : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FluxOptions {
  int n1 = 96;   ///< nodes in q1 (Gauss-Legendre on the sphere's polar angle)
  int n2 = 96;
  double pole_cap = 0.05;  ///< polar half-angle integrated in closed form (sphere)
};

struct FluxResult {
  double phi_over_phi0 = 0.0;  ///< (1/2pi) int K dA
  int genus = 0;
  double error_estimate = 0.0; ///< |full - half resolution|
};

/// Pseudo-magnetic flux through a closed surface in units of h/2e.
FluxResult flux(const SurfacePatch& patch, const FluxOptions& options = {});

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

using PhaseFunction = std::function<double(Point2)>;

/// Abelian potential sampled at a list of points.
struct WField {
  std::vector<Point2> points;
  std::vector<Vec2> w;
};

WField sample_w(const SurfacePatch& patch, const std::vector<Point2>& points);

class WindingMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws WindingMismatch when theta jumps by a non-multiple of 2pi across a
/// periodic direction of the patch.
void check_winding(const SurfacePatch& patch, const PhaseFunction& theta);

/// w'_a = w_a - d_a theta (4th-order differences for the gradient).
WField gauge_transform(const SurfacePatch& patch, const WField& field, const PhaseFunction& theta);

/// 2 m c^2 alpha_1^1 / e in V/m when alpha_1^1 = alpha_2^2 (relative tol),
/// std::nullopt in the anisotropic case.
std::optional<double> pseudo_electric_field(const SurfacePatch& patch, Point2 q,
                                            const PhysicalScale& scale = {},
                                            double tol = 1e-8);

/// Curvature radius (m) at which curvature SOI matches an intrinsic Rashba
/// coupling alpha_tilde (eV m) for effective mass ratio zeta.
double soi_radius(double alpha_tilde_ev_m, double mass_ratio);

}  // namespace curvspin
