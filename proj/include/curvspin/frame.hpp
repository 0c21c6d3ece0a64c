#pragma once

#include <Eigen/Dense>

#include <array>

#include "curvspin/pauli.hpp"
#include "curvspin/surface.hpp"

namespace curvspin {

using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Vec2 = Eigen::Vector2d;

/// Gram-Schmidt order used to build the tangent frame (t_1, t_2).
///
/// FirstThenSecond: t_1 = d1 r/|d1 r|, t_2 from d2 r. This is the default gauge;
/// every gauge-dependent output (w_a, vielbein, frame Pauli matrices) assumes it.
/// SecondThenFirst: t_2 = d2 r/|d2 r|, t_1 from d1 r. Both frames are right-handed
/// with respect to the normal.
enum class FrameOrder { FirstThenSecond, SecondThenFirst };

enum class DerivativeMode { Auto, Numeric };

struct FrameOptions {
  FrameOrder order = FrameOrder::FirstThenSecond;
  DerivativeMode derivatives = DerivativeMode::Auto;
};

/// Pointwise surface geometry.
///
/// Index conventions: matrices indexed (row, col) = (lower a, upper b) for
/// mixed tensors. alpha(a,b) = alpha_a^b, vielbein(a,i) = e_a^i,
/// inv_vielbein(i,a) = e_i^a. The Levi-Civita *symbol* eps^{12} = +1 is used in
/// S^{ab} and A_so; the explicit 1/sqrt(g) factors turn it into the tensor.
struct FrameData {
  Point2 point;
  Vec3 position;
  std::array<Vec3, 2> tangent;   ///< d_a r
  Vec3 normal;
  std::array<Vec3, 2> frame;     ///< t_1, t_2 (orthonormal)
  std::array<std::array<Vec3, 2>, 2> frame_derivative;  ///< [a][i] = d_a t_i

  Mat2 g, ginv;
  double sqrtg = 0.0;
  Mat2 alpha_lower;  ///< alpha_ab = d_a r . d_b n
  Mat2 alpha;        ///< alpha_a^b
  double K = 0.0;    ///< Gaussian curvature det(alpha_a^b)
  double M = 0.0;    ///< mean curvature Tr(alpha_a^b)/2
  Mat2 vielbein, inv_vielbein;
  Vec2 w;            ///< abelian spin connection, couples as D_a = d_a + i sigma_3 w_a
  Mat2 S;            ///< S^{ab} = eps^{ac} alpha_c^b
  std::array<Mat2c, 2> sigma_coord;  ///< sigma_a = e_a^i sigma_i
  std::array<Mat2c, 2> A_so;         ///< (A_so)_a = eps^{cb} sigma_b alpha_ac / (2 sqrt g)
};

FrameData frame_at(const SurfacePatch& patch, Point2 q, const FrameOptions& options = {});

/// Geometry of the thin layer R = r + q3 n at offset q3.
struct AdaptedFrameData {
  double q3 = 0.0;
  Mat3 G, Ginv;
  double detG = 0.0;
  double f = 1.0;  ///< 1 + Tr(alpha) q3 + det(alpha) q3^2
  /// christoffel[C](A,B) = Gamma-bar^C_{AB}
  std::array<Mat3, 3> christoffel;
  /// vierbein(A,I) = E_A^I, inv_vierbein(I,A) = E_I^A
  Mat3 vierbein, inv_vierbein;
  /// Spin connection Omega-bar_A = (i/4) omega_{AIJ} eps^{IJK} sigma_K with
  /// omega_{AIJ} = E_J^nu (d_A E_nu^I - Gamma^k_{A nu} E_k^I). With this index
  /// order Omega-bar_a = i sigma_3 w_a + i (A_so)_a on the surface.
  std::array<Mat2c, 3> omega_bar;
  double ricci_tangential = 0.0;  ///< G^{ab} R-bar_ab
  double ricci_normal = 0.0;      ///< R-bar_33
};

/// Evaluates the layer quantities; throws GeometryError when f <= 0.
/// Ricci terms need second derivatives of the metric and are only filled when
/// `with_ricci` is set.
AdaptedFrameData adapted_frame_at(const SurfacePatch& patch, Point2 q, double q3,
                                  bool with_ricci = false);

/// Residual of d_A sigma^B + [Gamma_A, sigma^B] + Gamma-bar^B_{CA} sigma^C with
/// sigma^B = E_I^B sigma_I, max entry over A, B. Gamma_A is the connection built
/// with the opposite index order, omega_{AIJ} = E_I^nu (...), i.e. -omega_bar;
/// the postulate is satisfied for that orientation only.
double tetrad_postulate_residual(const SurfacePatch& patch, Point2 q, double q3);

}  // namespace curvspin
