#include "curvspin/frame.hpp"

#include <cmath>
#include <functional>

namespace curvspin {

namespace {

Vec3 normalized_derivative(const Vec3& v, const Vec3& dv) {
  const double n = v.norm();
  const Vec3 t = v / n;
  return (dv - t * t.dot(dv)) / n;
}

Point2 shifted(Point2 q, int a, double d) {
  if (a == 0) q.q1 += d;
  else q.q2 += d;
  return q;
}

// Step for derivatives of layer fields, relative to the coordinate span. The
// fields are built from exact frame data, so this can be smaller than the
// step of the generic-surface embedding differences.
constexpr double kLayerStep = 2.5e-4;

double layer_step(const SurfacePatch& patch, int direction) {
  return direction < 2 ? patch.span(direction) * kLayerStep
                       : patch.length_scale() * kLayerStep;
}

}  // namespace

FrameData frame_at(const SurfacePatch& patch, Point2 q, const FrameOptions& options) {
  const EmbeddingDerivatives d = options.derivatives == DerivativeMode::Numeric
                                     ? patch.numeric_derivatives(q)
                                     : patch.derivatives(q);
  FrameData fd;
  fd.point = q;
  fd.position = d.r;
  fd.tangent = {d.d1, d.d2};

  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) fd.g(a, b) = d.first(a).dot(d.first(b));
  const double detg = fd.g.determinant();
  const double L = patch.length_scale();
  if (!(detg > 1e-14 * L * L * L * L))
    throw GeometryError("degenerate metric at (" + std::to_string(q.q1) + ", " +
                        std::to_string(q.q2) + "): det g = " + std::to_string(detg));
  fd.ginv = fd.g.inverse();
  fd.sqrtg = std::sqrt(detg);

  const Vec3 cross = d.d1.cross(d.d2);
  fd.normal = cross / cross.norm();

  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) fd.alpha_lower(a, b) = -fd.normal.dot(d.second(a, b));
  fd.alpha = fd.alpha_lower * fd.ginv;
  fd.K = fd.alpha.determinant();
  fd.M = 0.5 * fd.alpha.trace();

  // Tangent frame and its derivatives.
  const int first = options.order == FrameOrder::FirstThenSecond ? 0 : 1;
  const int second = 1 - first;
  const Vec3& v = d.first(first);
  const Vec3& r2 = d.first(second);
  Vec3 t_first = v / v.norm();
  Vec3 u = r2 - t_first * r2.dot(t_first);
  Vec3 t_second = u / u.norm();
  fd.frame[static_cast<std::size_t>(first)] = t_first;
  fd.frame[static_cast<std::size_t>(second)] = t_second;
  for (int a = 0; a < 2; ++a) {
    const Vec3 dt_first = normalized_derivative(v, d.second(first, a));
    const Vec3 dr2 = d.second(second, a);
    const Vec3 du = dr2 - t_first * (dr2.dot(t_first) + r2.dot(dt_first)) -
                    dt_first * r2.dot(t_first);
    fd.frame_derivative[a][static_cast<std::size_t>(first)] = dt_first;
    fd.frame_derivative[a][static_cast<std::size_t>(second)] = normalized_derivative(u, du);
  }

  for (int a = 0; a < 2; ++a)
    for (int i = 0; i < 2; ++i) fd.vielbein(a, i) = d.first(a).dot(fd.frame[i]);
  fd.inv_vielbein = fd.vielbein.inverse();

  // w_a = (1/4) eps^{ij} omega_{aij} with omega_{aij} = t_j . d_a t_i.
  for (int a = 0; a < 2; ++a) fd.w(a) = 0.5 * fd.frame[1].dot(fd.frame_derivative[a][0]);

  for (int b = 0; b < 2; ++b) {
    fd.S(0, b) = fd.alpha(1, b);
    fd.S(1, b) = -fd.alpha(0, b);
  }

  for (int a = 0; a < 2; ++a)
    fd.sigma_coord[a] = fd.vielbein(a, 0) * pauli::sigma(0) + fd.vielbein(a, 1) * pauli::sigma(1);
  for (int a = 0; a < 2; ++a)
    fd.A_so[a] = (fd.alpha_lower(a, 0) * fd.sigma_coord[1] -
                  fd.alpha_lower(a, 1) * fd.sigma_coord[0]) /
                 (2.0 * fd.sqrtg);
  return fd;
}

namespace {

struct LayerFields {
  Mat3 G;
  Mat3 E;  // E(A,I)
};

LayerFields layer_fields(const FrameData& fd, double q3) {
  LayerFields lf;
  const Mat2 aga = fd.alpha * fd.g * fd.alpha.transpose();
  const Mat2 Gab = fd.g + q3 * (fd.alpha_lower + fd.alpha_lower.transpose()) + q3 * q3 * aga;
  lf.G.setZero();
  lf.G.topLeftCorner<2, 2>() = Gab;
  lf.G(2, 2) = 1.0;
  lf.E.setZero();
  lf.E.topLeftCorner<2, 2>() = fd.vielbein + q3 * fd.alpha * fd.vielbein;
  lf.E(2, 2) = 1.0;
  return lf;
}

/// Derivatives of the layer metric and vierbein in all three directions.
struct LayerDerivatives {
  LayerFields at;
  std::array<Mat3, 3> dG;  // dG[D](A,B) = d_D G_AB
  std::array<Mat3, 3> dE;  // dE[D](A,I)
};

LayerDerivatives layer_derivatives(const SurfacePatch& patch, Point2 q, double q3) {
  LayerDerivatives ld;
  const FrameData fd = frame_at(patch, q);
  ld.at = layer_fields(fd, q3);
  for (int a = 0; a < 2; ++a) {
    const double h = layer_step(patch, a);
    std::function<LayerFields(double)> at = [&](double s) {
      return layer_fields(frame_at(patch, shifted(q, a, s)), q3);
    };
    const LayerFields p2 = at(2 * h), p1 = at(h), m1 = at(-h), m2 = at(-2 * h);
    ld.dG[a] = (-p2.G + 8.0 * p1.G - 8.0 * m1.G + m2.G) / (12.0 * h);
    ld.dE[a] = (-p2.E + 8.0 * p1.E - 8.0 * m1.E + m2.E) / (12.0 * h);
  }
  ld.dG[2].setZero();
  ld.dG[2].topLeftCorner<2, 2>() = (fd.alpha_lower + fd.alpha_lower.transpose()) +
                                   2.0 * q3 * fd.alpha * fd.g * fd.alpha.transpose();
  ld.dE[2].setZero();
  ld.dE[2].topLeftCorner<2, 2>() = fd.alpha * fd.vielbein;
  return ld;
}

std::array<Mat3, 3> christoffel_from(const Mat3& Ginv, const std::array<Mat3, 3>& dG) {
  std::array<Mat3, 3> gam;
  for (int C = 0; C < 3; ++C)
    for (int A = 0; A < 3; ++A)
      for (int B = 0; B < 3; ++B) {
        double s = 0.0;
        for (int D = 0; D < 3; ++D)
          s += Ginv(C, D) * (dG[A](D, B) + dG[B](D, A) - dG[D](A, B));
        gam[C](A, B) = 0.5 * s;
      }
  return gam;
}

std::array<Mat3, 3> christoffel_at(const SurfacePatch& patch, Point2 q, double q3) {
  const LayerDerivatives ld = layer_derivatives(patch, q, q3);
  return christoffel_from(ld.at.G.inverse(), ld.dG);
}

void check_layer(const FrameData& fd, double q3, double* f_out) {
  const double f = 1.0 + fd.alpha.trace() * q3 + fd.alpha.determinant() * q3 * q3;
  if (!(f > 0.0))
    throw GeometryError("singular layer: rescale factor f = " + std::to_string(f) +
                        " <= 0 at q3 = " + std::to_string(q3));
  *f_out = f;
}

}  // namespace

AdaptedFrameData adapted_frame_at(const SurfacePatch& patch, Point2 q, double q3,
                                  bool with_ricci) {
  AdaptedFrameData af;
  af.q3 = q3;
  {
    const FrameData fd = frame_at(patch, q);
    check_layer(fd, q3, &af.f);
  }
  const LayerDerivatives ld = layer_derivatives(patch, q, q3);
  af.G = ld.at.G;
  af.Ginv = af.G.inverse();
  af.detG = af.G.determinant();
  af.christoffel = christoffel_from(af.Ginv, ld.dG);
  af.vierbein = ld.at.E;
  af.inv_vierbein = af.vierbein.inverse();

  // omega_{AIJ} = E_J^nu (d_A E_nu^I - Gamma^kappa_{A nu} E_kappa^I)
  for (int A = 0; A < 3; ++A) {
    Mat3 cov = ld.dE[A];  // (nu, I)
    for (int nu = 0; nu < 3; ++nu)
      for (int I = 0; I < 3; ++I) {
        double s = 0.0;
        for (int kap = 0; kap < 3; ++kap) s += af.christoffel[kap](A, nu) * af.vierbein(kap, I);
        cov(nu, I) -= s;
      }
    Mat3 omega;  // omega(I,J)
    for (int I = 0; I < 3; ++I)
      for (int J = 0; J < 3; ++J) {
        double s = 0.0;
        for (int nu = 0; nu < 3; ++nu) s += af.inv_vierbein(J, nu) * cov(nu, I);
        omega(I, J) = s;
      }
    const cplx i(0.0, 1.0);
    // (i/4) eps^{IJK} omega_{IJ} sigma_K
    af.omega_bar[A] = (i / 4.0) * ((omega(1, 2) - omega(2, 1)) * pauli::sigma(0) +
                                   (omega(2, 0) - omega(0, 2)) * pauli::sigma(1) +
                                   (omega(0, 1) - omega(1, 0)) * pauli::sigma(2));
  }

  if (with_ricci) {
    // R_AB = d_C Gam^C_AB - d_B Gam^C_AC + Gam^C_CD Gam^D_AB - Gam^C_BD Gam^D_AC
    std::array<std::array<Mat3, 3>, 3> dGam;  // [D][C](A,B)
    for (int D = 0; D < 3; ++D) {
      const double h = layer_step(patch, D);
      auto at = [&](double s) {
        if (D < 2) return christoffel_at(patch, shifted(q, D, s), q3);
        return christoffel_at(patch, q, q3 + s);
      };
      const auto p2 = at(2 * h), p1 = at(h), m1 = at(-h), m2 = at(-2 * h);
      for (int C = 0; C < 3; ++C)
        dGam[D][C] = (-p2[C] + 8.0 * p1[C] - 8.0 * m1[C] + m2[C]) / (12.0 * h);
    }
    const auto& gam = af.christoffel;
    Mat3 ricci;
    for (int A = 0; A < 3; ++A)
      for (int B = 0; B < 3; ++B) {
        double s = 0.0;
        for (int C = 0; C < 3; ++C) {
          s += dGam[C][C](A, B) - dGam[B][C](A, C);
          for (int D = 0; D < 3; ++D)
            s += gam[C](C, D) * gam[D](A, B) - gam[C](B, D) * gam[D](A, C);
        }
        ricci(A, B) = s;
      }
    af.ricci_tangential = (af.Ginv.topLeftCorner<2, 2>().cwiseProduct(
                               ricci.topLeftCorner<2, 2>()))
                              .sum();
    af.ricci_normal = ricci(2, 2);
  }
  return af;
}

double tetrad_postulate_residual(const SurfacePatch& patch, Point2 q, double q3) {
  const AdaptedFrameData af = adapted_frame_at(patch, q, q3);
  auto sigma_upper = [&](Point2 p, double z) {
    const Mat3 Einv = layer_fields(frame_at(patch, p), z).E.inverse();  // (I, B)
    std::array<Mat2c, 3> s;
    for (int B = 0; B < 3; ++B) {
      s[B] = Mat2c::Zero();
      for (int I = 0; I < 3; ++I) s[B] += Einv(I, B) * pauli::sigma(I);
    }
    return s;
  };
  const auto sig = sigma_upper(q, q3);
  double worst = 0.0;
  for (int A = 0; A < 3; ++A) {
    const double h = layer_step(patch, A);
    auto at = [&](double s) {
      return A < 2 ? sigma_upper(shifted(q, A, s), q3) : sigma_upper(q, q3 + s);
    };
    const auto p2 = at(2 * h), p1 = at(h), m1 = at(-h), m2 = at(-2 * h);
    for (int B = 0; B < 3; ++B) {
      Mat2c res = (-p2[B] + 8.0 * p1[B] - 8.0 * m1[B] + m2[B]) / (12.0 * h);
      // Literal index order connection is -omega_bar (see header).
      res -= af.omega_bar[A] * sig[B] - sig[B] * af.omega_bar[A];
      for (int C = 0; C < 3; ++C) res += af.christoffel[B](C, A) * sig[C];
      worst = std::max(worst, res.cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

}  // namespace curvspin
