#include "curvspin/expansions.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "curvspin/frame.hpp"

namespace curvspin {

bool ExpansionReport::passed() const {
  if (!tetrad_passed) return false;
  for (const auto& e : entries)
    if (!e.passed) return false;
  return true;
}

const ExpansionEntry& ExpansionReport::entry(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return e;
  throw std::out_of_range("no expansion entry named " + name);
}

namespace {

void fit(ExpansionEntry& e) {
  double maxv = 0.0;
  for (double v : e.values) maxv = std::max(maxv, std::abs(v));
  if (maxv <= e.floor) {
    e.identically_zero = true;
    e.slope = std::numeric_limits<double>::quiet_NaN();
    e.passed = true;
    return;
  }
  std::vector<double> x, y;
  for (std::size_t k = 0; k < e.values.size(); ++k) {
    if (std::abs(e.values[k]) > e.floor) {
      x.push_back(std::log(e.q3[k]));
      y.push_back(std::log(std::abs(e.values[k])));
    }
  }
  if (x.size() < 2) {
    // A single value above the floor at the largest q3 is consistent with
    // higher-order decay into round-off; anything else is not.
    e.slope = std::numeric_limits<double>::quiet_NaN();
    e.passed = std::abs(e.values.back()) <= e.floor && std::abs(e.values.front()) > e.floor;
    return;
  }
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  e.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icpt = (sy - e.slope * sx) / n;
  double ss = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double r = y[k] - (icpt + e.slope * x[k]);
    ss += r * r;
  }
  e.fit_residual = std::sqrt(ss / n);
  e.passed = std::isfinite(e.slope) && e.slope >= e.expected_order - kSlopeSlack;
}

}  // namespace

std::vector<double> default_q3_sequence(const SurfacePatch& patch, Point2 q) {
  const FrameData fd = frame_at(patch, q);
  Eigen::EigenSolver<Mat2> es(fd.alpha);
  double kmax = es.eigenvalues().cwiseAbs().maxCoeff();
  const double radius = kmax > 1e-12 ? 1.0 / kmax : patch.length_scale();
  return {1e-2 * radius, 1e-3 * radius, 1e-4 * radius, 1e-5 * radius};
}

ExpansionReport verify_thin_layer_expansions(const SurfacePatch& patch, Point2 q,
                                             const std::vector<double>& q3_sequence,
                                             bool strict) {
  if (q3_sequence.size() < 3)
    throw std::invalid_argument("q3 sequence needs at least three offsets");
  for (std::size_t k = 0; k < q3_sequence.size(); ++k) {
    if (!(q3_sequence[k] > 0.0))
      throw std::invalid_argument("q3 offsets must be positive");
    if (k > 0 && !(q3_sequence[k] < q3_sequence[k - 1]))
      throw std::invalid_argument("q3 sequence must be decreasing");
  }

  const FrameData fd = frame_at(patch, q);
  const double L = patch.length_scale();
  const cplx i(0.0, 1.0);

  ExpansionReport rep;
  rep.point = q;
  auto make = [&](const std::string& name, int order, double floor) {
    ExpansionEntry e;
    e.name = name;
    e.expected_order = order;
    e.q3 = q3_sequence;
    e.floor = floor;
    return e;
  };
  // Floors scale with the dimension of each quantity (1/L, 1/L^2).
  ExpansionEntry dec = make("omega_bar_tangential", 1, 1e-9 / L);
  ExpansionEntry om3 = make("omega_bar_normal", 2, 1e-9 / L);
  ExpansionEntry rt = make("ricci_tangential", 1, 1e-7 / (L * L));
  ExpansionEntry rn = make("ricci_normal", 1, 1e-7 / (L * L));
  ExpansionEntry c3a = make("christoffel_3a", 2, 1e-9 / L);
  ExpansionEntry cab = make("christoffel_ab3", 99, 1e-9 / L);
  ExpansionEntry det = make("rescaled_determinant", 99, 1e-10);

  const Mat2 aga = fd.alpha * fd.g * fd.alpha.transpose();
  const Mat2 aa = fd.alpha * fd.alpha;
  for (double q3 : q3_sequence) {
    const AdaptedFrameData af = adapted_frame_at(patch, q, q3, true);
    double d = 0.0;
    for (int a = 0; a < 2; ++a)
      d = std::max(d, (af.omega_bar[a] - i * fd.w(a) * pauli::sigma(2) - i * fd.A_so[a])
                          .cwiseAbs()
                          .maxCoeff());
    dec.values.push_back(d);
    om3.values.push_back(af.omega_bar[2].cwiseAbs().maxCoeff());
    rt.values.push_back(af.ricci_tangential);
    rn.values.push_back(af.ricci_normal);
    double e3a = 0.0, eab = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        e3a = std::max(e3a, std::abs(af.christoffel[b](2, a) - fd.alpha(a, b) + q3 * aa(a, b)));
        eab = std::max(eab, std::abs(af.christoffel[2](a, b) + fd.alpha_lower(a, b) +
                                     q3 * aga(a, b)));
      }
    c3a.values.push_back(e3a);
    cab.values.push_back(eab);
    const double g = fd.g.determinant();
    det.values.push_back(std::abs(af.detG - af.f * af.f * g) / g);
    rep.tetrad_residual.push_back(tetrad_postulate_residual(patch, q, q3));
  }
  for (ExpansionEntry* e : {&dec, &om3, &rt, &rn, &c3a, &cab, &det}) {
    fit(*e);
    rep.entries.push_back(*e);
  }
  rep.tetrad_passed = true;
  for (double r : rep.tetrad_residual)
    if (!(r < rep.tetrad_tolerance)) rep.tetrad_passed = false;

  if (strict && !rep.passed()) {
    std::ostringstream os;
    os << "thin-layer expansion order mismatch:";
    for (const auto& e : rep.entries)
      if (!e.passed) os << " " << e.name << " (slope " << e.slope << ", expected >= " << e.expected_order << ")";
    if (!rep.tetrad_passed) os << " tetrad_postulate (residual above " << rep.tetrad_tolerance << ")";
    throw OrderMismatch(os.str());
  }
  return rep;
}

}  // namespace curvspin
