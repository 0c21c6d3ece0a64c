#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "curvspin/surface.hpp"

namespace curvspin {

/// One checked identity: |quantity(q3)| should scale as q3^expected_order.
struct ExpansionEntry {
  std::string name;
  int expected_order = 1;
  std::vector<double> q3;
  std::vector<double> values;
  double slope = 0.0;          ///< least-squares log-log slope (NaN when not fitted)
  double fit_residual = 0.0;   ///< rms of the log-log fit
  double floor = 0.0;          ///< values below this count as exactly zero
  bool identically_zero = false;
  bool passed = false;
};

struct ExpansionReport {
  Point2 point;
  std::vector<ExpansionEntry> entries;
  /// Tetrad postulate residual per q3 (not a scaling law; compared to tolerance).
  std::vector<double> tetrad_residual;
  double tetrad_tolerance = 1e-8;
  bool tetrad_passed = false;

  bool passed() const;
  const ExpansionEntry& entry(const std::string& name) const;
};

class OrderMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Slope tolerance: a fitted slope counts as order p when slope >= p - kSlopeSlack.
inline constexpr double kSlopeSlack = 0.1;

/// Evaluates the thin-layer expansions at decreasing offsets q3.
///
/// Checks Omega-bar_a - Omega_a - i A_so (order 1), Omega-bar_3 (order 2),
/// G^{ab} R_ab and R_33 (order 1), Gamma^b_{3a} - alpha_a^b + q3 (alpha alpha)_a^b
/// (order 2), Gamma^3_{ab} + alpha_ab + q3 (alpha g alpha^T)_ab (exact), G - f^2 g
/// (exact), and the tetrad postulate at each q3. Throws OrderMismatch naming the
/// failing identities when `strict`.
ExpansionReport verify_thin_layer_expansions(const SurfacePatch& patch, Point2 q,
                                             const std::vector<double>& q3_sequence,
                                             bool strict = true);

/// 1e-2 ... 1e-5 times the local curvature radius (or the patch scale when flat).
std::vector<double> default_q3_sequence(const SurfacePatch& patch, Point2 q);

}  // namespace curvspin
