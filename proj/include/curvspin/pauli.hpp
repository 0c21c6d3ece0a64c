#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>

namespace curvspin {

using cplx = std::complex<double>;
using Mat2c = Eigen::Matrix2cd;

namespace pauli {

inline Mat2c identity() { return Mat2c::Identity(); }

/// sigma_1, sigma_2, sigma_3 in the local orthonormal frame (t_1, t_2, n).
inline const std::array<Mat2c, 3>& matrices() {
  static const std::array<Mat2c, 3> s = [] {
    std::array<Mat2c, 3> m;
    const cplx i(0.0, 1.0);
    m[0] << 0.0, 1.0, 1.0, 0.0;
    m[1] << 0.0, -i, i, 0.0;
    m[2] << 1.0, 0.0, 0.0, -1.0;
    return m;
  }();
  return s;
}

inline const Mat2c& sigma(int k) { return matrices()[static_cast<std::size_t>(k)]; }

/// Coefficients c_k = Tr(m sigma_k)/2 of the traceless part, plus c_0 = Tr(m)/2.
inline std::array<cplx, 4> decompose(const Mat2c& m) {
  return {0.5 * m.trace(), 0.5 * (m * sigma(0)).trace(), 0.5 * (m * sigma(1)).trace(),
          0.5 * (m * sigma(2)).trace()};
}

}  // namespace pauli
}  // namespace curvspin
