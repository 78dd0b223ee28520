#pragma once

#include <cmath>
#include <complex>

namespace markoff {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// A complex number with imaginary part canonically reduced into (-pi, pi];
/// the representative for "= ... mod 2 pi i" statements.
struct CylinderValue {
    double re{0};
    double im{0};

    std::complex<double> as_complex() const { return {re, im}; }
};

/// Shift the imaginary part by the unique multiple of 2 pi into (-pi, pi].
inline CylinderValue reduce(std::complex<double> v) {
    double im = std::remainder(v.imag(), kTwoPi);
    if (im <= -M_PI) im += kTwoPi;
    if (im > M_PI) im -= kTwoPi;
    return {v.real(), im};
}

/// Distance between imaginary parts on the circle R / 2 pi Z; continuous
/// across the im = pi seam.
inline double imag_circle_distance(double a, double b) {
    return std::fabs(std::remainder(a - b, kTwoPi));
}

/// |re_u - re_v| + circle-distance of imaginary parts.
inline double residue_distance(std::complex<double> u, std::complex<double> v) {
    return std::fabs(u.real() - v.real()) + imag_circle_distance(u.imag(), v.imag());
}

} // namespace markoff
