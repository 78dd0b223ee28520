#pragma once

#include <complex>

#include "markoff/cylinder.hpp"
#include "markoff/errors.hpp"

namespace markoff {

using complexd = std::complex<double>;

/// Square root with positive real part off (-inf, 0], positive imaginary
/// part on (-inf, 0), and 0 at 0.
complexd csqrt_conv(complexd u);

/// Logarithm with imaginary part in (-pi, pi]; the negative real axis maps
/// to +i pi.  Throws DomainError at 0.
complexd clog_conv(complexd u);

/// Inverse cosh with real part >= 0, imaginary part in (-pi, pi], and
/// imaginary part in [0, pi] on the slit (real part 0).
complexd acosh_conv(complexd u);

/// h(x) = (1 - sqrt(1 - 4/x^2)) / 2.  Throws DomainError at 0.
complexd h(complexd x);

/// Frozen modulus data: mu = tau + 2, nu = acosh(1 - mu/2).  mu = 4 is the
/// reducible case and is rejected.  mu = 0 is flagged; the identity engine
/// then swaps in the kernel set (2h, h, z/xy) with target 1 and no mod-2-pi-i
/// reduction, and halves reported McShane totals.
struct ModulusParams {
    complexd mu{};
    complexd tau{};
    complexd nu{};
    bool mu_zero{false};
    complexd exp_nu{};
    complexd exp_minus_nu{};
    complexd sinh_nu{};
    complexd cosh_nu{};
    complexd sqrt_mu{};

    static ModulusParams from_mu(complexd mu);
};

/// Distance of x to the nearest singular point in {0, +sqrt(mu), -sqrt(mu)}.
double singular_distance(const ModulusParams& p, complexd x);

/// Inputs within 1e-12 of a singular point are treated as singular.
inline constexpr double kSingularGuard = 1e-12;
bool is_singular(const ModulusParams& p, complexd x);

/// The series kernel: frak-h_tau for mu != 0, and 2 h for mu = 0.
complexd frak_h(const ModulusParams& p, complexd x);

/// The half kernel: hat-frak-h_tau for mu != 0, and h for mu = 0.
complexd frak_h_hat(const ModulusParams& p, complexd x);

/// Psi_mu(x, y, z); defined for mu != 0 (and 4); throws on singular flanks.
complexd Psi(const ModulusParams& p, complexd x, complexd y, complexd z);

/// Psi'_0(x, y, z) = z / (x y), the nu-derivative of the mu != 0 kernel.
complexd Psi0(complexd x, complexd y, complexd z);

/// Edge kernel dispatch: Psi for mu != 0, Psi'_0 for mu = 0.
complexd psi_value(const ModulusParams& p, complexd x, complexd y, complexd z);

/// Target of vertex/edge/circular identities: nu, or 1 when mu = 0.
complexd engine_nu(const ModulusParams& p);

/// Identity residual: seam-aware residue distance for mu != 0, plain complex
/// distance (no reduction) for mu = 0.
double identity_residual(const ModulusParams& p, complexd value, complexd target);

/// C with |frak_h(x)| <= C / |x|^2 for all |x| >= radius (engine kernel, so
/// the bound covers 2h when mu = 0).  Throws if the radius is too small for
/// the bound chain to close.
double kernel_tail_constant(const ModulusParams& p, double radius);

/// Leading asymptotic coefficients: frak_h(x) = c2/x^2 + c4/x^4 + O(x^-6).
complexd kernel_c2(const ModulusParams& p);
complexd kernel_c4(const ModulusParams& p);

} // namespace markoff
