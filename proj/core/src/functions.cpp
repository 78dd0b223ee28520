#include "markoff/functions.hpp"

#include <algorithm>
#include <cmath>

namespace markoff {

namespace {

// Collapse -0.0 imaginary parts so the branch cut lands on the +0 side.
complexd on_cut(complexd u) {
    if (u.imag() == 0.0) return {u.real(), 0.0};
    return u;
}

} // namespace

complexd csqrt_conv(complexd u) {
    u = on_cut(u);
    if (u.imag() == 0.0) {
        if (u.real() < 0.0) return {0.0, std::sqrt(-u.real())};
        return {std::sqrt(u.real()), 0.0};
    }
    complexd r = std::sqrt(u);
    if (r.real() < 0.0) r = -r;
    return r;
}

complexd clog_conv(complexd u) {
    u = on_cut(u);
    if (u == complexd{0.0, 0.0}) throw DomainError("clog_conv: log of zero");
    if (u.imag() == 0.0 && u.real() < 0.0) return {std::log(-u.real()), M_PI};
    return std::log(u);
}

complexd acosh_conv(complexd u) {
    u = on_cut(u);
    return clog_conv(u + csqrt_conv(u - 1.0) * csqrt_conv(u + 1.0));
}

complexd h(complexd x) {
    if (x == complexd{0.0, 0.0}) throw DomainError("h: argument zero");
    return 0.5 * (1.0 - csqrt_conv(1.0 - 4.0 / (x * x)));
}

ModulusParams ModulusParams::from_mu(complexd mu) {
    if (std::abs(mu - 4.0) <= 1e-12)
        throw ReducibleCaseError("mu = 4: reducible (tau = 2) case");
    ModulusParams p;
    p.mu = mu;
    p.tau = mu - 2.0;
    p.mu_zero = std::abs(mu) <= 1e-12;
    if (p.mu_zero) {
        p.mu = 0.0;
        p.tau = -2.0;
        p.nu = 0.0;
        p.exp_nu = 1.0;
        p.exp_minus_nu = 1.0;
        p.sinh_nu = 0.0;
        p.cosh_nu = 1.0;
        p.sqrt_mu = 0.0;
        return p;
    }
    p.nu = acosh_conv(1.0 - mu / 2.0);
    p.exp_nu = std::exp(p.nu);
    p.exp_minus_nu = 1.0 / p.exp_nu;
    p.sinh_nu = (p.exp_nu - p.exp_minus_nu) / 2.0;
    p.cosh_nu = (p.exp_nu + p.exp_minus_nu) / 2.0;
    p.sqrt_mu = csqrt_conv(mu);
    return p;
}

double singular_distance(const ModulusParams& p, complexd x) {
    double d = std::abs(x);
    d = std::min(d, std::abs(x - p.sqrt_mu));
    d = std::min(d, std::abs(x + p.sqrt_mu));
    return d;
}

bool is_singular(const ModulusParams& p, complexd x) {
    return singular_distance(p, x) <= kSingularGuard;
}

complexd frak_h(const ModulusParams& p, complexd x) {
    if (is_singular(p, x))
        throw SingularArgumentError("frak_h: argument at or near a singular point");
    complexd hv = h(x);
    if (p.mu_zero) return 2.0 * hv;
    return clog_conv((1.0 + (p.exp_nu - 1.0) * hv) /
                     (1.0 + (p.exp_minus_nu - 1.0) * hv));
}

complexd frak_h_hat(const ModulusParams& p, complexd x) {
    if (is_singular(p, x))
        throw SingularArgumentError("frak_h_hat: argument at or near a singular point");
    complexd hv = h(x);
    if (p.mu_zero) return hv;
    return clog_conv((1.0 + (p.exp_nu - 1.0) * hv) /
                     csqrt_conv(1.0 - p.mu / (x * x)));
}

complexd Psi(const ModulusParams& p, complexd x, complexd y, complexd z) {
    if (p.mu_zero) throw DomainError("Psi: undefined at mu = 0; use Psi0");
    if (is_singular(p, x) || is_singular(p, y))
        throw SingularArgumentError("Psi: flank at or near a singular point");
    return clog_conv((1.0 + (p.exp_nu - 1.0) * (z / (x * y))) /
                     (csqrt_conv(1.0 - p.mu / (x * x)) *
                      csqrt_conv(1.0 - p.mu / (y * y))));
}

complexd Psi0(complexd x, complexd y, complexd z) {
    if (x == complexd{0.0, 0.0} || y == complexd{0.0, 0.0})
        throw DomainError("Psi0: zero flank");
    return z / (x * y);
}

complexd psi_value(const ModulusParams& p, complexd x, complexd y, complexd z) {
    if (p.mu_zero) {
        if (is_singular(p, x) || is_singular(p, y))
            throw SingularArgumentError("psi_value: flank at or near zero");
        return Psi0(x, y, z);
    }
    return Psi(p, x, y, z);
}

complexd engine_nu(const ModulusParams& p) {
    if (p.mu_zero) return 1.0;
    return p.nu;
}

double identity_residual(const ModulusParams& p, complexd value, complexd target) {
    if (p.mu_zero) return std::abs(value - target);
    return residue_distance(value, target);
}

double kernel_tail_constant(const ModulusParams& p, double radius) {
    if (radius < 4.0)
        throw PreconditionError("kernel_tail_constant: radius too small");
    // |h(x)| <= c_h / |x|^2 for |x| >= radius: h = u/(2(1+sqrt(1-u))) with
    // u = 4/x^2, |u| <= 4/radius^2 < 1, and Re sqrt(1-u) >= sqrt((1-|u|)/2)...
    // use the crude chain |1 + sqrt(1-u)| >= 1 (convention Re sqrt >= 0).
    double umax = 4.0 / (radius * radius);
    double c_h = 4.0 / 2.0; // |h| <= |u|/2 * |x|^-0 => c_h = 2 per 1/|x|^2
    double hmax = c_h / (radius * radius);
    if (p.mu_zero) {
        // frak_h = 2h exactly
        (void)umax;
        return 2.0 * c_h;
    }
    // g = 2 sinh(nu) h / (1 + (e^-nu - 1) h); |log(1+g)| <= |g|/(1-|g|)
    double a = std::abs(p.exp_minus_nu - 1.0);
    double denom = 1.0 - a * hmax;
    if (denom <= 0.25)
        throw PreconditionError("kernel_tail_constant: radius too small for this mu");
    double gmax = 2.0 * std::abs(p.sinh_nu) * hmax / denom;
    if (gmax >= 0.5)
        throw PreconditionError("kernel_tail_constant: radius too small for this mu");
    double c_g = 2.0 * std::abs(p.sinh_nu) * c_h / denom;
    return c_g / (1.0 - gmax);
}

complexd kernel_c2(const ModulusParams& p) {
    if (p.mu_zero) return 2.0;
    return 2.0 * p.sinh_nu;
}

complexd kernel_c4(const ModulusParams& p) {
    if (p.mu_zero) return 2.0;
    return 2.0 * p.sinh_nu * (2.0 - p.cosh_nu);
}

} // namespace markoff
