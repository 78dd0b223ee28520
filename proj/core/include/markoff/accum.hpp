#pragma once

#include <cmath>
#include <complex>

namespace markoff {

/// Neumaier-compensated accumulator; the carry is folded in on read.
struct KahanAccumulator {
    double sum{0};
    double carry{0};

    void add(double v) {
        double t = sum + v;
        if (std::fabs(sum) >= std::fabs(v))
            carry += (sum - t) + v;
        else
            carry += (v - t) + sum;
        sum = t;
    }

    double total() const { return sum + carry; }
};

struct ComplexAccumulator {
    KahanAccumulator re, im;

    void add(std::complex<double> v) {
        re.add(v.real());
        im.add(v.imag());
    }

    std::complex<double> total() const { return {re.total(), im.total()}; }
};

} // namespace markoff
