#include "svg_render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <vector>

namespace markoff_lab {

using markoff::FareyFraction;

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// ramp endpoints: #2c7bb6 (t = 0) to #d7191c (t = 1), linear per channel
std::string ramp(double t) {
    t = std::clamp(t, 0.0, 1.0);
    int r = (int)std::lround(0x2c + t * (0xd7 - 0x2c));
    int g = (int)std::lround(0x7b + t * (0x19 - 0x7b));
    int b = (int)std::lround(0xb6 + t * (0x1c - 0xb6));
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

} // namespace

std::string render_svg(const markoff::MuMarkoffMap& m, long long depth,
                       const FareyFraction& lo, const FareyFraction& hi, double cap) {
    if (lo.is_infinity() || hi.is_infinity() || !(markoff::less(lo, hi)))
        throw markoff::PreconditionError("render_svg: window must be finite with lo < hi");
    long long D = std::max<long long>(depth, 2);

    std::vector<FareyFraction> regions;
    for (long long n = 1; n <= D; ++n) {
        for (long long q = (n == 1 ? 0 : 1); q <= n; ++q) {
            long long pmag = n - q;
            if (q == 0) {
                continue; // infinity drawn as vertical rays only
            }
            if (std::gcd(pmag, q) != 1) continue;
            for (long long p : {pmag, -pmag}) {
                FareyFraction r{p, q};
                if (markoff::fib(r) != n) continue;
                if (markoff::compare(r, lo) < 0 || markoff::compare(r, hi) > 0) continue;
                regions.push_back(r);
                if (p == 0) break; // 0/1 once
            }
        }
    }
    std::sort(regions.begin(), regions.end(), markoff::less);
    regions.erase(std::unique(regions.begin(), regions.end()), regions.end());

    const double x0 = lo.value(), x1 = hi.value();
    const double W = 900.0, H = 480.0, pad = 30.0;
    const double sx = (W - 2 * pad) / (x1 - x0);
    auto X = [&](double x) { return pad + (x - x0) * sx; };
    auto Y = [&](double y) { return H - pad - y * sx; };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         fmt(W) + "\" height=\"" + fmt(H) + "\" viewBox=\"0 0 " + fmt(W) + " " +
         fmt(H) + "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    s += "<line x1=\"" + fmt(X(x0)) + "\" y1=\"" + fmt(Y(0)) + "\" x2=\"" +
         fmt(X(x1)) + "\" y2=\"" + fmt(Y(0)) +
         "\" stroke=\"#222222\" stroke-width=\"1\"/>\n";

    // geodesic arcs between Farey neighbors; vertical rays to infinity
    s += "<g stroke=\"#9aa7b0\" stroke-width=\"0.8\" fill=\"none\">\n";
    for (std::size_t i = 0; i < regions.size(); ++i) {
        const auto& a = regions[i];
        if (markoff::farey_neighbors(a, FareyFraction::infinity())) {
            double xa = X(a.value());
            s += "<line x1=\"" + fmt(xa) + "\" y1=\"" + fmt(Y(0)) + "\" x2=\"" +
                 fmt(xa) + "\" y2=\"" + fmt(pad) + "\"/>\n";
        }
        for (std::size_t j = i + 1; j < regions.size(); ++j) {
            const auto& b = regions[j];
            if (!markoff::farey_neighbors(a, b)) continue;
            double va = a.value(), vb = b.value();
            double c = (va + vb) / 2.0, r = std::fabs(vb - va) / 2.0;
            s += "<path d=\"M " + fmt(X(c - r)) + " " + fmt(Y(0)) + " A " +
                 fmt(r * sx) + " " + fmt(r * sx) + " 0 0 1 " + fmt(X(c + r)) + " " +
                 fmt(Y(0)) + "\"/>\n";
        }
    }
    s += "</g>\n";

    // Ford circles colored by clamp(log+|phi|, 0, cap)/cap
    s += "<g stroke=\"#555555\" stroke-width=\"0.4\">\n";
    for (const auto& r : regions) {
        double mod = std::abs(m.eval(r));
        double logp = mod > 1.0 ? std::log(mod) : 0.0;
        double t = cap > 0 ? std::clamp(logp, 0.0, cap) / cap : 0.0;
        double rad = 1.0 / (2.0 * double(r.q) * double(r.q));
        s += "<circle cx=\"" + fmt(X(r.value())) + "\" cy=\"" + fmt(Y(rad)) +
             "\" r=\"" + fmt(rad * sx) + "\" fill=\"" + ramp(t) +
             "\" fill-opacity=\"0.85\"/>\n";
    }
    s += "</g>\n</svg>\n";
    return s;
}

} // namespace markoff_lab
