#pragma once

#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "markoff/farey.hpp"
#include "markoff/functions.hpp"

namespace markoff {

struct Mat2 {
    complexd a, b, c, d;
    complexd trace() const { return a + d; }
    complexd det() const { return a * d - b * c; }
    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Mat2 inverse_unimodular() const { return {d, -b, -c, a}; }
};

/// A mu-Markoff map, determined by the seed triple at the base triangle:
/// phi(X_{0/1}) = x, phi(X_{1/1}) = y, phi(X_{1/0}) = z.  mu is derived from
/// the vertex relation and mu = 4 is rejected.  Immutable and thread-safe.
class MuMarkoffMap {
  public:
    static MuMarkoffMap from_triple(complexd x, complexd y, complexd z);
    static MuMarkoffMap from_generators(const Mat2& A, const Mat2& B);

    complexd seed_x() const { return x_; }
    complexd seed_y() const { return y_; }
    complexd seed_z() const { return z_; }
    const ModulusParams& params() const { return params_; }
    complexd mu() const { return params_.mu; }

    /// phi at any region, via the canonical walk with fan acceleration.
    complexd eval(const FareyFraction& r) const;

    /// Values at the three regions of a triangle, in the triangle's order.
    std::array<complexd, 3> values(const Triangle& t) const;

  private:
    MuMarkoffMap(complexd x, complexd y, complexd z, ModulusParams p)
        : x_(x), y_(y), z_(z), params_(p) {}
    complexd x_, y_, z_;
    ModulusParams params_;
};

/// Closed form for the bi-infinite neighbor sequence of a region ("fan"):
/// y_{n+1} = x0 y_n - y_{n-1}.  Non-degenerate: y_n = A lambda^n + B lambda^-n
/// with lambda + 1/lambda = x0; |lambda| = 1 fans use angle arithmetic.
/// Degenerate x0 = 2: y_n = y0 + n s; x0 = -2: y_n = (-1)^n (y0 + n s).
struct FanModel {
    FareyFraction center;
    complexd x0;
    // region indexing: u_n = u0 + n * step (integer vectors, sign-normalized)
    FareyFraction u0;
    long long step_p{0}, step_q{0};

    bool degenerate{false};
    int degenerate_sign{1}; // x0 = +2 or -2
    complexd y0_affine, slope;

    bool unit_circle{false};
    double theta{0};
    complexd lambda{}, coefA{}, coefB{};

    complexd value(long long n) const;
    FareyFraction region(long long n) const;

    /// Lower bound for |y_m| valid for every m >= n (monotone direction);
    /// 0 when no useful bound exists.
    double modulus_lower_bound(long long n) const;

    /// Smallest index m0 >= 1 such that |y_m| is certified non-decreasing and
    /// > 2 + margin for all m >= m0; nullopt if no certificate exists.
    std::optional<long long> monotone_growth_from(double margin) const;

    /// For |lambda| = 1 fans: min over n of |y_n| >= ||A| - |B||.
    double bounded_fan_min() const;
};

/// Fan of `center` indexed so that positions 0 and 1 are the two base-nearest
/// neighbors (the flanks of the first triangle of the walk to center).
FanModel fan(const MuMarkoffMap& m, const FareyFraction& center);

/// Fan of `center` with explicit anchor regions at positions 0 and 1.
FanModel fan_from(const MuMarkoffMap& m, const FareyFraction& center,
                  const FareyFraction& at0, const FareyFraction& at1);

/// alpha: direct the edge toward the completion with the smaller |phi|;
/// ties break toward smaller fib, then smaller fraction.
DirectedEdge arrow(const MuMarkoffMap& m, const TreeEdge& e);

struct SearchBudget {
    long long max_fib{30};
    long long node_cap{1'000'000};
};

struct RegionValue {
    FareyFraction region;
    complexd value;
};

struct OmegaResult {
    std::vector<RegionValue> regions; // sorted by (fib, fraction)
    bool complete{false};
    long long nodes_visited{0};
};

/// All regions with |phi| <= k found within budget.  complete is true only
/// if every unexplored branch was excluded by a sound prune certificate.
/// Requires k <= 2 + 1e-6 (the prune rules are only sound up to 2).
OmegaResult omega_leq(const MuMarkoffMap& m, double k, const SearchBudget& budget);

/// Same scan restricted to the branch behind the edge {a, b} away from the
/// inward completion region.
OmegaResult scan_branch(const MuMarkoffMap& m, const FareyFraction& a,
                        const FareyFraction& b, const FareyFraction& inward,
                        double k, const SearchBudget& budget);

struct AttractingResult {
    SubtreeSpec tree;
    std::vector<DirectedEdge> circular;
    std::vector<RegionValue> omega2;
};

/// Steps 1-2 of the sum decomposition: the finite subtree toward which every
/// alpha arrow points, plus its circular set.  Throws InconclusiveError when
/// the Omega(2) scan cannot be completed within budget.
AttractingResult attracting_subtree(const MuMarkoffMap& m, const SearchBudget& budget);

/// A map invariant under the parabolic fan shift around X_{1/0}:
/// phi(X_{1/0}) = x0 = 2 cos(q pi / p), fan values y_{n+1} = y_n e^{+-i q pi/p}.
/// In this construction mu = x0^2.
struct InvariantMapSpec {
    long long p{0}, q{0};
    int ratio_sign{+1};
    complexd y0{}, y1{};
    long long period{0}; // multiplicative order of e^{i q pi / p}
};

std::pair<MuMarkoffMap, InvariantMapSpec>
invariant_map(long long p, long long q, complexd y0, int ratio_sign);

} // namespace markoff
