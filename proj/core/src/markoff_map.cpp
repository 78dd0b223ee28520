#include "markoff/markoff_map.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>

namespace markoff {

namespace {

using i128 = __int128;

i128 det(const FareyFraction& a, const FareyFraction& b) {
    return i128(a.p) * b.q - i128(b.p) * a.q;
}

bool finite_complex(complexd v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
}

constexpr double kParabolicGuard = 1e-12;

bool is_parabolic(complexd v, double& sign_out) {
    if (std::fabs(v.imag()) > kParabolicGuard) return false;
    if (std::fabs(v.real() - 2.0) <= kParabolicGuard) { sign_out = 2.0; return true; }
    if (std::fabs(v.real() + 2.0) <= kParabolicGuard) { sign_out = -2.0; return true; }
    return false;
}

} // namespace

MuMarkoffMap MuMarkoffMap::from_triple(complexd x, complexd y, complexd z) {
    if (!finite_complex(x) || !finite_complex(y) || !finite_complex(z))
        throw DomainError("map_from_triple: non-finite seed");
    complexd mu = x * x + y * y + z * z - x * y * z;
    return MuMarkoffMap(x, y, z, ModulusParams::from_mu(mu));
}

MuMarkoffMap MuMarkoffMap::from_generators(const Mat2& A, const Mat2& B) {
    if (std::abs(A.det() - 1.0) > 1e-9 || std::abs(B.det() - 1.0) > 1e-9)
        throw PreconditionError("map_from_generators: matrices must be unimodular");
    Mat2 AB = A * B;
    complexd x = A.trace(), y = B.trace(), z = AB.trace();
    MuMarkoffMap m = from_triple(x, y, z);
    Mat2 comm = AB * A.inverse_unimodular() * B.inverse_unimodular();
    if (std::abs(m.mu() - (comm.trace() + 2.0)) > 1e-9)
        throw Error("map_from_generators: Fricke identity check failed");
    return m;
}

std::array<complexd, 3> MuMarkoffMap::values(const Triangle& t) const {
    return {eval(t.r[0]), eval(t.r[1]), eval(t.r[2])};
}

namespace {

struct TV {
    FareyFraction f;
    complexd v;
};

// y_k and y_{k+1} of the recurrence y_{n+1} = x0 y_n - y_{n-1}; closed form
// engaged for long runs so deep fans cost O(1).
std::pair<complexd, complexd> fan_values_at(complexd x0, complexd y0, complexd y1,
                                            long long k) {
    if (k < 64) {
        complexd a = y0, b = y1;
        for (long long i = 0; i < k; ++i) {
            complexd c = x0 * b - a;
            a = b;
            b = c;
        }
        return {a, b};
    }
    double sgn;
    if (is_parabolic(x0, sgn)) {
        if (sgn > 0) {
            complexd s = y1 - y0;
            return {y0 + double(k) * s, y0 + double(k + 1) * s};
        }
        complexd s = -(y1 + y0); // y_n = (-1)^n (y0 + n s)
        complexd a = (k % 2 == 0 ? 1.0 : -1.0) * (y0 + double(k) * s);
        complexd b = ((k + 1) % 2 == 0 ? 1.0 : -1.0) * (y0 + double(k + 1) * s);
        return {a, b};
    }
    complexd disc = csqrt_conv(x0 * x0 - 4.0);
    complexd lambda = (x0 + disc) / 2.0;
    complexd A = (y1 - y0 / lambda) / disc;
    complexd B = y0 - A;
    auto at = [&](long long n) -> complexd {
        if (std::fabs(std::abs(lambda) - 1.0) <= 1e-12) {
            double theta = std::atan2(lambda.imag(), lambda.real());
            double ang = theta * double(n);
            complexd ln{std::cos(ang), std::sin(ang)};
            return A * ln + B / ln;
        }
        complexd ln = std::pow(lambda, double(n));
        return A * ln + B / ln;
    };
    return {at(k), at(k + 1)};
}

FareyFraction vec_normalize(long long p, long long q) {
    if (q < 0 || (q == 0 && p < 0)) { p = -p; q = -q; }
    return FareyFraction{p, q};
}

} // namespace

complexd MuMarkoffMap::eval(const FareyFraction& r) const {
    TV t[3] = {{{0, 1}, x_}, {{1, 1}, y_}, {FareyFraction::infinity(), z_}};
    for (int iter = 0; iter < 4096; ++iter) {
        for (const auto& tv : t)
            if (tv.f == r) return tv.v;

        // separating edge: r and the opposite vertex on different sides
        int ei = -1, ej = -1, ek = -1;
        for (int k = 0; k < 3 && ei < 0; ++k) {
            int i = (k + 1) % 3, j = (k + 2) % 3;
            Arc side{t[i].f, t[j].f, false};
            bool c_in = side.contains(t[k].f);
            bool r_in = side.contains(r);
            if (c_in != r_in) { ei = i; ej = j; ek = k; }
        }
        if (ei < 0) throw Error("eval: walk failed to find a separating edge");

        const TV A = t[ei], B = t[ej], C = t[ek];
        // gained completion: the one that is not C
        FareyFraction m1 = vec_normalize(A.f.p + B.f.p, A.f.q + B.f.q);
        FareyFraction m2 = vec_normalize(A.f.p - B.f.p, A.f.q - B.f.q);
        FareyFraction gained_f = (m1 == C.f) ? m2 : m1;
        complexd gained_v = A.v * B.v - C.v;

        // fan-jump: around pivot P the branch is parameterized by
        // u_m = Q + m * sigma P (u_0 = Q, u_1 = gained); r sits at
        // t* = -det(r,Q)/det(r,sigma P).  t* > 1 means a run of t*-ish
        // crossings all pivoting on P.
        long long jump_k = 0;
        int pivot = -1;
        bool lands_on_fan = false;
        for (int cand = 0; cand < 2; ++cand) {
            const TV& P = cand == 0 ? A : B;
            const TV& Q = cand == 0 ? B : A;
            i128 drP = det(r, P.f);
            if (drP == 0) continue; // r == P handled at loop top
            long long sp = P.f.p, sq = P.f.q;
            if (!(vec_normalize(Q.f.p + sp, Q.f.q + sq) == gained_f)) {
                sp = -sp;
                sq = -sq;
            }
            i128 den = i128(r.p) * sq - i128(sp) * r.q; // det(r, sigma P)
            i128 num = -det(r, Q.f);
            if (den == 0) continue;
            if ((num > 0) != (den > 0)) continue; // t* <= 0: not this pencil
            i128 tq = num / den;
            bool exact = (num % den) == 0;
            long long steps = exact ? (long long)tq - 1 : (long long)tq;
            if (steps >= 1) {
                jump_k = steps;
                pivot = cand;
                lands_on_fan = exact;
                break;
            }
        }

        if (pivot >= 0) {
            const TV P = pivot == 0 ? A : B;
            const TV Q = pivot == 0 ? B : A;
            long long sp = P.f.p, sq = P.f.q;
            if (!(vec_normalize(Q.f.p + sp, Q.f.q + sq) == gained_f)) {
                sp = -sp;
                sq = -sq;
            }
            auto [yk, yk1] = fan_values_at(P.v, Q.v, gained_v, jump_k);
            FareyFraction uk = vec_normalize(Q.f.p + jump_k * sp, Q.f.q + jump_k * sq);
            FareyFraction uk1 =
                vec_normalize(Q.f.p + (jump_k + 1) * sp, Q.f.q + (jump_k + 1) * sq);
            t[0] = P;
            t[1] = {uk, yk};
            t[2] = {uk1, yk1};
            if (lands_on_fan && uk1 == r) return yk1;
            continue;
        }

        t[ek] = {gained_f, gained_v};
    }
    throw Error("eval: walk did not terminate");
}

complexd FanModel::value(long long n) const {
    if (degenerate) {
        complexd v = y0_affine + double(n) * slope;
        if (degenerate_sign < 0 && (n % 2 != 0)) v = -v;
        return v;
    }
    if (unit_circle) {
        double ang = theta * double(n);
        complexd ln{std::cos(ang), std::sin(ang)};
        return coefA * ln + coefB / ln;
    }
    complexd ln = std::pow(lambda, double(n));
    return coefA * ln + coefB / ln;
}

FareyFraction FanModel::region(long long n) const {
    return vec_normalize(u0.p + n * step_p, u0.q + n * step_q);
}

double FanModel::modulus_lower_bound(long long n) const {
    if (degenerate)
        return std::max(0.0, double(n) * std::abs(slope) - std::abs(y0_affine));
    if (unit_circle) return bounded_fan_min();
    double L = std::abs(lambda);
    double a = std::abs(coefA), b = std::abs(coefB);
    if (L > 1.0)
        return std::max(0.0, a * std::pow(L, double(n)) - b * std::pow(L, -double(n)));
    return std::max(0.0, b * std::pow(L, -double(n)) - a * std::pow(L, double(n)));
}

double FanModel::bounded_fan_min() const {
    if (!unit_circle) return 0.0;
    return std::fabs(std::abs(coefA) - std::abs(coefB));
}

std::optional<long long> FanModel::monotone_growth_from(double margin) const {
    double need = 2.0 + margin;
    if (degenerate) {
        // |y_m|^2 is a convex quadratic in m: once one step is non-decreasing
        // and clear of 2, every later one is.
        complexd prev = value(1);
        for (long long m = 1; m <= 2'000'000; ++m) {
            complexd cur = value(m + 1);
            if (std::abs(prev) > need && std::abs(cur) >= std::abs(prev))
                return m;
            prev = cur;
        }
        return std::nullopt;
    }
    if (unit_circle) return std::nullopt;
    double L = std::abs(lambda);
    double grow = L > 1.0 ? std::abs(coefA) : std::abs(coefB);
    double decay = L > 1.0 ? std::abs(coefB) : std::abs(coefA);
    double Lg = L > 1.0 ? L : 1.0 / L;
    if (grow < 1e-250) return std::nullopt;
    for (long long m = 1; m <= 4096; ++m) {
        double gm = grow * std::pow(Lg, double(m)) - decay * std::pow(Lg, -double(m));
        double step_ok = grow * std::pow(Lg, double(m + 1)) - decay * std::pow(Lg, -double(m + 1));
        // certified non-decreasing from m when the closed-form lower bound at
        // m+1 dominates the upper bound at m
        double upper_m = grow * std::pow(Lg, double(m)) + decay * std::pow(Lg, -double(m));
        if (gm > need && step_ok >= upper_m) return m;
    }
    return std::nullopt;
}

FanModel fan_from(const MuMarkoffMap& m, const FareyFraction& center,
                  const FareyFraction& at0, const FareyFraction& at1) {
    if (!farey_neighbors(center, at0) || !farey_neighbors(center, at1) ||
        !farey_neighbors(at0, at1))
        throw PreconditionError("fan_from: anchors must be consecutive neighbors");
    FanModel fm;
    fm.center = center;
    fm.x0 = m.eval(center);
    fm.u0 = at0;
    long long sp = center.p, sq = center.q;
    if (!(vec_normalize(at0.p + sp, at0.q + sq) == at1)) {
        sp = -sp;
        sq = -sq;
        if (!(vec_normalize(at0.p + sp, at0.q + sq) == at1))
            throw PreconditionError("fan_from: anchors are not fan-consecutive");
    }
    fm.step_p = sp;
    fm.step_q = sq;

    complexd y0 = m.eval(at0), y1 = m.eval(at1);
    double sgn;
    if (is_parabolic(fm.x0, sgn)) {
        fm.degenerate = true;
        fm.degenerate_sign = sgn > 0 ? 1 : -1;
        if (sgn > 0) {
            fm.y0_affine = y0;
            fm.slope = y1 - y0;
        } else {
            fm.y0_affine = y0;
            fm.slope = -(y1 + y0);
        }
        return fm;
    }
    complexd disc = csqrt_conv(fm.x0 * fm.x0 - 4.0);
    fm.lambda = (fm.x0 + disc) / 2.0;
    fm.coefA = (y1 - y0 / fm.lambda) / disc;
    fm.coefB = y0 - fm.coefA;
    if (std::fabs(std::abs(fm.lambda) - 1.0) <= 1e-12) {
        fm.unit_circle = true;
        fm.theta = std::atan2(fm.lambda.imag(), fm.lambda.real());
    }
    return fm;
}

FanModel fan(const MuMarkoffMap& m, const FareyFraction& center) {
    Triangle base = base_triangle();
    for (int i = 0; i < 3; ++i) {
        if (base.r[i] == center) {
            FareyFraction a = base.r[(i + 1) % 3], b = base.r[(i + 2) % 3];
            if (!less(a, b)) std::swap(a, b);
            return fan_from(m, center, a, b);
        }
    }
    auto path = stern_brocot_path(center);
    Triangle t = replay_path(path);
    std::array<FareyFraction, 2> anchors{};
    int k = 0;
    for (const auto& v : t.r)
        if (!(v == center)) anchors[k++] = v;
    return fan_from(m, center, anchors[0], anchors[1]);
}

DirectedEdge arrow(const MuMarkoffMap& m, const TreeEdge& e) {
    auto [c1, c2] = triangle_completions(e);
    complexd v1 = m.eval(c1), v2 = m.eval(c2);
    double a1 = std::abs(v1), a2 = std::abs(v2);
    if (a1 < a2) return DirectedEdge::make(e, c1);
    if (a2 < a1) return DirectedEdge::make(e, c2);
    if (fib(c1) != fib(c2)) return DirectedEdge::make(e, fib(c1) < fib(c2) ? c1 : c2);
    return DirectedEdge::make(e, less(c1, c2) ? c1 : c2);
}

namespace {

constexpr double kPruneMargin = 1e-9;

struct ScanNode {
    FareyFraction fa, fb, fc; // region fc behind edge {fa,fb}
    complexd va, vb, vc;
    complexd vz; // inward completion value
};

// Scan a subtree for regions with |phi| <= k using the sound prune rules:
//   (1) escape: both flank moduli > 2 + margin and |first child| >= |inward|;
//   (2) fan certificate along a flank that is not > 2: closed-form growth
//       (parabolic convexity / |lambda|>1 dominance / bounded-fan floor).
// Returns true if every abandoned branch was certified; callers combine.
struct SubtreeScanner {
    SubtreeScanner(const MuMarkoffMap& map, double kk, const SearchBudget& b,
                   std::vector<RegionValue>* o)
        : m(map), k(kk), budget(b), out(o) {}

    const MuMarkoffMap& m;
    double k;
    SearchBudget budget;
    std::vector<RegionValue>* out;
    long long nodes = 0;
    bool complete = true;
    long long fib_base = 0; // max_fib is relative to the scan root
    // early stop: first value in the open interval (-2,2)
    bool stop_on_open_interval = false;
    std::optional<RegionValue> open_interval_witness;

    bool budget_left() const { return nodes < budget.node_cap; }

    void record(const FareyFraction& f, complexd v) {
        if (std::abs(v) <= k && out) out->push_back({f, v});
        if (stop_on_open_interval && !open_interval_witness &&
            std::fabs(v.imag()) <= kSingularGuard &&
            std::fabs(v.real()) < 2.0 - kSingularGuard)
            open_interval_witness = RegionValue{f, v};
    }

    bool stop_requested() const {
        return stop_on_open_interval && open_interval_witness.has_value();
    }

    // certificate (1) for the branch behind edge with flanks (x, y), inward z
    static bool escape_prunable(complexd x, complexd y, complexd w, complexd z) {
        return std::abs(x) > 2.0 + kPruneMargin && std::abs(y) > 2.0 + kPruneMargin &&
               std::abs(w) >= std::abs(z);
    }

    // certificate (2): pivot value vp (|vp| <= 2ish), fan spine c0 = (f0,v0),
    // c1 = (f1,v1) into the branch; marches positions up to the certified
    // index, expanding their hanging subtrees, and returns false when no
    // certificate exists.
    bool fan_prune(std::deque<ScanNode>& work, const FareyFraction& fp, complexd vp,
                   const FareyFraction& f0, complexd v0, const FareyFraction& f1,
                   complexd v1, int rdepth) {
        FanModel fm;
        fm.center = fp;
        fm.x0 = vp;
        fm.u0 = f0;
        long long sp = fp.p, sq = fp.q;
        if (!(vec_normalize(f0.p + sp, f0.q + sq) == f1)) { sp = -sp; sq = -sq; }
        fm.step_p = sp;
        fm.step_q = sq;
        double sgn;
        if (is_parabolic(vp, sgn)) {
            fm.degenerate = true;
            fm.degenerate_sign = sgn > 0 ? 1 : -1;
            fm.y0_affine = v0;
            fm.slope = sgn > 0 ? (v1 - v0) : -(v1 + v0);
        } else {
            complexd disc = csqrt_conv(vp * vp - 4.0);
            fm.lambda = (vp + disc) / 2.0;
            fm.coefA = (v1 - v0 / fm.lambda) / disc;
            fm.coefB = v0 - fm.coefA;
            if (std::fabs(std::abs(fm.lambda) - 1.0) <= 1e-12) {
                fm.unit_circle = true;
                fm.theta = std::atan2(fm.lambda.imag(), fm.lambda.real());
            }
        }

        if (fm.unit_circle) {
            // bounded fan: prunable only if the whole fan stays above k and
            // the hanging branches satisfy the escape rule uniformly
            double floor_mod = fm.bounded_fan_min();
            return floor_mod > std::max(k, 2.0) + kPruneMargin &&
                   floor_mod * floor_mod >= 2.0 * std::abs(vp);
        }
        auto m0 = fm.monotone_growth_from(kPruneMargin);
        if (!m0) return false;
        // positions 1..m0 are checked directly, with their hanging branches;
        // everything beyond is covered by the growth certificate
        complexd prev = v0, cur = v1;
        for (long long j = 1; j <= *m0 && !stop_requested(); ++j) {
            if (!budget_left()) {
                complete = false;
                return true; // abandoned, recorded via the completeness flag
            }
            ++nodes;
            record(fm.region(j), cur);
            expand_child(work, fm.region(j - 1), prev, fm.region(j), cur, fp, vp,
                         rdepth + 1);
            complexd nxt = vp * cur - prev;
            prev = cur;
            cur = nxt;
        }
        return true;
    }

    void expand_child(std::deque<ScanNode>& work, const FareyFraction& fx, complexd vx,
                      const FareyFraction& fy, complexd vy, const FareyFraction& fz,
                      complexd vz, int rdepth = 0) {
        if (rdepth > 64 || !budget_left()) {
            complete = false;
            return;
        }
        // branch behind edge {fx, fy}, inward completion (fz, vz)
        FareyFraction comp1 = vec_normalize(fx.p + fy.p, fx.q + fy.q);
        FareyFraction comp2 = vec_normalize(fx.p - fy.p, fx.q - fy.q);
        FareyFraction fw = (comp1 == fz) ? comp2 : comp1;
        complexd vw = vx * vy - vz;
        if (escape_prunable(vx, vy, vw, vz)) return;
        bool x_small = std::abs(vx) <= 2.0 + kPruneMargin;
        bool y_small = std::abs(vy) <= 2.0 + kPruneMargin;
        if (x_small && fan_prune(work, fx, vx, fy, vy, fw, vw, rdepth)) return;
        if (y_small && fan_prune(work, fy, vy, fx, vx, fw, vw, rdepth)) return;
        if (fib(fw) > budget.max_fib + fib_base) {
            complete = false;
            return;
        }
        work.push_back({fx, fy, fw, vx, vy, vw, vz});
    }

    void run_from_base() {
        Triangle base = base_triangle();
        auto vals = m.values(base);
        std::deque<ScanNode> work;
        for (int i = 0; i < 3; ++i) record(base.r[i], vals[i]);
        static constexpr int ends[3][2] = {{0, 1}, {0, 2}, {1, 2}};
        static constexpr int opp[3] = {2, 1, 0};
        for (int e = 0; e < 3 && !stop_requested(); ++e)
            expand_child(work, base.r[ends[e][0]], vals[ends[e][0]],
                         base.r[ends[e][1]], vals[ends[e][1]], base.r[opp[e]],
                         vals[opp[e]]);
        drain(work);
    }

    void run_behind(const FareyFraction& fx, complexd vx, const FareyFraction& fy,
                    complexd vy, const FareyFraction& fz, complexd vz) {
        fib_base = fib(fx) + fib(fy);
        std::deque<ScanNode> work;
        expand_child(work, fx, vx, fy, vy, fz, vz);
        drain(work);
    }

    void drain(std::deque<ScanNode>& work) {
        while (!work.empty()) {
            if (stop_requested()) return;
            if (!budget_left()) {
                complete = false;
                return;
            }
            ScanNode n = work.front();
            work.pop_front();
            ++nodes;
            record(n.fc, n.vc);
            expand_child(work, n.fa, n.va, n.fc, n.vc, n.fb, n.vb);
            expand_child(work, n.fb, n.vb, n.fc, n.vc, n.fa, n.va);
        }
    }
};

} // namespace

namespace {

void finalize_regions(std::vector<RegionValue>& regions) {
    std::sort(regions.begin(), regions.end(),
              [](const RegionValue& a, const RegionValue& b) {
                  long long fa = fib(a.region), fb = fib(b.region);
                  if (fa != fb) return fa < fb;
                  return less(a.region, b.region);
              });
    regions.erase(std::unique(regions.begin(), regions.end(),
                              [](const RegionValue& a, const RegionValue& b) {
                                  return a.region == b.region;
                              }),
                  regions.end());
}

} // namespace

OmegaResult omega_leq(const MuMarkoffMap& m, double k, const SearchBudget& budget) {
    if (k > 2.0 + 1e-6)
        throw PreconditionError("omega_leq: prune rules are only sound for k <= 2");
    OmegaResult res;
    SubtreeScanner sc{m, k, budget, &res.regions};
    sc.run_from_base();
    res.complete = sc.complete;
    res.nodes_visited = sc.nodes;
    finalize_regions(res.regions);
    return res;
}

OmegaResult scan_branch(const MuMarkoffMap& m, const FareyFraction& a,
                        const FareyFraction& b, const FareyFraction& inward,
                        double k, const SearchBudget& budget) {
    if (k > 2.0 + 1e-6)
        throw PreconditionError("scan_branch: prune rules are only sound for k <= 2");
    OmegaResult res;
    SubtreeScanner sc{m, k, budget, &res.regions};
    sc.run_behind(a, m.eval(a), b, m.eval(b), inward, m.eval(inward));
    res.complete = sc.complete;
    res.nodes_visited = sc.nodes;
    finalize_regions(res.regions);
    return res;
}

namespace {

// exact fan index of region r around center: r = u0 + n * step
std::optional<long long> fan_index_of(const FanModel& fm, const FareyFraction& r) {
    // solve componentwise; step vector is primitive together with u0
    long long n;
    if (fm.step_q != 0) {
        if ((r.q - fm.u0.q) % fm.step_q == 0)
            n = (r.q - fm.u0.q) / fm.step_q;
        else if ((-r.q - fm.u0.q) % fm.step_q == 0)
            n = (-r.q - fm.u0.q) / fm.step_q;
        else
            return std::nullopt;
    } else {
        if ((r.p - fm.u0.p) % fm.step_p == 0)
            n = (r.p - fm.u0.p) / fm.step_p;
        else if ((-r.p - fm.u0.p) % fm.step_p == 0)
            n = (-r.p - fm.u0.p) / fm.step_p;
        else
            return std::nullopt;
    }
    if (fm.region(n) == r) return n;
    return std::nullopt;
}

FanModel reversed_fan(const MuMarkoffMap& m, const FanModel& fm) {
    return fan_from(m, fm.center, fm.region(1), fm.region(0));
}

// window end certificate: find the smallest end index E >= lo such that the
// fan is certified non-decreasing and > 2 beyond E, and the first few arrows
// beyond indeed point inward.
std::optional<long long> certify_end(const MuMarkoffMap& m, const FanModel& fm,
                                     long long lo) {
    auto m0 = fm.monotone_growth_from(kPruneMargin);
    if (!m0) return std::nullopt;
    long long E = std::max(lo, *m0);
    for (int extra = 0; extra < 64; ++extra, ++E) {
        bool ok = true;
        for (long long kk = E + 1; kk <= E + 4; ++kk) {
            TreeEdge ek = TreeEdge::make(fm.center, fm.region(kk));
            DirectedEdge ar = arrow(m, ek);
            if (!(ar.head == fm.region(kk - 1))) { ok = false; break; }
        }
        if (ok) return E;
    }
    return std::nullopt;
}

} // namespace

AttractingResult attracting_subtree(const MuMarkoffMap& m, const SearchBudget& budget) {
    OmegaResult om = omega_leq(m, 2.0, budget);
    if (!om.complete)
        throw InconclusiveError("attracting_subtree: Omega(2) scan incomplete");

    AttractingResult res;
    res.omega2 = om.regions;

    if (om.regions.empty()) {
        // Aside 1: a single sink vertex
        Triangle v = base_triangle();
        for (long long steps = 0; steps < budget.node_cap; ++steps) {
            bool moved = false;
            static constexpr int ends[3][2] = {{0, 1}, {0, 2}, {1, 2}};
            static constexpr int opp[3] = {2, 1, 0};
            for (int e = 0; e < 3; ++e) {
                TreeEdge te = TreeEdge::make(v.r[ends[e][0]], v.r[ends[e][1]]);
                DirectedEdge ar = arrow(m, te);
                if (!(ar.head == v.r[opp[e]])) {
                    v = Triangle::make(te.a, te.b, ar.head);
                    moved = true;
                    break;
                }
            }
            if (!moved) {
                res.tree = SubtreeSpec::vertex(v);
                res.circular = circular_set(res.tree);
                return res;
            }
        }
        throw InconclusiveError("attracting_subtree: sink search exhausted budget");
    }

    std::vector<TreeEdge> edges;
    for (const auto& [X0, v0] : om.regions) {
        FanModel fwd = fan(m, X0);
        FanModel bwd = reversed_fan(m, fwd);
        // adjacent small regions fix the minimal window
        long long hi = 1, lo = 0;
        for (const auto& [R, vR] : om.regions) {
            if (R == X0 || !farey_neighbors(R, X0)) continue;
            auto n = fan_index_of(fwd, R);
            if (!n) throw Error("attracting_subtree: fan index lookup failed");
            hi = std::max(hi, *n);
            lo = std::min(lo, *n);
        }
        auto hiE = certify_end(m, fwd, hi);
        // reversed fan position j corresponds to forward index 1 - j
        auto loE = certify_end(m, bwd, 1 - lo);
        if (!hiE || !loE)
            throw InconclusiveError("attracting_subtree: no growth certificate at a fan end");
        lo = 1 - *loE;
        hi = *hiE;
        for (long long n = lo; n <= hi; ++n)
            edges.push_back(TreeEdge::make(X0, fwd.region(n)));
    }
    std::sort(edges.begin(), edges.end(), [](const TreeEdge& x, const TreeEdge& y) {
        int c = compare(x.a, y.a);
        if (c != 0) return c < 0;
        return compare(x.b, y.b) < 0;
    });
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    res.tree = SubtreeSpec::from_edges(std::move(edges));
    res.circular = circular_set(res.tree);
    return res;
}

std::pair<MuMarkoffMap, InvariantMapSpec>
invariant_map(long long p, long long q, complexd y0, int ratio_sign) {
    if (p < 1 || q < 0 || q >= p)
        throw PreconditionError("invariant_map: require 0 <= q < p");
    if (std::abs(y0) == 0.0) throw PreconditionError("invariant_map: y0 = 0");
    if (ratio_sign != 1 && ratio_sign != -1)
        throw PreconditionError("invariant_map: ratio_sign must be +-1");
    if (q == 0) throw ReducibleCaseError("invariant_map: q = 0 gives mu = 4");

    double theta = double(q) * M_PI / double(p);
    complexd x0{2.0 * std::cos(theta), 0.0};
    complexd rho{std::cos(theta), ratio_sign * std::sin(theta)};
    complexd y1 = y0 * rho;
    MuMarkoffMap map = MuMarkoffMap::from_triple(y0, y1, x0);
    if (std::abs(map.mu() - x0 * x0) > 1e-9)
        throw Error("invariant_map: mu != x0^2");

    InvariantMapSpec spec;
    spec.p = p;
    spec.q = q;
    spec.ratio_sign = ratio_sign;
    spec.y0 = y0;
    spec.y1 = y1;
    long long g = std::gcd(q, 2 * p);
    spec.period = 2 * p / g;

    // verify periodicity over one full period
    FanModel fm = fan(map, FareyFraction::infinity());
    for (long long n = 0; n <= spec.period; ++n) {
        complexd a = fm.value(n), b = fm.value(n + spec.period);
        if (std::abs(a - b) > 1e-9 * std::max(1.0, std::abs(a)))
            throw Error("invariant_map: fan is not period-periodic");
    }
    return {map, spec};
}

} // namespace markoff
