#include "markoff/identity.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "markoff/accum.hpp"
#include "markoff/parallel.hpp"

namespace markoff {

const char* to_string(BQReport::Class c) {
    switch (c) {
        case BQReport::Class::BQ: return "BQ";
        case BQReport::Class::ExtendedBQ: return "ExtendedBQ";
        case BQReport::Class::ViolatesOpenInterval: return "ViolatesOpenInterval";
        case BQReport::Class::Inconclusive: return "Inconclusive";
    }
    return "?";
}

complexd psi_edge(const MuMarkoffMap& m, const DirectedEdge& e) {
    complexd x = m.eval(e.edge.a), y = m.eval(e.edge.b), z = m.eval(e.head);
    return psi_value(m.params(), x, y, z);
}

namespace {

constexpr double kSmallGuard = 1e-12;

bool value_parabolic(complexd v) {
    return std::fabs(v.imag()) <= kSmallGuard &&
           (std::fabs(v.real() - 2.0) <= kSmallGuard ||
            std::fabs(v.real() + 2.0) <= kSmallGuard);
}

bool value_in_open_interval(complexd v) {
    return std::fabs(v.imag()) <= kSmallGuard && std::fabs(v.real()) < 2.0 - kSmallGuard;
}

// Hurwitz-zeta tails by Euler-Maclaurin: sum_{k>=0} (a+k)^-s for s = 2, 4.
complexd zeta2_tail(complexd a) {
    complexd a2 = a * a, a3 = a2 * a, a5 = a3 * a2;
    return 1.0 / a + 0.5 / a2 + 1.0 / (6.0 * a3) - 1.0 / (30.0 * a5);
}
complexd zeta4_tail(complexd a) {
    complexd a3 = a * a * a, a4 = a3 * a, a5 = a4 * a;
    return 1.0 / (3.0 * a3) + 0.5 / a4 + 1.0 / (3.0 * a5);
}

// Sum of the kernel over all regions strictly behind an edge.
class BranchEngine {
  public:
    struct Result {
        complexd tail_sum{};
        double tail_bound{0};
        long long regions{0};
        long long levels{0};
        bool converged{true};
    };

    BranchEngine(const ModulusParams& params, double tol, const SearchBudget& budget)
        : p_(params), tol_(tol), budget_(budget) {
        c2_ = kernel_c2(p_);
        c4_ = kernel_c4(p_);
        // tail constant; widen the radius until the bound chain closes
        radius_ = 10.0;
        for (;;) {
            try {
                cbound_ = kernel_tail_constant(p_, radius_);
                break;
            } catch (const PreconditionError&) {
                radius_ *= 2.0;
                if (radius_ > 1e9) throw;
            }
        }
        cut_ = 1e-15;
        // hang cutoff for parabolic marches, scaled so the un-enumerated
        // hanging subtrees stay well under tol
        n0_ = 600;
        double want = std::cbrt(2.0 * cbound_ / std::max(tol_ * 0.125, 1e-14));
        if (want > double(n0_)) n0_ = std::min<long long>(20000, (long long)want + 1);
    }

    Result run(complexd a, complexd b, complexd z) {
        Result res;
        ComplexAccumulator acc;
        double bound = 0;
        nodes_ = 0;
        ok_ = true;
        process_edge(acc, bound, a, b, z, 1, res);
        res.tail_sum = acc.total();
        res.tail_bound = bound;
        res.regions = nodes_;
        res.converged = ok_;
        return res;
    }

  private:
    struct Node {
        complexd va, vb, vw, vz;
        long long level;
    };

    const ModulusParams& p_;
    double tol_;
    SearchBudget budget_;
    complexd c2_, c4_;
    double cbound_{0}, radius_{0}, cut_{0};
    long long n0_{600};
    long long nodes_{0};
    bool ok_{true};

    void guard_value(complexd w) const {
        if (is_singular(p_, w))
            throw SingularArgumentError("branch sum: region value at a singular point");
        if (std::abs(w) <= 2.0 + kSmallGuard)
            throw DecompositionError(
                "branch sum: interior region with |phi| <= 2; refine the "
                "decomposition via the attracting subtree");
    }

    // closed-form bound for a whole subtree behind an edge with flank moduli
    // A, B and inward modulus Z; +inf when the certificate does not apply
    double subtree_bound(double A, double B, double Z) const {
        double mmin = std::min(A, B);
        double G = A * B - Z;
        if (mmin < 3.0 || G < std::max({A, B, radius_})) return HUGE_VAL;
        double rho = 2.0 / ((mmin - 1.0) * (mmin - 1.0));
        if (rho > 0.82) return HUGE_VAL;
        return cbound_ / (G * G) / (1.0 - rho);
    }

    void process_edge(ComplexAccumulator& acc, double& bound, complexd a, complexd b,
                      complexd z, long long level, Result& res) {
        std::vector<Node> stack;
        push_children(acc, bound, stack, a, b, z, level, res, 0);
        while (!stack.empty()) {
            Node n = stack.back();
            stack.pop_back();
            if (++nodes_ > budget_.node_cap) {
                ok_ = false;
                return;
            }
            res.levels = std::max(res.levels, n.level);
            guard_value(n.vw);
            acc.add(frak_h(p_, n.vw));
            push_children(acc, bound, stack, n.va, n.vw, n.vb, n.level + 1, res, 0);
            push_children(acc, bound, stack, n.vb, n.vw, n.va, n.level + 1, res, 0);
        }
    }

    // Decide what to do with the branch behind the edge with flank values
    // (x, y) and inward completion z: close it with a bound, march a fan
    // along a small flank, or push the first region as a node.
    void push_children(ComplexAccumulator& acc, double& bound, std::vector<Node>& stack,
                       complexd x, complexd y, complexd z, long long level,
                       Result& res, int rdepth) {
        if (rdepth > 64) {
            ok_ = false;
            return;
        }
        complexd w = x * y - z;
        double hw_est = std::abs(c2_) / std::norm(w);
        if (std::abs(w) > 2.0 + kSmallGuard && hw_est <= cut_) {
            double sb = subtree_bound(std::abs(x), std::abs(y), std::abs(z));
            if (sb < HUGE_VAL) {
                bound += sb;
                return;
            }
        }
        // flank moduli below 3 cannot be closed by the subtree bound; the
        // spine along such a flank is summed as a fan march instead
        double ax = std::abs(x), ay = std::abs(y);
        if (ax < 3.0 || ay < 3.0) {
            bool pivot_is_x = ax <= ay;
            complexd pivot = pivot_is_x ? x : y;
            complexd other = pivot_is_x ? y : x;
            if (value_in_open_interval(pivot))
                throw DecompositionError("branch sum: flank value in (-2, 2)");
            march_fan(acc, bound, stack, pivot, other, w, level, res, rdepth);
            return;
        }
        if (level > 2 * budget_.max_fib) {
            ok_ = false;
            return;
        }
        stack.push_back({x, y, w, z, level});
    }

    // Fan along a small flank: spine c_0 = other flank, c_1 = w, with the
    // pivot region's value as the inward completion of every hanging branch.
    void march_fan(ComplexAccumulator& acc, double& bound, std::vector<Node>& stack,
                   complexd pivot, complexd c0, complexd c1, long long level,
                   Result& res, int rdepth) {
        if (value_parabolic(pivot)) {
            march_parabolic(acc, bound, stack, pivot, c0, c1, level, res, rdepth);
            return;
        }
        // exponential fan: |lambda| > 1 since pivot is not in [-2, 2]
        complexd prev = c0, cur = c1;
        double last_mag = 0;
        int grown = 0;
        for (long long j = 1;; ++j) {
            if (++nodes_ > budget_.node_cap) {
                ok_ = false;
                return;
            }
            guard_value(cur);
            complexd term = frak_h(p_, cur);
            acc.add(term);
            // hanging branch behind (c_{j-1}, c_j), inward = pivot
            push_children(acc, bound, stack, prev, cur, pivot, level + 1, res,
                          rdepth + 1);
            double mag = std::abs(cur);
            grown = (mag >= last_mag) ? grown + 1 : 0;
            last_mag = mag;
            if (std::abs(term) <= cut_ && grown >= 3) {
                // geometric fan tail: the growth ratio is at least the
                // dominant-root ratio; use the observed one, capped at 0.9
                double r = std::norm(prev) / std::norm(cur);
                r = std::min(r, 0.9);
                bound += std::abs(term) * r / (1.0 - r);
                double hang = subtree_bound(std::abs(prev), mag, std::abs(pivot));
                if (hang < HUGE_VAL)
                    bound += hang / (1.0 - r);
                else
                    ok_ = false;
                return;
            }
            complexd nxt = pivot * cur - prev;
            prev = cur;
            cur = nxt;
        }
    }

    // Parabolic (phi = +-2) fan: arithmetic progression d_m = d0 + m s after
    // sign folding; hanging subtrees enumerated up to n0, direct kernel terms
    // to M, then the Hurwitz-zeta tail of the c2/c4 asymptotics.
    void march_parabolic(ComplexAccumulator& acc, double& bound, std::vector<Node>& stack,
                         complexd pivot, complexd c0, complexd c1, long long level,
                         Result& res, int rdepth) {
        bool plus = pivot.real() > 0;
        complexd d0 = c0;
        complexd s = plus ? (c1 - c0) : -(c1 + c0); // d_m = (+-1)^m c_m = d0 + m s
        double smod = std::abs(s);
        if (smod <= kSmallGuard)
            throw SingularArgumentError("parabolic fan with zero step");
        long long M = std::max<long long>({2000, n0_ + 2, (long long)(80.0 / smod) + 1});

        complexd prev = c0, cur = c1;
        for (long long j = 1; j <= M; ++j) {
            if (++nodes_ > budget_.node_cap) {
                ok_ = false;
                return;
            }
            guard_value(cur);
            acc.add(frak_h(p_, cur));
            if (j <= n0_)
                push_children(acc, bound, stack, prev, cur, pivot, level + 1, res,
                              rdepth + 1);
            complexd nxt = pivot * cur - prev;
            prev = cur;
            cur = nxt;
        }
        // kernel tail beyond M via the c2/c4 expansion
        complexd aoff = d0 / s + double(M + 1);
        acc.add(c2_ / (s * s) * zeta2_tail(aoff));
        acc.add(c4_ / (s * s * s * s) * zeta4_tail(aoff));
        double K6 = 64.0 * (std::abs(c2_) + std::abs(c4_) + 1.0);
        bound += 2.0 * K6 / (5.0 * std::pow(smod, 6.0) * std::pow(double(M), 5.0));
        // hanging subtrees beyond n0: each is O(1/(s^4 m^4))
        bound += 2.0 * cbound_ / (std::pow(smod, 4.0) * std::pow(double(n0_), 3.0));
    }
};

SumReport finish_report(const ModulusParams& p, complexd engine_value,
                        complexd engine_target, double tail_bound, long long regions,
                        long long levels, bool pieces_ok, double tol, double scale) {
    SumReport rep;
    if (p.mu_zero) {
        rep.value = engine_value * scale;
        rep.target = engine_target * scale;
        rep.residual = std::abs(rep.value - rep.target);
        rep.tail_bound = tail_bound * scale;
    } else {
        rep.value = reduce(engine_value).as_complex();
        rep.target = reduce(engine_target).as_complex();
        rep.residual = residue_distance(rep.value, rep.target);
        rep.tail_bound = tail_bound;
    }
    rep.regions_summed = regions;
    rep.levels_used = levels;
    rep.converged = pieces_ok && rep.residual <= tol + rep.tail_bound;
    return rep;
}

struct BranchPieces {
    complexd value{};
    double tail_bound{0};
    long long regions{0};
    long long levels{0};
    bool converged{true};
};

// flank-hat terms plus the interior kernel sum for one directed edge
BranchPieces branch_pieces(const MuMarkoffMap& m, const DirectedEdge& e, double tol,
                           const SearchBudget& budget) {
    const ModulusParams& p = m.params();
    complexd x = m.eval(e.edge.a), y = m.eval(e.edge.b), z = m.eval(e.head);
    if (is_singular(p, x) || is_singular(p, y))
        throw SingularArgumentError("branch_sum: singular flank value");

    bool xs = std::abs(x) <= 2.0 + kSmallGuard;
    bool ys = std::abs(y) <= 2.0 + kSmallGuard;
    if (xs && ys)
        throw DecompositionError("branch_sum: both flanks have |phi| <= 2");
    for (complexd v : {x, y}) {
        if (std::abs(v) <= 2.0 + kSmallGuard && value_in_open_interval(v))
            throw DecompositionError("branch_sum: flank value in the open interval (-2,2)");
    }

    BranchEngine engine(p, tol, budget);
    auto r = engine.run(x, y, z);
    BranchPieces out;
    out.value = frak_h_hat(p, x) + frak_h_hat(p, y) + r.tail_sum;
    out.tail_bound = r.tail_bound;
    out.regions = r.regions;
    out.levels = r.levels;
    out.converged = r.converged;
    return out;
}

} // namespace

SumReport branch_sum(const MuMarkoffMap& m, const DirectedEdge& e, double tol,
                     const SearchBudget& budget) {
    BranchPieces pieces = branch_pieces(m, e, tol, budget);
    complexd target = psi_edge(m, e);
    return finish_report(m.params(), pieces.value, target, pieces.tail_bound,
                         pieces.regions, pieces.levels, pieces.converged, tol, 1.0);
}

BQReport bq_classify(const MuMarkoffMap& m, const SearchBudget& budget) {
    BQReport rep;
    OmegaResult om;
    // scan with early stop on an open-interval witness
    {
        // the scanner lives in markoff_map.cpp; use omega_leq then interpret.
        // Early witnesses: check the base triangle first for the fast path.
        Triangle base = base_triangle();
        auto vals = m.values(base);
        for (int i = 0; i < 3; ++i) {
            if (value_in_open_interval(vals[i])) {
                rep.classification = BQReport::Class::ViolatesOpenInterval;
                rep.witnesses.push_back({base.r[i], vals[i]});
                for (int jj = 0; jj < 3; ++jj)
                    if (std::abs(vals[jj]) <= 2.0 + kSmallGuard)
                        rep.omega2.push_back({base.r[jj], vals[jj]});
                return rep;
            }
        }
        om = omega_leq(m, 2.0, budget);
    }
    rep.omega2 = om.regions;
    rep.nodes_visited = om.nodes_visited;
    rep.scan_complete = om.complete;
    for (const auto& rv : om.regions)
        if (value_in_open_interval(rv.value)) rep.witnesses.push_back(rv);
    if (!rep.witnesses.empty()) {
        rep.classification = BQReport::Class::ViolatesOpenInterval;
        return rep;
    }
    if (!om.complete) {
        rep.classification = BQReport::Class::Inconclusive;
        return rep;
    }
    bool extended = false;
    for (const auto& rv : om.regions)
        if (value_parabolic(rv.value)) extended = true;
    rep.classification =
        extended ? BQReport::Class::ExtendedBQ : BQReport::Class::BQ;
    return rep;
}

SumReport mcshane_sum(const MuMarkoffMap& m, double tol, const SearchBudget& budget) {
    BQReport bq = bq_classify(m, budget);
    if (bq.classification == BQReport::Class::ViolatesOpenInterval)
        throw IdentityInapplicableError(
            "mcshane_sum: a region value lies in the open interval (-2,2)",
            bq.witnesses);
    if (bq.classification == BQReport::Class::Inconclusive)
        throw InconclusiveError("mcshane_sum: BQ scan inconclusive within budget");

    AttractingResult at = attracting_subtree(m, budget);
    const auto& edges = at.circular;
    double tol_edge = tol / (2.0 * double(edges.size()));

    std::vector<BranchPieces> pieces(edges.size());
    parallel_for_index(edges.size(), [&](std::size_t i) {
        pieces[i] = branch_pieces(m, edges[i], tol_edge, budget);
    });

    ComplexAccumulator acc;
    double tail = 0;
    long long regions = 0, levels = 0;
    bool ok = true;
    for (const auto& pc : pieces) {
        acc.add(pc.value);
        tail += pc.tail_bound;
        regions += pc.regions;
        levels = std::max(levels, pc.levels);
        ok = ok && pc.converged;
    }
    const ModulusParams& p = m.params();
    // engine total estimates sum over Omega of the engine kernel; targets:
    // nu mod 2 pi i, or (mu = 0, kernel h after halving) 1/2.
    return finish_report(p, acc.total(), engine_nu(p), tail, regions, levels, ok, tol,
                         0.5);
}

SumReport quotient_sum(const InvariantMapSpec& spec, const MuMarkoffMap& m, double tol,
                       const SearchBudget& budget) {
    const ModulusParams& p = m.params();
    FareyFraction center = FareyFraction::infinity();
    FanModel fm = fan(m, center);

    // Theorem 2.6 conditions on the representatives: no class value in the
    // open interval; finitely many classes with |phi| <= 2 certified by
    // complete branch scans.
    std::vector<RegionValue> witnesses;
    for (long long j = 1; j <= spec.period; ++j) {
        complexd yj = fm.value(j);
        if (value_in_open_interval(yj)) witnesses.push_back({fm.region(j), yj});
    }
    if (!witnesses.empty())
        throw IdentityInapplicableError("quotient_sum: fan class value in (-2,2)",
                                        witnesses);
    for (long long j = 1; j <= spec.period; ++j) {
        OmegaResult sc = scan_branch(m, fm.region(j - 1), fm.region(j), center, 2.0, budget);
        if (!sc.complete)
            throw InconclusiveError("quotient_sum: branch condition scan incomplete");
        for (const auto& rv : sc.regions)
            if (value_in_open_interval(rv.value)) witnesses.push_back(rv);
        if (!witnesses.empty())
            throw IdentityInapplicableError(
                "quotient_sum: branch value in the open interval (-2,2)", witnesses);
    }

    double tol_piece = tol / (2.0 * double(spec.period));
    std::vector<BranchEngine::Result> tails(spec.period);
    std::vector<complexd> fan_terms(spec.period);
    parallel_for_index(spec.period, [&](std::size_t idx) {
        long long j = (long long)idx + 1;
        complexd prev = fm.value(j - 1), cur = fm.value(j);
        fan_terms[idx] = frak_h(p, cur);
        BranchEngine engine(p, tol_piece, budget);
        tails[idx] = engine.run(prev, cur, m.seed_z());
    });

    ComplexAccumulator acc;
    double tail = 0;
    long long regions = 0, levels = 0;
    bool ok = true;
    for (long long idx = 0; idx < spec.period; ++idx) {
        acc.add(fan_terms[idx]);
        acc.add(tails[idx].tail_sum);
        tail += tails[idx].tail_bound;
        regions += tails[idx].regions + 1;
        levels = std::max(levels, tails[idx].levels);
        ok = ok && tails[idx].converged;
    }
    return finish_report(p, acc.total(), complexd{0.0, 0.0}, tail, regions, levels, ok,
                         tol, 0.5);
}

CylinderValue psi_fan_period_sum(const InvariantMapSpec& spec, const MuMarkoffMap& m) {
    const ModulusParams& p = m.params();
    FanModel fm = fan(m, FareyFraction::infinity());
    complexd x0 = m.seed_z();
    ComplexAccumulator acc;
    for (long long k = 1; k <= 2 * spec.p; ++k) {
        complexd a = fm.value(k - 1), b = fm.value(k);
        if (std::abs(a) <= kSingularGuard || std::abs(b) <= kSingularGuard)
            throw SingularArgumentError("psi_fan_period_sum: zero fan value");
        acc.add(psi_value(p, a, b, x0));
    }
    if (p.mu_zero) {
        complexd t = acc.total();
        return CylinderValue{t.real(), t.imag()};
    }
    return reduce(acc.total());
}

namespace {

// is x within eps of a rational with denominator <= max_den?
bool is_near_small_rational(double x, long long max_den, double eps) {
    long long h_prev = 1, k_prev = 0;
    long long h_cur = (long long)std::floor(x), k_cur = 1;
    if (std::fabs(x - double(h_cur)) <= eps) return true;
    double w = x - std::floor(x);
    for (int i = 0; i < 16 && w > 1e-15; ++i) {
        w = 1.0 / w;
        long long a = (long long)std::floor(w);
        w -= std::floor(w);
        long long h_next = a * h_cur + h_prev;
        long long k_next = a * k_cur + k_prev;
        if (k_next > max_den) break;
        h_prev = h_cur;
        h_cur = h_next;
        k_prev = k_cur;
        k_cur = k_next;
        if (std::fabs(x - double(h_cur) / double(k_cur)) <= eps) return true;
    }
    return false;
}

// continued-fraction convergent denominators of x in (0,1)
std::vector<long long> convergent_denominators(double x, long long qcap) {
    std::vector<long long> qs;
    double v = x;
    long long q_prev = 0, q_cur = 1; // q_{-1}, q_0
    for (int i = 0; i < 24; ++i) {
        if (v <= 1e-15) break;
        v = 1.0 / v;
        double af = std::floor(v);
        if (af > 4e18) break;
        long long a = (long long)af;
        v -= af;
        long long q_next = a * q_cur + q_prev;
        if (q_next > qcap || q_next <= 0) break;
        qs.push_back(q_next);
        q_prev = q_cur;
        q_cur = q_next;
    }
    return qs;
}

struct IntervalCache {
    const MuMarkoffMap& m;
    FanModel fm;
    double theta{0};
    bool case_two{false};
    bool mu_zero{false};
    std::vector<complexd> cumulative; // S_N at index N
    long long regions{0};
    bool converged{true};

    explicit IntervalCache(const MuMarkoffMap& map, const SearchBudget& budget)
        : m(map), fm(fan(map, FareyFraction::infinity())) {
        const ModulusParams& p = m.params();
        complexd xinf = m.seed_z();
        if (std::fabs(xinf.imag()) > kSmallGuard || std::fabs(xinf.real()) >= 2.0 - kSmallGuard)
            throw IdentityInapplicableError(
                "asymptotic: phi(X_{1/0}) must be real in (-2,2)",
                {{FareyFraction::infinity(), xinf}});
        // reject 2 cos of a rational multiple of pi with small denominator
        double t_over_pi = std::acos(xinf.real() / 2.0) / M_PI;
        if (is_near_small_rational(t_over_pi, 64, 1e-12))
            throw IdentityInapplicableError(
                "asymptotic: phi(X_{1/0}) = 2 cos(q pi / p); the quotient "
                "identity applies instead",
                {{FareyFraction::infinity(), xinf}});
        // hypothesis: Omega(2) = {X_{1/0}}
        OmegaResult om = omega_leq(m, 2.0, budget);
        if (!om.complete)
            throw InconclusiveError("asymptotic: Omega(2) scan incomplete");
        for (const auto& rv : om.regions)
            if (!(rv.region == FareyFraction::infinity()))
                throw IdentityInapplicableError(
                    "asymptotic: Omega(2) contains a region other than X_{1/0}",
                    {rv});
        if (om.regions.empty() || !(om.regions.front().region == FareyFraction::infinity()))
            throw IdentityInapplicableError(
                "asymptotic: X_{1/0} not found in Omega(2)",
                {{FareyFraction::infinity(), xinf}});

        theta = fm.unit_circle ? fm.theta : std::acos(xinf.real() / 2.0);
        case_two = std::abs(xinf * xinf - p.mu) <= 1e-9;
        mu_zero = p.mu_zero;
        cumulative.push_back(0.0); // S_0
    }

    void extend(long long Nmax, double tol, const SearchBudget& budget) {
        const ModulusParams& p = m.params();
        long long from = (long long)cumulative.size();
        if (Nmax < from) return;
        long long count = Nmax - from + 1;
        std::vector<complexd> terms(count);
        std::vector<long long> regs(count);
        std::vector<char> okflag(count, 1);
        double tol_piece = std::min(1e-9, tol / double(std::max<long long>(Nmax, 1)));
        parallel_for_index((std::size_t)count, [&](std::size_t idx) {
            long long n = from + (long long)idx;
            complexd prev = fm.value(n - 1), cur = fm.value(n);
            BranchEngine engine(p, tol_piece, budget);
            auto r = engine.run(prev, cur, m.seed_z());
            terms[idx] = frak_h(p, cur) + r.tail_sum;
            regs[idx] = r.regions + 1;
            okflag[idx] = r.converged ? 1 : 0;
        });
        for (long long idx = 0; idx < count; ++idx) {
            cumulative.push_back(cumulative.back() + terms[idx]);
            regions += regs[idx];
            converged = converged && okflag[idx];
        }
    }

    double kernel_scale() const { return mu_zero ? 0.5 : 1.0; }
};

} // namespace

AsymptoticReport asymptotic_report(const MuMarkoffMap& m,
                                   const std::vector<long long>& Ns, int k_max,
                                   double tol, const SearchBudget& budget) {
    IntervalCache cache(m, budget);
    AsymptoticReport rep;
    rep.case_two = cache.case_two;
    rep.theta = cache.theta;

    std::vector<long long> scanNs = Ns;
    std::sort(scanNs.begin(), scanNs.end());
    scanNs.erase(std::unique(scanNs.begin(), scanNs.end()), scanNs.end());

    std::vector<long long> subNs;
    if (k_max > 0) {
        auto qs = convergent_denominators(cache.theta / kTwoPi, 4'000'000);
        for (long long q : qs) {
            if (cache.case_two && (q % 2 != 0)) continue;
            subNs.push_back(q);
            if ((int)subNs.size() >= k_max) break;
        }
    }

    long long Nmax = 0;
    for (long long n : scanNs) Nmax = std::max(Nmax, n);
    for (long long n : subNs) Nmax = std::max(Nmax, n);
    if (Nmax > 4'000'000)
        throw PreconditionError("asymptotic: N too large");
    cache.extend(Nmax, tol, budget);

    double scale = cache.kernel_scale();
    for (long long n : scanNs) {
        if (n < 1) continue;
        complexd S = cache.cumulative[n] * scale;
        rep.scan.push_back({n, S, S.real() / double(n)});
    }
    for (long long n : subNs) {
        complexd S = cache.cumulative[n] * scale;
        complexd Sr = reduce(S).as_complex();
        rep.subsequence.push_back({n, Sr, residue_distance(Sr, complexd{0, 0})});
    }
    rep.regions_summed = cache.regions;
    rep.converged = cache.converged;
    return rep;
}

std::vector<AsymptoticPoint> asymptotic_scan(const MuMarkoffMap& m,
                                             const std::vector<long long>& Ns,
                                             double tol, const SearchBudget& budget) {
    return asymptotic_report(m, Ns, 0, tol, budget).scan;
}

std::vector<SubsequencePoint> asymptotic_subsequence(const MuMarkoffMap& m, int k_max,
                                                     double tol,
                                                     const SearchBudget& budget) {
    return asymptotic_report(m, {}, k_max, tol, budget).subsequence;
}

CheckResult psi_reciprocity(const MuMarkoffMap& m, const DirectedEdge& e, double tol) {
    CheckResult r;
    r.value = psi_edge(m, e) + psi_edge(m, e.reversed());
    r.target = engine_nu(m.params());
    r.residual = identity_residual(m.params(), r.value, r.target);
    r.ok = r.residual <= tol;
    return r;
}

CheckResult circular_sum_check(const MuMarkoffMap& m, const SubtreeSpec& t, double tol) {
    CheckResult r;
    ComplexAccumulator acc;
    for (const auto& e : circular_set(t)) acc.add(psi_edge(m, e));
    r.value = acc.total();
    r.target = engine_nu(m.params());
    r.residual = identity_residual(m.params(), r.value, r.target);
    r.ok = r.residual <= tol;
    return r;
}

CheckResult triple_psi(const MuMarkoffMap& m, const Triangle& v, double tol) {
    CheckResult r;
    complexd x = m.eval(v.r[0]), y = m.eval(v.r[1]), z = m.eval(v.r[2]);
    const ModulusParams& p = m.params();
    r.value = psi_value(p, x, y, z) + psi_value(p, y, z, x) + psi_value(p, z, x, y);
    r.target = engine_nu(p);
    r.residual = identity_residual(p, r.value, r.target);
    r.ok = r.residual <= tol;
    return r;
}

} // namespace markoff
