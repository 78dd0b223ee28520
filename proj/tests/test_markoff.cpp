#include <doctest.h>

#include <cmath>
#include <random>

#include "markoff/markoff_map.hpp"
#include "oracle.hpp"

using namespace markoff;
using doctest::Approx;

namespace {

FareyFraction fr(long long p, long long q) { return FareyFraction::make(p, q); }
const complexd kZeta{1, 2}; // Maskit parameter
MuMarkoffMap maskit() {
    return MuMarkoffMap::from_triple({2, 0}, complexd{0, -1} * kZeta,
                                     complexd{0, -1} * (kZeta + 2.0));
}

} // namespace

TEST_CASE("map_from_triple") {
    CHECK(MuMarkoffMap::from_triple(3, 3, 3).params().mu_zero);
    CHECK(MuMarkoffMap::from_triple(-2, -2, -2).mu() == complexd{20, 0});
    CHECK(MuMarkoffMap::from_triple(0, 2, {0, 2}).params().mu_zero);
    CHECK_THROWS_AS(MuMarkoffMap::from_triple(2, 2, 2), ReducibleCaseError);
    CHECK_THROWS_AS(MuMarkoffMap::from_triple(
                        std::numeric_limits<double>::quiet_NaN(), 1, 1),
                    DomainError);
}

TEST_CASE("map_from_generators") {
    Mat2 A{1, 1, 0, 1}, B{1, 0, 1, 1};
    MuMarkoffMap m = MuMarkoffMap::from_generators(A, B);
    CHECK(m.seed_x() == complexd{2, 0});
    CHECK(m.seed_y() == complexd{2, 0});
    CHECK(m.seed_z() == complexd{3, 0});
    CHECK(std::abs(m.mu() - 5.0) < 1e-12);

    Mat2 I{1, 0, 0, 1};
    CHECK_THROWS_AS(MuMarkoffMap::from_generators(I, I), ReducibleCaseError);
    Mat2 bad{2, 0, 0, 1};
    CHECK_THROWS_AS(MuMarkoffMap::from_generators(bad, I), PreconditionError);

    std::mt19937_64 g(43);
    for (int i = 0; i < 200; ++i) {
        complexd a = oracle::random_complex(g, -2, 2, -2, 2);
        complexd b = oracle::random_complex(g, -2, 2, -2, 2);
        complexd c = oracle::random_complex(g, -2, 2, -2, 2);
        if (std::abs(a) < 0.1) continue;
        complexd d = (1.0 + b * c) / a;
        Mat2 M1{a, b, c, d};
        Mat2 M2{d, c, b, a};
        complexd mu_expected;
        {
            Mat2 comm = M1 * M2 * M1.inverse_unimodular() * M2.inverse_unimodular();
            mu_expected = comm.trace() + 2.0;
        }
        if (std::abs(mu_expected - 4.0) < 1e-6) continue;
        MuMarkoffMap m2 = MuMarkoffMap::from_generators(M1, M2);
        CHECK(std::abs(m2.mu() - mu_expected) <= 1e-9 * std::max(1.0, std::abs(mu_expected)));
    }
}

TEST_CASE("eval fixtures") {
    MuMarkoffMap m = MuMarkoffMap::from_triple(3, 3, 3);
    CHECK(m.eval(fr(2, 1)) == complexd{6, 0});
    CHECK(m.eval(fr(5, 2)) == complexd{87, 0});
    CHECK(m.eval(fr(1, 2)) == complexd{6, 0});

    // Maskit fan step: phi(X_{1/2}) = -i (zeta - 2)
    MuMarkoffMap mk = maskit();
    complexd expect = complexd{0, -1} * (kZeta - 2.0);
    CHECK(std::abs(mk.eval(fr(1, 2)) - expect) < 1e-14);
}

TEST_CASE("eval equals brute-force recursion") {
    std::mt19937_64 g(47);
    for (int trial = 0; trial < 25; ++trial) {
        auto s = oracle::random_big_seed(g);
        MuMarkoffMap m = MuMarkoffMap::from_triple(s[0], s[1], s[2]);
        oracle::BruteMap brute(s[0], s[1], s[2], 13);
        for (const auto& [key, expect] : brute.values) {
            complexd got = m.eval(FareyFraction{key.first, key.second});
            CHECK(std::abs(got - expect) <= 1e-9 * std::max(1.0, std::abs(expect)));
        }
    }
}

TEST_CASE("deep fan eval uses the closed form consistently") {
    // bounded fan: values stay in [4, 6] even at position 10^6
    complexd x1 = 5.0 * std::polar(1.0, 1.0) + std::polar(1.0, -1.0);
    MuMarkoffMap m = MuMarkoffMap::from_triple({6, 0}, x1, {2.0 * std::cos(1.0), 0});
    complexd far = m.eval(fr(1000000, 1));
    CHECK(std::abs(far) <= 6.0 + 1e-6);
    CHECK(std::abs(far) >= 4.0 - 1e-6);
    // against the recurrence on a moderate prefix
    FanModel fm = fan(m, FareyFraction::infinity());
    complexd a = m.seed_x(), b = m.seed_y();
    for (int n = 2; n <= 200; ++n) {
        complexd c = fm.x0 * b - a;
        a = b;
        b = c;
        CHECK(std::abs(fm.value(n) - b) <= 1e-8 * std::max(1.0, std::abs(b)));
    }
}

TEST_CASE("fan models") {
    MuMarkoffMap m3 = MuMarkoffMap::from_triple(3, 3, 3);
    FanModel f3 = fan(m3, FareyFraction::infinity());
    CHECK(f3.x0 == complexd{3, 0});
    CHECK(std::abs(f3.value(0) - 3.0) < 1e-12);
    CHECK(std::abs(f3.value(1) - 3.0) < 1e-12);
    CHECK(std::abs(f3.value(2) - 6.0) < 1e-9);
    CHECK(std::abs(f3.value(3) - 15.0) < 1e-9);
    CHECK(std::abs(f3.value(4) - 39.0) < 1e-9);
    CHECK(f3.region(2) == fr(2, 1));
    CHECK(f3.region(4) == fr(4, 1));

    // Maskit: arithmetic progression with step +-2i around the value-2 region
    MuMarkoffMap mk = maskit();
    FanModel fk = fan(mk, fr(0, 1));
    CHECK(fk.degenerate);
    CHECK(fk.degenerate_sign == 1);
    CHECK(std::abs(fk.slope * fk.slope + 4.0) < 1e-12); // slope^2 = mu - 4


    // unit circle: lambda = e^i, A = 5, B = 1
    complexd x1 = 5.0 * std::polar(1.0, 1.0) + std::polar(1.0, -1.0);
    MuMarkoffMap mb = MuMarkoffMap::from_triple({6, 0}, x1, {2.0 * std::cos(1.0), 0});
    FanModel fb = fan(mb, FareyFraction::infinity());
    CHECK(fb.unit_circle);
    CHECK(fb.theta == Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(fb.coefA - 5.0) < 1e-9);
    CHECK(std::abs(fb.coefB - 1.0) < 1e-9);
    for (int n = 0; n <= 100; ++n) {
        double mod = std::abs(fb.value(n));
        CHECK(mod <= 6.0 + 1e-9);
        CHECK(mod >= 4.0 - 1e-9);
    }
    CHECK(fb.bounded_fan_min() == Approx(4.0).epsilon(1e-9));
}

TEST_CASE("degenerate fan closed forms match the recurrence") {
    // x0 = +2 and x0 = -2 forms
    MuMarkoffMap mk = maskit();
    FanModel fplus = fan(mk, fr(0, 1));
    MuMarkoffMap m2 = MuMarkoffMap::from_triple(-2, -2, -2);
    FanModel fminus = fan(m2, fr(0, 1));
    CHECK(fminus.degenerate);
    CHECK(fminus.degenerate_sign == -1);
    for (const FanModel* fm : {&fplus, &fminus}) {
        complexd a = fm->value(0), b = fm->value(1);
        for (int n = 2; n <= 200; ++n) {
            complexd c = fm->x0 * b - a;
            a = b;
            b = c;
            CHECK(std::abs(fm->value(n) - b) <= 1e-8 * std::max(1.0, std::abs(b)));
        }
    }
}

TEST_CASE("elementary moves preserve the vertex relation") {
    std::mt19937_64 g(53);
    for (int i = 0; i < 10000; ++i) {
        complexd x = oracle::random_complex(g, -4, 4, -4, 4);
        complexd y = oracle::random_complex(g, -4, 4, -4, 4);
        complexd z = oracle::random_complex(g, -4, 4, -4, 4);
        complexd mu = x * x + y * y + z * z - x * y * z;
        complexd w = x * y - z;
        complexd rel = x * x + y * y + w * w - x * y * w;
        CHECK(std::abs(rel - mu) <= 1e-9 * std::max(1.0, std::abs(mu)));
    }
}

TEST_CASE("arrow direction and tie-breaks") {
    MuMarkoffMap m3 = MuMarkoffMap::from_triple(3, 3, 3);
    DirectedEdge a = arrow(m3, TreeEdge::make(fr(0, 1), fr(1, 1)));
    CHECK(a.head == FareyFraction::infinity()); // |3| < |6|

    // (0, 2, 2i): completions of {0/1, 1/1} carry 2i and -2i; tie on modulus,
    // fib break picks 1/0
    MuMarkoffMap mq = MuMarkoffMap::from_triple(0, 2, {0, 2});
    DirectedEdge t = arrow(mq, TreeEdge::make(fr(0, 1), fr(1, 1)));
    CHECK(std::abs(mq.eval(fr(1, 2)) - complexd{0, -2}) < 1e-14);
    CHECK(t.head == FareyFraction::infinity());
}

TEST_CASE("omega_leq") {
    SearchBudget budget;
    MuMarkoffMap m3 = MuMarkoffMap::from_triple(3, 3, 3);
    OmegaResult r3 = omega_leq(m3, 2.0, budget);
    CHECK(r3.complete);
    CHECK(r3.regions.empty());

    MuMarkoffMap mk = maskit();
    OmegaResult rk = omega_leq(mk, 2.0, budget);
    CHECK(rk.complete);
    REQUIRE(rk.regions.size() == 1);
    CHECK(rk.regions[0].region == fr(0, 1));
    CHECK(std::abs(rk.regions[0].value - 2.0) < 1e-14);

    MuMarkoffMap m1 = MuMarkoffMap::from_triple(1, 1, 1);
    OmegaResult r1 = omega_leq(m1, 2.0, SearchBudget{12, 20000});
    CHECK(r1.regions.size() >= 3);
    bool base_found = false;
    for (auto& rv : r1.regions)
        if (rv.region == fr(0, 1)) base_found = true;
    CHECK(base_found);
    CHECK(!r1.complete);

    CHECK_THROWS_AS(omega_leq(m3, 2.5, budget), PreconditionError);
}

TEST_CASE("pruning soundness spot checks") {
    SearchBudget budget;
    MuMarkoffMap mk = maskit();
    OmegaResult rk = omega_leq(mk, 2.0, budget);
    REQUIRE(rk.complete);
    std::mt19937_64 g(59);
    for (long long n = 3; n <= 20; ++n) {
        auto level = regions_at_level(n, Arc::whole());
        std::uniform_int_distribution<std::size_t> pick(0, level.size() - 1);
        for (int s = 0; s < 8; ++s) {
            FareyFraction r = level[pick(g)];
            bool reported = false;
            for (auto& rv : rk.regions)
                if (rv.region == r) reported = true;
            if (!reported) CHECK(std::abs(mk.eval(r)) > 2.0);
        }
    }
}

TEST_CASE("attracting subtree") {
    SearchBudget budget;

    // (3,3,3): single sink vertex with three circular edges
    MuMarkoffMap m3 = MuMarkoffMap::from_triple(3, 3, 3);
    AttractingResult a3 = attracting_subtree(m3, budget);
    CHECK(a3.tree.single_vertex.has_value());
    CHECK(a3.circular.size() == 3);

    // (-2,-2,-2): tree spans the three value-(-2) regions
    MuMarkoffMap m2 = MuMarkoffMap::from_triple(-2, -2, -2);
    AttractingResult a2 = attracting_subtree(m2, budget);
    CHECK(a2.omega2.size() == 3);
    CHECK(!a2.tree.edges.empty());
    for (const auto& e : a2.circular) {
        complexd va = m2.eval(e.edge.a), vb = m2.eval(e.edge.b);
        bool both_small = std::abs(va) <= 2.0 + 1e-9 && std::abs(vb) <= 2.0 + 1e-9;
        CHECK(!both_small);
    }

    // Maskit: an arc along the value-2 fan
    MuMarkoffMap mk = maskit();
    AttractingResult ak = attracting_subtree(mk, budget);
    CHECK(ak.omega2.size() == 1);
    bool has_e0 = false, has_e1 = false;
    for (const auto& e : ak.tree.edges) {
        if (e == TreeEdge::make(fr(0, 1), FareyFraction::infinity())) has_e0 = true;
        if (e == TreeEdge::make(fr(0, 1), fr(1, 1))) has_e1 = true;
        // every tree edge touches the value-2 region
        CHECK((e.a == fr(0, 1) || e.b == fr(0, 1)));
    }
    CHECK(has_e0);
    CHECK(has_e1);
}

TEST_CASE("invariant maps") {
    auto [m, spec] = invariant_map(2, 1, {2, 0}, +1);
    CHECK(m.params().mu_zero);
    CHECK(std::abs(m.seed_x() - 2.0) < 1e-14);
    CHECK(std::abs(m.seed_y() - complexd{0, 2}) < 1e-14);
    CHECK(std::abs(m.seed_z()) < 1e-14);
    CHECK(spec.period == 4);
    FanModel fm = fan(m, FareyFraction::infinity());
    CHECK(std::abs(fm.value(2) - complexd{-2, 0}) < 1e-12);
    CHECK(std::abs(fm.value(3) - complexd{0, -2}) < 1e-12);
    CHECK(std::abs(fm.value(4) - complexd{2, 0}) < 1e-12);

    auto [m5, spec5] = invariant_map(5, 1, {3, 0}, +1);
    double c = 2.0 * std::cos(M_PI / 5.0);
    CHECK(std::abs(m5.seed_z() - c) < 1e-12);
    CHECK(std::abs(m5.mu() - c * c) < 1e-12);
    CHECK(spec5.period == 10);

    CHECK_THROWS_AS(invariant_map(2, 0, {2, 0}, +1), ReducibleCaseError);
    CHECK_THROWS_AS(invariant_map(2, 1, {0, 0}, +1), PreconditionError);
    CHECK_THROWS_AS(invariant_map(2, 3, {2, 0}, +1), PreconditionError);

    // the (0, zeta, zeta i) family
    auto [mz, specz] = invariant_map(2, 1, {3, 0}, +1);
    CHECK(std::abs(mz.seed_y() - complexd{0, 3}) < 1e-14);
    CHECK(specz.period == 4);
}

TEST_CASE("scan_branch") {
    // quotient orientation (2, 2i, 0): the fixed region X_{1/0} carries 0 and
    // the branch behind a fan-transverse edge stays clear of |phi| <= 2
    MuMarkoffMap mq = MuMarkoffMap::from_triple(2, {0, 2}, 0);
    OmegaResult r = scan_branch(mq, fr(0, 1), fr(1, 1), FareyFraction::infinity(),
                                2.0, SearchBudget{30, 100000});
    CHECK(r.complete);
    CHECK(r.regions.empty());

    // the reversed orientation (0, 2, 2i) has the whole fan of the 0-valued
    // region at modulus exactly 2 inside this branch: the scan finds them and
    // cannot close the bounded fan
    MuMarkoffMap m0 = MuMarkoffMap::from_triple(0, 2, {0, 2});
    OmegaResult r0 = scan_branch(m0, fr(0, 1), fr(1, 1), FareyFraction::infinity(),
                                 2.0, SearchBudget{16, 4000});
    CHECK(!r0.regions.empty());
    CHECK(!r0.complete);
}
