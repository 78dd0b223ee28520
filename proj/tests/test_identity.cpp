#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "markoff/identity.hpp"
#include "oracle.hpp"

using namespace markoff;
using doctest::Approx;

namespace {

FareyFraction fr(long long p, long long q) { return FareyFraction::make(p, q); }
const double kPi = 3.14159265358979323846;

MuMarkoffMap maskit() {
    complexd zeta{1, 2};
    return MuMarkoffMap::from_triple({2, 0}, complexd{0, -1} * zeta,
                                     complexd{0, -1} * (zeta + 2.0));
}

DirectedEdge base_edge_toward(const FareyFraction& a, const FareyFraction& b,
                              const FareyFraction& head) {
    return DirectedEdge::make(TreeEdge::make(a, b), head);
}

} // namespace

TEST_CASE("psi_edge") {
    MuMarkoffMap m3 = MuMarkoffMap::from_triple(3, 3, 3);
    complexd toward_half = psi_edge(m3, base_edge_toward(fr(0, 1), fr(1, 1), fr(1, 2)));
    complexd toward_inf =
        psi_edge(m3, base_edge_toward(fr(0, 1), fr(1, 1), FareyFraction::infinity()));
    CHECK(std::abs(toward_half - complexd{2.0 / 3.0, 0}) < 1e-14);
    CHECK(std::abs(toward_inf - complexd{1.0 / 3.0, 0}) < 1e-14);
    CHECK(std::abs(toward_half + toward_inf - 1.0) < 1e-14);

    MuMarkoffMap m2 = MuMarkoffMap::from_triple(-2, -2, -2);
    complexd v =
        psi_edge(m2, base_edge_toward(fr(0, 1), fr(1, 1), FareyFraction::infinity()));
    CHECK(residue_distance(v, complexd{0.9624236501192069, kPi}) < 1e-12);
}

TEST_CASE("reciprocity, circularity, and the triple identity") {
    double tol = 1e-9;
    MuMarkoffMap m3 = MuMarkoffMap::from_triple(3, 3, 3);
    auto r = psi_reciprocity(
        m3, base_edge_toward(fr(0, 1), fr(1, 1), FareyFraction::infinity()), tol);
    CHECK(r.ok);
    CHECK(std::abs(r.value - 1.0) < 1e-14); // 2/3 + 1/3 exactly

    MuMarkoffMap m2 = MuMarkoffMap::from_triple(-2, -2, -2);
    auto t = triple_psi(m2, base_triangle(), tol);
    CHECK(t.ok);
    CHECK(t.residual <= 1e-9);

    std::mt19937_64 g(61);
    int done = 0;
    while (done < 300) {
        auto s = oracle::random_big_seed(g);
        MuMarkoffMap m = MuMarkoffMap::from_triple(s[0], s[1], s[2]);
        try {
            auto rec = psi_reciprocity(
                m, base_edge_toward(fr(0, 1), fr(1, 1), FareyFraction::infinity()),
                tol);
            CHECK(rec.ok);
            auto tri = triple_psi(m, base_triangle(), tol);
            CHECK(tri.ok);
            auto circ =
                circular_sum_check(m, SubtreeSpec::vertex(base_triangle()), tol);
            CHECK(circ.ok);
        } catch (const SingularArgumentError&) {
            continue; // seed hit a singular flank; resample
        }
        ++done;
    }
}

TEST_CASE("circular sums over random subtrees") {
    std::mt19937_64 g(67);
    std::uniform_int_distribution<int> extra(0, 7), coin(0, 1);
    int done = 0;
    while (done < 120) {
        auto s = coin(g) ? oracle::random_big_seed(g) : oracle::random_mu0_seed(g);
        MuMarkoffMap m = MuMarkoffMap::from_triple(s[0], s[1], s[2]);
        // random connected subtree from the base edge
        std::vector<TreeEdge> edges{TreeEdge::make(fr(0, 1), fr(1, 1))};
        int want = extra(g);
        std::uniform_int_distribution<int> pick(0, 1 << 20);
        std::set<std::pair<std::pair<long long, long long>,
                           std::pair<long long, long long>>>
            have;
        auto key = [](const TreeEdge& e) {
            return std::make_pair(std::make_pair(e.a.p, e.a.q),
                                  std::make_pair(e.b.p, e.b.q));
        };
        have.insert(key(edges[0]));
        while ((int)edges.size() < 1 + want) {
            const TreeEdge& e = edges[pick(g) % edges.size()];
            auto [c1, c2] = triangle_completions(e);
            FareyFraction c = (pick(g) % 2) ? c1 : c2;
            TreeEdge cand =
                (pick(g) % 2) ? TreeEdge::make(e.a, c) : TreeEdge::make(e.b, c);
            if (have.count(key(cand))) continue;
            have.insert(key(cand));
            edges.push_back(cand);
        }
        try {
            auto res = circular_sum_check(m, SubtreeSpec::from_edges(edges), 1e-9);
            CHECK(res.ok);
        } catch (const SingularArgumentError&) {
            continue;
        }
        ++done;
    }
}

TEST_CASE("branch sums against psi targets") {
    SearchBudget budget;
    MuMarkoffMap m3 = MuMarkoffMap::from_triple(3, 3, 3);
    for (const auto& head :
         {FareyFraction::infinity(), fr(1, 2)}) {
        SumReport rep = branch_sum(
            m3, base_edge_toward(fr(0, 1), fr(1, 1), head), 1e-9, budget);
        CHECK(rep.converged);
        CHECK(rep.residual <= 1e-9);
    }

    // Maskit: branch flanked by the value-2 region, linear fan inside
    MuMarkoffMap mk = maskit();
    SumReport rk = branch_sum(
        mk, base_edge_toward(fr(0, 1), fr(-1, 1), FareyFraction::infinity()), 1e-5,
        budget);
    CHECK(rk.converged);
    CHECK(rk.residual <= 1e-5);

    // hypothesis violation: interior small region
    MuMarkoffMap m1 = MuMarkoffMap::from_triple(1, 1, 1);
    CHECK_THROWS_AS(
        branch_sum(m1, base_edge_toward(fr(0, 1), fr(1, 1), FareyFraction::infinity()),
                   1e-6, SearchBudget{20, 50000}),
        DecompositionError);

    // report invariant: converged implies residual <= tol + tail_bound
    SumReport r2 = branch_sum(
        MuMarkoffMap::from_triple(-2, -2, -2),
        base_edge_toward(fr(0, 1), fr(1, 2), fr(1, 1)), 1e-6, budget);
    CHECK(r2.converged);
    CHECK(r2.residual <= 1e-6 + r2.tail_bound);
}

TEST_CASE("bq classification") {
    SearchBudget budget;
    BQReport b3 = bq_classify(MuMarkoffMap::from_triple(3, 3, 3), budget);
    CHECK(b3.classification == BQReport::Class::BQ);
    CHECK(b3.omega2.empty());

    BQReport bk = bq_classify(maskit(), budget);
    CHECK(bk.classification == BQReport::Class::ExtendedBQ);
    REQUIRE(bk.omega2.size() == 1);
    CHECK(bk.omega2[0].region == fr(0, 1));

    BQReport b1 = bq_classify(MuMarkoffMap::from_triple(1, 1, 1), budget);
    CHECK(b1.classification == BQReport::Class::ViolatesOpenInterval);
    REQUIRE(!b1.witnesses.empty());
    CHECK(std::abs(b1.witnesses[0].value - 1.0) < 1e-14);
}

TEST_CASE("mcshane sums") {
    SearchBudget budget{60, 1'000'000};
    SumReport r3 = mcshane_sum(MuMarkoffMap::from_triple(3, 3, 3), 1e-8, budget);
    CHECK(r3.converged);
    CHECK(std::abs(r3.value - 0.5) <= 1e-8);

    SumReport rk = mcshane_sum(maskit(), 1e-5, budget);
    CHECK(rk.converged);
    CHECK(std::abs(rk.value - 0.5) <= 1e-5);

    SumReport r2 = mcshane_sum(MuMarkoffMap::from_triple(-2, -2, -2), 1e-5, budget);
    CHECK(r2.converged);
    complexd nu20{std::log(9.0 + std::sqrt(80.0)), kPi};
    CHECK(residue_distance(r2.value, nu20) <= 1e-5);

    CHECK_THROWS_AS(mcshane_sum(MuMarkoffMap::from_triple(1, 1, 1), 1e-6, budget),
                    IdentityInapplicableError);
}

TEST_CASE("mcshane total matches direct level-by-level enumeration") {
    MuMarkoffMap m3 = MuMarkoffMap::from_triple(3, 3, 3);
    SumReport rep = mcshane_sum(m3, 1e-8, SearchBudget{60, 1'000'000});
    // direct census with kernel h over all regions with fib <= 25
    double census = 0;
    for (long long n = 1; n <= 25; ++n)
        for (const auto& r : regions_at_level(n, Arc::whole()))
            census += h(m3.eval(r)).real();
    CHECK(std::abs(census - rep.value.real()) <= 1e-6);
}

TEST_CASE("quotient sums") {
    SearchBudget budget;
    {
        auto [m, spec] = invariant_map(2, 1, {2, 0}, +1);
        SumReport rep = quotient_sum(spec, m, 1e-6, budget);
        CHECK(rep.converged);
        CHECK(rep.residual <= 1e-6);
    }
    {
        auto [m, spec] = invariant_map(2, 1, {3, 0}, +1);
        SumReport rep = quotient_sum(spec, m, 1e-6, budget);
        CHECK(rep.converged);
        CHECK(rep.residual <= 1e-6);
    }
    {
        auto [m, spec] = invariant_map(5, 1, {3, 0}, +1);
        SumReport rep = quotient_sum(spec, m, 1e-6, budget);
        CHECK(rep.converged);
        CHECK(rep.residual <= 1e-6);
    }
    {
        // a fan class strictly inside (-2,2) is rejected with a witness
        auto [m, spec] = invariant_map(2, 1, {1, 0}, +1);
        CHECK_THROWS_AS(quotient_sum(spec, m, 1e-6, budget),
                        IdentityInapplicableError);
    }
}

TEST_CASE("fan period psi sums") {
    {
        auto [m, spec] = invariant_map(5, 1, {3, 0}, +1);
        CylinderValue v = psi_fan_period_sum(spec, m);
        CHECK(residue_distance(v.as_complex(), complexd{0, 0}) <= 1e-9);
    }
    {
        auto [m, spec] = invariant_map(5, 1, {3, 0}, -1);
        CylinderValue v = psi_fan_period_sum(spec, m);
        CHECK(residue_distance(v.as_complex(), complexd{0, 0}) <= 1e-9);
    }
    {
        auto [m, spec] = invariant_map(2, 1, {2, 0}, +1);
        CylinderValue v = psi_fan_period_sum(spec, m);
        CHECK(std::abs(v.as_complex()) <= 1e-12); // mu = 0: exact, no reduction
    }
}

TEST_CASE("Prop 3.6 limits along a parabolic fan") {
    MuMarkoffMap mk = maskit();
    const ModulusParams& p = mk.params();
    FanModel fm = fan(mk, fr(0, 1));
    // hat kernel vanishes along the fan at rate 1/(2n)^2
    CHECK(std::abs(frak_h_hat(p, fm.value(1000))) <= 1e-6);
    // edge weights approach hat(2); this limit is only O(1/n), so the 1e-6
    // tolerance needs n ~ 10^6
    complexd psi_mid = psi_value(p, complexd{2, 0}, fm.value(1000), fm.value(999));
    CHECK(std::abs(psi_mid - frak_h_hat(p, {2, 0})) <= 1e-3);
    complexd psi_far =
        psi_value(p, complexd{2, 0}, fm.value(1000000), fm.value(999999));
    CHECK(std::abs(psi_far - frak_h_hat(p, {2, 0})) <= 1e-6);
    CHECK(std::abs(frak_h_hat(p, {2, 0}) - 0.5) < 1e-14); // h(2) at mu = 0
}

TEST_CASE("asymptotic scan and subsequence") {
    SearchBudget budget;
    complexd x1 = 5.0 * std::polar(1.0, 1.0) + std::polar(1.0, -1.0);
    MuMarkoffMap case1 =
        MuMarkoffMap::from_triple({6, 0}, x1, {2.0 * std::cos(1.0), 0});
    AsymptoticReport rep1 = asymptotic_report(case1, {10, 100}, 4, 1e-2, budget);
    CHECK(!rep1.case_two);
    CHECK(rep1.theta == Approx(1.0).epsilon(1e-9));
    REQUIRE(rep1.scan.size() == 2);
    CHECK(std::fabs(rep1.scan[1].re_over_N) < std::fabs(rep1.scan[0].re_over_N));
    REQUIRE(rep1.subsequence.size() == 4);
    CHECK(rep1.subsequence.back().residue < rep1.subsequence.front().residue);

    MuMarkoffMap case2 = MuMarkoffMap::from_triple(
        {10, 0}, 10.0 * std::polar(1.0, 1.0), {2.0 * std::cos(1.0), 0});
    AsymptoticReport rep2 = asymptotic_report(case2, {10, 100}, 2, 1e-2, budget);
    CHECK(rep2.case_two);
    REQUIRE(rep2.subsequence.size() == 2);
    for (const auto& pt : rep2.subsequence) CHECK(pt.N % 2 == 0);

    // rational angle: x_inf = 2 cos(pi/5) is the quotient regime
    auto [mq, spec] = invariant_map(5, 1, {3, 0}, +1);
    CHECK_THROWS_AS(asymptotic_report(mq, {10}, 2, 1e-2, budget),
                    IdentityInapplicableError);

    // hypothesis violation: phi(X_{1/0}) not in (-2,2)
    CHECK_THROWS_AS(
        asymptotic_report(MuMarkoffMap::from_triple(3, 3, 3), {10}, 2, 1e-2, budget),
        IdentityInapplicableError);
}
