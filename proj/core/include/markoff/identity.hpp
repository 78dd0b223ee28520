#pragma once

#include <string>
#include <vector>

#include "markoff/cylinder.hpp"
#include "markoff/farey.hpp"
#include "markoff/markoff_map.hpp"

namespace markoff {

/// Result of an identity-verification sum.  For mu = 0 the value and target
/// are plain (no mod-2-pi-i reduction) and already carry the reported
/// normalization (engine totals halved where the identity is stated with
/// kernel h).
struct SumReport {
    complexd value{};
    complexd target{};
    double residual{0};
    double tail_bound{0};
    long long levels_used{0};
    long long regions_summed{0};
    bool converged{false};
};

struct BQReport {
    enum class Class { BQ, ExtendedBQ, ViolatesOpenInterval, Inconclusive };
    Class classification{Class::Inconclusive};
    std::vector<RegionValue> witnesses; // open-interval witnesses
    std::vector<RegionValue> omega2;    // |phi| <= 2 regions found
    bool scan_complete{false};
    long long nodes_visited{0};
};

const char* to_string(BQReport::Class c);

/// The conditions of a sum identity fail on this map; witnesses attached.
struct IdentityInapplicableError : Error {
    std::vector<RegionValue> witnesses;
    explicit IdentityInapplicableError(const std::string& msg,
                                       std::vector<RegionValue> w = {})
        : Error(msg), witnesses(std::move(w)) {}
};

/// psi(e) = Psi_mu(x, y, z) with z the head-region value (z/xy for mu = 0).
complexd psi_edge(const MuMarkoffMap& m, const DirectedEdge& e);

/// Theorem 3.5 / Proposition 3.6 branch sum:
///   sum_{Omega^0} frak_h_hat + sum_{Omega^-} frak_h  ==  psi(e)  (mod 2 pi i)
/// Value and target are raw engine quantities (no mu = 0 halving here).
SumReport branch_sum(const MuMarkoffMap& m, const DirectedEdge& e, double tol,
                     const SearchBudget& budget);

/// The McShane sum over the whole region set, assembled over the circular
/// set of the attracting subtree.  Target nu mod 2 pi i (mu != 0) or 1/2
/// (mu = 0, reported with kernel h).
SumReport mcshane_sum(const MuMarkoffMap& m, double tol, const SearchBudget& budget);

BQReport bq_classify(const MuMarkoffMap& m, const SearchBudget& budget);

/// Theorem 2.6 quotient sum over Omega/<H> - [X_0]: target 0 mod 2 pi i.
/// Tails are enumerated directly; psi is never taken at edges flanking X_0.
SumReport quotient_sum(const InvariantMapSpec& spec, const MuMarkoffMap& m,
                       double tol, const SearchBudget& budget);

/// Lemma 3.9 cross-check: sum of the 2p fan-transverse edge weights, reduced.
CylinderValue psi_fan_period_sum(const InvariantMapSpec& spec, const MuMarkoffMap& m);

struct AsymptoticPoint {
    long long N{0};
    complexd S{};      // unreduced cumulative sum
    double re_over_N{0};
};

struct SubsequencePoint {
    long long N{0};
    complexd S_reduced{};
    double residue{0};
};

struct AsymptoticReport {
    std::vector<AsymptoticPoint> scan;
    std::vector<SubsequencePoint> subsequence;
    bool case_two{false}; // x_inf^2 == mu
    double theta{0};      // fan angle of X_{1/0}
    long long regions_summed{0};
    bool converged{false};
};

/// Theorem D scan: S_N = sum over rationals in (0, N] of the kernel, built
/// interval by interval.  Requires Omega(2) = {X_{1/0}} with
/// phi(X_{1/0}) in (-2,2), verified by a budgeted scan.
std::vector<AsymptoticPoint> asymptotic_scan(const MuMarkoffMap& m,
                                             const std::vector<long long>& Ns,
                                             double tol, const SearchBudget& budget);

/// Theorem D subsequence: N_k from continued-fraction convergent denominators
/// of theta/(2 pi), even ones only when x_inf^2 = mu.
std::vector<SubsequencePoint> asymptotic_subsequence(const MuMarkoffMap& m, int k_max,
                                                     double tol,
                                                     const SearchBudget& budget);

/// Full Theorem D run (shared interval cache between scan and subsequence).
AsymptoticReport asymptotic_report(const MuMarkoffMap& m,
                                   const std::vector<long long>& Ns, int k_max,
                                   double tol, const SearchBudget& budget);

struct CheckResult {
    complexd value{};
    complexd target{};
    double residual{0};
    bool ok{false};
};

/// Lemma 3.3(i): psi(e) + psi(-e) = nu mod 2 pi i (exactly 1 for mu = 0).
CheckResult psi_reciprocity(const MuMarkoffMap& m, const DirectedEdge& e, double tol);

/// Lemma 3.3(ii): sum of psi over a circular set = nu mod 2 pi i.
CheckResult circular_sum_check(const MuMarkoffMap& m, const SubtreeSpec& t, double tol);

/// Lemma 3.1(i): Psi(x,y,z) + Psi(y,z,x) + Psi(z,x,y) = nu mod 2 pi i.
CheckResult triple_psi(const MuMarkoffMap& m, const Triangle& v, double tol);

} // namespace markoff
