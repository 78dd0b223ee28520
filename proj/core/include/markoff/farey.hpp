#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "markoff/errors.hpp"

namespace markoff {

/// Region index p/q of the Farey tessellation, always in lowest terms with
/// q >= 0.  The region at infinity is encoded as 1/0.
struct FareyFraction {
    long long p{0};
    long long q{1};

    static FareyFraction make(long long p, long long q);
    static FareyFraction infinity() { return {1, 0}; }

    bool is_infinity() const { return q == 0; }
    double value() const; // +inf for 1/0; for plots and sort keys only

    friend bool operator==(const FareyFraction&, const FareyFraction&) = default;
};

/// -1/0/+1 with the total order that places 1/0 above every finite fraction.
/// Exact integer arithmetic; never divides.
int compare(const FareyFraction& a, const FareyFraction& b);
bool less(const FareyFraction& a, const FareyFraction& b);

/// F(X_{p/q}) = |p| + |q|.
long long fib(const FareyFraction& r);

/// |p a q b' - p b' q a| = 1.
bool farey_neighbors(const FareyFraction& a, const FareyFraction& b);

/// Mediant (p_a+p_b)/(q_a+q_b); precondition: Farey neighbors.
FareyFraction mediant(const FareyFraction& a, const FareyFraction& b);

/// Counterclockwise cyclic order of three distinct points on R u {inf},
/// where counterclockwise means increasing reals closing up through inf.
bool ccw(const FareyFraction& a, const FareyFraction& b, const FareyFraction& c);

/// An undirected edge of the dual tree: an unordered Farey-neighbor pair,
/// stored with a < b.
struct TreeEdge {
    FareyFraction a, b;
    static TreeEdge make(const FareyFraction& x, const FareyFraction& y);
    friend bool operator==(const TreeEdge&, const TreeEdge&) = default;
};

/// The two regions completing {a,b} to Farey triangles: the mediant and the
/// normalized difference (p_a-p_b)/(q_a-q_b).
std::pair<FareyFraction, FareyFraction> triangle_completions(const TreeEdge& e);

/// An edge together with the completion region on the head side.
struct DirectedEdge {
    TreeEdge edge;
    FareyFraction head;

    static DirectedEdge make(const TreeEdge& e, const FareyFraction& head);
    FareyFraction tail() const;
    DirectedEdge reversed() const;
    friend bool operator==(const DirectedEdge&, const DirectedEdge&) = default;
};

/// A vertex of the dual tree, i.e. a Farey triangle; stored sorted.
struct Triangle {
    std::array<FareyFraction, 3> r;
    static Triangle make(const FareyFraction& x, const FareyFraction& y,
                         const FareyFraction& z);
    friend bool operator==(const Triangle&, const Triangle&) = default;
};

Triangle base_triangle(); // (0/1, 1/1, 1/0)

/// Canonical walk from the base triangle to the first triangle containing r.
/// The first move picks one of the three base edges (codes 0..2, edges in
/// sorted-vertex order); each later move is 0 (keep the smaller retained
/// vertex) or 1 (keep the larger).  Base regions yield the empty path.
std::vector<std::uint8_t> stern_brocot_path(const FareyFraction& r);
Triangle replay_path(std::span<const std::uint8_t> moves);

/// Open arc of the circle from `from` to `to` counterclockwise; `full` is the
/// whole circle.  The orientation bit is the pair order, so arcs through
/// infinity are just (a, b) with b < a.
struct Arc {
    FareyFraction from, to;
    bool full{false};

    static Arc whole() { return {{}, {}, true}; }
    bool contains(const FareyFraction& r) const;
};

/// All regions with fib = n inside the window, ascending.
std::vector<FareyFraction> regions_at_level(long long n, const Arc& window);

/// A finite connected subtree: edge list, or a single designated triangle
/// when the subtree is one vertex.
struct SubtreeSpec {
    std::vector<TreeEdge> edges;
    std::optional<Triangle> single_vertex;

    static SubtreeSpec vertex(const Triangle& t);
    static SubtreeSpec from_edges(std::vector<TreeEdge> edges);
    std::vector<Triangle> vertices() const;
};

/// C(T): directed edges meeting the subtree exactly at their head vertex.
/// Sorted deterministically.
std::vector<DirectedEdge> circular_set(const SubtreeSpec& t);

/// The open arc I^-(e) spanned by the tail side of a directed edge.
Arc tail_interval(const DirectedEdge& e);

struct FareyFractionHash {
    std::size_t operator()(const FareyFraction& f) const {
        std::size_t h1 = std::hash<long long>{}(f.p);
        std::size_t h2 = std::hash<long long>{}(f.q);
        return h1 ^ (h2 + 0x9e3779b97f4a7c15ull + (h1 << 6) + (h1 >> 2));
    }
};

} // namespace markoff
