#include "markoff/farey.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace markoff {

namespace {

using i128 = __int128;

// p_a q_b - p_b q_a; sign(d(a,b)) = sign(a - b) for finite fractions, and
// d(inf, b) > 0 for finite b, so the induced order puts infinity on top.
i128 det(const FareyFraction& a, const FareyFraction& b) {
    return i128(a.p) * b.q - i128(b.p) * a.q;
}

int sgn(i128 v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

} // namespace

FareyFraction FareyFraction::make(long long p, long long q) {
    if (p == 0 && q == 0) throw DomainError("FareyFraction: 0/0");
    if (q < 0) { p = -p; q = -q; }
    if (q == 0) return {1, 0};
    long long g = std::gcd(p < 0 ? -p : p, q);
    return {p / g, q / g};
}

double FareyFraction::value() const {
    if (q == 0) return std::numeric_limits<double>::infinity();
    return double(p) / double(q);
}

int compare(const FareyFraction& a, const FareyFraction& b) {
    if (a.is_infinity() && b.is_infinity()) return 0;
    if (a.is_infinity()) return 1;
    if (b.is_infinity()) return -1;
    return sgn(det(a, b));
}

bool less(const FareyFraction& a, const FareyFraction& b) { return compare(a, b) < 0; }

long long fib(const FareyFraction& r) { return (r.p < 0 ? -r.p : r.p) + r.q; }

bool farey_neighbors(const FareyFraction& a, const FareyFraction& b) {
    i128 d = det(a, b);
    return d == 1 || d == -1;
}

FareyFraction mediant(const FareyFraction& a, const FareyFraction& b) {
    if (!farey_neighbors(a, b))
        throw PreconditionError("mediant: arguments are not Farey neighbors");
    return FareyFraction::make(a.p + b.p, a.q + b.q);
}

bool ccw(const FareyFraction& a, const FareyFraction& b, const FareyFraction& c) {
    int s1 = sgn(det(b, a));
    int s2 = sgn(det(c, b));
    int s3 = sgn(det(c, a));
    return s1 * s2 * s3 > 0;
}

TreeEdge TreeEdge::make(const FareyFraction& x, const FareyFraction& y) {
    if (!farey_neighbors(x, y))
        throw PreconditionError("TreeEdge: endpoints are not Farey neighbors");
    if (compare(x, y) < 0) return {x, y};
    return {y, x};
}

std::pair<FareyFraction, FareyFraction> triangle_completions(const TreeEdge& e) {
    FareyFraction m = FareyFraction::make(e.a.p + e.b.p, e.a.q + e.b.q);
    FareyFraction d = FareyFraction::make(e.a.p - e.b.p, e.a.q - e.b.q);
    return {m, d};
}

DirectedEdge DirectedEdge::make(const TreeEdge& e, const FareyFraction& head) {
    auto [m, d] = triangle_completions(e);
    if (!(head == m || head == d))
        throw PreconditionError("DirectedEdge: head is not a completion of the edge");
    return {e, head};
}

FareyFraction DirectedEdge::tail() const {
    auto [m, d] = triangle_completions(edge);
    return head == m ? d : m;
}

DirectedEdge DirectedEdge::reversed() const { return {edge, tail()}; }

Triangle Triangle::make(const FareyFraction& x, const FareyFraction& y,
                        const FareyFraction& z) {
    std::array<FareyFraction, 3> r{x, y, z};
    std::sort(r.begin(), r.end(), less);
    if (!farey_neighbors(r[0], r[1]) || !farey_neighbors(r[0], r[2]) ||
        !farey_neighbors(r[1], r[2]))
        throw PreconditionError("Triangle: vertices are not pairwise neighbors");
    return {r};
}

Triangle base_triangle() {
    return Triangle::make({0, 1}, {1, 1}, FareyFraction::infinity());
}

namespace {

bool is_vertex_of(const Triangle& t, const FareyFraction& r) {
    return t.r[0] == r || t.r[1] == r || t.r[2] == r;
}

// Index (0..2) of the unique triangle edge separating r from the triangle,
// i.e. r lies in the arc cut off by that edge away from the third vertex.
// Edges in sorted-vertex order: 0:{r0,r1} 1:{r0,r2} 2:{r1,r2}.
int separating_edge(const Triangle& t, const FareyFraction& r) {
    static constexpr int opp[3] = {2, 1, 0}; // third-vertex index per edge
    static constexpr int ends[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (int e = 0; e < 3; ++e) {
        const FareyFraction& a = t.r[ends[e][0]];
        const FareyFraction& b = t.r[ends[e][1]];
        const FareyFraction& c = t.r[opp[e]];
        // same side test: r and c in the same component of S^1 \ {a,b}?
        Arc one{a, b, false};
        bool r_in = one.contains(r);
        bool c_in = one.contains(c);
        if (r_in != c_in) return e;
    }
    throw Error("separating_edge: target is a vertex of the triangle");
}

Triangle cross(const Triangle& t, int e, FareyFraction& dropped) {
    static constexpr int opp[3] = {2, 1, 0};
    static constexpr int ends[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    const FareyFraction a = t.r[ends[e][0]];
    const FareyFraction b = t.r[ends[e][1]];
    dropped = t.r[opp[e]];
    auto [m, d] = triangle_completions(TreeEdge::make(a, b));
    FareyFraction gained = (dropped == m) ? d : m;
    return Triangle::make(a, b, gained);
}

} // namespace

bool Arc::contains(const FareyFraction& r) const {
    if (full) return true;
    return ccw(from, r, to);
}

std::vector<std::uint8_t> stern_brocot_path(const FareyFraction& r) {
    std::vector<std::uint8_t> moves;
    Triangle t = base_triangle();
    if (is_vertex_of(t, r)) return moves;

    FareyFraction kept_lo{}, kept_hi{};
    {
        int e = separating_edge(t, r);
        moves.push_back(static_cast<std::uint8_t>(e));
        FareyFraction dropped;
        Triangle next = cross(t, e, dropped);
        static constexpr int ends[3][2] = {{0, 1}, {0, 2}, {1, 2}};
        kept_lo = t.r[ends[e][0]];
        kept_hi = t.r[ends[e][1]];
        t = next;
    }
    while (!is_vertex_of(t, r)) {
        int e = separating_edge(t, r);
        FareyFraction dropped;
        Triangle next = cross(t, e, dropped);
        // dropped is one of the previously kept pair; 0 keeps the smaller.
        moves.push_back(dropped == kept_hi ? 0 : 1);
        FareyFraction gained;
        for (const auto& v : t.r)
            if (!(v == dropped) && !(v == kept_lo) && !(v == kept_hi)) gained = v;
        FareyFraction kept_old = (dropped == kept_hi) ? kept_lo : kept_hi;
        if (less(kept_old, gained)) { kept_lo = kept_old; kept_hi = gained; }
        else { kept_lo = gained; kept_hi = kept_old; }
        t = next;
    }
    return moves;
}

Triangle replay_path(std::span<const std::uint8_t> moves) {
    Triangle t = base_triangle();
    if (moves.empty()) return t;

    FareyFraction kept_lo, kept_hi;
    {
        int e = moves[0];
        if (e < 0 || e > 2) throw PreconditionError("replay_path: bad first move");
        static constexpr int ends[3][2] = {{0, 1}, {0, 2}, {1, 2}};
        kept_lo = t.r[ends[e][0]];
        kept_hi = t.r[ends[e][1]];
        FareyFraction dropped;
        t = cross(t, e, dropped);
    }
    for (std::size_t i = 1; i < moves.size(); ++i) {
        FareyFraction gained;
        for (const auto& v : t.r)
            if (!(v == kept_lo) && !(v == kept_hi)) gained = v;
        FareyFraction keep = moves[i] == 0 ? kept_lo : kept_hi;
        FareyFraction lo = less(keep, gained) ? keep : gained;
        FareyFraction hi = less(keep, gained) ? gained : keep;
        // cross the edge {keep, gained}
        int e = -1;
        static constexpr int ends[3][2] = {{0, 1}, {0, 2}, {1, 2}};
        for (int k = 0; k < 3; ++k)
            if (t.r[ends[k][0]] == lo && t.r[ends[k][1]] == hi) e = k;
        if (e < 0) throw Error("replay_path: internal edge lookup failed");
        FareyFraction dropped;
        t = cross(t, e, dropped);
        kept_lo = lo;
        kept_hi = hi;
    }
    return t;
}

std::vector<FareyFraction> regions_at_level(long long n, const Arc& window) {
    std::vector<FareyFraction> out;
    if (n < 1) return out;
    if (n == 1) {
        for (FareyFraction cand : {FareyFraction{0, 1}, FareyFraction::infinity()})
            if (window.contains(cand)) out.push_back(cand);
    } else {
        for (long long q = 1; q < n; ++q) {
            long long p = n - q;
            if (std::gcd(p, q) != 1) continue;
            for (long long sp : {p, -p}) {
                FareyFraction cand{sp, q};
                if (window.contains(cand)) out.push_back(cand);
            }
        }
    }
    std::sort(out.begin(), out.end(), less);
    return out;
}

SubtreeSpec SubtreeSpec::vertex(const Triangle& t) { return {{}, t}; }

SubtreeSpec SubtreeSpec::from_edges(std::vector<TreeEdge> edges) {
    if (edges.empty())
        throw PreconditionError("SubtreeSpec: empty edge set without a vertex");
    return {std::move(edges), std::nullopt};
}

namespace {

std::pair<Triangle, Triangle> edge_endpoints(const TreeEdge& e) {
    auto [m, d] = triangle_completions(e);
    return {Triangle::make(e.a, e.b, m), Triangle::make(e.a, e.b, d)};
}

struct TriLess {
    bool operator()(const Triangle& x, const Triangle& y) const {
        for (int i = 0; i < 3; ++i) {
            int c = compare(x.r[i], y.r[i]);
            if (c != 0) return c < 0;
        }
        return false;
    }
};

struct EdgeLess {
    bool operator()(const TreeEdge& x, const TreeEdge& y) const {
        int c = compare(x.a, y.a);
        if (c != 0) return c < 0;
        return compare(x.b, y.b) < 0;
    }
};

} // namespace

std::vector<Triangle> SubtreeSpec::vertices() const {
    std::set<Triangle, TriLess> vs;
    if (single_vertex) vs.insert(*single_vertex);
    for (const auto& e : edges) {
        auto [u, v] = edge_endpoints(e);
        vs.insert(u);
        vs.insert(v);
    }
    return {vs.begin(), vs.end()};
}

std::vector<DirectedEdge> circular_set(const SubtreeSpec& t) {
    if (t.edges.empty() && !t.single_vertex)
        throw PreconditionError("circular_set: empty subtree");

    std::set<TreeEdge, EdgeLess> in_tree(t.edges.begin(), t.edges.end());
    auto verts = t.vertices();

    // connectivity: grow from the first vertex through tree edges
    if (!t.edges.empty()) {
        std::map<Triangle, std::vector<Triangle>, TriLess> adj;
        for (const auto& e : t.edges) {
            auto [u, v] = edge_endpoints(e);
            adj[u].push_back(v);
            adj[v].push_back(u);
        }
        std::set<Triangle, TriLess> seen;
        std::vector<Triangle> stack{verts.front()};
        while (!stack.empty()) {
            Triangle v = stack.back();
            stack.pop_back();
            if (!seen.insert(v).second) continue;
            for (const auto& w : adj[v]) stack.push_back(w);
        }
        if (seen.size() != verts.size())
            throw PreconditionError("circular_set: subtree is not connected");
    }

    std::vector<DirectedEdge> out;
    for (const auto& v : verts) {
        static constexpr int ends[3][2] = {{0, 1}, {0, 2}, {1, 2}};
        static constexpr int opp[3] = {2, 1, 0};
        for (int k = 0; k < 3; ++k) {
            TreeEdge e = TreeEdge::make(v.r[ends[k][0]], v.r[ends[k][1]]);
            if (in_tree.count(e)) continue;
            out.push_back(DirectedEdge::make(e, v.r[opp[k]]));
        }
    }
    std::sort(out.begin(), out.end(), [](const DirectedEdge& x, const DirectedEdge& y) {
        int c = compare(x.edge.a, y.edge.a);
        if (c != 0) return c < 0;
        c = compare(x.edge.b, y.edge.b);
        if (c != 0) return c < 0;
        return compare(x.head, y.head) < 0;
    });
    return out;
}

Arc tail_interval(const DirectedEdge& e) {
    FareyFraction t = e.tail();
    Arc fwd{e.edge.a, e.edge.b, false};
    if (fwd.contains(t)) return fwd;
    return Arc{e.edge.b, e.edge.a, false};
}

} // namespace markoff
