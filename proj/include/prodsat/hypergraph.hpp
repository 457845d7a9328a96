#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "prodsat/error.hpp"

namespace prodsat {

struct WeightedHypergraph {
    std::vector<int> weights;
    std::vector<std::vector<int>> edges;

    std::size_t vertex_count() const { return weights.size(); }
    std::size_t edge_count() const { return edges.size(); }

    void validate() const {
        for (int w : weights)
            if (w < 0) throw InputError("hypergraph: negative vertex weight");
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const auto& e = edges[i];
            if (e.empty()) throw InputError("hypergraph: edge " + std::to_string(i) + " is empty");
            std::vector<int> s(e);
            std::sort(s.begin(), s.end());
            if (std::adjacent_find(s.begin(), s.end()) != s.end())
                throw InputError("hypergraph: edge " + std::to_string(i) + " repeats a vertex");
            if (s.front() < 0 || s.back() >= static_cast<int>(weights.size()))
                throw InputError("hypergraph: edge " + std::to_string(i) + " has a vertex out of range");
        }
    }

    std::vector<int> degrees() const {
        std::vector<int> deg(weights.size(), 0);
        for (const auto& e : edges)
            for (int v : e) ++deg[v];
        return deg;
    }

    // |S|_w for a vertex set.
    long long weight_of(const std::vector<int>& vs) const {
        long long s = 0;
        for (int v : vs) s += weights[v];
        return s;
    }
};

// assignment[i] is the representative vertex of edge i.
struct Wsdr {
    std::vector<int> assignment;
};

struct HallViolation {
    std::vector<int> edge_subset;
    long long witness_size = 0;  // |V_X|_w
};

using WsdrResult = std::variant<Wsdr, HallViolation>;

inline bool is_valid_wsdr(const WeightedHypergraph& h, const Wsdr& f) {
    if (f.assignment.size() != h.edge_count()) return false;
    std::vector<long long> load(h.vertex_count(), 0);
    for (std::size_t i = 0; i < h.edges.size(); ++i) {
        int v = f.assignment[i];
        if (std::find(h.edges[i].begin(), h.edges[i].end(), v) == h.edges[i].end()) return false;
        if (++load[v] > h.weights[v]) return false;
    }
    return true;
}

inline std::vector<int> vertices_of(const WeightedHypergraph& h, const std::vector<int>& edge_subset) {
    std::vector<int> vs;
    for (int i : edge_subset) vs.insert(vs.end(), h.edges[i].begin(), h.edges[i].end());
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    return vs;
}

inline bool is_valid_hall_violation(const WeightedHypergraph& h, const HallViolation& hv) {
    std::vector<int> x(hv.edge_subset);
    std::sort(x.begin(), x.end());
    if (std::adjacent_find(x.begin(), x.end()) != x.end()) return false;
    for (int i : x)
        if (i < 0 || i >= static_cast<int>(h.edge_count())) return false;
    long long w = h.weight_of(vertices_of(h, x));
    return w == hv.witness_size && w < static_cast<long long>(x.size());
}

// Capacitated bipartite matching (edges against w(v) copies of each vertex),
// grown one edge at a time with BFS augmenting paths.
inline WsdrResult find_wsdr(const WeightedHypergraph& h) {
    h.validate();
    const std::size_t m = h.edge_count(), n = h.vertex_count();
    std::vector<int> assign(m, -1);
    std::vector<std::vector<int>> held(n);

    std::vector<int> vert_parent(n), edge_parent(m);
    std::vector<char> vert_seen(n), edge_seen(m);

    for (std::size_t root = 0; root < m; ++root) {
        std::fill(vert_seen.begin(), vert_seen.end(), 0);
        std::fill(edge_seen.begin(), edge_seen.end(), 0);
        std::deque<int> queue{static_cast<int>(root)};
        edge_seen[root] = 1;
        edge_parent[root] = -1;
        int free_vertex = -1;
        while (!queue.empty() && free_vertex < 0) {
            int e = queue.front();
            queue.pop_front();
            for (int v : h.edges[e]) {
                if (vert_seen[v]) continue;
                vert_seen[v] = 1;
                vert_parent[v] = e;
                if (static_cast<int>(held[v].size()) < h.weights[v]) {
                    free_vertex = v;
                    break;
                }
                for (int e2 : held[v]) {
                    if (edge_seen[e2]) continue;
                    edge_seen[e2] = 1;
                    edge_parent[e2] = v;
                    queue.push_back(e2);
                }
            }
        }
        if (free_vertex < 0) {
            HallViolation hv;
            for (std::size_t e = 0; e < m; ++e)
                if (edge_seen[e]) hv.edge_subset.push_back(static_cast<int>(e));
            hv.witness_size = h.weight_of(vertices_of(h, hv.edge_subset));
            return hv;
        }
        // Shift representatives back along the path.
        int v = free_vertex;
        while (true) {
            int e = vert_parent[v];
            int old = assign[e];
            if (old >= 0) {
                auto& lst = held[old];
                lst.erase(std::find(lst.begin(), lst.end(), e));
            }
            assign[e] = v;
            held[v].push_back(e);
            if (edge_parent[e] < 0) break;
            v = edge_parent[e];
        }
    }
    return Wsdr{assign};
}

inline bool has_wsdr(const WeightedHypergraph& h) {
    return std::holds_alternative<Wsdr>(find_wsdr(h));
}

// Exhaustive count of edge -> vertex maps respecting capacities.
inline std::uint64_t count_wsdr_bruteforce(const WeightedHypergraph& h, std::uint64_t cap = 50'000'000) {
    h.validate();
    std::uint64_t space = 1;
    for (const auto& e : h.edges) {
        if (space > cap / e.size()) throw Refusal("count_wsdr_bruteforce: search space exceeds cap " + std::to_string(cap));
        space *= e.size();
    }
    std::vector<int> load(h.vertex_count(), 0);
    std::uint64_t count = 0;
    auto rec = [&](auto&& self, std::size_t i) -> void {
        if (i == h.edge_count()) {
            ++count;
            return;
        }
        for (int v : h.edges[i]) {
            if (load[v] >= h.weights[v]) continue;
            ++load[v];
            self(self, i + 1);
            --load[v];
        }
    };
    rec(rec, 0);
    return count;
}

// Vertex (v1, v2) has index v1 * |V2| + v2. Edges: {v1} x E2 for every v1,
// then E1 x {v2} for every v2.
inline WeightedHypergraph cartesian_product(const WeightedHypergraph& h1, const WeightedHypergraph& h2) {
    h1.validate();
    h2.validate();
    const int n1 = static_cast<int>(h1.vertex_count()), n2 = static_cast<int>(h2.vertex_count());
    WeightedHypergraph p;
    p.weights.resize(static_cast<std::size_t>(n1) * n2);
    for (int a = 0; a < n1; ++a)
        for (int b = 0; b < n2; ++b) p.weights[a * n2 + b] = h1.weights[a] + h2.weights[b];
    for (int a = 0; a < n1; ++a)
        for (const auto& e2 : h2.edges) {
            std::vector<int> e;
            for (int b : e2) e.push_back(a * n2 + b);
            p.edges.push_back(std::move(e));
        }
    for (int b = 0; b < n2; ++b)
        for (const auto& e1 : h1.edges) {
            std::vector<int> e;
            for (int a : e1) e.push_back(a * n2 + b);
            p.edges.push_back(std::move(e));
        }
    return p;
}

// The combined mapping f1 □ f2 in the edge order of cartesian_product.
inline Wsdr product_wsdr(const WeightedHypergraph& h1, const WeightedHypergraph& h2, const Wsdr& f1, const Wsdr& f2) {
    const int n1 = static_cast<int>(h1.vertex_count()), n2 = static_cast<int>(h2.vertex_count());
    Wsdr f;
    for (int a = 0; a < n1; ++a)
        for (std::size_t j = 0; j < h2.edge_count(); ++j) f.assignment.push_back(a * n2 + f2.assignment[j]);
    for (int b = 0; b < n2; ++b)
        for (std::size_t i = 0; i < h1.edge_count(); ++i) f.assignment.push_back(f1.assignment[i] * n2 + b);
    return f;
}

struct ExtendingOrder {
    std::vector<int> order;          // edge indices
    int non_extending_count = 0;     // a
    std::vector<int> added_vertex;   // per position: u_i, or -1 where V_i = V_{i-1}
};

// Fills added vertices and a for a given edge sequence. u_i is the lowest new vertex.
inline ExtendingOrder describe_order(const WeightedHypergraph& h, const std::vector<int>& seq) {
    ExtendingOrder o;
    o.order = seq;
    std::vector<char> seen(h.vertex_count(), 0);
    for (int e : seq) {
        int u = -1;
        for (int v : h.edges[e])
            if (!seen[v] && (u < 0 || v < u)) u = v;
        for (int v : h.edges[e]) seen[v] = 1;
        o.added_vertex.push_back(u);
        if (u < 0) ++o.non_extending_count;
    }
    return o;
}

inline bool is_valid_order(const WeightedHypergraph& h, const ExtendingOrder& o) {
    std::vector<int> p(o.order);
    std::sort(p.begin(), p.end());
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] != static_cast<int>(i)) return false;
    if (p.size() != h.edge_count() || o.added_vertex.size() != p.size()) return false;
    ExtendingOrder ref = describe_order(h, o.order);
    if (ref.non_extending_count != o.non_extending_count) return false;
    std::vector<char> seen(h.vertex_count(), 0);
    for (std::size_t i = 0; i < o.order.size(); ++i) {
        const auto& e = h.edges[o.order[i]];
        int u = o.added_vertex[i];
        if (u >= 0 && (seen[u] || std::find(e.begin(), e.end(), u) == e.end())) return false;
        if (u < 0 && ref.added_vertex[i] >= 0) return false;
        for (int v : e) seen[v] = 1;
    }
    return true;
}

namespace detail {

// Repeatedly removes the lowest-index active edge holding a degree-1 vertex.
// Returns the removal sequence; complete iff every active edge was removed.
inline std::vector<int> strip_degree_one(const WeightedHypergraph& h, std::vector<char> active, bool& complete) {
    std::vector<int> deg(h.vertex_count(), 0);
    std::size_t left = 0;
    for (std::size_t i = 0; i < h.edge_count(); ++i)
        if (active[i]) {
            ++left;
            for (int v : h.edges[i]) ++deg[v];
        }
    std::vector<int> removed;
    while (left > 0) {
        int pick = -1;
        for (std::size_t i = 0; i < h.edge_count() && pick < 0; ++i) {
            if (!active[i]) continue;
            for (int v : h.edges[i])
                if (deg[v] == 1) {
                    pick = static_cast<int>(i);
                    break;
                }
        }
        if (pick < 0) break;
        active[pick] = 0;
        --left;
        for (int v : h.edges[pick]) --deg[v];
        removed.push_back(pick);
    }
    complete = left == 0;
    return removed;
}

// Lexicographic next k-subset of {0..m-1}; false when exhausted.
inline bool next_subset(std::vector<int>& s, int m) {
    int k = static_cast<int>(s.size());
    for (int i = k - 1; i >= 0; --i) {
        if (s[i] < m - k + i) {
            ++s[i];
            for (int j = i + 1; j < k; ++j) s[j] = s[j - 1] + 1;
            return true;
        }
    }
    return false;
}

inline double binomial(int m, int k) {
    double r = 1;
    for (int i = 1; i <= k; ++i) r = r * (m - k + i) / i;
    return r;
}

} // namespace detail

// Greedy layering: strip edges with a degree-1 vertex from the back; when stuck,
// set the lowest-index remaining edge aside as non-extending. For small inputs,
// subsets of set-aside edges are searched exhaustively in increasing size so the
// reported a is minimal.
inline std::optional<ExtendingOrder> find_extending_order(const WeightedHypergraph& h, int a_max,
                                                          double exhaustive_budget = 20000) {
    h.validate();
    const int m = static_cast<int>(h.edge_count());

    std::vector<int> aside;
    std::vector<int> stripped;
    {
        std::vector<char> active(m, 1);
        while (true) {
            bool complete = false;
            auto part = detail::strip_degree_one(h, active, complete);
            for (int e : part) active[e] = 0;
            stripped.insert(stripped.end(), part.begin(), part.end());
            if (complete) break;
            int low = static_cast<int>(std::find(active.begin(), active.end(), 1) - active.begin());
            active[low] = 0;
            aside.push_back(low);
        }
    }
    auto assemble = [&](std::vector<int> strip_seq, const std::vector<int>& tail) {
        std::reverse(strip_seq.begin(), strip_seq.end());
        strip_seq.insert(strip_seq.end(), tail.begin(), tail.end());
        return describe_order(h, strip_seq);
    };
    ExtendingOrder best = assemble(stripped, aside);

    double spent = 0;
    for (int a = 0; a < best.non_extending_count && a <= a_max; ++a) {
        double cost = detail::binomial(m, a);
        if (spent + cost > exhaustive_budget) break;
        spent += cost;
        std::vector<int> subset(a);
        std::iota(subset.begin(), subset.end(), 0);
        bool found = false;
        do {
            std::vector<char> active(m, 1);
            for (int e : subset) active[e] = 0;
            bool complete = false;
            auto seq = detail::strip_degree_one(h, active, complete);
            if (complete) {
                ExtendingOrder cand = assemble(seq, subset);
                if (cand.non_extending_count < best.non_extending_count) best = cand;
                found = true;
            }
        } while (!found && detail::next_subset(subset, m));
        if (found) break;
    }
    if (best.non_extending_count > a_max) return std::nullopt;
    return best;
}

struct TransferFiltration {
    std::vector<int> foundation;   // R = V(G_0), sorted
    std::vector<int> order;        // edge indices, positions 1..m
    std::vector<int> layer_fn;     // layer_fn[i-1] = r(i) in 0..i-1
    int radius = 0;                // beta
    int transfer_type = 0;         // b = |R|
};

// r(i) is the least j with |e_i \ V(G_j)| = 1 (or <= 1 when e_i lies inside R).
inline TransferFiltration filtration_of_order(const WeightedHypergraph& h, const ExtendingOrder& o) {
    TransferFiltration f;
    f.order = o.order;
    const std::size_t m = o.order.size();
    std::vector<char> seen(h.vertex_count(), 0), in_r(h.vertex_count(), 0);
    for (std::size_t i = 0; i < m; ++i) {
        int u = o.added_vertex[i];
        for (int v : h.edges[o.order[i]])
            if (!seen[v] && v != u) in_r[v] = 1;
        for (int v : h.edges[o.order[i]]) seen[v] = 1;
    }
    for (std::size_t v = 0; v < h.vertex_count(); ++v)
        if (in_r[v]) f.foundation.push_back(static_cast<int>(v));
    f.transfer_type = static_cast<int>(f.foundation.size());

    // step[v] = first j with v in V(G_j).
    std::vector<int> step(h.vertex_count(), -1);
    for (int v : f.foundation) step[v] = 0;
    for (std::size_t i = 0; i < m; ++i)
        for (int v : h.edges[o.order[i]])
            if (step[v] < 0) step[v] = static_cast<int>(i) + 1;

    std::vector<int> depth(m + 1, 0);
    for (std::size_t i = 1; i <= m; ++i) {
        std::vector<int> s;
        for (int v : h.edges[o.order[i - 1]]) s.push_back(step[v]);
        std::sort(s.begin(), s.end());
        // |e_i \ V(G_j)| counts entries of s greater than j; it drops to 1 at j = s[k-2].
        int r = s.size() >= 2 ? s[s.size() - 2] : 0;
        f.layer_fn.push_back(r);
        depth[i] = depth[r] + 1;
        f.radius = std::max(f.radius, depth[i]);
    }
    return f;
}

} // namespace prodsat
