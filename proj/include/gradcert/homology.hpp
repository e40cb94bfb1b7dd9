#pragma once

#include "gradcert/sphere_complex.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace gradcert {

/// Mod-2 Betti numbers b0..b_{n-1} and Euler characteristic of a sign region.
struct HomologySummary {
    std::vector<long long> betti;
    long long euler = 0;
    bool stabilized = false;
    int depth_used = 0;
    bool empty = true;
    double radius = 0.0;
    long long mixed_cells = 0;  // uncertified cells left at this depth

    bool betti_equal(const HomologySummary& other) const { return betti == other.betti; }
    long long b(std::size_t i) const { return i < betti.size() ? betti[i] : 0; }
    bool has_higher_betti() const {
        for (std::size_t i = 1; i < betti.size(); ++i)
            if (betti[i] != 0) return true;
        return false;
    }
};

namespace detail {

struct UnionFind {
    std::vector<std::int32_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::int32_t find(std::int32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::int32_t a, std::int32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[b] = a;
    }
};

/// Rank over Z/2 of a sparse boundary matrix given as columns of row indices.
inline long long z2_rank(std::vector<std::vector<std::int32_t>> cols) {
    std::unordered_map<std::int32_t, std::int32_t> pivot_owner;
    long long rank = 0;
    std::vector<std::int32_t> merged;
    for (std::size_t j = 0; j < cols.size(); ++j) {
        auto& col = cols[j];
        while (!col.empty()) {
            const std::int32_t piv = col.back();
            auto it = pivot_owner.find(piv);
            if (it == pivot_owner.end()) {
                pivot_owner.emplace(piv, static_cast<std::int32_t>(j));
                ++rank;
                break;
            }
            // symmetric difference with the column owning this pivot
            const auto& other = cols[it->second];
            merged.clear();
            std::set_symmetric_difference(col.begin(), col.end(), other.begin(), other.end(),
                                          std::back_inserter(merged));
            col.swap(merged);
        }
    }
    return rank;
}

/// All faces of the NEG top cells, one vector per dimension, with
/// deterministic first-seen indexing. simplices[k] holds (k+1)-vertex tuples.
struct Subcomplex {
    int top_dim = 0;                                          // n-1
    std::vector<std::vector<std::array<std::int32_t, 4>>> simplices;
    std::vector<std::map<std::array<std::int32_t, 4>, std::int32_t>> index;

    std::int32_t intern(int dim, const std::array<std::int32_t, 4>& s) {
        auto [it, inserted] = index[dim].emplace(s, static_cast<std::int32_t>(simplices[dim].size()));
        if (inserted) simplices[dim].push_back(s);
        return it->second;
    }
};

inline Subcomplex build_neg_subcomplex(const SignRegion& region) {
    const int n = region.mesh.n;
    Subcomplex sub;
    sub.top_dim = n - 1;
    sub.simplices.resize(n);
    sub.index.resize(n);
    for (std::size_t i = 0; i < region.mesh.cells.size(); ++i) {
        if (!region.mesh.cells[i].alive || region.label[i] != CellLabel::Neg) continue;
        std::array<std::int32_t, 4> verts{-1, -1, -1, -1};
        for (int a = 0; a < n; ++a) verts[a] = region.mesh.cells[i].v[a];
        std::sort(verts.begin(), verts.begin() + n);
        // enumerate every non-empty subset as a face
        for (int mask = 1; mask < (1 << n); ++mask) {
            std::array<std::int32_t, 4> face{-1, -1, -1, -1};
            int k = 0;
            for (int a = 0; a < n; ++a)
                if (mask & (1 << a)) face[k++] = verts[a];
            sub.intern(k - 1, face);
        }
    }
    return sub;
}

inline HomologySummary summarize_subcomplex(const Subcomplex& sub, int n) {
    HomologySummary out;
    out.betti.assign(n, 0);
    const auto count = [&](int k) -> long long {
        return k <= sub.top_dim ? static_cast<long long>(sub.simplices[k].size()) : 0;
    };
    out.empty = count(sub.top_dim) == 0;
    long long euler = 0;
    for (int k = 0; k <= sub.top_dim; ++k) euler += (k % 2 == 0 ? 1 : -1) * count(k);
    out.euler = euler;
    if (out.empty) return out;

    // components of the 1-skeleton
    const long long V = count(0);
    UnionFind uf(static_cast<std::size_t>(V));
    std::map<std::int32_t, std::int32_t> vertex_index;
    for (std::int32_t i = 0; i < V; ++i) vertex_index[sub.simplices[0][i][0]] = i;
    for (const auto& e : sub.simplices[1])
        uf.unite(vertex_index.at(e[0]), vertex_index.at(e[1]));
    long long components = 0;
    for (std::int32_t i = 0; i < V; ++i)
        if (uf.find(i) == i) ++components;

    // boundary ranks: rank d1 from the component count, higher ones by
    // sparse Z/2 elimination
    std::vector<long long> rank(sub.top_dim + 2, 0);
    rank[1] = V - components;
    for (int k = 2; k <= sub.top_dim; ++k) {
        std::vector<std::vector<std::int32_t>> cols;
        cols.reserve(sub.simplices[k].size());
        for (const auto& s : sub.simplices[k]) {
            std::vector<std::int32_t> col;
            col.reserve(k + 1);
            for (int drop = 0; drop <= k; ++drop) {
                std::array<std::int32_t, 4> face{-1, -1, -1, -1};
                int w = 0;
                for (int a = 0; a <= k; ++a)
                    if (a != drop) face[w++] = s[a];
                col.push_back(sub.index[k - 1].at(face));
            }
            std::sort(col.begin(), col.end());
            cols.push_back(std::move(col));
        }
        rank[k] = z2_rank(std::move(cols));
    }

    out.betti[0] = components;
    for (int k = 1; k <= sub.top_dim; ++k)
        out.betti[k] = (count(k) - rank[k]) - rank[k + 1];

    long long alt = 0;
    for (int k = 0; k < n; ++k) alt += (k % 2 == 0 ? 1 : -1) * out.betti[k];
    if (alt != out.euler)
        throw std::runtime_error("internal error: Euler characteristic mismatch");
    return out;
}

} // namespace detail

/**
 * Betti numbers (mod 2) and Euler characteristic of the closed subcomplex of
 * NEG-certified cells. b0 comes from union-find on the 1-skeleton, higher
 * Betti numbers from Z/2 ranks of the boundary matrices.
 */
inline HomologySummary homology_summary(const SignRegion& region) {
    auto sub = detail::build_neg_subcomplex(region);
    HomologySummary out = detail::summarize_subcomplex(sub, region.mesh.n);
    out.depth_used = region.depth;
    out.radius = region.mesh.radius;
    out.mixed_cells = static_cast<long long>(region.count_label(CellLabel::Mixed));
    return out;
}

/// Per-radius refinement trail, for diagnostics.
struct StabilizationTrace {
    struct PerRadius {
        double radius = 0.0;
        std::vector<HomologySummary> by_depth;
    };
    std::vector<PerRadius> radii;
};

/**
 * Refines {p < 0} on each sphere until the Betti vector repeats at two
 * consecutive depths, then walks the radii until two consecutive radii agree
 * as well. A single radius only needs the depth agreement. Non-stabilization
 * is reported through the flag, never as an error.
 */
inline HomologySummary stabilized_invariants(const Polynomial& p, int n,
                                             const std::vector<double>& radii, int max_depth,
                                             StabilizationTrace* trace = nullptr) {
    if (radii.empty()) throw std::invalid_argument("need at least one radius");
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (!(radii[i] < radii[i - 1]))
            throw std::invalid_argument("radii must be strictly decreasing");

    HomologySummary last;
    bool have_prev_radius = false;
    HomologySummary prev_radius;

    for (double r : radii) {
        SignRegion region = make_sign_region(build_complex(n, r), p);
        HomologySummary current;
        HomologySummary prev_depth;
        int streak = 0;  // consecutive depths with an unchanged Betti vector
        if (trace) trace->radii.push_back({r, {}});
        for (int depth = 1; depth <= max_depth; ++depth) {
            region.refine_one_level();
            current = homology_summary(region);
            if (trace) trace->radii.back().by_depth.push_back(current);
            // an empty region with uncertified cells left has not converged,
            // no matter how often it repeats
            const bool claimable = !(current.empty && current.mixed_cells > 0);
            streak = (streak > 0 && current.betti_equal(prev_depth)) ? streak + 1 : 1;
            if (claimable && streak >= 3) {
                current.stabilized = true;
                break;
            }
            prev_depth = current;
        }
        last = current;
        if (radii.size() == 1) return last;
        if (have_prev_radius && prev_radius.stabilized && current.stabilized &&
            current.betti_equal(prev_radius)) {
            return current;
        }
        prev_radius = current;
        have_prev_radius = true;
    }
    last.stabilized = false;
    return last;
}

} // namespace gradcert
