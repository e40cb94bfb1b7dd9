// Test-only mesh validators and independent oracles.
#pragma once

#include "gradcert/sphere_complex.hpp"

#include <array>
#include <cmath>
#include <map>
#include <set>
#include <vector>

namespace testutil {

using gradcert::SphereComplex;

/// Every (n-2)-face of an alive top cell must bound exactly two top cells.
inline bool is_closed_manifold(const SphereComplex& mesh) {
    const int n = mesh.n;
    std::map<std::vector<std::int32_t>, int> coface_count;
    for (const auto& c : mesh.cells) {
        if (!c.alive) continue;
        for (int drop = 0; drop < n; ++drop) {
            std::vector<std::int32_t> face;
            for (int a = 0; a < n; ++a)
                if (a != drop) face.push_back(c.v[a]);
            std::sort(face.begin(), face.end());
            coface_count[face] += 1;
        }
    }
    for (const auto& [face, count] : coface_count)
        if (count != 2) return false;
    return true;
}

/// Alternating face count of the full alive complex.
inline long long full_euler_characteristic(const SphereComplex& mesh) {
    const int n = mesh.n;
    std::vector<std::set<std::vector<std::int32_t>>> faces(n);
    for (const auto& c : mesh.cells) {
        if (!c.alive) continue;
        for (int mask = 1; mask < (1 << n); ++mask) {
            std::vector<std::int32_t> face;
            for (int a = 0; a < n; ++a)
                if (mask & (1 << a)) face.push_back(c.v[a]);
            std::sort(face.begin(), face.end());
            faces[face.size() - 1].insert(std::move(face));
        }
    }
    long long chi = 0;
    for (int k = 0; k < n; ++k)
        chi += (k % 2 == 0 ? 1 : -1) * static_cast<long long>(faces[k].size());
    return chi;
}

inline std::size_t alive_cell_count(const SphereComplex& mesh) {
    std::size_t k = 0;
    for (const auto& c : mesh.cells)
        if (c.alive) ++k;
    return k;
}

/// Exact arc analysis for a product of pairwise non-proportional linear
/// forms a_i x + b_i y: counts the arcs of {p < 0} on the unit circle.
inline int negative_arc_count(const std::vector<std::array<double, 2>>& forms) {
    std::vector<double> cuts;
    for (const auto& [a, b] : forms) {
        double t = std::atan2(-a, b);  // a cos t + b sin t = 0
        if (t < 0) t += M_PI;
        cuts.push_back(t);
        cuts.push_back(t + M_PI);
    }
    std::sort(cuts.begin(), cuts.end());
    auto value = [&](double t) {
        double v = 1.0;
        for (const auto& [a, b] : forms) v *= a * std::cos(t) + b * std::sin(t);
        return v;
    };
    int neg = 0;
    const std::size_t m = cuts.size();
    for (std::size_t i = 0; i < m; ++i) {
        const double next = (i + 1 < m) ? cuts[i + 1] : cuts[0] + 2 * M_PI;
        if (value(0.5 * (cuts[i] + next)) < 0) ++neg;
    }
    return neg;
}

} // namespace testutil
