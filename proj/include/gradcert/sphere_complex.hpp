#pragma once

#include "gradcert/parallel.hpp"
#include "gradcert/polynomial.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace gradcert {

/**
 * Simplicial sphere S^{n-1} of a given radius, 2 <= n <= 4.
 *
 * The base mesh is the boundary of the n-dimensional cross-polytope; cells
 * are refined by tagged-simplex bisection with compatibility closure, so the
 * complex stays a combinatorial closed manifold at every stage. Cell vertex
 * order carries the bisection tag, so it must not be permuted in place.
 */
struct SphereComplex {
    struct Cell {
        std::array<std::int32_t, 4> v{};  // first n entries used
        std::int32_t gen = 0;             // bisections since the base mesh
        std::int32_t parent = -1;
        std::int16_t tag = 1;             // refinement edge is (v[0], v[tag])
        bool alive = true;
    };

    int n = 0;
    double radius = 0.0;
    std::vector<double> coords;  // n doubles per vertex
    std::vector<Cell> cells;
    std::unordered_map<std::uint64_t, std::vector<std::int32_t>> edge_cells;
    std::unordered_map<std::uint64_t, std::int32_t> edge_midpoint;

    static std::uint64_t edge_key(std::int32_t a, std::int32_t b) {
        if (a > b) std::swap(a, b);
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
               static_cast<std::uint32_t>(b);
    }

    std::int32_t vertex_count() const { return static_cast<std::int32_t>(coords.size() / n); }
    const double* vertex(std::int32_t i) const { return &coords[static_cast<std::size_t>(i) * n]; }

    std::int32_t add_vertex(const double* x) {
        coords.insert(coords.end(), x, x + n);
        return vertex_count() - 1;
    }

    std::uint64_t refinement_edge(const Cell& c) const { return edge_key(c.v[0], c.v[c.tag]); }

    void register_cell_edges(std::int32_t id) {
        const Cell& c = cells[id];
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                edge_cells[edge_key(c.v[a], c.v[b])].push_back(id);
    }

    std::vector<std::int32_t> alive_cells_with_edge(std::uint64_t key) const {
        std::vector<std::int32_t> out;
        auto it = edge_cells.find(key);
        if (it == edge_cells.end()) return out;
        for (std::int32_t id : it->second)
            if (cells[id].alive) out.push_back(id);
        return out;
    }

    /// Midpoint of edge (a,b) reprojected onto the sphere. Deduplicated.
    std::int32_t midpoint_vertex(std::int32_t a, std::int32_t b) {
        const std::uint64_t key = edge_key(a, b);
        auto it = edge_midpoint.find(key);
        if (it != edge_midpoint.end()) return it->second;
        const double* pa = vertex(a);
        const double* pb = vertex(b);
        double m[4];
        double norm = 0.0;
        for (int j = 0; j < n; ++j) {
            m[j] = pa[j] + pb[j];
            norm += m[j] * m[j];
        }
        norm = std::sqrt(norm);
        for (int j = 0; j < n; ++j) m[j] = radius * m[j] / norm;
        const std::int32_t id = add_vertex(m);
        edge_midpoint.emplace(key, id);
        return id;
    }

    /// Splits every alive cell whose refinement edge equals `key` (they must
    /// all designate it, see make_compatible_and_bisect). on_child(parent,
    /// child) runs after each child is registered.
    template <typename OnChild>
    void bisect_edge_star(std::uint64_t key, OnChild&& on_child) {
        const auto star = alive_cells_with_edge(key);
        if (star.empty()) return;
        const std::int32_t a = static_cast<std::int32_t>(key >> 32);
        const std::int32_t b = static_cast<std::int32_t>(key & 0xffffffffu);
        const std::int32_t z = midpoint_vertex(a, b);

        const int m = n - 1;  // simplex dimension
        for (std::int32_t id : star) {
            const Cell parent = cells[id];
            const int k = parent.tag;
            cells[id].alive = false;

            Cell c1, c2;
            for (int j = 0; j < n; ++j) c1.v[j] = parent.v[j];
            c1.v[k] = z;
            for (int j = 0; j < k; ++j) c2.v[j] = parent.v[j + 1];
            c2.v[k] = z;
            for (int j = k + 1; j < n; ++j) c2.v[j] = parent.v[j];

            const std::int16_t child_tag = static_cast<std::int16_t>(k - 1 >= 1 ? k - 1 : m);
            for (Cell* child : {&c1, &c2}) {
                child->tag = child_tag;
                child->gen = parent.gen + 1;
                child->parent = id;
                child->alive = true;
                const std::int32_t cid = static_cast<std::int32_t>(cells.size());
                cells.push_back(*child);
                register_cell_edges(cid);
                on_child(id, cid);
            }
        }
    }

    /// Maubach compatibility closure: neighbours sharing this cell's
    /// refinement edge are bisected first until the whole star agrees, so
    /// the complex never acquires hanging vertices.
    template <typename OnChild>
    void make_compatible_and_bisect(std::int32_t id, OnChild&& on_child, int guard = 0) {
        if (guard > 64) throw std::runtime_error("bisection compatibility recursion exceeded");
        if (!cells[id].alive) return;
        const std::uint64_t e = refinement_edge(cells[id]);
        for (int round = 0; round < 64; ++round) {
            bool all_match = true;
            for (std::int32_t t : alive_cells_with_edge(e)) {
                if (refinement_edge(cells[t]) != e) {
                    all_match = false;
                    make_compatible_and_bisect(t, on_child, guard + 1);
                }
            }
            if (all_match) {
                bisect_edge_star(e, on_child);
                return;
            }
        }
        throw std::runtime_error("bisection compatibility closure did not converge");
    }

    /// Largest geodesic angle between two cell vertices.
    double max_vertex_angle(const Cell& c) const {
        double best = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) {
                const double* pa = vertex(c.v[a]);
                const double* pb = vertex(c.v[b]);
                double chord2 = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double d = pa[j] - pb[j];
                    chord2 += d * d;
                }
                const double s = std::min(1.0, std::sqrt(chord2) / (2.0 * radius));
                best = std::max(best, 2.0 * std::asin(s));
            }
        return best;
    }

    /// Axis-aligned box certified to contain the whole spherical cell.
    void cell_box(const Cell& c, double* lo, double* hi) const {
        for (int j = 0; j < n; ++j) {
            lo[j] = 1e300;
            hi[j] = -1e300;
        }
        for (int a = 0; a < n; ++a) {
            const double* p = vertex(c.v[a]);
            for (int j = 0; j < n; ++j) {
                lo[j] = std::min(lo[j], p[j]);
                hi[j] = std::max(hi[j], p[j]);
            }
        }
        // spherical bulge beyond the flat hull of the vertices
        const double s = radius * (1.0 - std::cos(std::min(max_vertex_angle(c), 1.5707963267948966)));
        for (int j = 0; j < n; ++j) {
            lo[j] -= s;
            hi[j] += s;
        }
    }
};

inline SphereComplex build_complex(int n, double radius) {
    if (n < 2 || n > 4) throw std::invalid_argument("unsupported dimension (need 2 <= n <= 4)");
    if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
    SphereComplex m;
    m.n = n;
    m.radius = radius;
    // vertices 2j = +radius*e_j, 2j+1 = -radius*e_j
    for (int j = 0; j < n; ++j) {
        for (int s = 0; s < 2; ++s) {
            double x[4] = {0, 0, 0, 0};
            x[j] = s == 0 ? radius : -radius;
            m.add_vertex(x);
        }
    }
    for (int mask = 0; mask < (1 << n); ++mask) {
        SphereComplex::Cell c;
        for (int j = 0; j < n; ++j) c.v[j] = 2 * j + ((mask >> j) & 1);
        c.tag = static_cast<std::int16_t>(n - 1);
        c.gen = 0;
        const std::int32_t id = static_cast<std::int32_t>(m.cells.size());
        m.cells.push_back(c);
        m.register_cell_edges(id);
    }
    return m;
}

enum class CellLabel : std::int8_t {
    Mixed = 0,  // sign not certified at the current depth
    Neg = 1,    // p < 0 on the whole closed cell
    Pos = 2,    // p > 0 on the whole closed cell
};

/**
 * A sphere complex with a per-cell sign classification for one polynomial.
 *
 * NEG/POS labels are certified: every vertex value is strictly of that sign
 * and the largest vertex magnitude beats diameter * (gradient bound on a box
 * containing the cell), so the sign holds on the entire closed cell. Labels
 * are inherited through refinement; a certified cell never flips.
 */
struct SignRegion {
    SphereComplex mesh;
    Polynomial poly{1};
    EvalTable f;
    std::vector<EvalTable> partials;
    std::vector<EvalTable> second_partials;  // row-major upper triangle
    double lip_global = 0.0;
    std::vector<double> vertex_value;
    std::vector<CellLabel> label;
    int depth = 0;  // completed diameter-halving levels

    std::size_t count_label(CellLabel want) const {
        std::size_t k = 0;
        for (std::size_t i = 0; i < mesh.cells.size(); ++i)
            if (mesh.cells[i].alive && label[i] == want) ++k;
        return k;
    }

    void ensure_vertex_values() {
        const std::size_t have = vertex_value.size();
        const std::size_t want = static_cast<std::size_t>(mesh.vertex_count());
        if (have == want) return;
        vertex_value.resize(want);
        for (std::size_t i = have; i < want; ++i)
            vertex_value[i] = f(mesh.vertex(static_cast<std::int32_t>(i)));
    }

    CellLabel classify(const SphereComplex::Cell& c) const {
        const int n = mesh.n;
        const double r = mesh.radius;

        // test points: the vertices plus the sphere-projected edge midpoints
        double pts[10][4];
        int npts = 0;
        for (int a = 0; a < n; ++a) {
            const double* p = mesh.vertex(c.v[a]);
            for (int j = 0; j < n; ++j) pts[npts][j] = p[j];
            ++npts;
        }
        double flat_diam = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) {
                const double* pa = mesh.vertex(c.v[a]);
                const double* pb = mesh.vertex(c.v[b]);
                double m[4], norm = 0.0, chord2 = 0.0;
                for (int j = 0; j < n; ++j) {
                    m[j] = pa[j] + pb[j];
                    norm += m[j] * m[j];
                    const double d = pa[j] - pb[j];
                    chord2 += d * d;
                }
                flat_diam = std::max(flat_diam, std::sqrt(chord2));
                norm = std::sqrt(norm);
                for (int j = 0; j < n; ++j) pts[npts][j] = r * m[j] / norm;
                ++npts;
            }

        bool all_neg = true, all_pos = true;
        double vals[10], grads[10];
        double max_abs = 0.0, min_abs = 1e300, max_grad = 0.0;
        for (int t = 0; t < npts; ++t) {
            const double v = t < n ? vertex_value[c.v[t]] : f(pts[t]);
            vals[t] = v;
            all_neg = all_neg && v < 0.0;
            all_pos = all_pos && v > 0.0;
            max_abs = std::max(max_abs, std::abs(v));
            min_abs = std::min(min_abs, std::abs(v));
            double g2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double g = partials[j](pts[t]);
                g2 += g * g;
            }
            grads[t] = std::sqrt(g2);
            max_grad = std::max(max_grad, grads[t]);
        }
        if (!all_neg && !all_pos) return CellLabel::Mixed;

        const double theta = mesh.max_vertex_angle(c);
        const double diam = r * theta;
        double lo[4], hi[4];
        mesh.cell_box(c, lo, hi);
        double grad2 = 0.0;
        for (int j = 0; j < n; ++j) {
            const double s = partials[j].sup_abs_on_box(lo, hi);
            grad2 += s * s;
        }
        double hess2 = 0.0;
        for (int a = 0, k = 0; a < n; ++a)
            for (int b = a; b < n; ++b, ++k) {
                const double s = second_partials[k].sup_abs_on_box(lo, hi);
                hess2 += (a == b ? 1.0 : 2.0) * s * s;
            }
        const double hess_bound = std::sqrt(hess2);

        // covering radius: any cell point is within this arc length of some
        // test point (Jung-type constant for the midpoint subdivision of the
        // flat simplex, plus the spherical bulge, converted to arc length)
        const double bulge = r * (1.0 - std::cos(std::min(theta, 1.5707963267948966)));
        const double cn = n == 2 ? 0.25 : n == 3 ? 0.2887 : 0.4331;
        const double chord_cov = cn * flat_diam + 2.0 * bulge;
        const double cover = 2.0 * r * std::asin(std::min(1.0, chord_cov / (2.0 * r)));

        // sound gradient bounds over the whole cell; the sampled-gradient-
        // plus-curvature form is the sharp one near degenerate zeros
        const double bound = std::min({lip_global, std::sqrt(grad2),
                                       max_grad + hess_bound * cover}) *
                             (1.0 + 1e-12);

        // rule A: the largest sample beats a Lipschitz sweep across the cell
        if (max_abs > bound * diam) return all_neg ? CellLabel::Neg : CellLabel::Pos;
        // rule B: the weakest sample survives a sweep over its covering ball
        if (min_abs > bound * cover) return all_neg ? CellLabel::Neg : CellLabel::Pos;
        // rule C: second-order version of B with the exact sampled gradient;
        // decisive near degenerate zeros where values and gradients shrink
        // together
        bool second_order = true;
        for (int t = 0; t < npts && second_order; ++t)
            second_order = std::abs(vals[t]) >
                           (grads[t] * cover + 0.5 * hess_bound * cover * cover) * (1.0 + 1e-12);
        if (second_order) return all_neg ? CellLabel::Neg : CellLabel::Pos;
        return CellLabel::Mixed;
    }

    void relabel_all() {
        ensure_vertex_values();
        label.assign(mesh.cells.size(), CellLabel::Mixed);
        parallel_for(mesh.cells.size(), [&](std::size_t i) {
            if (mesh.cells[i].alive) label[i] = classify(mesh.cells[i]);
        });
    }

    /// One depth level = n-1 bisection sweeps (halves cell diameters).
    void refine_one_level() {
        auto on_child = [this](std::int32_t parent, std::int32_t child) {
            ensure_vertex_values();
            CellLabel lab = label[parent];
            if (lab == CellLabel::Mixed) lab = classify(mesh.cells[child]);
            label.push_back(lab);
        };
        const int target_gen = (depth + 1) * (mesh.n - 1);
        for (int pass = 0; pass < 4 * (target_gen + 8); ++pass) {
            std::vector<std::int32_t> work;
            for (std::size_t i = 0; i < mesh.cells.size(); ++i)
                if (mesh.cells[i].alive && label[i] == CellLabel::Mixed &&
                    mesh.cells[i].gen < target_gen)
                    work.push_back(static_cast<std::int32_t>(i));
            if (work.empty()) {
                depth += 1;
                return;
            }
            for (std::int32_t id : work) {
                if (mesh.cells[id].alive && label[id] == CellLabel::Mixed &&
                    mesh.cells[id].gen < target_gen)
                    mesh.make_compatible_and_bisect(id, on_child);
            }
        }
        throw std::runtime_error("refinement sweep did not reach its target generation");
    }
};

inline SignRegion make_sign_region(SphereComplex complex, const Polynomial& p) {
    if (p.num_vars() != complex.n)
        throw std::invalid_argument("polynomial dimension does not match the sphere");
    SignRegion r;
    r.mesh = std::move(complex);
    r.poly = p;
    r.f = make_eval_table(p);
    const auto grad = gradient(p);
    for (const auto& dp : grad) r.partials.push_back(make_eval_table(dp));
    for (int a = 0; a < p.num_vars(); ++a)
        for (int b = a; b < p.num_vars(); ++b)
            r.second_partials.push_back(make_eval_table(grad[a].derivative(b)));
    r.lip_global = global_gradient_bound(p, r.mesh.radius);
    r.relabel_all();
    return r;
}

/// Refines until every cell is sign-certified or has reached `max_depth`
/// diameter-halving levels. MIXED cells may remain; that is a reported state.
inline SignRegion refine(SignRegion region, int max_depth) {
    if (max_depth < 0) throw std::invalid_argument("max_depth must be >= 0");
    while (region.depth < max_depth) {
        const std::size_t before = region.mesh.cells.size();
        region.refine_one_level();
        if (region.mesh.cells.size() == before && region.count_label(CellLabel::Mixed) == 0)
            break;  // nothing left to split
    }
    return region;
}

/// NEG subcomplex in OFF-style text (nOFF header outside dimension 3).
inline void write_off(const SignRegion& region, std::ostream& os) {
    const int n = region.mesh.n;
    std::vector<std::int32_t> remap(region.mesh.vertex_count(), -1);
    std::vector<std::int32_t> verts;
    std::vector<const SphereComplex::Cell*> neg;
    for (std::size_t i = 0; i < region.mesh.cells.size(); ++i) {
        if (!region.mesh.cells[i].alive || region.label[i] != CellLabel::Neg) continue;
        neg.push_back(&region.mesh.cells[i]);
        for (int a = 0; a < n; ++a) {
            const std::int32_t v = region.mesh.cells[i].v[a];
            if (remap[v] < 0) {
                remap[v] = static_cast<std::int32_t>(verts.size());
                verts.push_back(v);
            }
        }
    }
    if (n == 3) os << "OFF\n";
    else os << "nOFF\n" << n << "\n";
    os << verts.size() << " " << neg.size() << " 0\n";
    os.precision(17);
    for (std::int32_t v : verts) {
        const double* p = region.mesh.vertex(v);
        for (int j = 0; j < n; ++j) os << (j ? " " : "") << p[j];
        os << "\n";
    }
    for (const auto* c : neg) {
        os << n;
        for (int a = 0; a < n; ++a) os << " " << remap[c->v[a]];
        os << "\n";
    }
}

} // namespace gradcert
