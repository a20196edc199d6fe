#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>
#include <vector>

#include "vfil/domain/geometry.hpp"
#include "vfil/errors.hpp"
#include "vfil/vec2.hpp"

namespace vfil::metrics {

/// Minimum-cost assignment of rows to distinct columns (rows <= columns),
/// O(n^2 m) shortest augmenting paths with potentials. Returns the column of
/// every row.
inline std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
    const int n = int(cost.size());
    if (n == 0) return {};
    const int m = int(cost[0].size());
    if (m < n) throw InvalidParameters("hungarian needs rows <= columns");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> col(n, -1);
    for (int j = 1; j <= m; ++j)
        if (p[j]) col[p[j] - 1] = j - 1;
    return col;
}

struct MatchResult {
    double cost = 0.0;
    /// permutation[i]: index in b matched to a[i], or -1 when a[i] pays its
    /// distance to the boundary.
    std::vector<int> permutation;
    /// Indices of b left unmatched (paid to the boundary).
    std::vector<int> unmatched_b;
    bool padded = false;
};

namespace detail {

inline double assignment_cost(std::span<const Vec2> a, std::span<const Vec2> b, const std::vector<int>& perm) {
    double c = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) c += norm(a[i] - b[perm[i]]);
    return c;
}

}  // namespace detail

/// min over permutations sigma of sum_i |a_i - b_sigma(i)|.
inline MatchResult w11_match_deltas(std::span<const Vec2> a, std::span<const Vec2> b) {
    if (a.size() != b.size()) throw InvalidParameters("matching needs equal counts; pass a geometry to pad");
    MatchResult r;
    std::vector<std::vector<double>> c(a.size(), std::vector<double>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) c[i][j] = norm(a[i] - b[j]);
    r.permutation = hungarian(c);
    r.cost = detail::assignment_cost(a, b, r.permutation);
    return r;
}

/// Unequal counts: the surplus points of the larger set pay their distance
/// to the nearest boundary point.
inline MatchResult w11_match_deltas(std::span<const Vec2> a, std::span<const Vec2> b, const DomainGeometry& geom) {
    if (a.size() == b.size()) return w11_match_deltas(a, b);
    const bool swap = a.size() > b.size();
    const auto small = swap ? b : a;
    const auto large = swap ? a : b;
    std::vector<std::vector<double>> c(large.size(), std::vector<double>(large.size()));
    // rows: points of the larger set; columns: smaller set then dummies
    for (std::size_t i = 0; i < large.size(); ++i) {
        const double wall = std::max(0.0, geom.distance_to_boundary(large[i]));
        for (std::size_t j = 0; j < large.size(); ++j) c[i][j] = j < small.size() ? norm(large[i] - small[j]) : wall;
    }
    const auto col = hungarian(c);
    MatchResult r;
    r.padded = true;
    std::vector<int> small_to_large(small.size(), -1);
    for (std::size_t i = 0; i < large.size(); ++i) {
        r.cost += c[i][col[i]];
        if (col[i] < int(small.size())) small_to_large[col[i]] = int(i);
    }
    if (swap) {
        r.permutation.assign(a.size(), -1);
        for (std::size_t j = 0; j < b.size(); ++j) r.permutation[small_to_large[j]] = int(j);
    } else {
        r.permutation = small_to_large;
        std::vector<char> hit(b.size(), 0);
        for (int j : small_to_large) hit[j] = 1;
        for (std::size_t j = 0; j < b.size(); ++j)
            if (!hit[j]) r.unmatched_b.push_back(int(j));
    }
    return r;
}

/// Oracle: exhaustive search over all permutations (m <= 10).
inline MatchResult exhaustive_match(std::span<const Vec2> a, std::span<const Vec2> b) {
    if (a.size() != b.size() || a.size() > 10) throw InvalidParameters("exhaustive matching needs equal counts <= 10");
    std::vector<int> perm(a.size());
    std::iota(perm.begin(), perm.end(), 0);
    MatchResult best;
    best.cost = std::numeric_limits<double>::infinity();
    do {
        const double c = detail::assignment_cost(a, b, perm);
        if (c < best.cost) {
            best.cost = c;
            best.permutation = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (a.empty()) best.cost = 0.0;
    return best;
}

/// Per-cell masses on a uniform grid of cell centres.
struct GridMeasure {
    int nx = 0, ny = 0;
    double dx = 1.0, dy = 1.0;
    double x0 = 0.0, y0 = 0.0;  // centre of cell (0, 0)
    std::vector<double> mass;

    GridMeasure() = default;
    GridMeasure(int nx_, int ny_, double dx_, double dy_, double x0_, double y0_)
        : nx(nx_), ny(ny_), dx(dx_), dy(dy_), x0(x0_), y0(y0_), mass(std::size_t(nx_) * ny_, 0.0) {}

    std::size_t index(int i, int j) const { return std::size_t(i) + std::size_t(nx) * j; }
    double& operator()(int i, int j) { return mass[index(i, j)]; }
    double operator()(int i, int j) const { return mass[index(i, j)]; }
    Vec2 centre(int i, int j) const { return {x0 + i * dx, y0 + j * dy}; }
    double total() const { return std::accumulate(mass.begin(), mass.end(), 0.0); }
    GridMeasure zeros_like() const { return GridMeasure(nx, ny, dx, dy, x0, y0); }
};

/// Adds weight * delta_p split bilinearly over the four surrounding cell
/// centres (total mass and first moment preserved). Points beyond the outer
/// centres are clamped onto them.
inline void rasterize_delta(GridMeasure& mu, Vec2 p, double weight) {
    double s = (p.x - mu.x0) / mu.dx, t = (p.y - mu.y0) / mu.dy;
    s = std::clamp(s, 0.0, double(mu.nx - 1));
    t = std::clamp(t, 0.0, double(mu.ny - 1));
    const int i = std::min(int(s), mu.nx - 2), j = std::min(int(t), mu.ny - 2);
    const double fs = s - i, ft = t - j;
    mu(i, j) += weight * (1 - fs) * (1 - ft);
    mu(i + 1, j) += weight * fs * (1 - ft);
    mu(i, j + 1) += weight * (1 - fs) * ft;
    mu(i + 1, j + 1) += weight * fs * ft;
}

inline void rasterize_deltas(GridMeasure& mu, std::span<const Vec2> pts, double weight) {
    for (const Vec2& p : pts) rasterize_delta(mu, p, weight);
}

struct GridNormResult {
    double value = 0.0;       // certified optimum
    double primal = 0.0;      // transport cost
    double dual = 0.0;        // sum phi mu
    double infeasibility = 0.0;
    std::size_t augmentations = 0;
};

/// Dual W^{-1,1} norm of per-cell masses on an 8-neighbour grid graph:
/// max sum phi mu with |phi| <= 1, |phi_i - phi_j| <= edge length and phi = 0
/// on the outer ring of cells. Solved as its min-cost-flow dual by successive
/// shortest paths; the optimum is certified by the duality gap.
inline GridNormResult w11_norm_grid_report(const GridMeasure& mu) {
    const int nx = mu.nx, ny = mu.ny;
    if (nx < 3 || ny < 3) throw InvalidParameters("grid too small for the boundary ring");
    const int ix = nx - 2, iy = ny - 2;
    const int N = ix * iy, G = N;
    auto id = [&](int i, int j) { return (i - 1) + ix * (j - 1); };
    auto interior = [&](int i, int j) { return i > 0 && j > 0 && i < nx - 1 && j < ny - 1; };

    struct Arc {
        int tail, head;
        double cost, flow;
    };
    std::vector<Arc> arcs;
    std::vector<std::vector<int>> adj(N + 1);  // signed: a + 1 forward, -(a + 1) backward
    auto add = [&](int u, int v, double c) {
        const int a = int(arcs.size());
        arcs.push_back({u, v, c, 0.0});
        adj[u].push_back(a + 1);
        adj[v].push_back(-(a + 1));
    };
    const double diag = std::hypot(mu.dx, mu.dy);
    const int di[8] = {1, -1, 0, 0, 1, 1, -1, -1}, dj[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    for (int j = 1; j < ny - 1; ++j)
        for (int i = 1; i < nx - 1; ++i) {
            double ground = 1.0;
            for (int e = 0; e < 8; ++e) {
                const int a = i + di[e], b = j + dj[e];
                const double len = e < 2 ? mu.dx : e < 4 ? mu.dy : diag;
                if (interior(a, b))
                    add(id(i, j), id(a, b), len);
                else
                    ground = std::min(ground, len);
            }
            add(id(i, j), G, ground);
            add(G, id(i, j), ground);
        }

    std::vector<double> excess(N + 1, 0.0);
    double scale = 0.0;
    for (int j = 1; j < ny - 1; ++j)
        for (int i = 1; i < nx - 1; ++i) {
            excess[id(i, j)] = mu(i, j);
            excess[G] -= mu(i, j);
            scale += std::abs(mu(i, j));
        }
    GridNormResult out;
    if (scale == 0.0) return out;
    const double tol = 1e-13 * scale;

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> pot(N + 1, 0.0), dist(N + 1, inf);
    std::vector<int> pred(N + 1, 0);
    std::vector<char> done(N + 1, 0);
    std::vector<int> touched, finished;
    using Item = std::pair<double, int>;
    const std::size_t cap = 200 * std::size_t(N + 1) + 1000;
    while (true) {
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        for (int v = 0; v <= N; ++v)
            if (excess[v] > tol) {
                dist[v] = 0.0;
                pred[v] = 0;
                touched.push_back(v);
                heap.push({0.0, v});
            }
        if (heap.empty()) break;
        if (++out.augmentations > cap) throw SolverFailure("grid norm: augmentation limit reached");
        int target = -1;
        double D = 0.0;
        while (!heap.empty()) {
            const auto [d, u] = heap.top();
            heap.pop();
            if (done[u] || d > dist[u]) continue;
            done[u] = 1;
            finished.push_back(u);
            if (excess[u] < -tol) {
                target = u;
                D = d;
                break;
            }
            for (int s : adj[u]) {
                const Arc& a = arcs[std::abs(s) - 1];
                int v;
                double rc;
                if (s > 0) {
                    v = a.head;
                    rc = a.cost + pot[u] - pot[v];
                } else {
                    if (a.flow <= 0.0) continue;
                    v = a.tail;
                    rc = -a.cost + pot[u] - pot[v];
                }
                if (done[v]) continue;
                const double nd = d + std::max(0.0, rc);
                if (nd < dist[v]) {
                    if (dist[v] == inf) touched.push_back(v);
                    dist[v] = nd;
                    pred[v] = s;
                    heap.push({nd, v});
                }
            }
        }
        if (target < 0) throw SolverFailure("grid norm: unreachable deficit");
        for (int v : finished) pot[v] += dist[v] - D;

        double delta = -excess[target];
        int v = target;
        while (pred[v] != 0) {
            const Arc& a = arcs[std::abs(pred[v]) - 1];
            if (pred[v] < 0) delta = std::min(delta, a.flow);
            v = pred[v] > 0 ? a.tail : a.head;
        }
        delta = std::min(delta, excess[v]);
        const int source = v;
        v = target;
        while (pred[v] != 0) {
            Arc& a = arcs[std::abs(pred[v]) - 1];
            if (pred[v] > 0) {
                a.flow += delta;
                v = a.tail;
            } else {
                a.flow = std::max(0.0, a.flow - delta);
                v = a.head;
            }
        }
        excess[source] -= delta;
        excess[target] += delta;
        for (int t : touched) {
            dist[t] = inf;
            done[t] = 0;
        }
        touched.clear();
        finished.clear();
    }

    for (const Arc& a : arcs) out.primal += a.cost * a.flow;
    std::vector<double> phi(N + 1);
    for (int u = 0; u <= N; ++u) phi[u] = pot[G] - pot[u];
    for (const Arc& a : arcs) out.infeasibility = std::max(out.infeasibility, phi[a.tail] - phi[a.head] - a.cost);
    for (int j = 1; j < ny - 1; ++j)
        for (int i = 1; i < nx - 1; ++i) out.dual += phi[id(i, j)] * mu(i, j);
    const double gap = out.primal - out.dual;
    const double bound = 1e-8 * std::max(scale, out.primal);
    if (std::abs(gap) > bound || out.infeasibility > 1e-9)
        throw SolverFailure("grid norm: duality gap " + std::to_string(gap) + ", infeasibility " +
                            std::to_string(out.infeasibility));
    out.value = out.primal;
    return out;
}

inline double w11_norm_grid(const GridMeasure& mu) { return w11_norm_grid_report(mu).value; }

}  // namespace vfil::metrics
